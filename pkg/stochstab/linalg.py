# linalg.py

'''
linalg.py

Purpose: Small dense matrix kernel used by every other module.
- Solves the continuous Lyapunov equation A R + R A^T = -M, evaluates the matrix cosine
  transform S_A(w) = (1/pi) int_0^inf e^{tA} cos(wt) dt through the complex resolvent, and checks
  that an (A, B) pair is a valid Ornstein-Uhlenbeck drift/diffusion pair.
- Matrices here are at most 6x6, so everything is plain dense numpy/scipy.
'''

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, InvalidParam, LyapunovSolveFailed, NonHurwitz, SingularResolvent

#Relative singular-value tolerance for the controllability rank
RANK_TOL = 1e-10

@dataclass(frozen=True)
class ValidationReport :
    '''Outcome of validateOuSystem: spectral abscissa, controllability rank, and the verdict.'''
    spectralAbscissa: float
    controllabilityRank: int
    ok: bool


def asSquare (M, name="matrix"):
    '''
    Function: asSquare
    Purpose: Convert input to a float 2-d square array and check the entries are finite
    Inputs: M (array-like), name (str) used in error messages
    Outputs: numpy.ndarray (d, d)
    '''
    arr = np.atleast_2d(np.asarray(M, dtype=float))
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParam(f"{name} has non-finite entries")
    return arr

def asRect (M, rows, name="matrix"):
    '''
    Convert input to a float 2-d array with the given number of rows (a 1-d input is a column).
    Inputs: M (array-like), rows (int), name (str)
    Outputs: numpy.ndarray (rows, cols)
    '''
    arr = np.asarray(M, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] != rows or arr.shape[1] == 0:
        raise DimensionMismatch(f"{name} must have {rows} rows, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParam(f"{name} has non-finite entries")
    return arr

def spectralAbscissa (A):
    '''Largest real part of the eigenvalues of A.'''
    return float(np.max(np.linalg.eigvals(asSquare(A, "A")).real))

def requireHurwitz (A):
    '''
    Raise NonHurwitz unless every eigenvalue of A has strictly negative real part.
    Inputs: A (array-like)
    Outputs: numpy.ndarray A as float array
    '''
    A = asSquare(A, "A")
    abscissa = spectralAbscissa(A)
    if abscissa >= 0.0:
        raise NonHurwitz(f"drift matrix is not Hurwitz: spectral abscissa {abscissa:.6g} >= 0")
    return A


def solveLyapunov (A, M):
    '''
    Function: solveLyapunov
    Purpose: Solve A R + R A^T = -M for R
    - Written as the d^2 x d^2 Kronecker system (I kron A + A kron I) vec(R) = -vec(M),
      with column-major vec. The result is symmetrized; the residual is checked.
    Inputs: A (d x d, Hurwitz), M (d x d, symmetric)
    Outputs: numpy.ndarray R (d x d)
    '''
    A = requireHurwitz(A)
    M = asSquare(M, "M")
    d = A.shape[0]
    if M.shape != A.shape:
        raise DimensionMismatch(f"A is {A.shape} but M is {M.shape}")

    eye = np.eye(d)
    kron = np.kron(eye, A) + np.kron(A, eye)
    vecR = scipy.linalg.solve(kron, -M.reshape(-1, order="F"))
    R = vecR.reshape((d, d), order="F")
    R = 0.5 * (R + R.T)

    residual = np.max(np.abs(A @ R + R @ A.T + M))
    if residual > 1e-10 * (1.0 + np.max(np.abs(M))):
        raise LyapunovSolveFailed(f"Lyapunov solve residual {residual:.3g} above tolerance")
    return R


def resolvent (A, omega):
    '''
    Complex resolvent (A - i w I)^{-1} via an LU factorization in complex arithmetic.
    Inputs: A (d x d), omega (float)
    Outputs: numpy.ndarray complex (d x d)
    '''
    A = asSquare(A, "A")
    shifted = A.astype(complex) - 1j * float(omega) * np.eye(A.shape[0])
    lu, piv = scipy.linalg.lu_factor(shifted, check_finite=False)
    if np.any(np.abs(np.diag(lu)) == 0.0):
        raise SingularResolvent(f"A - i*{omega} I is singular")
    return scipy.linalg.lu_solve((lu, piv), np.eye(A.shape[0], dtype=complex))

def cosineTransform (A, omega):
    '''
    Function: cosineTransform
    Purpose: Matrix cosine transform S_A(w) = (1/pi) int_0^inf e^{tA} cos(wt) dt
    - Closed form -(1/pi) Re((A - i w I)^{-1}); even in w.
    Inputs: A (d x d, Hurwitz), omega (float)
    Outputs: numpy.ndarray (d x d)
    '''
    A = requireHurwitz(A)
    if not np.isfinite(omega):
        raise InvalidParam(f"omega must be finite, got {omega}")
    return -np.real(resolvent(A, omega)) / np.pi


def controllabilityRank (A, B):
    '''
    Rank of [B, AB, ..., A^{d-1}B] from its singular values, tolerance RANK_TOL relative to the largest.
    Inputs: A (d x d), B (d x m)
    Outputs: int
    '''
    A = asSquare(A, "A")
    B = asRect(B, A.shape[0], "B")
    blocks = [B]
    for _ in range(A.shape[0] - 1):
        blocks.append(A @ blocks[-1])
    sv = scipy.linalg.svdvals(np.hstack(blocks))
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > RANK_TOL * sv[0]))

def validateOuSystem (A, B):
    '''
    Function: validateOuSystem
    Purpose: Checks the drift is Hurwitz and (A, B) is a controllable pair
    Inputs: A (d x d), B (d x m)
    Outputs: ValidationReport
    '''
    A = asSquare(A, "A")
    B = asRect(B, A.shape[0], "B")
    abscissa = spectralAbscissa(A)
    rank = controllabilityRank(A, B)
    return ValidationReport(
        spectralAbscissa=abscissa,
        controllabilityRank=rank,
        ok=bool(abscissa < 0.0 and rank == A.shape[0]),
    )
