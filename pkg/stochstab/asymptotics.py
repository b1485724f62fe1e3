# asymptotics.py

'''
asymptotics.py

Purpose: Closed-form side of the toolkit
- lambda2(omega) by three routes (resolvent/cosine transform, adjoint vector b, block closed form),
  the small-noise expansion of lambda(eps) and its combined noise-and-damping variant.
- Critical noise intensities nu_c for the white-noise, Mathieu and periodically forced systems,
  boundary curves over kappa and the location of the 2:1 resonance minimum.
- Numeric self-checks of the adjoint expansion (F1 residual, stationary bilinear averages) and a
  Floquet cross-check of the periodic boundaries.
'''

from dataclasses import dataclass
from enum import Enum
from typing import Optional
import math

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.optimize

from . import utils
from .errors import FrequencyMismatch, InvalidParam, InvalidQuery, NotBlockModel, SingularResolvent
from .linalg import asSquare, requireHurwitz
from .model import GeneralModel, OuSystem, ScaledParams
from .ou import stationaryCovariance, xiPsdLimit

logger = utils.getLogger(__name__)

#Relative tolerance when checking omega = 2 kappa_d for the adjoint route
FREQ_RTOL = 1e-9

class Lambda2Method (Enum):
    RESOLVENT = "resolvent"
    ADJOINT = "adjoint"
    BLOCK = "block_closed_form"

class Scaling (Enum):
    NOISE_ONLY = "noise_only"
    NOISE_AND_DAMPING = "noise_and_damping"

class BoundaryKind (Enum):
    NOISE = "noise"
    MATHIEU = "mathieu"
    PERIODIC = "periodic"

@dataclass(frozen=True)
class BoundaryQuery :
    '''Where to evaluate a stability boundary; omega and eps are needed for mathieu/periodic only.'''
    kind: BoundaryKind
    kappa: float
    omega: Optional[float] = None
    eps: Optional[float] = None

    def __post_init__ (self):
        try:
            object.__setattr__(self, "kind", BoundaryKind(self.kind))
        except ValueError:
            raise InvalidQuery(f"unknown boundary kind '{self.kind}' (expected noise, mathieu or periodic)")
        problems = []
        if not _positive(self.kappa):
            problems.append(f"kappa must be > 0, got {self.kappa!r}")
        if self.kind is not BoundaryKind.NOISE:
            for name in ("omega", "eps"):
                value = getattr(self, name)
                if value is None:
                    problems.append(f"{name} is required for a {self.kind.value} boundary")
                elif not _positive(value):
                    problems.append(f"{name} must be > 0, got {value!r}")
        if problems:
            raise InvalidQuery("; ".join(problems))

@dataclass(frozen=True, eq=False)
class AdjointVectorB :
    '''b = -(A^T - 2 i kappa_d I)^{-1} a, used with the bilinear pairing <b, x> = sum b_j x_j.'''
    b: np.ndarray

def _positive (x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) and x > 0


def adjointB (model: GeneralModel):
    '''
    Function: adjointB
    Purpose: Solve (A^T - 2 i kappa_d I) b = -a
    - Re b satisfies <Re b, x> = pi <a, S_A(2 kappa_d) x> for every x.
    Inputs: model (GeneralModel), Hurwitz and underdamped
    Outputs: AdjointVectorB
    '''
    A = requireHurwitz(model.ou.A)
    kd = model.kappaD
    shifted = A.T.astype(complex) - 2j * kd * np.eye(A.shape[0])
    a = model.exc.a.astype(complex)
    b = -scipy.linalg.solve(shifted, a)
    residual = np.max(np.abs(shifted @ b + a)) if a.size else 0.0
    if residual > 1e-12 * (1.0 + np.max(np.abs(a))):
        raise SingularResolvent(f"adjoint solve residual {residual:.3g} above tolerance")
    return AdjointVectorB(b=b)

def f1Residual (model: GeneralModel, v, psi):
    '''
    Function: f1Residual
    Purpose: A0 F1 - Q1 at (v, psi), where F1 = (1/2kd) Re(i e^{2 i psi} <b, v>) and
             Q1 = (1/2kd) <a, v> sin 2psi. F1 is linear in v, so
             A0 F1 = Re[(i e^{2 i psi} / 2kd) (<b, A v> - 2 i kd <b, v>)].
    Inputs: model (GeneralModel), v (d-vector), psi (float)
    Outputs: float, zero up to rounding
    '''
    v = np.asarray(v, dtype=float)
    if v.shape != (model.ou.dim,):
        raise InvalidParam(f"v must have length {model.ou.dim}, got shape {v.shape}")
    kd = model.kappaD
    b = adjointB(model).b
    rot = 1j * np.exp(2j * psi) / (2.0 * kd)
    a0f1 = np.real(rot * (b @ (model.ou.A @ v) - 2j * kd * (b @ v)))
    q1 = (model.exc.a @ v) * math.sin(2.0 * psi) / (2.0 * kd)
    return float(a0f1 - q1)

def bilinearAverage (ou: OuSystem, C):
    '''
    Stationary average of C(v, v) = v^T C v: sum_jk C_jk R_jk.
    Inputs: ou (OuSystem), C (d x d)
    Outputs: float
    '''
    C = asSquare(C, "C")
    R = stationaryCovariance(ou)
    if C.shape != R.shape:
        raise InvalidParam(f"C must be {R.shape}, got {C.shape}")
    return float(np.sum(C * R))

def bilinearAverageQuadrature (ou: OuSystem, C):
    '''
    Function: bilinearAverageQuadrature
    Purpose: Same average as the time integral sum_l int_0^inf C(e^{tA} B e_l, e^{tA} B e_l) dt
    Inputs: ou (OuSystem), C (d x d)
    Outputs: float
    '''
    A = requireHurwitz(ou.A)
    C = asSquare(C, "C")

    def integrand (t):
        cols = scipy.linalg.expm(t * A) @ ou.B
        return float(np.einsum("il,ij,jl->", cols, C, cols))

    value, _ = scipy.integrate.quad(integrand, 0.0, np.inf, epsabs=1e-12, epsrel=1e-10, limit=500)
    return float(value)


def lambda2 (model: GeneralModel, omega, method=Lambda2Method.RESOLVENT):
    '''
    Function: lambda2
    Purpose: Second-order coefficient lambda2(omega) of the Lyapunov exponent
    - resolvent: (pi / w^2) (<a, S_A(w) R a> + <a, S_A(w) B gamma> + |gamma|^2 / (2 pi))
    - adjoint: (1 / 4kd^2) (<Re b, R a> + <Re b, B gamma> + |gamma|^2 / 2), only at w = 2 kappa_d
    - block_closed_form: w^2 nu^2 / (2 [(chi^2 - w^2)^2 + 4 zeta1^2 w^2]), block embeddings only
    Inputs: model (GeneralModel), omega (float > 0), method (Lambda2Method or its string value)
    Outputs: float
    '''
    method = Lambda2Method(method)
    if not _positive(omega):
        raise InvalidParam(f"omega must be > 0, got {omega!r}")
    requireHurwitz(model.ou.A)

    if method is Lambda2Method.RESOLVENT:
        return math.pi * xiPsdLimit(model, omega) / omega ** 2

    if method is Lambda2Method.ADJOINT:
        kd = model.kappaD
        if not math.isclose(omega, 2.0 * kd, rel_tol=FREQ_RTOL):
            raise FrequencyMismatch(f"adjoint route computes lambda2 at 2*kappa_d = {2.0 * kd:.12g}, got omega={omega}")
        reB = np.real(adjointB(model).b)
        R = stationaryCovariance(model.ou)
        gamma = model.exc.gamma
        total = reB @ R @ model.exc.a + reB @ (model.ou.B @ gamma) + 0.5 * (gamma @ gamma)
        return float(total / (4.0 * kd * kd))

    if not model.isBlock:
        raise NotBlockModel("block_closed_form needs a model built by blockEmbedding")
    return blockLambda2(model.block, omega)

def blockLambda2 (params: ScaledParams, omega):
    '''w^2 nu^2 / (2 [(chi^2 - w^2)^2 + 4 zeta1^2 w^2]); the PSD of the block velocity times pi.'''
    w2 = omega * omega
    denom = (params.chi ** 2 - w2) ** 2 + 4.0 * params.zeta1 ** 2 * w2
    if denom == 0.0:
        raise SingularResolvent(f"undamped block resonance at omega={omega}")
    return w2 * params.nu ** 2 / (2.0 * denom)

def lambda2Sweep (model: GeneralModel, omegas):
    '''
    Function: lambda2Sweep
    Purpose: Tabulate lambda2 over a frequency grid
    Inputs: model (GeneralModel), omegas (iterable of float > 0)
    Outputs: list of rows (omega, resolvent) or (omega, resolvent, block) for block embeddings
    '''
    rows = []
    for omega in omegas:
        row = [float(omega), lambda2(model, omega, Lambda2Method.RESOLVENT)]
        if model.isBlock:
            row.append(lambda2(model, omega, Lambda2Method.BLOCK))
        rows.append(tuple(row))
    logger.info("lambda2 sweep over %d frequencies", len(rows))
    return rows


def expansion (model: GeneralModel, eps, scaling=Scaling.NOISE_ONLY):
    '''
    Function: expansion
    Purpose: Small-noise prediction of lambda(eps)
    - noise_only: -zeta2 + eps^2 lambda2(2 kappa_d)
    - noise_and_damping (nu -> eps nu, zeta2 -> eps^2 zeta2): eps^2 (-zeta2 + lambda2(2 kappa))
    Inputs: model (GeneralModel), eps (float), scaling (Scaling or its string value)
    Outputs: float
    '''
    scaling = Scaling(scaling)
    if not math.isfinite(eps):
        raise InvalidParam(f"eps must be finite, got {eps}")
    if scaling is Scaling.NOISE_ONLY:
        return -model.zeta2 + eps * eps * lambda2(model, 2.0 * model.kappaD)
    return eps * eps * (-model.zeta2 + lambda2(model, 2.0 * model.kappa))


def stabilityBoundary (q: BoundaryQuery, params: ScaledParams):
    '''
    Function: stabilityBoundary
    Purpose: Critical noise intensity nu_c where the first nontrivial term of lambda changes sign
    - noise: nu_c = sqrt(zeta2 [(chi^2 - 4 kappa^2)^2 + 16 zeta1^2 kappa^2] / (2 kappa^2))
    - mathieu: nu_c = sqrt(16 zeta2^2 + (w^2 / eps^2)(4 kappa^2 / w^2 - 1)^2)
    - periodic: the mathieu value scaled by sqrt((chi^2 - w^2)^2 + 4 zeta1^2 w^2) / w^2
    Inputs: q (BoundaryQuery), params (ScaledParams: zeta1, zeta2, chi are used)
    Outputs: float >= 0
    '''
    kappa = q.kappa
    if q.kind is BoundaryKind.NOISE:
        k2 = kappa * kappa
        inner = (params.chi ** 2 - 4.0 * k2) ** 2 + 16.0 * params.zeta1 ** 2 * k2
        return math.sqrt(params.zeta2 * inner / (2.0 * k2))

    w2 = q.omega * q.omega
    mathieu = math.sqrt(16.0 * params.zeta2 ** 2 + (w2 / q.eps ** 2) * (4.0 * kappa * kappa / w2 - 1.0) ** 2)
    if q.kind is BoundaryKind.MATHIEU:
        return mathieu
    response = (params.chi ** 2 - w2) ** 2 + 4.0 * params.zeta1 ** 2 * w2
    return math.sqrt(response) * mathieu / w2

def boundaryCurve (kind, params: ScaledParams, kappas, omega=None, eps=None):
    '''
    nu_c over a kappa grid.
    Inputs: kind (BoundaryKind or str), params (ScaledParams), kappas (iterable), omega/eps for mathieu/periodic
    Outputs: list of (kappa, nu_c)
    '''
    kind = BoundaryKind(kind)
    return [(float(k), stabilityBoundary(BoundaryQuery(kind, float(k), omega, eps), params)) for k in kappas]

def noiseBoundaryMinimum (params: ScaledParams, gridSize=64):
    '''
    Function: noiseBoundaryMinimum
    Purpose: Locate the minimum of the noise boundary over kappa by golden-section search
    - A coarse grid over (0, 2 chi] gives the bracket; the minimum sits at kappa = chi/2 with
      value sqrt(8 zeta1^2 zeta2).
    Inputs: params (ScaledParams), gridSize (int)
    Outputs: (kappa at the minimum, nu_c there)
    '''
    def nuC (kappa):
        return stabilityBoundary(BoundaryQuery(BoundaryKind.NOISE, kappa), params)

    grid = np.linspace(2.0 * params.chi / gridSize, 2.0 * params.chi, gridSize)
    values = np.array([nuC(k) for k in grid])
    i = int(np.clip(np.argmin(values), 1, gridSize - 2))
    res = scipy.optimize.minimize_scalar(nuC, bracket=(grid[i - 1], grid[i], grid[i + 1]),
                                         method="golden", options={"xtol": 1e-12})
    logger.debug("noise boundary minimum at kappa=%.12g, nu_c=%.12g", res.x, res.fun)
    return float(res.x), float(res.fun)


def floquetExponent (kappa, zeta2, eps, amplitude, omega):
    '''
    Function: floquetExponent
    Purpose: Largest Floquet exponent of phi'' + 2 eps zeta2 phi' + (kappa^2 - eps amplitude cos wt) phi = 0
    - Integrates the fundamental matrix over one period with solve_ivp (rtol 1e-10) and returns
      log |largest multiplier| / period; positive means the zero solution is unstable.
    Inputs: kappa, zeta2, eps, amplitude (forcing nu for Mathieu), omega (> 0)
    Outputs: float
    '''
    if not _positive(omega):
        raise InvalidParam(f"omega must be > 0, got {omega!r}")
    period = 2.0 * math.pi / omega

    def rhs (t, y):
        phi = y.reshape(2, 2)
        stiffness = kappa * kappa - eps * amplitude * math.cos(omega * t)
        A = np.array([[0.0, 1.0], [-stiffness, -2.0 * eps * zeta2]])
        return (A @ phi).ravel()

    sol = scipy.integrate.solve_ivp(rhs, (0.0, period), np.eye(2).ravel(), method="DOP853",
                                    rtol=1e-10, atol=1e-12)
    if not sol.success:
        raise SingularResolvent(f"monodromy integration failed: {sol.message}")
    monodromy = sol.y[:, -1].reshape(2, 2)
    multipliers = np.linalg.eigvals(monodromy)
    return float(math.log(np.max(np.abs(multipliers))) / period)

def periodicForcingAmplitude (params: ScaledParams, omega):
    '''Amplitude of the block acceleration under unit-eps forcing nu cos wt: w^2 nu / sqrt((chi^2 - w^2)^2 + 4 zeta1^2 w^2).'''
    w2 = omega * omega
    return w2 * params.nu / math.sqrt((params.chi ** 2 - w2) ** 2 + 4.0 * params.zeta1 ** 2 * w2)
