# ou.py

'''
ou.py

Purpose: Ornstein-Uhlenbeck analytics and sampling
- Stationary covariance R (A R + R A^T = -B B^T), autocovariance e^{tA} R, power spectral
  densities of linear observables, the limit PSD of the generalized excitation xi, and a
  Monte Carlo estimate of the PSD of its mollified version xi_delta.
- Paths are sampled with the exact Gaussian transition, never Euler-Maruyama. The Wiener
  increments that drive each step are sampled jointly with it, so other processes driven by
  the same W (the pendulum angle, the white part of xi) can use them.
'''

from dataclasses import dataclass
from enum import Enum
import math

import numpy as np
import scipy.linalg
import scipy.signal

from . import utils
from .errors import DimensionMismatch, InvalidParam, KernelTooNarrow
from .linalg import cosineTransform, requireHurwitz, resolvent, solveLyapunov, spectralAbscissa
from .model import GeneralModel, OuSystem

logger = utils.getLogger(__name__)

#Welch segment length never drops below this many samples
MIN_SEGMENT = 1024

@dataclass(frozen=True, eq=False)
class OuPath :
    '''Sampled path: uniform time grid, states (n_times x d), and the master seed used.'''
    times: np.ndarray
    states: np.ndarray
    seedUsed: int

class KernelKind (Enum):
    BOX = "box"
    TRIANGLE = "triangle"

@dataclass(frozen=True)
class MollifierKernel :
    '''Probability kernel psi_delta supported in [-delta, delta].'''
    kind: KernelKind
    delta: float

    def __post_init__ (self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", KernelKind(self.kind))
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise InvalidParam(f"kernel width delta must be positive, got {self.delta}")

    def density (self, t):
        '''psi_delta(t), integrates to 1.'''
        t = np.abs(np.asarray(t, dtype=float))
        inside = t <= self.delta
        if self.kind is KernelKind.BOX:
            return np.where(inside, 0.5 / self.delta, 0.0)
        return np.where(inside, (1.0 - t / self.delta) / self.delta, 0.0)

    def gridWeights (self, dt):
        '''
        Kernel sampled on the grid j*dt, |j| <= delta/dt, renormalized so sum(w) * dt = 1.
        Inputs: dt (float)
        Outputs: numpy.ndarray of odd length
        '''
        if self.delta <= 2.0 * dt:
            raise KernelTooNarrow(f"kernel width {self.delta} must exceed 2*dt = {2.0 * dt}")
        half = int(math.floor(self.delta / dt + 1e-9))
        w = self.density(np.arange(-half, half + 1) * dt)
        return w / (w.sum() * dt)

@dataclass(frozen=True)
class PsdEstimate :
    '''Monte Carlo PSD estimate at one frequency.'''
    omega: float
    value: float
    stderr: float
    nTraj: int
    delta: float
    kernel: str


def stationaryCovariance (ou: OuSystem):
    '''
    Function: stationaryCovariance
    Purpose: Covariance R of the stationary law of v, the solution of A R + R A^T = -B B^T
    Inputs: ou (OuSystem)
    Outputs: numpy.ndarray (d x d)
    '''
    return solveLyapunov(ou.A, ou.B @ ou.B.T)

def autocovariance (ou: OuSystem, t):
    '''
    Stationary autocovariance E[v(t) v(0)^T] = e^{tA} R for t >= 0.
    Inputs: ou (OuSystem), t (float >= 0)
    Outputs: numpy.ndarray (d x d)
    '''
    if t < 0:
        raise InvalidParam(f"autocovariance lag must be >= 0, got {t}")
    R = stationaryCovariance(ou)
    return scipy.linalg.expm(t * ou.A) @ R

def observablePsd (ou: OuSystem, alpha, omega):
    '''
    Function: observablePsd
    Purpose: PSD of the scalar observable V = <alpha, v>
    - S_V(w) = (1/pi) int_0^inf E[V(t) V(0)] cos(wt) dt = <alpha, S_A(w) R alpha>.
    Inputs: ou (OuSystem), alpha (d-vector), omega (float)
    Outputs: float
    '''
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (ou.dim,):
        raise DimensionMismatch(f"alpha must have length {ou.dim}, got shape {alpha.shape}")
    S = cosineTransform(ou.A, omega)
    R = stationaryCovariance(ou)
    return float(alpha @ S @ R @ alpha)

def xiPsdLimit (model: GeneralModel, omega):
    '''
    Function: xiPsdLimit
    Purpose: delta -> 0 limit of the PSD of the mollified excitation
    - S_xi(w) = <a, S_A(w) R a> + <a, S_A(w) B gamma> + |gamma|^2 / (2 pi); independent of the kernel.
    - Evaluated as (1/2pi) |a^T (iw - A)^{-1} B + gamma^T|^2, the same quantity without the
      cancellation between the white and colored parts at low frequency.
    Inputs: model (GeneralModel), omega (float)
    Outputs: float
    '''
    requireHurwitz(model.ou.A)
    if not np.isfinite(omega):
        raise InvalidParam(f"omega must be finite, got {omega}")
    transfer = -(model.exc.a @ resolvent(model.ou.A, omega) @ model.ou.B) + model.exc.gamma
    return float(np.sum(np.abs(transfer) ** 2) / (2.0 * np.pi))

def xiPsdLimitSplit (model: GeneralModel, omega):
    '''Colored, cross and white terms of the limit PSD summed separately.'''
    a = model.exc.a
    gamma = model.exc.gamma
    S = cosineTransform(model.ou.A, omega)
    R = stationaryCovariance(model.ou)
    colored = a @ S @ R @ a
    cross = a @ S @ (model.ou.B @ gamma)
    white = gamma @ gamma / (2.0 * np.pi)
    return float(colored + cross + white)


class OuStepper :
    '''
    Exact one-step transition of the OU process on a grid of width dt, sampled jointly with the
    Wiener increment dW of the same step:
        v_{k+1} = Phi v_k + K dW_k + L z_k,   dW_k ~ N(0, dt I_m), z_k ~ N(0, I_d)
    where Phi = e^{dt A}, K dt = Cov(w_k, dW_k) = (int_0^dt e^{uA} du) B, and
    L L^T = Q_dt - K K^T dt with Q_dt = R - Phi R Phi^T.
    '''

    def __init__ (self, ou: OuSystem, dt):
        requireHurwitz(ou.A)
        if not dt > 0:
            raise InvalidParam(f"dt must be positive, got {dt}")
        d = ou.dim
        self.ou = ou
        self.dt = float(dt)
        self.R = stationaryCovariance(ou)

        #Van Loan block exponential: top-right block is int_0^dt e^{uA} du
        block = np.zeros((2 * d, 2 * d))
        block[:d, :d] = ou.A
        block[:d, d:] = np.eye(d)
        E = scipy.linalg.expm(block * self.dt)
        self.Phi = E[:d, :d]
        self.K = (E[:d, d:] @ ou.B) / self.dt

        Qdt = self.R - self.Phi @ self.R @ self.Phi.T
        residual = Qdt - (self.K @ self.K.T) * self.dt
        self.L = _psdFactor(0.5 * (residual + residual.T))
        self.stationaryFactor = _psdFactor(self.R)

    def step (self, v, dW, z):
        '''Advance a batch of states, v (n x d), dW (n x m), z (n x d).'''
        #einsum keeps each row's arithmetic independent of the batch size
        return (np.einsum("ij,nj->ni", self.Phi, v) + np.einsum("ij,nj->ni", self.K, dW)
                + np.einsum("ij,nj->ni", self.L, z))

    def stationaryDraw (self, rng, n):
        '''n independent draws from N(0, R).'''
        return rng.standard_normal((n, self.ou.dim)) @ self.stationaryFactor.T

def _psdFactor (S):
    #symmetric square-root factor that tolerates tiny negative eigenvalues
    vals, vecs = scipy.linalg.eigh(S)
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def sampleOuWithIncrements (ou: OuSystem, dt, nSteps, rng, initial="stationary"):
    '''
    Function: sampleOuWithIncrements
    Purpose: One exact-transition path together with the Wiener increments that drove it
    Inputs: ou (OuSystem), dt (float), nSteps (int), rng (numpy Generator),
            initial ("stationary" or d-vector)
    Outputs: (states (nSteps+1 x d), dW (nSteps x m))
    '''
    stepper = OuStepper(ou, dt)
    if isinstance(initial, str):
        if initial != "stationary":
            raise InvalidParam(f"initial must be 'stationary' or a vector, got '{initial}'")
        v0 = stepper.stationaryDraw(rng, 1)[0]
    else:
        v0 = np.asarray(initial, dtype=float)
        if v0.shape != (ou.dim,):
            raise DimensionMismatch(f"initial state must have length {ou.dim}")

    dW = rng.standard_normal((nSteps, ou.noiseDim)) * math.sqrt(dt)
    z = rng.standard_normal((nSteps, ou.dim))
    forcing = dW @ stepper.K.T + z @ stepper.L.T

    states = np.empty((nSteps + 1, ou.dim))
    states[0] = v0
    Phi = stepper.Phi
    for k in range(nSteps):
        states[k + 1] = Phi @ states[k] + forcing[k]
    return states, dW

def sampleOu (ou: OuSystem, scheme, initial="stationary"):
    '''
    Function: sampleOu
    Purpose: Sample one OU path on [0, tFinal]; deterministic given scheme.seed
    Inputs: ou (OuSystem), scheme (SimScheme), initial ("stationary" or d-vector)
    Outputs: OuPath
    '''
    rng = utils.substream(scheme.seed, 0, "ou-path")
    states, _ = sampleOuWithIncrements(ou, scheme.dt, scheme.nSteps, rng, initial)
    times = np.arange(scheme.nSteps + 1) * scheme.dt
    return OuPath(times=times, states=states, seedUsed=int(scheme.seed))

def batchMeanCovariance (states, nBatches=20):
    '''
    Function: batchMeanCovariance
    Purpose: Time-average of v v^T along a path with a batch-means standard error per entry
    Inputs: states (n x d), nBatches (int)
    Outputs: (cov (d x d), stderr (d x d))
    '''
    states = np.asarray(states, dtype=float)
    usable = (states.shape[0] // nBatches) * nBatches
    outer = np.einsum("ni,nj->nij", states[:usable], states[:usable])
    batches = outer.reshape(nBatches, -1, states.shape[1], states.shape[1]).mean(axis=1)
    cov = batches.mean(axis=0)
    stderr = batches.std(axis=0, ddof=1) / math.sqrt(nBatches)
    return cov, stderr


def welchSegmentLength (ou: OuSystem, dt):
    '''max(1024, 8 / (dt |spectral abscissa|)) samples.'''
    abscissa = abs(spectralAbscissa(ou.A))
    return max(MIN_SEGMENT, int(math.ceil(8.0 / (dt * abscissa))))

def mollifiedExcitation (model: GeneralModel, states, dW, dt, kernel: MollifierKernel):
    '''
    Function: mollifiedExcitation
    Purpose: xi_delta on the grid from a path and its Wiener increments
    - Each grid cell carries the measure <a, v_j> dt + <gamma, dW_j>; xi_delta(t_k) is its
      discrete convolution with psi_delta. Only fully covered points are kept.
    Inputs: model, states (n+1 x d), dW (n x m), dt, kernel
    Outputs: numpy.ndarray
    '''
    weights = kernel.gridWeights(dt)
    cells = states[:-1] @ model.exc.a * dt + dW @ model.exc.gamma
    return scipy.signal.fftconvolve(cells, weights, mode="valid")

def xiPsdMollified (model: GeneralModel, omega, kernel: MollifierKernel, scheme):
    '''
    Function: xiPsdMollified
    Purpose: Monte Carlo estimate of the PSD of xi_delta at frequency omega
    - Every trajectory gets its own substream, simulates a stationary v path with its Wiener
      increments, forms xi_delta and runs a Welch averaged periodogram (Hann window, 50% overlap).
    - scipy returns the one-sided density P(f) in the variable f = w / (2 pi); with the
      convention S(w) = (1/2pi) int E[X(t)X(0)] e^{-iwt} dt this gives S(w) = P(w / 2pi) / (4 pi).
    Inputs: model (GeneralModel), omega (float), kernel (MollifierKernel), scheme (SimScheme)
    Outputs: PsdEstimate
    '''
    model.requireValid()
    dt = scheme.dt
    kernel.gridWeights(dt)
    nperseg = welchSegmentLength(model.ou, dt)
    burnSteps = scheme.burnSteps

    def oneTrajectory (index):
        rng = utils.substream(scheme.seed, index, "xi-psd")
        states, dW = sampleOuWithIncrements(model.ou, dt, scheme.nSteps, rng)
        xi = mollifiedExcitation(model, states, dW, dt, kernel)[burnSteps:]
        seg = min(nperseg, xi.size)
        if seg < nperseg:
            logger.warning("Welch segment clipped to %d samples (horizon too short)", seg)
        freqs, dens = scipy.signal.welch(xi, fs=1.0 / dt, window="hann", nperseg=seg,
                                         noverlap=seg // 2, scaling="density")
        return float(np.interp(omega / (2.0 * np.pi), freqs, dens)) / (4.0 * np.pi)

    values = np.array(utils.mapOrdered(oneTrajectory, range(scheme.nTraj)))
    stderr = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    logger.debug("mollified PSD at omega=%g, delta=%g (%s): %s", omega, kernel.delta, kernel.kind.value, values)
    return PsdEstimate(omega=float(omega), value=float(values.mean()), stderr=stderr,
                       nTraj=int(values.size), delta=kernel.delta, kernel=kernel.kind.value)
