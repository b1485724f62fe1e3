# nonlinear.py

'''
nonlinear.py

Purpose: The full nonlinear block-pendulum SDE on R^2 x S^1 x R
    dv1 = v2 dt
    dv2 = (-2 zeta1 v2 - chi^2 v1 + R u2^2 cos u1 - 2 R zeta2 u2 sin u1 - R kappa^2 sin^2 u1) / D dt + nu / D dW
    du1 = u2 dt
    du2 = (-2 zeta2 u2 - kappa^2 sin u1 - 2 zeta1 v2 sin u1 - chi^2 v1 sin u1 + R u2^2 sin u1 cos u1) / D dt
          + nu sin u1 / D dW
with D = 1 - R sin^2 u1 >= 1 - R > 0 and a single Wiener process W.
- Euler-Maruyama simulation (vectorized over trajectories), the energy E and Lyapunov function F
  with their generators, the constants of the moment bounds, and the exp-moment diagnostic.
- The norm |U| = sqrt(v1^2 + v2^2 + u2^2) leaves out the angle.
'''

from dataclasses import dataclass, asdict
from typing import Optional
import math

import numpy as np

from . import utils
from .errors import InvalidMassRatio, InvalidParam, NumericalBlowup
from .model import ScaledParams

logger = utils.getLogger(__name__)

TWO_PI = 2.0 * math.pi

#Norm above which a path is declared blown up
BLOWUP_NORM = 1e8

#Steps of noise drawn per trajectory at a time
CHUNK = 4096

#Safety factor applied to the largest admissible alpha
ALPHA_SAFETY = 0.9

@dataclass
class NonlinearState :
    '''Block position/velocity (v1, v2) and pendulum angle/angular velocity (u1, u2); u1 in [0, 2 pi).'''
    v1: float
    v2: float
    u1: float
    u2: float

    def __post_init__ (self):
        for name in ("v1", "v2", "u1", "u2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidParam(f"{name} must be finite, got {value}")
            setattr(self, name, value)
        self.u1 = self.u1 % TWO_PI

    def asArray (self):
        return np.array([self.v1, self.v2, self.u1, self.u2])

    @classmethod
    def fromArray (cls, x):
        return cls(*(float(c) for c in x))

    @property
    def norm (self):
        return math.sqrt(self.v1 ** 2 + self.v2 ** 2 + self.u2 ** 2)

@dataclass(frozen=True, eq=False)
class NonlinearPath :
    '''Recorded states (n x 4, columns v1, v2, u1, u2) at the given times.'''
    times: np.ndarray
    states: np.ndarray
    seedUsed: int

@dataclass(frozen=True)
class EnergyReport :
    '''E, F and their generators at one state, with the check LF <= c4 - c5 |U|^2.'''
    E: float
    F: float
    LE: float
    LF: float
    LFBoundOk: bool
    alphaUsed: float

@dataclass(frozen=True)
class LyapunovConstants :
    '''
    alpha and the constants of
        c1 |U|^2 <= F <= c2 + c3 |U|^2,   LF <= c4 - c5 |U|^2,   Gamma(F, F) <= c7 |U|^2
    plus betaMax = 0.5 c1 c5 / c7, below which E exp(beta |U|^2) stays bounded.
    '''
    alpha: float
    alphaStar: float
    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c7: float
    betaMax: float

    def toDict (self):
        return asdict(self)

@dataclass(frozen=True, eq=False)
class MomentSeries :
    '''Ensemble averages of exp(beta |U|^2) at checkpoint times and the boundedness verdict.'''
    beta: float
    times: np.ndarray
    values: np.ndarray
    bounded: bool


def _requireMassRatio (params: ScaledParams):
    if not 0.0 < params.rMass < 1.0:
        raise InvalidMassRatio(f"r_mass must lie in (0,1), got {params.rMass!r}")

def _dampingRatio (params: ScaledParams):
    #4 zeta1^2 / chi^2; +inf for a springless block with damping, 0 when zeta1 = 0
    if params.zeta1 == 0.0:
        return 0.0
    if params.chi == 0.0:
        return math.inf
    return 4.0 * params.zeta1 ** 2 / params.chi ** 2

def _coefficients (p: ScaledParams, X):
    #vectorized drift and noise column for states X (n x 4); D is shared by every entry
    v1, v2, u1, u2 = X[:, 0], X[:, 1], X[:, 2], X[:, 3]
    R = p.rMass
    s = np.sin(u1)
    c = np.cos(u1)
    D = 1.0 - R * s * s
    chi2 = p.chi ** 2
    k2 = p.kappa ** 2

    drift = np.empty_like(X)
    drift[:, 0] = v2
    drift[:, 1] = (-2.0 * p.zeta1 * v2 - chi2 * v1 + R * u2 * u2 * c - 2.0 * R * p.zeta2 * u2 * s
                   - R * k2 * s * s) / D
    drift[:, 2] = u2
    drift[:, 3] = (-2.0 * p.zeta2 * u2 - k2 * s - 2.0 * p.zeta1 * v2 * s - chi2 * v1 * s
                   + R * u2 * u2 * s * c) / D

    noise = np.zeros_like(X)
    noise[:, 1] = p.nu / D
    noise[:, 3] = p.nu * s / D
    return drift, noise

def sdeCoefficients (params: ScaledParams, U: NonlinearState):
    '''
    Function: sdeCoefficients
    Purpose: Drift vector and the single noise column of the nonlinear SDE at U
    Inputs: params (ScaledParams), U (NonlinearState)
    Outputs: (drift (4,), noise (4,))
    '''
    _requireMassRatio(params)
    drift, noise = _coefficients(params, U.asArray()[None, :])
    return drift[0], noise[0]


def _norms (X):
    return np.sqrt(X[:, 0] ** 2 + X[:, 1] ** 2 + X[:, 3] ** 2)

def _ensemble (params, scheme, U0, indices, label, recordEvery):
    '''
    Euler-Maruyama for the trajectories in indices, all started at U0.
    Returns the states at steps 0, recordEvery, 2 recordEvery, ... (n_records x n x 4).
    '''
    rngs = [utils.substream(scheme.seed, i, label) for i in indices]
    n = len(indices)
    dt = scheme.dt
    sqdt = math.sqrt(dt)
    nSteps = scheme.nSteps

    X = np.tile(U0.asArray(), (n, 1))
    records = [X.copy()]
    for start in range(0, nSteps, CHUNK):
        count = min(CHUNK, nSteps - start)
        dW = np.stack([rng.standard_normal(count) for rng in rngs], axis=1) * sqdt
        for k in range(count):
            drift, noise = _coefficients(params, X)
            X = X + drift * dt + noise * dW[k][:, None]
            X[:, 2] = np.mod(X[:, 2], TWO_PI)
            step = start + k + 1
            if step % recordEvery == 0:
                records.append(X.copy())
        norms = _norms(X)
        if not np.all(np.isfinite(norms)) or np.any(norms > BLOWUP_NORM):
            raise NumericalBlowup(
                f"|U| exceeded {BLOWUP_NORM:g} by t={(start + count) * dt:g}; reduce dt (currently {dt:g})")
    return np.stack(records)

def _runEnsemble (params, scheme, U0, label, recordEvery):
    #all trajectories of the scheme, batched across workers, concatenated in index order
    workers = max(1, min(utils.workerCount(), scheme.nTraj))
    batches = utils.trajectoryBatches(scheme.nTraj, int(math.ceil(scheme.nTraj / workers)))
    parts = utils.mapOrdered(lambda idx: _ensemble(params, scheme, U0, idx, label, recordEvery), batches)
    return np.concatenate(parts, axis=1)

def simulateNonlinear (params: ScaledParams, scheme, U0: NonlinearState, recordEvery=1):
    '''
    Function: simulateNonlinear
    Purpose: One Euler-Maruyama path of the nonlinear SDE, deterministic given scheme.seed
    - The two noise entries share the same increment dW; u1 is wrapped every step.
    Inputs: params (ScaledParams), scheme (SimScheme), U0 (NonlinearState), recordEvery (int, thinning)
    Outputs: NonlinearPath
    '''
    _requireMassRatio(params)
    if recordEvery < 1:
        raise InvalidParam(f"record_every must be >= 1, got {recordEvery}")
    records = _ensemble(params, scheme, U0, [0], "nonlinear", recordEvery)[:, 0, :]
    times = np.arange(records.shape[0]) * recordEvery * scheme.dt
    logger.info("simulated nonlinear path to t=%g (%d records)", scheme.tFinal, records.shape[0])
    return NonlinearPath(times=times, states=records, seedUsed=int(scheme.seed))

def simulateEnsemble (params: ScaledParams, scheme, U0: NonlinearState):
    '''
    Final states of scheme.nTraj independent trajectories from U0.
    Outputs: numpy.ndarray (nTraj x 4)
    '''
    _requireMassRatio(params)
    return _runEnsemble(params, scheme, U0, "nonlinear", scheme.nSteps)[-1]


def energy (params: ScaledParams, X):
    '''E = v2^2/2 + R u2^2/2 - R v2 u2 sin u1 + chi^2 v1^2/2 + R kappa^2 (1 - cos u1), vectorized over rows.'''
    X = np.atleast_2d(X)
    v1, v2, u1, u2 = X[:, 0], X[:, 1], X[:, 2], X[:, 3]
    R = params.rMass
    return (0.5 * v2 ** 2 + 0.5 * R * u2 ** 2 - R * v2 * u2 * np.sin(u1) + 0.5 * params.chi ** 2 * v1 ** 2
            + R * params.kappa ** 2 * (1.0 - np.cos(u1)))

def energyFunctionals (params: ScaledParams, alpha, U: NonlinearState):
    '''
    Function: energyFunctionals
    Purpose: Energy E, Lyapunov function F = E + alpha v1 (v2 - R u2 sin u1) and their generators
    - LE = -2 zeta1 v2^2 - 2 R zeta2 u2^2 + nu^2 / (2 D)
    - LF = LE + alpha (v2^2 - R v2 u2 sin u1 - 2 zeta1 v1 v2 - chi^2 v1^2)
    Inputs: params (ScaledParams), alpha (float), U (NonlinearState)
    Outputs: EnergyReport
    '''
    _requireMassRatio(params)
    v1, v2, u1, u2 = U.v1, U.v2, U.u1, U.u2
    R = params.rMass
    s = math.sin(u1)
    E = float(energy(params, U.asArray())[0])
    F = E + alpha * v1 * (v2 - R * u2 * s)
    LE = -2.0 * params.zeta1 * v2 ** 2 - 2.0 * R * params.zeta2 * u2 ** 2 + params.nu ** 2 / (2.0 * (1.0 - R * s * s))
    LF = LE + alpha * (v2 ** 2 - R * v2 * u2 * s - 2.0 * params.zeta1 * v1 * v2 - params.chi ** 2 * v1 ** 2)
    consts = lyapunovConstants(params, alpha)
    #c5 is -inf when chi = 0 and alpha > 0
    bound = consts.c4 if U.norm == 0.0 else consts.c4 - consts.c5 * U.norm ** 2
    return EnergyReport(E=E, F=F, LE=LE, LF=LF, LFBoundOk=bool(LF <= bound + 1e-12 * (1.0 + abs(bound))),
                        alphaUsed=float(alpha))

def lyapunovFunction (params: ScaledParams, alpha, X):
    '''F = E + alpha v1 (v2 - R u2 sin u1), vectorized over rows.'''
    X = np.atleast_2d(X)
    return energy(params, X) + alpha * X[:, 0] * (X[:, 1] - params.rMass * X[:, 3] * np.sin(X[:, 2]))

def admissibleAlpha (params: ScaledParams):
    '''
    Largest alpha keeping the quadratic bound on LF negative definite:
        alpha* = min(4 zeta1 / (2 + R + 4 zeta1^2 / chi^2), 4 zeta2)
    The first entry is 0 when chi = 0 and zeta1 > 0.
    '''
    R = params.rMass
    ratio = _dampingRatio(params)
    first = 0.0 if math.isinf(ratio) else 4.0 * params.zeta1 / (2.0 + R + ratio)
    return min(first, 4.0 * params.zeta2)

def lyapunovConstants (params: ScaledParams, alpha=None):
    '''
    Function: lyapunovConstants
    Purpose: alpha and the constants c1..c5, c7, betaMax of the moment bounds
    - Default alpha = 0.9 min(1 - sqrt R, chi^2 / 2, alpha*).
    - Cauchy-Schwarz on the cross terms gives, in the coordinates (v1, v2, u2):
        c1 = min(chi^2/2 - alpha, (1 - sqrt R)/2 - alpha/2, R (1 - sqrt R)/2 - alpha R^2/2)
        c2 = 2 R kappa^2,  c3 = max(chi^2/2 + alpha, (1 + sqrt R)/2 + alpha/2, R (1 + sqrt R)/2 + alpha R^2/2)
        c4 = nu^2 / (2 (1 - R))
        c5 = -max(-2 zeta1 + (alpha/2)(2 + R + 4 zeta1^2 / chi^2), -2 R zeta2 + alpha R / 2, -alpha chi^2 / 2)
    - The noise column gives sigma . grad F = nu (v2 + alpha v1), so Gamma(F, F) <= c7 |U|^2 with
      c7 = nu^2 (1 + alpha^2) / 2. betaMax is infinite when nu = 0.
    Inputs: params (ScaledParams), alpha (float or None)
    Outputs: LyapunovConstants
    '''
    _requireMassRatio(params)
    R = params.rMass
    sqR = math.sqrt(R)
    chi2 = params.chi ** 2
    alphaStar = admissibleAlpha(params)
    if alpha is None:
        alpha = ALPHA_SAFETY * min(1.0 - sqR, chi2 / 2.0, alphaStar)
    if not (math.isfinite(alpha) and alpha >= 0):
        raise InvalidParam(f"alpha must be a nonnegative number, got {alpha}")

    c1 = min(chi2 / 2.0 - alpha, (1.0 - sqR) / 2.0 - alpha / 2.0, R * (1.0 - sqR) / 2.0 - alpha * R * R / 2.0)
    c2 = 2.0 * R * params.kappa ** 2
    c3 = max(chi2 / 2.0 + alpha, (1.0 + sqR) / 2.0 + alpha / 2.0, R * (1.0 + sqR) / 2.0 + alpha * R * R / 2.0)
    c4 = params.nu ** 2 / (2.0 * (1.0 - R))
    ratio = _dampingRatio(params)
    block = 0.0 if alpha == 0.0 else 0.5 * alpha * (2.0 + R + ratio)
    c5 = -max(-2.0 * params.zeta1 + block,
              -2.0 * R * params.zeta2 + alpha * R / 2.0,
              -alpha * chi2 / 2.0)
    c7 = params.nu ** 2 * (1.0 + alpha ** 2) / 2.0
    if c1 > 0 and c5 > 0:
        betaMax = math.inf if c7 == 0.0 else 0.5 * c1 * c5 / c7
    else:
        betaMax = 0.0
    consts = LyapunovConstants(alpha=float(alpha), alphaStar=float(alphaStar), c1=c1, c2=c2, c3=c3,
                               c4=c4, c5=c5, c7=c7, betaMax=betaMax)
    logger.debug("Lyapunov constants: %s", consts)
    return consts


def energyDriftEstimate (params: ScaledParams, U: NonlinearState, dt, nSamples, seed):
    '''
    Function: energyDriftEstimate
    Purpose: One-step Monte Carlo estimate of (E[E(U_dt)] - E(U)) / dt from the Euler-Maruyama step
    Inputs: params, U (NonlinearState), dt (float), nSamples (int), seed (int)
    Outputs: (mean, stderr)
    '''
    _requireMassRatio(params)
    rng = utils.substream(seed, 0, "energy-drift")
    X = U.asArray()[None, :]
    drift, noise = _coefficients(params, X)
    dW = rng.standard_normal(nSamples) * math.sqrt(dt)
    stepped = X + drift * dt + noise * dW[:, None]
    diffs = (energy(params, stepped) - energy(params, X)[0]) / dt
    return float(diffs.mean()), float(diffs.std(ddof=1) / math.sqrt(nSamples))


def _boundedFlag (values, startIndex, factor=10.0):
    #no checkpoint after burn-in exceeds factor x the running median of the checkpoints so far
    kept = values[startIndex:]
    if not np.all(np.isfinite(kept)):
        return False
    for i in range(1, kept.size):
        if kept[i] > factor * np.median(kept[:i]):
            return False
    return True

def expMomentDiagnostic (params: ScaledParams, scheme, beta, U0: NonlinearState, checkpointEvery=1.0):
    '''
    Function: expMomentDiagnostic
    Purpose: Ensemble average of exp(beta |U(t)|^2) over scheme.nTraj trajectories at checkpoint times
    - Flags the series bounded when no checkpoint after burn-in exceeds 10x the running median.
    Inputs: params, scheme (SimScheme), beta (float > 0), U0 (NonlinearState), checkpointEvery (time units)
    Outputs: MomentSeries
    '''
    _requireMassRatio(params)
    if not (math.isfinite(beta) and beta > 0):
        raise InvalidParam(f"beta must be > 0, got {beta}")
    consts = lyapunovConstants(params)
    if beta > consts.betaMax:
        logger.warning("beta=%g is above the derived beta_max=%.4g; the moment may not exist", beta, consts.betaMax)

    every = max(1, int(round(checkpointEvery / scheme.dt)))
    records = _runEnsemble(params, scheme, U0, "exp-moment", every)
    with np.errstate(over="ignore"):
        values = np.exp(beta * np.einsum("kni,kni->kn", records[:, :, [0, 1, 3]], records[:, :, [0, 1, 3]])).mean(axis=1)
    times = np.arange(records.shape[0]) * every * scheme.dt
    startIndex = int(np.searchsorted(times, scheme.burnIn))
    bounded = _boundedFlag(values, startIndex)
    logger.info("exp-moment diagnostic beta=%g: max %.4g, bounded=%s", beta, float(np.max(values)), bounded)
    return MomentSeries(beta=float(beta), times=times, values=values, bounded=bounded)

def betaEscalation (params: ScaledParams, scheme, betas, U0: NonlinearState):
    '''
    Run the exp-moment diagnostic over an increasing beta list.
    Outputs: (list of MomentSeries, first beta flagged unbounded or None)
    '''
    series = []
    failure: Optional[float] = None
    for beta in sorted(betas):
        result = expMomentDiagnostic(params, scheme, beta, U0)
        series.append(result)
        if not result.bounded:
            failure = float(beta)
            break
    return series, failure

def singleModeDecay (params: ScaledParams, scheme, U0: NonlinearState, checkpointEvery=1.0):
    '''
    Function: singleModeDecay
    Purpose: Ensemble mean of the squared pendulum angle (taken in (-pi, pi]) over time
    Inputs: params, scheme (SimScheme), U0 (NonlinearState), checkpointEvery (time units)
    Outputs: (times, mean u1^2)
    '''
    _requireMassRatio(params)
    every = max(1, int(round(checkpointEvery / scheme.dt)))
    records = _runEnsemble(params, scheme, U0, "single-mode", every)
    centered = np.mod(records[:, :, 2] + math.pi, TWO_PI) - math.pi
    times = np.arange(records.shape[0]) * every * scheme.dt
    return times, (centered ** 2).mean(axis=1)
