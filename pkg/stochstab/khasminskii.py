# khasminskii.py

'''
khasminskii.py

Purpose: Monte Carlo estimates of the top Lyapunov exponent lambda(eps) of
             phi'' + 2 zeta2 phi' + (kappa^2 - eps <a, v>) phi = eps <gamma, dW/dt> phi
         with v the OU driver of the model. Two independent routes:
         - "angle": time average of the Khas'minskii integrand Q along the (v, psi) diffusion;
         - "lognorm": direct growth rate of log |u| for the linear SDE, with renormalization.
         Plus the closed-form upper bound on lambda.
- Both routes run in the rotated coordinates u~ = (kappa_d phi, zeta2 phi + phi'), in which the
  unforced angle turns at the constant rate -kappa_d and Q~ = -zeta2 exactly at eps = 0.
- v moves by the exact OU transition; psi and u~ move by Euler-Maruyama driven by the same
  Wiener increments as v.
'''

from dataclasses import dataclass, asdict
from enum import Enum
import math

import numpy as np

from . import utils
from .errors import InvalidParam
from .model import GeneralModel, ScaledParams
from .ou import OuStepper, stationaryCovariance

logger = utils.getLogger(__name__)

TWO_PI = 2.0 * math.pi

#Steps of noise drawn per trajectory at a time
CHUNK = 4096

#Steps between renormalizations of u~ in the lognorm estimator
RENORM_EVERY = 100

class Method (Enum):
    ANGLE = "angle"
    LOGNORM = "lognorm"

@dataclass
class AngleState :
    '''Point (v, psi) of the angle diffusion; psi is kept in [0, 2 pi).'''
    v: np.ndarray
    psi: float

    def __post_init__ (self):
        self.v = np.asarray(self.v, dtype=float)
        if not np.all(np.isfinite(self.v)) or not math.isfinite(self.psi):
            raise InvalidParam("angle state must be finite")
        self.psi = float(self.psi) % TWO_PI

@dataclass(frozen=True)
class AngleRates :
    '''Drift q of log |u|, drift h of psi, and the dW coefficients of psi and log |u|.'''
    q: float
    h: float
    gPsi: np.ndarray
    gLogr: np.ndarray

@dataclass(frozen=True)
class LyapEstimate :
    '''Monte Carlo estimate of lambda with its standard error across trajectories.'''
    value: float
    stderr: float
    nTraj: int
    tFinal: float
    method: str
    dt: float
    seed: int

    def toDict (self):
        '''JSON-ready dict with the documented key names.'''
        d = asdict(self)
        return {
            "value": d["value"],
            "stderr": d["stderr"],
            "method": d["method"],
            "n_traj": d["nTraj"],
            "t_final": d["tFinal"],
            "dt": d["dt"],
            "seed": d["seed"],
        }


def angleDynamics (model: GeneralModel, eps, state: AngleState, rawMode=False):
    '''
    Function: angleDynamics
    Purpose: Coefficients of d log|u| = q dt + <gLogr, dW> and d psi = h dt + <gPsi, dW>
    - Rotated coordinates (default), with kd = kappa_d and s, c = sin psi, cos psi:
        q = -zeta2 + (eps/kd) <a,v> s c + (eps^2 |gamma|^2 / (2 kd^2)) c^2 cos 2psi
        h = -kd + (eps/kd) <a,v> c^2 - (eps^2 |gamma|^2 / kd^2) s c^3
        gPsi = (eps gamma / kd) c^2,  gLogr = (eps gamma / kd) s c
    - rawMode evaluates the plain polar coordinates of u = (phi, phi') instead:
        q = (1 - kappa^2 + eps <a,v>) s c - 2 zeta2 s^2 + (eps^2 |gamma|^2 / 2) c^2 cos 2psi
        h = -1 + (1 - kappa^2 + eps <a,v>) c^2 - 2 zeta2 s c - eps^2 |gamma|^2 s c^3
    Inputs: model (GeneralModel), eps (float >= 0), state (AngleState), rawMode (bool)
    Outputs: AngleRates
    '''
    v = np.atleast_2d(state.v)
    q, h, gPsi, gLogr = _rates(model, eps, v, np.array([state.psi]), rawMode)
    return AngleRates(q=float(q[0]), h=float(h[0]), gPsi=gPsi[0], gLogr=gLogr[0])

def _rates (model, eps, v, psi, rawMode):
    #vectorized over a batch: v (n x d), psi (n,)
    a = model.exc.a
    gamma = model.exc.gamma
    g2 = float(gamma @ gamma)
    av = v @ a
    s = np.sin(psi)
    c = np.cos(psi)
    if rawMode:
        coef = 1.0 - model.kappa ** 2 + eps * av
        q = coef * s * c - 2.0 * model.zeta2 * s * s + 0.5 * eps * eps * g2 * c * c * np.cos(2.0 * psi)
        h = -1.0 + coef * c * c - 2.0 * model.zeta2 * s * c - eps * eps * g2 * s * c ** 3
        scale = eps
    else:
        kd = model.kappaD
        q = -model.zeta2 + (eps / kd) * av * s * c + (eps * eps * g2 / (2.0 * kd * kd)) * c * c * np.cos(2.0 * psi)
        h = -kd + (eps / kd) * av * c * c - (eps * eps * g2 / (kd * kd)) * s * c ** 3
        scale = eps / kd
    gPsi = scale * np.outer(c * c, gamma)
    gLogr = scale * np.outer(s * c, gamma)
    return q, h, gPsi, gLogr


def _checkInputs (model, eps, rotated=True):
    if not (math.isfinite(eps) and eps >= 0):
        raise InvalidParam(f"eps must be a nonnegative number, got {eps}")
    model.requireValid()
    if rotated:
        #raises OverdampedPendulum
        model.kappaD

def _batches (nTraj):
    #one contiguous index group per worker; a single group when running serially
    workers = max(1, min(utils.workerCount(), nTraj))
    size = int(math.ceil(nTraj / workers))
    return utils.trajectoryBatches(nTraj, size)

def _noiseChunks (rngs, nSteps, m, d, dt):
    '''
    Yield (start, dW, z) with dW (n_chunk x n x m) and z (n_chunk x n x d). Every trajectory draws
    its own chunk from its own generator, so its numbers do not depend on the batch it is in.
    '''
    sqdt = math.sqrt(dt)
    for start in range(0, nSteps, CHUNK):
        count = min(CHUNK, nSteps - start)
        dW = np.stack([rng.standard_normal((count, m)) for rng in rngs], axis=1) * sqdt
        z = np.stack([rng.standard_normal((count, d)) for rng in rngs], axis=1)
        yield start, dW, z

def _vPathChunk (stepper, v, dW, z):
    #exact OU steps over one chunk; returns the states at the start of each step and the final state
    forcing = np.einsum("ij,knj->kni", stepper.K, dW) + np.einsum("ij,knj->kni", stepper.L, z)
    path = np.empty_like(forcing)
    for k in range(forcing.shape[0]):
        path[k] = v
        v = np.einsum("ij,nj->ni", stepper.Phi, v) + forcing[k]
    return path, v

def _reduce (perTrajectory, offset, model, eps, scheme, method):
    #mean and stderr over trajectories, in index order
    excess = np.asarray(perTrajectory, dtype=float)
    n = excess.size
    stderr = float(excess.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    estimate = LyapEstimate(
        value=float(offset + excess.mean()),
        stderr=stderr,
        nTraj=int(n),
        tFinal=float(scheme.tFinal),
        method=method.value,
        dt=float(scheme.dt),
        seed=int(scheme.seed),
    )
    logger.info("%s estimate at eps=%g: %.6g +/- %.2g (%d trajectories, T=%g)",
                method.value, eps, estimate.value, estimate.stderr, n, scheme.tFinal)
    return estimate


def estimateLyapunovAngle (model: GeneralModel, eps, scheme, psi0=0.0, rawMode=False):
    '''
    Function: estimateLyapunovAngle
    Purpose: lambda(eps) as the time average of Q along (v, psi) after burn-in, averaged over trajectories
    - In the rotated coordinates Q = -zeta2 + (excitation terms); only the excitation part is
      accumulated, so eps = 0 (or a zero excitation) returns -zeta2 exactly with stderr 0.
    Inputs: model (GeneralModel), eps (float >= 0), scheme (SimScheme), psi0 (initial angle),
            rawMode (bool, use the plain polar integrand)
    Outputs: LyapEstimate (method "angle")
    '''
    _checkInputs(model, eps, rotated=not rawMode)
    if not rawMode:
        if eps == 0.0 or model.exc.isZero:
            return _reduce(np.zeros(scheme.nTraj), -model.zeta2, model, eps, scheme, Method.ANGLE)

    stepper = OuStepper(model.ou, scheme.dt)
    logger.info("angle estimator: eps=%g, n_traj=%d, T=%g, dt=%g, seed=%d",
                eps, scheme.nTraj, scheme.tFinal, scheme.dt, scheme.seed)

    def runBatch (indices):
        return _angleBatch(model, eps, scheme, stepper, indices, psi0, rawMode)

    parts = utils.mapOrdered(runBatch, _batches(scheme.nTraj))
    perTrajectory = np.concatenate(parts)
    offset = 0.0 if rawMode else -model.zeta2
    return _reduce(perTrajectory, offset, model, eps, scheme, Method.ANGLE)

def _angleBatch (model, eps, scheme, stepper, indices, psi0, rawMode):
    rngs = [utils.substream(scheme.seed, i, "khasminskii") for i in indices]
    n = len(indices)
    dt = scheme.dt
    nSteps, burn = scheme.nSteps, scheme.burnSteps
    gamma = model.exc.gamma
    g2 = float(gamma @ gamma)

    v = np.concatenate([stepper.stationaryDraw(rng, 1) for rng in rngs])
    psi = np.full(n, float(psi0) % TWO_PI)
    total = np.zeros(n)

    if rawMode:
        base = 1.0 - model.kappa ** 2
        e1, e2, e3 = eps, eps * eps * g2, eps
    else:
        kd = model.kappaD
        e1, e2, e3 = eps / kd, eps * eps * g2 / (kd * kd), eps / kd

    for start, dW, z in _noiseChunks(rngs, nSteps, model.ou.noiseDim, model.ou.dim, dt):
        vPath, v = _vPathChunk(stepper, v, dW, z)
        av = np.einsum("kni,i->kn", vPath, model.exc.a)
        gdw = np.einsum("knm,m->kn", dW, gamma)
        psiPath = np.empty_like(av)
        for k in range(av.shape[0]):
            psiPath[k] = psi
            s = np.sin(psi)
            c = np.cos(psi)
            cc = c * c
            if rawMode:
                h = -1.0 + (base + e1 * av[k]) * cc - 2.0 * model.zeta2 * s * c - e2 * s * cc * c
            else:
                h = -kd + e1 * av[k] * cc - e2 * s * cc * c
            psi = psi + h * dt + e3 * cc * gdw[k]
        psi = np.mod(psi, TWO_PI)

        #integrand over the kept part of the chunk
        keep = max(0, burn - start)
        if keep >= av.shape[0]:
            continue
        s = np.sin(psiPath[keep:])
        c = np.cos(psiPath[keep:])
        if rawMode:
            q = ((base + e1 * av[keep:]) * s * c - 2.0 * model.zeta2 * s * s
                 + 0.5 * e2 * c * c * np.cos(2.0 * psiPath[keep:]))
        else:
            #q + zeta2
            q = e1 * av[keep:] * s * c + 0.5 * e2 * c * c * np.cos(2.0 * psiPath[keep:])
        total += q.sum(axis=0)

    return total / (nSteps - burn)


def estimateLyapunovLognorm (model: GeneralModel, eps, scheme, u0=(1.0, 0.0)):
    '''
    Function: estimateLyapunovLognorm
    Purpose: lambda(eps) as (1/t) log |u~(t)| for the linear SDE in rotated coordinates
        du~ = [[-zeta2, kd], [-kd + (eps/kd)<a,v>, -zeta2]] u~ dt + (eps/kd) [[0,0],[1,0]] u~ <gamma, dW>
    - Euler-Maruyama, u~ renormalized every RENORM_EVERY steps with the log of the norm accumulated
      after burn-in.
    Inputs: model (GeneralModel), eps (float >= 0), scheme (SimScheme), u0 = initial (phi, phi')
    Outputs: LyapEstimate (method "lognorm")
    '''
    _checkInputs(model, eps)
    kd = model.kappaD
    phi0, dphi0 = float(u0[0]), float(u0[1])
    if phi0 == 0.0 and dphi0 == 0.0:
        raise InvalidParam("initial (phi, phi') must not be (0, 0)")
    start = np.array([kd * phi0, model.zeta2 * phi0 + dphi0])

    stepper = OuStepper(model.ou, scheme.dt)
    logger.info("lognorm estimator: eps=%g, n_traj=%d, T=%g, dt=%g, seed=%d",
                eps, scheme.nTraj, scheme.tFinal, scheme.dt, scheme.seed)

    def runBatch (indices):
        return _lognormBatch(model, eps, scheme, stepper, indices, start)

    parts = utils.mapOrdered(runBatch, _batches(scheme.nTraj))
    return _reduce(np.concatenate(parts), 0.0, model, eps, scheme, Method.LOGNORM)

def _lognormBatch (model, eps, scheme, stepper, indices, start):
    rngs = [utils.substream(scheme.seed, i, "khasminskii") for i in indices]
    n = len(indices)
    dt = scheme.dt
    nSteps, burn = scheme.nSteps, scheme.burnSteps
    kd = model.kappaD
    z2 = model.zeta2
    e1 = eps / kd

    v = np.concatenate([stepper.stationaryDraw(rng, 1) for rng in rngs])
    u1 = np.full(n, start[0])
    u2 = np.full(n, start[1])
    logSum = np.zeros(n)

    def renormalize (count):
        nonlocal u1, u2
        norm = np.hypot(u1, u2)
        u1 = u1 / norm
        u2 = u2 / norm
        return np.log(norm) if count else 0.0

    for chunkStart, dW, z in _noiseChunks(rngs, nSteps, model.ou.noiseDim, model.ou.dim, dt):
        vPath, v = _vPathChunk(stepper, v, dW, z)
        av = np.einsum("kni,i->kn", vPath, model.exc.a)
        gdw = np.einsum("knm,m->kn", dW, model.exc.gamma)
        for k in range(av.shape[0]):
            step = chunkStart + k
            if step == burn:
                renormalize(False)
            nu1 = u1 + (-z2 * u1 + kd * u2) * dt
            u2 = u2 + ((-kd + e1 * av[k]) * u1 - z2 * u2) * dt + e1 * u1 * gdw[k]
            u1 = nu1
            if (step + 1) % RENORM_EVERY == 0 or step + 1 == nSteps:
                logSum += renormalize(step + 1 > burn)
    return logSum / ((nSteps - burn) * dt)


def upperBound (model: GeneralModel, eps=1.0):
    '''
    Function: upperBound
    Purpose: lambda(eps) <= -zeta2 + eps sqrt(<a, R a>) / (2 kd) + eps^2 |gamma|^2 / (2 kd^2)
    Inputs: model (GeneralModel), Hurwitz, zeta2 < kappa; eps (float >= 0, default 1)
    Outputs: float
    '''
    kd = model.kappaD
    a = model.exc.a
    gamma = model.exc.gamma
    R = stationaryCovariance(model.ou)
    return float(-model.zeta2 + eps * math.sqrt(max(a @ R @ a, 0.0)) / (2.0 * kd)
                 + eps * eps * (gamma @ gamma) / (2.0 * kd * kd))

def blockUpperBound (params: ScaledParams):
    '''
    Same bound written out for the block-pendulum:
        -zeta2 + (nu / 2kd) sqrt((chi^2 + 4 zeta1^2) / (4 zeta1)) + nu^2 / (2 kd^2)
    '''
    kd = params.kappaD
    if params.zeta1 <= 0:
        raise InvalidParam("block upper bound needs zeta1 > 0")
    root = math.sqrt((params.chi ** 2 + 4.0 * params.zeta1 ** 2) / (4.0 * params.zeta1))
    return -params.zeta2 + params.nu / (2.0 * kd) * root + params.nu ** 2 / (2.0 * kd * kd)
