# verify.py

'''
verify.py

Purpose: Invariant suite behind "autolyap verify"
- Each check recomputes an identity two independent ways (closed form against resolvent,
  adjoint vector against cosine transform, quadrature against Lyapunov solve, ...) and reports
  the worst discrepancy. Random models come from the master seed, so a rerun checks the same cases.
- Three checks are short fixed-seed Monte Carlo runs (one-step energy drift, angle against
  lognorm estimator); their tolerances are in standard errors.
- The suite runs on the reference block-pendulum corpus, a random corpus of general models, and
  the configured model: a block model joins the block corpus, a general model the general one.
'''

from dataclasses import dataclass, asdict
from typing import Callable, List
import math

import numpy as np
import scipy.integrate
import scipy.linalg

from . import asymptotics, khasminskii, nonlinear, utils
from .errors import OverdampedPendulum
from .linalg import cosineTransform, solveLyapunov, spectralAbscissa
from .model import (
    CompoundParams,
    Excitation,
    GeneralModel,
    OuSystem,
    PhysicalParams,
    ScaledParams,
    SimScheme,
    blockEmbedding,
    compoundToScaled,
    physicalToScaled,
)
from .ou import observablePsd, stationaryCovariance

logger = utils.getLogger(__name__)

#Reference block-pendulum parameters used throughout
REFERENCE = ScaledParams(zeta1=0.2, zeta2=0.1, chi=1.0, kappa=0.5, nu=1.0, rMass=0.25)

#Spectral cutoff for the Parseval check, in units of |A|_F
PARSEVAL_SCALE = 50.0

@dataclass(frozen=True)
class CheckResult :
    name: str
    ok: bool
    worst: float
    tolerance: float
    detail: str = ""

@dataclass(frozen=True)
class VerifyReport :
    checks: List[CheckResult]

    @property
    def passed (self):
        return all(c.ok for c in self.checks)

    def toDict (self):
        return {"passed": self.passed, "checks": [asdict(c) for c in self.checks]}


def randomBlockParams (rng, n):
    '''n random underdamped block-pendulum parameter sets.'''
    out = []
    for _ in range(n):
        zeta2 = rng.uniform(0.01, 0.5)
        out.append(ScaledParams(
            zeta1=rng.uniform(0.05, 1.0),
            zeta2=zeta2,
            chi=rng.uniform(0.5, 2.0),
            kappa=zeta2 + rng.uniform(0.1, 2.0),
            nu=rng.uniform(0.1, 2.0),
            rMass=rng.uniform(0.1, 0.9),
        ))
    return out

def randomHurwitz (rng, d):
    '''Random d x d drift with spectral abscissa in [-1, -0.2].'''
    A = rng.normal(size=(d, d))
    return A - (spectralAbscissa(A) + rng.uniform(0.2, 1.0)) * np.eye(d)

def randomGeneralModels (rng, n):
    '''n random underdamped general models, OU dimension 1 to 4 with 1 or 2 noise channels.'''
    out = []
    for _ in range(n):
        d = int(rng.integers(1, 5))
        m = int(rng.integers(1, 3))
        zeta2 = rng.uniform(0.01, 0.5)
        out.append(GeneralModel(
            ou=OuSystem(A=randomHurwitz(rng, d), B=rng.normal(size=(d, m))),
            exc=Excitation(a=rng.normal(size=d), gamma=rng.normal(size=m)),
            zeta2=zeta2,
            kappa=zeta2 + rng.uniform(0.1, 2.0),
        ))
    return out

def _relative (x, y):
    return abs(x - y) / max(abs(x), abs(y), 1e-300)

def _result (name, worst, tolerance, detail=""):
    ok = bool(worst <= tolerance)
    logger.info("%-32s %s (worst %.3g, tolerance %.1g)", name, "ok" if ok else "FAILED", worst, tolerance)
    return CheckResult(name=name, ok=ok, worst=float(worst), tolerance=float(tolerance), detail=detail)

def _decayHorizon (A):
    #first T with |e^{TA}|_max below 1e-12
    T = 1.0
    while np.max(np.abs(scipy.linalg.expm(T * A))) >= 1e-12:
        T *= 1.5
    return T


def checkLambda2Agreement (models):
    worst = 0.0
    for m in models:
        omega = 2.0 * m.kappaD
        r = asymptotics.lambda2(m, omega, "resolvent")
        a = asymptotics.lambda2(m, omega, "adjoint")
        b = asymptotics.lambda2(m, omega, "block_closed_form")
        worst = max(worst, _relative(r, a), _relative(r, b))
    return _result("lambda2 three-way agreement", worst, 1e-9, f"{len(models)} models")

def checkLambda2Routes (models):
    worst = 0.0
    for m in models:
        omega = 2.0 * m.kappaD
        worst = max(worst, _relative(asymptotics.lambda2(m, omega, "resolvent"),
                                     asymptotics.lambda2(m, omega, "adjoint")))
    return _result("lambda2 resolvent vs adjoint", worst, 1e-9, f"{len(models)} general models")

def checkLambda2Psd (models):
    worst = 0.0
    for m in models:
        for omega in np.linspace(0.1, 5.0, 50):
            direct = asymptotics.lambda2(m, omega)
            viaPsd = math.pi * observablePsd(m.ou, np.array([0.0, 1.0]), omega)
            worst = max(worst, _relative(direct, viaPsd))
    return _result("lambda2 = pi * PSD(block velocity)", worst, 1e-12)

def checkAdjointCosine (models):
    worst = 0.0
    for m in models:
        reB = np.real(asymptotics.adjointB(m).b)
        S = -np.real(np.linalg.inv(m.ou.A - 2j * m.kappaD * np.eye(m.ou.dim))) / math.pi
        for x in np.eye(m.ou.dim):
            lhs = reB @ x
            rhs = math.pi * m.exc.a @ S @ x
            worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
    return _result("Re b against cosine transform", worst, 1e-12)

def checkF1Residual (models, rng):
    worst = 0.0
    for m in models:
        for _ in range(100):
            v = rng.normal(size=m.ou.dim)
            psi = rng.uniform(0.0, 2.0 * math.pi)
            worst = max(worst, abs(asymptotics.f1Residual(m, v, psi)))
    return _result("F1 residual", worst, 1e-10, f"{len(models)} models x 100 points")

def checkBilinearAverage (models):
    worst = 0.0
    for m in models:
        C = np.outer(m.exc.a, np.real(asymptotics.adjointB(m).b))
        direct = asymptotics.bilinearAverage(m.ou, C)
        quad = asymptotics.bilinearAverageQuadrature(m.ou, C)
        worst = max(worst, abs(direct - quad) / (1.0 + abs(direct)))
    return _result("bilinear average vs quadrature", worst, 1e-6)

def checkBlockCovariance (params):
    worst = 0.0
    for p in params:
        R = stationaryCovariance(blockEmbedding(p).ou)
        closed = p.nu ** 2 / (4.0 * p.zeta1) * np.diag([1.0 / p.chi ** 2, 1.0])
        worst = max(worst, float(np.max(np.abs(R - closed))) / (1.0 + float(np.max(np.abs(closed)))))
    return _result("block stationary covariance", worst, 1e-12)

def checkUpperBounds (params):
    worst = 0.0
    for p in params:
        general = khasminskii.upperBound(blockEmbedding(p))
        block = khasminskii.blockUpperBound(p)
        worst = max(worst, abs(general - block) / (1.0 + abs(block)))
    return _result("upper bound block vs general", worst, 1e-12)

def checkNoiseBoundaryMinimum ():
    worst = 0.0
    for zeta1 in (0.02, 0.2, 0.4, 0.7):
        p = ScaledParams(zeta1=zeta1, zeta2=1.0, chi=1.0, kappa=0.5, nu=1.0, rMass=0.25)
        expected = math.sqrt(8.0 * zeta1 ** 2)
        atHalf = asymptotics.stabilityBoundary(asymptotics.BoundaryQuery("noise", 0.5), p)
        kappaStar, nuMin = asymptotics.noiseBoundaryMinimum(p)
        worst = max(worst, abs(atHalf - expected), abs(nuMin - expected))
    return _result("noise boundary minimum", worst, 1e-8, "chi=1, zeta2=1")

def checkNoiseBoundaryZero (params):
    #at nu = nu_c the noise-and-damping expansion vanishes
    worst = 0.0
    for p in params:
        nuC = asymptotics.stabilityBoundary(asymptotics.BoundaryQuery("noise", p.kappa), p)
        critical = blockEmbedding(p.withNu(nuC))
        value = asymptotics.expansion(critical, 1.0, "noise_and_damping")
        worst = max(worst, abs(value) / max(p.zeta2, 1e-12))
    return _result("expansion vanishes on nu_c", worst, 1e-9, f"{len(params)} models")

def checkExpansionAtZero (models):
    worst = 0.0
    scheme = SimScheme(dt=1e-2, tFinal=1.0, nTraj=2)
    for m in models:
        est = khasminskii.estimateLyapunovAngle(m, 0.0, scheme)
        worst = max(worst, abs(est.value + m.zeta2), est.stderr, abs(asymptotics.expansion(m, 0.0) + m.zeta2))
    return _result("eps = 0 gives -zeta2", worst, 0.0)

def checkLyapunovSolve (rng):
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(1, 7))
        A = rng.normal(size=(d, d)) - (d + 1.0) * np.eye(d)
        if np.max(np.linalg.eigvals(A).real) >= 0:
            continue
        M = rng.normal(size=(d, d))
        M = M @ M.T
        R = solveLyapunov(A, M)
        worst = max(worst, float(np.max(np.abs(A @ R + R @ A.T + M))) / (1.0 + float(np.max(np.abs(M)))))
    return _result("Lyapunov equation residual", worst, 1e-10)

def checkLyapunovQuadrature (ous):
    worst = 0.0
    for ou in ous:
        M = ou.B @ ou.B.T
        T = _decayHorizon(ou.A)

        def integrand (t):
            E = scipy.linalg.expm(t * ou.A)
            return E @ M @ E.T

        direct, _ = scipy.integrate.quad_vec(integrand, 0.0, T, epsabs=1e-13, epsrel=1e-12, limit=20_000)
        scale = 1.0 + float(np.max(np.abs(M)))
        worst = max(worst, float(np.max(np.abs(solveLyapunov(ou.A, M) - direct))) / scale)
    return _result("Lyapunov solve vs quadrature", worst, 1e-8, f"{len(ous)} systems")

def checkCosineQuadrature (As, rng):
    worst = 0.0
    for A in As:
        T = _decayHorizon(A)
        for omega in (0.0, rng.uniform(0.0, 10.0)):
            direct, _ = scipy.integrate.quad_vec(lambda t: scipy.linalg.expm(t * A) * math.cos(omega * t), 0.0, T,
                                                 epsabs=1e-13, epsrel=1e-12, limit=20_000)
            worst = max(worst, float(np.max(np.abs(cosineTransform(A, omega) - direct / math.pi))))
    return _result("cosine transform vs quadrature", worst, 1e-8, f"{len(As)} matrices")

def checkPsdNonnegative (rng, n=1000):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(1, 5))
        ou = OuSystem(A=randomHurwitz(rng, d), B=rng.normal(size=(d, int(rng.integers(1, 3)))))
        alpha = rng.normal(size=d)
        value = observablePsd(ou, alpha, rng.uniform(0.0, 10.0))
        variance = float(alpha @ stationaryCovariance(ou) @ alpha)
        worst = max(worst, -value / (1.0 + variance))
    return _result("observable PSD nonnegative", worst, 1e-12, f"{n} random systems")

def checkParseval (ous):
    #int_{-W}^{W} S_V dw recovers <alpha, R alpha> for each coordinate observable, W = 50 |A|_F
    worst = 0.0
    for ou in ous:
        omegaMax = PARSEVAL_SCALE * float(np.linalg.norm(ou.A))
        peaks = sorted({abs(z.imag) for z in np.linalg.eigvals(ou.A) if 0.0 < abs(z.imag) < omegaMax})
        R = stationaryCovariance(ou)
        for alpha in np.eye(ou.dim):
            half, _ = scipy.integrate.quad(lambda w: observablePsd(ou, alpha, w), 0.0, omegaMax,
                                           points=peaks or None, limit=1000)
            worst = max(worst, _relative(2.0 * half, float(alpha @ R @ alpha)))
    return _result("Parseval for the OU spectrum", worst, 0.02, f"{len(ous)} block systems")

def checkModelReductions (rng, n=20):
    #a compound pendulum with I = m2 ell^2 and d = ell is the simple pendulum
    worst = 0.0
    for _ in range(n):
        m1, m2, ell = rng.uniform(0.5, 5.0), rng.uniform(0.1, 3.0), rng.uniform(0.2, 2.0)
        common = dict(m1=m1, m2=m2, c1=rng.uniform(0.0, 1.0), c2=rng.uniform(0.0, 0.5),
                      k1=rng.uniform(0.5, 10.0), g=9.81, nuHat=rng.uniform(0.1, 2.0))
        simple = physicalToScaled(PhysicalParams(ell=ell, **common))
        compound = compoundToScaled(CompoundParams(inertia=m2 * ell ** 2, d=ell, **common))
        for name in ("zeta1", "zeta2", "chi", "kappa", "nu", "rMass"):
            a, b = getattr(simple, name), getattr(compound, name)
            worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1.0))
    return _result("compound vs simple pendulum", worst, 1e-12, f"{n} parameter sets")

def checkNonlinearIdentities (params, rng):
    worst = 0.0
    for p in params:
        consts = nonlinear.lyapunovConstants(p)
        for _ in range(200):
            x = rng.normal(scale=3.0, size=4)
            U = nonlinear.NonlinearState.fromArray(x)
            F = float(nonlinear.lyapunovFunction(p, consts.alpha, U.asArray())[0])
            n2 = U.norm ** 2
            report = nonlinear.energyFunctionals(p, consts.alpha, U)
            lower = consts.c1 * n2 - F
            upper = F - consts.c2 - consts.c3 * n2
            worst = max(worst, lower, upper, 0.0 if report.LFBoundOk else 1.0)
    return _result("F sandwich and LF bound", worst, 1e-9)

def checkEnergyDrift (params, rng, seed, nStates=20):
    #one Euler-Maruyama step from a fixed state: (E[E(U_dt)] - E(U)) / dt against LE, in standard errors
    worst = 0.0
    for i in range(nStates):
        x = rng.normal(size=4)
        x[2] = rng.uniform(0.0, 2.0 * math.pi)
        U = nonlinear.NonlinearState.fromArray(x)
        mean, stderr = nonlinear.energyDriftEstimate(params, U, 1e-3, 100_000, seed=seed + i)
        LE = nonlinear.energyFunctionals(params, 0.0, U).LE
        worst = max(worst, abs(mean - LE) / stderr)
    return _result("one-step energy drift", worst, 3.0, f"{nStates} states, in standard errors")

def checkSingleMode (params):
    worst = 0.0
    scheme = SimScheme(dt=1e-3, tFinal=2.0, seed=7, nTraj=1)
    path = nonlinear.simulateNonlinear(params, scheme, nonlinear.NonlinearState(0.0, 0.0, 0.0, 0.0))
    worst = float(np.max(np.abs(path.states[:, 2:])))
    return _result("single mode stays at rest", worst, 0.0)

def checkEstimatorAgreement (models, seed, eps=0.3):
    worst = 0.0
    scheme = SimScheme(dt=1e-2, tFinal=100.0, burnIn=5.0, seed=seed, nTraj=8)
    for m in models:
        if m.exc.isZero:
            continue
        angle = khasminskii.estimateLyapunovAngle(m, eps, scheme)
        lognorm = khasminskii.estimateLyapunovLognorm(m, eps, scheme)
        combined = max(math.hypot(angle.stderr, lognorm.stderr), 1e-300)
        worst = max(worst, abs(angle.value - lognorm.value) / combined)
    return _result("angle vs lognorm estimator", worst, 3.0, f"eps={eps}, in combined standard errors")


def runVerify (cfg=None, seed=None):
    '''
    Function: runVerify
    Purpose: Run every check on the reference corpus and the configured model
    - A configured block model is checked with the block corpus; a general model with the
      general corpus and the Monte Carlo agreement check. Overdamped models are skipped.
    Inputs: cfg (RunConfig or None), seed (int, defaults to the config seed or 42)
    Outputs: VerifyReport
    '''
    if seed is None:
        seed = cfg.scheme.seed if cfg is not None else 42
    rng = utils.substream(seed, 0, "verify")
    params = [REFERENCE] + randomBlockParams(rng, 100)
    general = randomGeneralModels(rng, 20)
    configured = None
    if cfg is not None:
        try:
            cfg.model.kappaD
            configured = cfg.model
        except OverdampedPendulum:
            logger.warning("configured model is not underdamped; verifying the reference corpus only")
    if configured is not None:
        if cfg.params is not None:
            params.insert(0, cfg.params)
        else:
            general.insert(0, configured)
            logger.info("configured general model joins the general corpus")
    models = [blockEmbedding(p) for p in params]
    sampled = [models[0]] + ([general[0]] if configured is not None and cfg.params is None else [])

    checks: List[Callable[[], CheckResult]] = [
        lambda: checkLambda2Agreement(models),
        lambda: checkLambda2Routes(general),
        lambda: checkLambda2Psd(models[:10]),
        lambda: checkAdjointCosine(models + general),
        lambda: checkF1Residual(models[:20] + general, rng),
        lambda: checkBilinearAverage(models[:5] + general[:5]),
        lambda: checkBlockCovariance(params),
        lambda: checkUpperBounds(params),
        lambda: checkNoiseBoundaryMinimum(),
        lambda: checkNoiseBoundaryZero(params),
        lambda: checkExpansionAtZero(models[:5] + general[:3]),
        lambda: checkLyapunovSolve(rng),
        lambda: checkLyapunovQuadrature([m.ou for m in models[:3] + general[:4]]),
        lambda: checkCosineQuadrature([m.ou.A for m in models[:3] + general[:4]], rng),
        lambda: checkPsdNonnegative(rng),
        lambda: checkParseval([m.ou for m in models[:6]]),
        lambda: checkModelReductions(rng),
        lambda: checkNonlinearIdentities(params[:10], rng),
        lambda: checkEnergyDrift(params[0], rng, seed),
        lambda: checkSingleMode(params[0]),
        lambda: checkEstimatorAgreement(sampled, seed),
    ]
    results = [check() for check in checks]
    report = VerifyReport(checks=results)
    logger.info("verify suite: %d/%d checks passed", sum(c.ok for c in results), len(results))
    return report
