import math

import numpy as np
import pytest

from stochstab.asymptotics import expansion, lambda2
from stochstab.errors import InvalidParam, OverdampedPendulum
from stochstab.khasminskii import (
    AngleState,
    LyapEstimate,
    angleDynamics,
    blockUpperBound,
    estimateLyapunovAngle,
    estimateLyapunovLognorm,
    upperBound,
)
from stochstab.model import Excitation, GeneralModel, OuSystem, ScaledParams, SimScheme, blockEmbedding


def _coloredOnly (zeta2=0.1, kappa=0.5):
    A = [[-0.5, 1.0], [-1.0, -0.3]]
    return GeneralModel(ou=OuSystem(A=A, B=[[0.2], [0.7]]), exc=Excitation(a=[0.8, -0.4], gamma=[0.0]), zeta2=zeta2, kappa=kappa)

def _linearRates (M, psi):
    #d log|u|/dt and d psi/dt of u' = M u at u = (cos psi, sin psi)
    u = np.array([math.cos(psi), math.sin(psi)])
    du = M @ u
    return u @ du, u[0] * du[1] - u[1] * du[0]


def test_unforced_rates (referenceModel):
    rates = angleDynamics(referenceModel, 0.0, AngleState(v=[0.3, -0.2], psi=1.1))
    assert rates.q == pytest.approx(-0.1)
    assert rates.h == pytest.approx(-math.sqrt(0.24))
    assert np.all(rates.gPsi == 0.0) and np.all(rates.gLogr == 0.0)

@pytest.mark.parametrize("psi", [0.0, 0.4, 1.9, 3.5, 5.8])
def test_rotated_rates_follow_linear_flow (psi):
    model = _coloredOnly()
    eps, v = 0.3, np.array([0.5, -1.2])
    kd = model.kappaD
    av = float(v @ model.exc.a)
    M = np.array([[-model.zeta2, kd], [-kd + eps * av / kd, -model.zeta2]])
    q, h = _linearRates(M, psi)
    rates = angleDynamics(model, eps, AngleState(v=v, psi=psi))
    assert rates.q == pytest.approx(q, abs=1e-14)
    assert rates.h == pytest.approx(h, abs=1e-14)

@pytest.mark.parametrize("psi", [0.0, 0.7, 2.5, 4.0])
def test_raw_rates_follow_linear_flow (psi):
    model = _coloredOnly()
    eps, v = 0.3, np.array([0.5, -1.2])
    av = float(v @ model.exc.a)
    M = np.array([[0.0, 1.0], [-model.kappa ** 2 + eps * av, -2.0 * model.zeta2]])
    q, h = _linearRates(M, psi)
    rates = angleDynamics(model, eps, AngleState(v=v, psi=psi), rawMode=True)
    assert rates.q == pytest.approx(q, abs=1e-14)
    assert rates.h == pytest.approx(h, abs=1e-14)

def test_white_noise_coefficients (referenceModel):
    eps, psi = 0.2, 0.6
    kd = referenceModel.kappaD
    rates = angleDynamics(referenceModel, eps, AngleState(v=[0.0, 0.0], psi=psi))
    s, c = math.sin(psi), math.cos(psi)
    assert rates.gPsi[0] == pytest.approx(eps / kd * c * c)
    assert rates.gLogr[0] == pytest.approx(eps / kd * s * c)
    #Ito correction of log|u| for the white part
    assert rates.q == pytest.approx(-0.1 + 0.5 * (eps / kd) ** 2 * c * c * math.cos(2.0 * psi))

def test_angle_state_wraps ():
    assert AngleState(v=[0.0], psi=-0.5).psi == pytest.approx(2.0 * math.pi - 0.5)
    with pytest.raises(InvalidParam):
        AngleState(v=[math.nan], psi=0.0)

def test_zero_eps_is_exact (referenceModel, shortScheme):
    est = estimateLyapunovAngle(referenceModel, 0.0, shortScheme)
    assert est.value == -0.1
    assert est.stderr == 0.0
    assert est.nTraj == shortScheme.nTraj
    assert est.method == "angle"

def test_zero_eps_lognorm (referenceModel):
    scheme = SimScheme(dt=1e-3, tFinal=20.0, burnIn=1.0, seed=1, nTraj=3)
    est = estimateLyapunovLognorm(referenceModel, 0.0, scheme)
    assert est.value == pytest.approx(-0.1, abs=5e-4)
    assert est.stderr < 1e-12

def test_estimate_is_deterministic (referenceModel, shortScheme):
    first = estimateLyapunovAngle(referenceModel, 0.2, shortScheme)
    second = estimateLyapunovAngle(referenceModel, 0.2, shortScheme)
    other = estimateLyapunovAngle(referenceModel, 0.2, shortScheme.replace(seed=124))
    assert first == second
    assert first.value != other.value
    assert math.isfinite(first.stderr) and first.stderr > 0

def test_lognorm_is_deterministic (referenceModel, shortScheme):
    assert estimateLyapunovLognorm(referenceModel, 0.2, shortScheme) == estimateLyapunovLognorm(referenceModel, 0.2, shortScheme)

def test_single_trajectory_has_zero_stderr (referenceModel, shortScheme):
    est = estimateLyapunovAngle(referenceModel, 0.2, shortScheme.replace(nTraj=1))
    assert est.stderr == 0.0

def test_estimate_dict_keys (referenceModel, shortScheme):
    d = estimateLyapunovAngle(referenceModel, 0.0, shortScheme).toDict()
    assert set(d) == {"value", "stderr", "method", "n_traj", "t_final", "dt", "seed"}
    assert d["seed"] == 123

def test_input_checks (referenceModel, shortScheme):
    with pytest.raises(InvalidParam):
        estimateLyapunovAngle(referenceModel, -0.1, shortScheme)
    with pytest.raises(InvalidParam):
        estimateLyapunovLognorm(referenceModel, 0.1, shortScheme, u0=(0.0, 0.0))
    overdamped = blockEmbedding(ScaledParams(0.2, 0.6, 1.0, 0.5, 1.0, 0.25))
    with pytest.raises(OverdampedPendulum):
        estimateLyapunovAngle(overdamped, 0.1, shortScheme)
    #the plain polar integrand does not need kappa_d
    assert isinstance(estimateLyapunovAngle(overdamped, 0.1, shortScheme, rawMode=True), LyapEstimate)

def test_upper_bound_forms_agree (referenceParams, referenceModel):
    assert upperBound(referenceModel, 1.0) == pytest.approx(blockUpperBound(referenceParams), rel=1e-13)
    assert upperBound(referenceModel, 0.0) == pytest.approx(-0.1)
    assert upperBound(referenceModel, 0.2) > expansion(referenceModel, 0.2)

@pytest.mark.parametrize("params", [
    ScaledParams(0.2, 0.1, 1.0, 0.5, 1.0, 0.25),
    ScaledParams(0.05, 0.05, 1.0, 0.5, 1.0, 0.25),
    ScaledParams(0.3, 0.02, 2.0, 0.8, 0.5, 0.4),
    ScaledParams(0.1, 0.1, 0.7, 1.2, 2.0, 0.1),
    ScaledParams(0.1, 0.01, 1.0, 0.5, 3.0, 0.25),
])
def test_estimate_below_upper_bound (params):
    model = blockEmbedding(params)
    scheme = SimScheme(dt=1e-2, tFinal=50.0, burnIn=5.0, seed=77, nTraj=4)
    est = estimateLyapunovAngle(model, 0.2, scheme)
    assert est.value <= upperBound(model, 0.2) + 3.0 * est.stderr

def test_lognorm_ignores_initial_vector (referenceModel):
    scheme = SimScheme(dt=1e-2, tFinal=400.0, burnIn=5.0, seed=31, nTraj=8)
    first = estimateLyapunovLognorm(referenceModel, 0.3, scheme, u0=(1.0, 0.0))
    second = estimateLyapunovLognorm(referenceModel, 0.3, scheme, u0=(0.0, 1.0))
    assert abs(first.value - second.value) <= first.stderr

def test_angle_ignores_half_turn (referenceModel):
    #u and -u span the same line
    scheme = SimScheme(dt=1e-2, tFinal=400.0, burnIn=5.0, seed=32, nTraj=8)
    first = estimateLyapunovAngle(referenceModel, 0.3, scheme, psi0=0.4)
    second = estimateLyapunovAngle(referenceModel, 0.3, scheme, psi0=0.4 + math.pi)
    assert abs(first.value - second.value) <= first.stderr

def test_white_noise_expansion_closed_form ():
    model = GeneralModel(ou=OuSystem(A=[[-1.0]], B=[[1.0]]), exc=Excitation(a=[0.0], gamma=[1.0]), zeta2=0.1, kappa=1.0)
    assert expansion(model, 0.3) == pytest.approx(-0.1 + 0.09 / (8.0 * 0.99), rel=1e-12)


@pytest.mark.slow
@pytest.mark.parametrize("eps", [0.1, 0.2])
def test_estimators_match_expansion (referenceModel, eps):
    scheme = SimScheme(dt=1e-3, tFinal=2000.0, seed=42, nTraj=32)
    predicted = expansion(referenceModel, eps)
    angle = estimateLyapunovAngle(referenceModel, eps, scheme)
    lognorm = estimateLyapunovLognorm(referenceModel, eps, scheme)
    for est in (angle, lognorm):
        assert abs(est.value - predicted) <= max(3.0 * est.stderr, 5.0 * eps ** 4)
    assert abs(angle.value - lognorm.value) <= 3.0 * math.hypot(angle.stderr, lognorm.stderr) + scheme.dt

@pytest.mark.slow
def test_raw_and_rotated_integrands_agree (referenceModel):
    scheme = SimScheme(dt=1e-3, tFinal=1000.0, seed=8, nTraj=16)
    rotated = estimateLyapunovAngle(referenceModel, 0.2, scheme)
    raw = estimateLyapunovAngle(referenceModel, 0.2, scheme, rawMode=True)
    assert abs(rotated.value - raw.value) <= 4.0 * math.hypot(rotated.stderr, raw.stderr) + 2e-3

@pytest.mark.slow
def test_second_order_coefficient_scaling (referenceModel):
    target = lambda2(referenceModel, 2.0 * referenceModel.kappaD)
    scheme = SimScheme(dt=1e-3, tFinal=2000.0, seed=42, nTraj=32)
    gaps, bars = [], []
    for eps in (0.4, 0.2, 0.1):
        est = estimateLyapunovAngle(referenceModel, eps, scheme)
        gaps.append(abs((est.value + referenceModel.zeta2) / eps ** 2 - target))
        bars.append(3.0 * est.stderr / eps ** 2)
    for coarse, fine, bar in zip(gaps, gaps[1:], bars[1:]):
        assert fine <= coarse + bar
    assert gaps[-1] <= bars[-1] + 5.0 * 0.1 ** 2

@pytest.mark.slow
def test_white_noise_estimate_matches_closed_form ():
    model = GeneralModel(ou=OuSystem(A=[[-1.0]], B=[[1.0]]), exc=Excitation(a=[0.0], gamma=[1.0]), zeta2=0.1, kappa=1.0)
    scheme = SimScheme(dt=1e-2, tFinal=400.0, burnIn=5.0, seed=42, nTraj=8)
    est = estimateLyapunovAngle(model, 0.3, scheme)
    assert abs(est.value - (-0.1 + 0.09 / (8.0 * 0.99))) <= max(3.0 * est.stderr, 1e-3)

@pytest.mark.slow
def test_step_refinement_is_stable (referenceModel):
    coarse = SimScheme(dt=1e-2, tFinal=1000.0, seed=42, nTraj=16)
    fine = coarse.replace(dt=5e-3)
    for estimate in (estimateLyapunovAngle, estimateLyapunovLognorm):
        a = estimate(referenceModel, 0.3, coarse)
        b = estimate(referenceModel, 0.3, fine)
        assert abs(a.value - b.value) <= max(2.0 * math.hypot(a.stderr, b.stderr), 2.0 * coarse.dt)

@pytest.mark.slow
@pytest.mark.parametrize("params", [
    ScaledParams(0.2, 0.1, 1.0, 0.5, 1.0, 0.25),
    ScaledParams(0.05, 0.05, 1.0, 0.5, 1.0, 0.25),
    ScaledParams(0.3, 0.02, 2.0, 0.8, 0.5, 0.4),
    ScaledParams(0.1, 0.1, 0.7, 1.2, 2.0, 0.1),
    ScaledParams(0.1, 0.01, 1.0, 0.5, 3.0, 0.25),
])
def test_both_estimators_respect_upper_bound (params):
    model = blockEmbedding(params)
    scheme = SimScheme(dt=1e-3, tFinal=500.0, seed=42, nTraj=16)
    bound = upperBound(model, 1.0)
    angle = estimateLyapunovAngle(model, 1.0, scheme)
    lognorm = estimateLyapunovLognorm(model, 1.0, scheme)
    for est in (angle, lognorm):
        assert est.value <= bound + 3.0 * est.stderr
    assert abs(angle.value - lognorm.value) <= 3.0 * math.hypot(angle.stderr, lognorm.stderr) + scheme.dt
