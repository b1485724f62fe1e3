import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from stochstab import utils
from stochstab.asymptotics import (
    BoundaryKind,
    BoundaryQuery,
    Lambda2Method,
    Scaling,
    adjointB,
    bilinearAverage,
    bilinearAverageQuadrature,
    blockLambda2,
    boundaryCurve,
    expansion,
    f1Residual,
    floquetExponent,
    lambda2,
    lambda2Sweep,
    noiseBoundaryMinimum,
    periodicForcingAmplitude,
    stabilityBoundary,
)
from stochstab.errors import FrequencyMismatch, InvalidQuery, NotBlockModel
from stochstab.linalg import cosineTransform
from stochstab.model import Excitation, GeneralModel, OuSystem, ScaledParams, blockEmbedding
from stochstab.ou import observablePsd, sampleOuWithIncrements
from stochstab.verify import randomBlockParams


def _randomGeneral (rng, d=3, m=2):
    A = rng.normal(size=(d, d))
    A -= (max(0.0, np.max(np.linalg.eigvals(A).real)) + 0.3) * np.eye(d)
    return GeneralModel(ou=OuSystem(A=A, B=rng.normal(size=(d, m))),
                        exc=Excitation(a=rng.normal(size=d), gamma=rng.normal(size=m)),
                        zeta2=0.1, kappa=0.8)


def test_lambda2_at_block_resonance ():
    model = blockEmbedding(ScaledParams(0.2, 0.1, 1.0, 0.5, 1.0, 0.25))
    for method in Lambda2Method:
        if method is Lambda2Method.ADJOINT:
            continue
        assert lambda2(model, 1.0, method) == pytest.approx(3.125, rel=1e-12)

def test_three_routes_at_reference (referenceModel):
    omega = 2.0 * referenceModel.kappaD
    values = [lambda2(referenceModel, omega, m) for m in Lambda2Method]
    assert values[0] == pytest.approx(3.0927835, rel=1e-6)
    assert max(values) - min(values) <= 1e-9 * max(values)

def test_three_routes_random_models ():
    rng = np.random.default_rng(0)
    for params in randomBlockParams(rng, 100):
        model = blockEmbedding(params)
        omega = 2.0 * model.kappaD
        values = [lambda2(model, omega, m) for m in Lambda2Method]
        assert max(values) - min(values) <= 1e-9 * max(values)

def test_resolvent_and_adjoint_general_models (rng):
    for _ in range(10):
        model = _randomGeneral(rng)
        omega = 2.0 * model.kappaD
        assert lambda2(model, omega, "adjoint") == pytest.approx(lambda2(model, omega, "resolvent"), rel=1e-9)

def test_lambda2_is_velocity_psd (referenceModel):
    for omega in np.linspace(0.1, 5.0, 50):
        velocity = math.pi * observablePsd(referenceModel.ou, [0.0, 1.0], omega)
        assert lambda2(referenceModel, omega) == pytest.approx(velocity, rel=1e-12)

def test_block_closed_form_uses_chi_squared_difference ():
    rng = np.random.default_rng(1)
    for params in randomBlockParams(rng, 20):
        model = blockEmbedding(params)
        for omega in (0.3, 1.1, 2.7):
            velocity = math.pi * observablePsd(model.ou, [0.0, 1.0], omega)
            assert blockLambda2(params, omega) == pytest.approx(velocity, rel=1e-10)

def test_pure_white_excitation ():
    nu = 0.7
    model = GeneralModel(ou=OuSystem(A=[[-1.0]], B=[[0.0]]), exc=Excitation(a=[0.0], gamma=[nu]), zeta2=0.1, kappa=0.6)
    for omega in (0.5, 1.0, 3.0):
        assert lambda2(model, omega) == pytest.approx(nu ** 2 / (2.0 * omega ** 2), rel=1e-13)
    omega = 2.0 * model.kappaD
    assert lambda2(model, omega, "adjoint") == pytest.approx(nu ** 2 / (2.0 * omega ** 2), rel=1e-12)

def test_lambda2_errors (referenceModel, rng):
    with pytest.raises(FrequencyMismatch):
        lambda2(referenceModel, 1.0, Lambda2Method.ADJOINT)
    with pytest.raises(NotBlockModel):
        lambda2(_randomGeneral(rng), 1.0, Lambda2Method.BLOCK)
    with pytest.raises(ValueError):
        lambda2(referenceModel, 1.0, "fourier")

def test_sweep_rows (referenceModel, rng):
    rows = lambda2Sweep(referenceModel, np.linspace(0.1, 5.0, 50))
    assert len(rows) == 50 and len(rows[0]) == 3
    assert all(r[1] == pytest.approx(r[2], rel=1e-10) for r in rows)
    assert len(lambda2Sweep(_randomGeneral(rng), [1.0, 2.0])[0]) == 2


def test_expansion_values (referenceModel):
    assert expansion(referenceModel, 0.2) == pytest.approx(0.023711, abs=5e-7)
    assert expansion(referenceModel, 0.2, Scaling.NOISE_AND_DAMPING) == pytest.approx(0.121, rel=1e-12)
    assert expansion(referenceModel, 0.0) == pytest.approx(-0.1)
    assert expansion(referenceModel, 0.0, "noise_and_damping") == 0.0
    assert expansion(referenceModel, -0.15) == expansion(referenceModel, 0.15)


def test_scalar_adjoint_vector ():
    mu = 0.8
    model = GeneralModel(ou=OuSystem(A=[[-mu]], B=[[1.0]]), exc=Excitation(a=[1.0], gamma=[0.0]), zeta2=0.1, kappa=0.5)
    kd = model.kappaD
    assert adjointB(model).b[0] == pytest.approx(1.0 / (mu + 2j * kd), rel=1e-14)

def test_zero_excitation_adjoint_vector ():
    model = GeneralModel(ou=OuSystem(A=[[-1.0, 0.0], [0.0, -2.0]], B=[[1.0], [1.0]]),
                         exc=Excitation(a=[0.0, 0.0], gamma=[0.0]), zeta2=0.1, kappa=0.5)
    assert np.all(adjointB(model).b == 0)
    assert f1Residual(model, [0.3, -0.2], 1.0) == 0.0

def test_adjoint_real_part_is_cosine_transform (referenceModel):
    kd = referenceModel.kappaD
    b = adjointB(referenceModel).b
    expected = math.pi * cosineTransform(referenceModel.ou.A, 2.0 * kd).T @ referenceModel.exc.a
    assert_allclose(np.real(b), expected, rtol=1e-12, atol=1e-14)

def test_f1_residual_vanishes ():
    rng = np.random.default_rng(7)
    models = [blockEmbedding(p) for p in randomBlockParams(rng, 10)] + [_randomGeneral(rng) for _ in range(10)]
    for model in models:
        assert f1Residual(model, np.zeros(model.ou.dim), 0.3) == 0.0
        for _ in range(100):
            v = rng.normal(size=model.ou.dim) * 3.0
            assert abs(f1Residual(model, v, rng.uniform(0.0, 2.0 * math.pi))) <= 1e-10


def test_bilinear_average_examples (referenceModel):
    assert bilinearAverage(referenceModel.ou, [[1.0, 0.0], [0.0, 0.0]]) == pytest.approx(1.25, rel=1e-13)
    assert bilinearAverage(referenceModel.ou, [[0.0, 2.0], [-2.0, 0.0]]) == pytest.approx(0.0, abs=1e-15)

def test_bilinear_average_by_quadrature (referenceModel, rng):
    for _ in range(3):
        C = rng.normal(size=(2, 2))
        assert bilinearAverageQuadrature(referenceModel.ou, C) == pytest.approx(bilinearAverage(referenceModel.ou, C), rel=1e-6, abs=1e-9)

def test_bilinear_average_along_path (referenceModel):
    C = np.array([[0.5, 0.3], [0.1, 1.0]])
    states, _ = sampleOuWithIncrements(referenceModel.ou, 0.01, 200_000, utils.substream(2, 0, "test"))
    samples = np.einsum("ni,ij,nj->n", states, C, states)
    batches = samples[: 200_000].reshape(20, -1).mean(axis=1)
    stderr = batches.std(ddof=1) / math.sqrt(20)
    assert abs(batches.mean() - bilinearAverage(referenceModel.ou, C)) <= 3.0 * stderr


def test_noise_boundary_example ():
    params = ScaledParams(0.2, 1.0, 1.0, 0.5, 1.0, 0.25)
    assert stabilityBoundary(BoundaryQuery("noise", 0.5), params) == pytest.approx(math.sqrt(0.32), rel=1e-14)

@pytest.mark.parametrize("eps", [0.2, 0.05])
def test_mathieu_boundary_at_resonance (eps):
    params = ScaledParams(0.2, 0.1, 1.0, 0.5, 1.0, 0.25)
    q = BoundaryQuery(BoundaryKind.MATHIEU, kappa=1.0, omega=2.0, eps=eps)
    assert stabilityBoundary(q, params) == pytest.approx(0.4, rel=1e-14)

def test_periodic_boundary_scaling ():
    params = ScaledParams(0.2, 0.1, 1.0, 0.5, 1.0, 0.25)
    mathieu = stabilityBoundary(BoundaryQuery("mathieu", 0.7, 2.0, 0.1), params)
    periodic = stabilityBoundary(BoundaryQuery("periodic", 0.7, 2.0, 0.1), params)
    assert mathieu == pytest.approx(math.sqrt(0.16 + 400.0 * 0.51 ** 2))
    assert periodic == pytest.approx(math.sqrt(9.64) * mathieu / 4.0)

def test_boundary_query_validation ():
    with pytest.raises(InvalidQuery, match="omega is required"):
        BoundaryQuery("mathieu", 0.5, eps=0.1)
    with pytest.raises(InvalidQuery, match="unknown boundary kind"):
        BoundaryQuery("parametric", 0.5)
    with pytest.raises(InvalidQuery):
        BoundaryQuery("noise", -0.5)
    with pytest.raises(InvalidQuery):
        BoundaryQuery("periodic", 0.5, omega=2.0, eps=0.0)

@pytest.mark.parametrize("zeta1", [0.02, 0.05, 0.1, 0.2])
def test_noise_boundary_minimum (zeta1):
    params = ScaledParams(zeta1, 1.0, 1.0, 0.5, 1.0, 0.25)
    kappaStar, nuMin = noiseBoundaryMinimum(params)
    assert kappaStar == pytest.approx(0.5, abs=1e-6)
    assert nuMin == pytest.approx(math.sqrt(8.0 * zeta1 ** 2), abs=1e-8)

def test_boundary_curve_shape ():
    params = ScaledParams(0.1, 1.0, 1.0, 0.5, 1.0, 0.25)
    rows = boundaryCurve("noise", params, np.linspace(0.1, 1.0, 91))
    assert len(rows) == 91
    kappas, values = zip(*rows)
    assert kappas[int(np.argmin(values))] == pytest.approx(0.5)


@pytest.mark.parametrize("nu, unstable", [(0.8, True), (0.2, False)])
def test_floquet_agrees_with_mathieu_boundary (nu, unstable):
    #boundary at kappa = omega/2 is nu_c = 4 zeta2 = 0.4
    exponent = floquetExponent(kappa=1.0, zeta2=0.1, eps=0.05, amplitude=nu, omega=2.0)
    assert (exponent > 0) == unstable

@pytest.mark.parametrize("factor, unstable", [(2.0, True), (0.5, False)])
def test_floquet_agrees_with_periodic_boundary (factor, unstable):
    base = ScaledParams(0.2, 0.1, 1.0, 1.0, 1.0, 0.25)
    nuC = stabilityBoundary(BoundaryQuery("periodic", 1.0, 2.0, 0.05), base)
    params = base.withNu(factor * nuC)
    amplitude = periodicForcingAmplitude(params, 2.0)
    exponent = floquetExponent(kappa=1.0, zeta2=0.1, eps=0.05, amplitude=amplitude, omega=2.0)
    assert (exponent > 0) == unstable
