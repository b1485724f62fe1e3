import numpy as np

from stochstab.config import loadConfig
from stochstab.model import blockEmbedding
from stochstab.verify import (
    REFERENCE,
    checkEstimatorAgreement,
    checkNoiseBoundaryZero,
    checkParseval,
    checkPsdNonnegative,
    randomBlockParams,
    randomGeneralModels,
    randomHurwitz,
    runVerify,
)


def test_random_params_are_underdamped ():
    for p in randomBlockParams(np.random.default_rng(5), 50):
        assert p.kappaD > 0
        assert 0.0 < p.rMass < 1.0

def test_random_general_models_are_hurwitz ():
    rng = np.random.default_rng(6)
    for m in randomGeneralModels(rng, 30):
        assert np.max(np.linalg.eigvals(m.ou.A).real) <= -0.2 + 1e-12
        assert m.kappaD > 0
    assert np.max(np.linalg.eigvals(randomHurwitz(rng, 4)).real) < 0

def test_suite_passes ():
    report = runVerify(seed=42)
    failed = [c.name for c in report.checks if not c.ok]
    assert report.passed, failed
    payload = report.toDict()
    assert payload["passed"] is True
    assert len(payload["checks"]) == 21
    names = {c.name for c in report.checks}
    assert {"cosine transform vs quadrature", "Lyapunov solve vs quadrature", "observable PSD nonnegative",
            "Parseval for the OU spectrum", "compound vs simple pendulum", "one-step energy drift",
            "angle vs lognorm estimator"} <= names

def test_general_config_joins_general_corpus (configDir):
    cfg = loadConfig(configDir / "general_example.json")
    report = runVerify(cfg)
    assert report.passed, [c.name for c in report.checks if not c.ok]
    routes = next(c for c in report.checks if c.name == "lambda2 resolvent vs adjoint")
    assert routes.detail == "21 general models"

def test_parseval_on_reference_block ():
    result = checkParseval([blockEmbedding(REFERENCE).ou])
    assert result.ok and result.worst < 0.01

def test_psd_nonnegative_small_sample ():
    assert checkPsdNonnegative(np.random.default_rng(2), n=50).ok

def test_expansion_vanishes_on_noise_boundary ():
    assert checkNoiseBoundaryZero([REFERENCE] + randomBlockParams(np.random.default_rng(3), 10)).ok

def test_agreement_skips_zero_excitation ():
    result = checkEstimatorAgreement([blockEmbedding(REFERENCE.withNu(0.0))], seed=1)
    assert result.ok and result.worst == 0.0

def test_reference_constants ():
    assert (REFERENCE.zeta1, REFERENCE.zeta2, REFERENCE.chi, REFERENCE.kappa, REFERENCE.nu, REFERENCE.rMass) == (0.2, 0.1, 1.0, 0.5, 1.0, 0.25)
