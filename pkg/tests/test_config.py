import json

import numpy as np
import pytest

from stochstab.config import RunOptions, loadConfig
from stochstab.errors import ConfigIoError, ConfigValidationError, ParseError


SCALED = """
scaled:
  zeta1: 0.2
  zeta2: 0.1
  chi: 1.0
  kappa: 0.5
  nu: 1.0
  r_mass: {r_mass}
"""

def _write (tmp_path, text, name="run.yml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_minimal_scaled_config_defaults (tmp_path):
    cfg = loadConfig(_write(tmp_path, SCALED.format(r_mass=0.25)))
    assert cfg.modelKind == "scaled"
    assert cfg.params.rMass == 0.25 and cfg.model.isBlock
    assert cfg.scheme.dt == 1e-3
    assert cfg.scheme.tFinal == 1000.0
    assert cfg.scheme.burnIn == pytest.approx(50.0)
    assert cfg.scheme.seed == 42 and cfg.scheme.nTraj == 16
    assert cfg.options == RunOptions()
    assert len(cfg.options.omegas) == 50

def test_bad_mass_ratio (tmp_path):
    with pytest.raises(ConfigValidationError, match=r"r_mass must lie in \(0,1\)"):
        loadConfig(_write(tmp_path, SCALED.format(r_mass=1.2)))

def test_errors_are_collected (tmp_path):
    text = SCALED.format(r_mass=0.25) + "scheme:\n  dt: 1.0e-3\n  steps: 10\noptions:\n  method: euler\n  colour: red\n"
    with pytest.raises(ConfigValidationError) as info:
        loadConfig(_write(tmp_path, text))
    message = str(info.value)
    assert "scheme: unknown key 'steps'" in message
    assert "options.method" in message
    assert "options: unknown key 'colour'" in message

def test_missing_model_key (tmp_path):
    with pytest.raises(ConfigValidationError, match="exactly one model key"):
        loadConfig(_write(tmp_path, "scheme:\n  dt: 0.01\n"))

def test_missing_parameter (tmp_path):
    with pytest.raises(ConfigValidationError, match=r"scaled\.nu: required key is missing"):
        loadConfig(_write(tmp_path, "scaled: {zeta1: 0.2, zeta2: 0.1, chi: 1.0, kappa: 0.5, r_mass: 0.25}\n"))

def test_general_model_not_hurwitz (tmp_path):
    payload = {"general": {"A": [[0.1, 0.0], [0.0, -1.0]], "B": [[1.0], [1.0]], "a": [1.0, 0.0],
                           "gamma": [0.0], "zeta2": 0.1, "kappa": 1.0}}
    with pytest.raises(ConfigValidationError, match="spectral abscissa"):
        loadConfig(_write(tmp_path, json.dumps(payload), "g.json"))

def test_general_model_not_controllable (tmp_path):
    payload = {"general": {"A": [[-1.0, 0.0], [0.0, -2.0]], "B": [[1.0], [0.0]], "a": [1.0, 0.0],
                           "gamma": [0.0], "zeta2": 0.1, "kappa": 1.0}}
    with pytest.raises(ConfigValidationError, match="not controllable"):
        loadConfig(_write(tmp_path, json.dumps(payload), "g.json"))

def test_malformed_json (tmp_path):
    with pytest.raises(ParseError):
        loadConfig(_write(tmp_path, '{"scaled": {', "bad.json"))

def test_malformed_yaml (tmp_path):
    with pytest.raises(ParseError):
        loadConfig(_write(tmp_path, "scaled: [1, 2\n"))

def test_top_level_must_be_mapping (tmp_path):
    with pytest.raises(ParseError):
        loadConfig(_write(tmp_path, "- 1\n- 2\n"))

def test_missing_file (tmp_path):
    with pytest.raises(ConfigIoError):
        loadConfig(tmp_path / "absent.yml")

def test_physical_model_is_converted (tmp_path):
    text = "physical: {m1: 3.0, m2: 1.0, c1: 0.0, c2: 0.0, k1: 4.0, ell: 1.0, g: 1.0, nu_hat: 2.0}\n"
    cfg = loadConfig(_write(tmp_path, text))
    assert cfg.params.chi == pytest.approx(1.0)
    assert cfg.params.nu == pytest.approx(0.5)

def test_compound_inertia_key (tmp_path):
    text = "compound: {m1: 1.0, m2: 1.0, c1: 0.0, c2: 0.0, k1: 1.0, g: 1.0, nu_hat: 1.0, I: 0.5, d: 1.0}\n"
    with pytest.raises(ConfigValidationError, match="effective length"):
        loadConfig(_write(tmp_path, text))

def test_option_ranges_and_lists (tmp_path):
    text = SCALED.format(r_mass=0.25) + "options:\n  kappas: {start: 0.1, stop: 1.0, num: 10}\n  eps: 0.3\n  kernels: triangle\n"
    cfg = loadConfig(_write(tmp_path, text))
    assert cfg.options.kappas == pytest.approx(list(np.linspace(0.1, 1.0, 10)))
    assert cfg.options.eps == [0.3]
    assert cfg.options.kernels == ["triangle"]

def test_bad_range (tmp_path):
    text = SCALED.format(r_mass=0.25) + "options:\n  kappas: {start: 0.1, stop: 1.0}\n"
    with pytest.raises(ConfigValidationError, match="options.kappas"):
        loadConfig(_write(tmp_path, text))

def test_scheme_types (tmp_path):
    text = SCALED.format(r_mass=0.25) + "scheme:\n  seed: 1.5\n  dt: fast\n"
    with pytest.raises(ConfigValidationError) as info:
        loadConfig(_write(tmp_path, text))
    assert "scheme.seed" in str(info.value) and "scheme.dt" in str(info.value)

def test_overrides (tmp_path):
    cfg = loadConfig(_write(tmp_path, SCALED.format(r_mass=0.25)))
    changed = cfg.withOverrides(seed=7, eps=[0.0], method="lognorm", kind="mathieu", out=tmp_path / "o")
    assert changed.scheme.seed == 7
    assert changed.options.eps == [0.0]
    assert changed.options.method == "lognorm"
    assert changed.options.kind == "mathieu"
    assert changed.options.out == str(tmp_path / "o")
    assert cfg.scheme.seed == 42
    assert cfg.withOverrides() == cfg

def test_shipped_configs_load (configDir):
    files = sorted(p for p in configDir.iterdir() if p.suffix in (".yml", ".yaml", ".json"))
    assert files
    for path in files:
        cfg = loadConfig(path)
        assert cfg.model is not None
