# config.py

'''
config.py

Purpose: Parse and validate a run configuration file
Output: A RunConfig holding the model (as a GeneralModel, plus the ScaledParams when the model is a
        block-pendulum), the simulation scheme and the command options.
- Strict: unknown keys are rejected, and every problem found is reported together in one
  ConfigValidationError, each line naming the offending key.
- .json files go through the json module, anything else through yaml.safe_load.
'''

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional
import json

import numpy as np
import yaml

from . import utils
from .errors import ConfigIoError, ConfigValidationError, ParseError, StochStabError
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

logger = utils.getLogger(__name__)

#Field sets of the four model forms: config key -> constructor argument
MODEL_FIELDS = {
    "physical": {"m1": "m1", "m2": "m2", "c1": "c1", "c2": "c2", "k1": "k1", "ell": "ell", "g": "g",
                 "nu_hat": "nuHat"},
    "compound": {"m1": "m1", "m2": "m2", "c1": "c1", "c2": "c2", "k1": "k1", "g": "g", "nu_hat": "nuHat",
                 "I": "inertia", "d": "d"},
    "scaled": {"zeta1": "zeta1", "zeta2": "zeta2", "chi": "chi", "kappa": "kappa", "nu": "nu",
               "r_mass": "rMass"},
    "general": {"A": "A", "B": "B", "a": "a", "gamma": "gamma", "zeta2": "zeta2", "kappa": "kappa"},
}

SCHEME_FIELDS = {"dt": "dt", "t_final": "tFinal", "burn_in": "burnIn", "seed": "seed", "n_traj": "nTraj"}

#Documented defaults of the scheme section (burn_in None = 5% of t_final, i.e. 50 for the default horizon)
SCHEME_DEFAULTS = {"dt": 1e-3, "tFinal": 1000.0, "burnIn": None, "seed": 42, "nTraj": 16}

OPTION_KEYS = ("omegas", "eps", "kind", "kappas", "zeta1_list", "eps_list", "omega", "method",
               "delta_list", "kernels", "u0", "beta", "record_every", "out")

@dataclass
class RunOptions :
    '''Command options; list-valued entries are already expanded.'''
    omegas: List[float] = field(default_factory=lambda: list(np.linspace(0.1, 5.0, 50)))
    eps: List[float] = field(default_factory=lambda: [0.1, 0.2])
    kind: str = "noise"
    kappas: List[float] = field(default_factory=lambda: list(np.linspace(0.1, 1.0, 91)))
    zeta1List: Optional[List[float]] = None
    epsList: Optional[List[float]] = None
    omega: Optional[float] = None
    method: str = "angle"
    deltaList: List[float] = field(default_factory=lambda: [0.2, 0.1, 0.05])
    kernels: List[str] = field(default_factory=lambda: ["box"])
    u0: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.1, 0.0])
    beta: float = 0.01
    recordEvery: int = 10
    out: str = "results"

@dataclass
class RunConfig :
    '''
    Fully validated run configuration.
    modelKind is the top-level model key; params is set for every form except "general".
    '''
    modelKind: str
    model: GeneralModel
    params: Optional[ScaledParams]
    scheme: SimScheme
    options: RunOptions
    source: Optional[Path] = None

    def withOverrides (self, seed=None, eps=None, method=None, kind=None, out=None):
        '''
        Apply command-line overrides; None leaves the config value.
        Outputs: RunConfig
        '''
        scheme = self.scheme if seed is None else _guard(lambda: self.scheme.replace(seed=seed), "--seed")
        options = self.options
        changes = {}
        if eps is not None:
            changes["eps"] = list(eps)
        if method is not None:
            changes["method"] = method
        if kind is not None:
            changes["kind"] = kind
        if out is not None:
            changes["out"] = str(out)
        if changes:
            options = replace(options, **changes)
        return replace(self, scheme=scheme, options=options)

def _guard (build, where):
    try:
        return build()
    except StochStabError as e:
        raise ConfigValidationError(f"{where}: {e}")


def _readMapping (path: Path):
    #reads the file and returns the top-level mapping
    if not path.exists():
        raise ConfigIoError(f"Config file not found: {path}")
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigIoError(f"Could not read config {path}: {e}")

    try:
        if path.suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ParseError(f"Malformed config {path}: {e}")

    if not isinstance(data, dict):
        raise ParseError(f"Config {path} must hold a mapping at the top level")
    return data

def _isNumber (x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)

def _numberList (value, where, errors):
    #a number, a list of numbers, or {start, stop, num} expanded with linspace
    if _isNumber(value):
        return [float(value)]
    if isinstance(value, dict):
        unknown = set(value) - {"start", "stop", "num"}
        if unknown or set(value) != {"start", "stop", "num"}:
            errors.append(f"{where}: range must have exactly the keys start, stop, num")
            return None
        if not (_isNumber(value["start"]) and _isNumber(value["stop"])) or not isinstance(value["num"], int) \
                or isinstance(value["num"], bool) or value["num"] < 1:
            errors.append(f"{where}: start/stop must be numbers and num a positive integer")
            return None
        return [float(x) for x in np.linspace(value["start"], value["stop"], value["num"])]
    if isinstance(value, list) and value and all(_isNumber(x) for x in value):
        return [float(x) for x in value]
    errors.append(f"{where}: expected a number, a non-empty list of numbers or a start/stop/num range, got {value!r}")
    return None

def _checkKeys (section, allowed, where, errors):
    for key in section:
        if key not in allowed:
            errors.append(f"{where}: unknown key '{key}'")


def _buildModel (kind, section, errors):
    '''
    Build (GeneralModel, ScaledParams or None) from one model section; problems go to errors.
    '''
    fields = MODEL_FIELDS[kind]
    if not isinstance(section, dict):
        errors.append(f"{kind}: expected a mapping of parameters")
        return None, None
    _checkKeys(section, fields, kind, errors)
    missing = [k for k in fields if k not in section]
    for key in missing:
        errors.append(f"{kind}.{key}: required key is missing")
    if missing:
        return None, None

    kwargs = {}
    for key, arg in fields.items():
        value = section[key]
        if kind == "general" and key in ("A", "B", "a", "gamma"):
            try:
                kwargs[arg] = np.asarray(value, dtype=float)
            except (TypeError, ValueError):
                errors.append(f"{kind}.{key}: expected numbers, got {value!r}")
        elif not _isNumber(value):
            errors.append(f"{kind}.{key}: expected a number, got {value!r}")
        else:
            kwargs[arg] = float(value)
    if len(kwargs) != len(fields):
        return None, None

    try:
        if kind == "physical":
            params = physicalToScaled(PhysicalParams(**kwargs))
        elif kind == "compound":
            params = compoundToScaled(CompoundParams(**kwargs))
        elif kind == "scaled":
            params = ScaledParams(**kwargs)
        else:
            params = None
            model = GeneralModel(
                ou=OuSystem(A=kwargs["A"], B=kwargs["B"]),
                exc=Excitation(a=kwargs["a"], gamma=kwargs["gamma"]),
                zeta2=kwargs["zeta2"],
                kappa=kwargs["kappa"],
            )
    except StochStabError as e:
        errors.append(f"{kind}: {e}")
        return None, None

    if params is not None:
        try:
            model = blockEmbedding(params)
        except StochStabError as e:
            errors.append(f"{kind}: {e}")
            return None, None
    else:
        report = model.ou.validate()
        if report.spectralAbscissa >= 0.0:
            errors.append(f"general.A: drift matrix is not Hurwitz (spectral abscissa {report.spectralAbscissa:.6g} >= 0)")
        if report.controllabilityRank != model.ou.dim:
            errors.append(f"general.B: (A, B) is not controllable (rank {report.controllabilityRank} < {model.ou.dim})")
    return model, params

def _buildScheme (section, errors):
    if section is None:
        section = {}
    if not isinstance(section, dict):
        errors.append("scheme: expected a mapping")
        return None
    _checkKeys(section, SCHEME_FIELDS, "scheme", errors)
    kwargs = dict(SCHEME_DEFAULTS)
    for key, arg in SCHEME_FIELDS.items():
        if key not in section:
            continue
        value = section[key]
        if key in ("seed", "n_traj"):
            if not isinstance(value, int) or isinstance(value, bool):
                errors.append(f"scheme.{key}: expected an integer, got {value!r}")
                continue
        elif not _isNumber(value):
            errors.append(f"scheme.{key}: expected a number, got {value!r}")
            continue
        kwargs[arg] = value
    try:
        return SimScheme(**kwargs)
    except StochStabError as e:
        errors.append(f"scheme: {e}")
        return None

def _buildOptions (section, errors):
    options = RunOptions()
    if section is None:
        return options
    if not isinstance(section, dict):
        errors.append("options: expected a mapping")
        return options
    _checkKeys(section, OPTION_KEYS, "options", errors)

    for key, attr in (("omegas", "omegas"), ("eps", "eps"), ("kappas", "kappas"), ("zeta1_list", "zeta1List"),
                      ("eps_list", "epsList"), ("delta_list", "deltaList"), ("u0", "u0")):
        if key in section:
            values = _numberList(section[key], f"options.{key}", errors)
            if values is not None:
                setattr(options, attr, values)
    if len(options.u0) != 4:
        errors.append(f"options.u0: expected 4 numbers (v1, v2, u1, u2), got {len(options.u0)}")

    for key, attr in (("omega", "omega"), ("beta", "beta")):
        if key in section:
            if _isNumber(section[key]) and section[key] > 0:
                setattr(options, attr, float(section[key]))
            else:
                errors.append(f"options.{key}: expected a positive number, got {section[key]!r}")

    choices = {"kind": ("noise", "mathieu", "periodic"), "method": ("angle", "lognorm")}
    for key, allowed in choices.items():
        if key in section:
            if section[key] in allowed:
                setattr(options, key, section[key])
            else:
                errors.append(f"options.{key}: must be one of {', '.join(allowed)}, got {section[key]!r}")

    if "kernels" in section:
        kernels = section["kernels"]
        if isinstance(kernels, str):
            kernels = [kernels]
        if isinstance(kernels, list) and kernels and all(k in ("box", "triangle") for k in kernels):
            options.kernels = list(kernels)
        else:
            errors.append(f"options.kernels: expected box and/or triangle, got {section['kernels']!r}")

    if "record_every" in section:
        value = section["record_every"]
        if isinstance(value, int) and not isinstance(value, bool) and value >= 1:
            options.recordEvery = value
        else:
            errors.append(f"options.record_every: expected a positive integer, got {value!r}")

    if "out" in section:
        if isinstance(section["out"], str) and section["out"].strip():
            options.out = section["out"]
        else:
            errors.append(f"options.out: expected a directory path, got {section['out']!r}")
    return options


def loadConfig (path) -> RunConfig:
    '''
    Function: loadConfig
    Purpose: Reads a run config and converts it into a validated RunConfig
    - Exactly one model key (physical, compound, scaled, general); optional scheme and options
      sections with documented defaults. Collects every problem before raising.
    Inputs: path (Path or str)
    Outputs: RunConfig (raises ParseError, ConfigValidationError or ConfigIoError)
    '''
    path = Path(path)
    data = _readMapping(path)
    errors: List[str] = []

    _checkKeys(data, list(MODEL_FIELDS) + ["scheme", "options"], "config", errors)
    modelKeys = [k for k in MODEL_FIELDS if k in data]
    model = params = None
    kind = None
    if len(modelKeys) != 1:
        errors.append(f"config: expected exactly one model key out of {', '.join(MODEL_FIELDS)}, found {modelKeys or 'none'}")
    else:
        kind = modelKeys[0]
        model, params = _buildModel(kind, data[kind], errors)

    scheme = _buildScheme(data.get("scheme"), errors)
    options = _buildOptions(data.get("options"), errors)

    if errors:
        raise ConfigValidationError(f"Config validation failed for {path}:\n" + "\n".join(errors))

    logger.info("loaded %s model from %s", kind, path)
    return RunConfig(modelKind=kind, model=model, params=params, scheme=scheme, options=options, source=path)
