# commands.py

'''
commands.py

Purpose: One runner per autolyap subcommand. Each runner takes a validated RunConfig, delegates
         to the numerical modules and writes its CSV/JSON outputs into options.out.
- run() dispatches on the command name and returns the process exit code
  (0, or 3 when the verify suite fails). Errors propagate to autolyap.main.
'''

from dataclasses import replace
from pathlib import Path

from . import asymptotics, khasminskii, nonlinear, ou, utils, verify
from .errors import EXIT_VERIFY, ConfigValidationError, InvalidParam

logger = utils.getLogger(__name__)

COMMANDS = ("lambda2-sweep", "boundary", "estimate", "simulate", "psd", "verify")

def _needBlock (cfg, command):
    if cfg.params is None:
        raise ConfigValidationError(f"{command} needs a block-pendulum model (physical, compound or scaled), got '{cfg.modelKind}'")
    return cfg.params

def _label (name, value):
    return f"{name}_{value:g}"


def runLambda2Sweep (cfg, outDir):
    '''
    Write lambda2_sweep.csv: omega, lambda2_resolvent and, for block models, lambda2_block.
    '''
    rows = asymptotics.lambda2Sweep(cfg.model, cfg.options.omegas)
    header = ["omega", "lambda2_resolvent"]
    if cfg.model.isBlock:
        header.append("lambda2_block")
    path = utils.writeCsv(outDir / "lambda2_sweep.csv", header, rows)
    logger.info("wrote %s", path)
    return [path]

def runBoundary (cfg, outDir):
    '''
    Function: runBoundary
    Purpose: One "kappa,nu_c" CSV per curve
    - noise: one curve per zeta1 in options.zeta1_list (default: the model's zeta1).
    - mathieu/periodic: one curve per eps in options.eps_list (default: options.eps), at options.omega.
    Inputs: cfg (RunConfig), outDir (Path)
    Outputs: list of written paths
    '''
    params = _needBlock(cfg, "boundary")
    opts = cfg.options
    kind = asymptotics.BoundaryKind(opts.kind)
    paths = []

    if kind is asymptotics.BoundaryKind.NOISE:
        for zeta1 in (opts.zeta1List or [params.zeta1]):
            curveParams = replace(params, zeta1=zeta1)
            rows = asymptotics.boundaryCurve(kind, curveParams, opts.kappas)
            kappaStar, nuMin = asymptotics.noiseBoundaryMinimum(curveParams)
            logger.info("zeta1=%g: minimum nu_c=%.10g at kappa=%.10g", zeta1, nuMin, kappaStar)
            paths.append(utils.writeCsv(outDir / f"boundary_noise_{_label('zeta1', zeta1)}.csv", ["kappa", "nu_c"], rows))
    else:
        if opts.omega is None:
            raise ConfigValidationError(f"options.omega is required for a {kind.value} boundary")
        for eps in (opts.epsList or opts.eps):
            if not eps > 0:
                raise InvalidParam(f"{kind.value} boundary needs eps > 0, got {eps}")
            rows = asymptotics.boundaryCurve(kind, params, opts.kappas, omega=opts.omega, eps=eps)
            paths.append(utils.writeCsv(outDir / f"boundary_{kind.value}_{_label('eps', eps)}.csv", ["kappa", "nu_c"], rows))

    for p in paths:
        logger.info("wrote %s", p)
    return paths

def runEstimate (cfg, outDir):
    '''
    Function: runEstimate
    Purpose: Monte Carlo lambda(eps) for every eps in options.eps, with the expansion prediction
             and the upper bound alongside; written to estimate.json
    Inputs: cfg (RunConfig), outDir (Path)
    Outputs: list of written paths
    '''
    opts = cfg.options
    method = khasminskii.Method(opts.method)
    entries = []
    for eps in opts.eps:
        if method is khasminskii.Method.ANGLE:
            est = khasminskii.estimateLyapunovAngle(cfg.model, eps, cfg.scheme)
        else:
            est = khasminskii.estimateLyapunovLognorm(cfg.model, eps, cfg.scheme)
        entry = est.toDict()
        entry["eps"] = float(eps)
        entry["expansion"] = asymptotics.expansion(cfg.model, eps)
        entry["upper_bound"] = khasminskii.upperBound(cfg.model, eps)
        if entry["value"] > entry["upper_bound"] + 3.0 * entry["stderr"]:
            logger.warning("estimate %.6g at eps=%g is above the upper bound %.6g", entry["value"], eps, entry["upper_bound"])
        entries.append(entry)

    payload = {
        "seed": int(cfg.scheme.seed),
        "method": method.value,
        "model": cfg.modelKind,
        "estimates": entries,
    }
    path = utils.writeJson(outDir / "estimate.json", payload)
    logger.info("wrote %s", path)
    return [path]

def runSimulate (cfg, outDir):
    '''
    Write path.csv (t, v1, v2, u1, u2) for one nonlinear path from options.u0, thinned by options.record_every.
    '''
    params = _needBlock(cfg, "simulate")
    U0 = nonlinear.NonlinearState(*cfg.options.u0)
    path = nonlinear.simulateNonlinear(params, cfg.scheme, U0, recordEvery=cfg.options.recordEvery)
    rows = ([t, *state] for t, state in zip(path.times, path.states))
    out = utils.writeCsv(outDir / "path.csv", ["t", "v1", "v2", "u1", "u2"], rows)
    logger.info("wrote %s", out)
    return [out]

def runPsd (cfg, outDir):
    '''
    Function: runPsd
    Purpose: Mollified PSD of the excitation against its delta -> 0 limit
    - One row per (kernel, delta) at options.omega (default 2 kappa), written to psd.csv.
    Inputs: cfg (RunConfig), outDir (Path)
    Outputs: list of written paths
    '''
    opts = cfg.options
    omega = opts.omega if opts.omega is not None else 2.0 * cfg.model.kappa
    analytic = ou.xiPsdLimit(cfg.model, omega)
    rows = []
    for kind in opts.kernels:
        for delta in opts.deltaList:
            kernel = ou.MollifierKernel(kind=kind, delta=delta)
            est = ou.xiPsdMollified(cfg.model, omega, kernel, cfg.scheme)
            rows.append([omega, delta, kind, analytic, est.value, est.stderr])
            logger.info("%s kernel, delta=%g: %.6g +/- %.2g (limit %.6g)", kind, delta, est.value, est.stderr, analytic)
    path = utils.writeCsv(outDir / "psd.csv", ["omega", "delta", "kernel", "analytic", "mollified", "stderr"], rows)
    logger.info("wrote %s", path)
    return [path]

def runVerifySuite (cfg, outDir):
    '''Run the invariant suite and write verify.json; returns (paths, passed).'''
    report = verify.runVerify(cfg)
    path = utils.writeJson(outDir / "verify.json", report.toDict())
    logger.info("wrote %s", path)
    return [path], report.passed


def run (cfg, command):
    '''
    Function: run
    Purpose: Dispatch one subcommand on a validated config
    - Prints the resolved master seed first.
    Inputs: cfg (RunConfig), command (str, one of COMMANDS)
    Outputs: int exit code
    '''
    if command not in COMMANDS:
        raise InvalidParam(f"unknown command '{command}' (expected one of {', '.join(COMMANDS)})")
    print(f"seed: {cfg.scheme.seed}")
    outDir = Path(cfg.options.out)
    utils.ensureDir(outDir)

    if command == "verify":
        _, passed = runVerifySuite(cfg, outDir)
        return 0 if passed else EXIT_VERIFY

    runners = {
        "lambda2-sweep": runLambda2Sweep,
        "boundary": runBoundary,
        "estimate": runEstimate,
        "simulate": runSimulate,
        "psd": runPsd,
    }
    runners[command](cfg, outDir)
    return 0
