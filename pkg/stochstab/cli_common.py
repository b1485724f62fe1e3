# cli_common.py

'''
cli_common.py

Purpose: Shared command-line argument parser for autolyap.py.
'''

import argparse

from .commands import COMMANDS

def _epsList (text):
    #comma-separated list of numbers, e.g. "0.1,0.2"
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--eps expects comma-separated numbers, got '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("--eps needs at least one value")
    return values

def _seed (text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--seed expects an unsigned 64-bit integer, got '{text}'")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"--seed must lie in [0, 2^64), got {value}")
    return value

def buildAutolyapArgparser ():
    '''
    Build an ArgumentParser for autolyap.py.
    Inputs: None
    Outputs: argparse.ArgumentParser object
    '''
    p = argparse.ArgumentParser(
        prog="autolyap",
        description="Lyapunov exponents, stability boundaries and simulations of the noise-driven block-pendulum.",
    )
    p.add_argument("command", choices=COMMANDS, help="What to run.")
    p.add_argument("--config", required=True, help="Run configuration (YAML, or JSON with a .json suffix).")
    p.add_argument("--out", default=None, help="Output directory (overrides options.out).")
    p.add_argument("--seed", type=_seed, default=None, help="Master seed (overrides scheme.seed).")
    p.add_argument("--eps", type=_epsList, default=None, help='Comma-separated eps values, e.g. "0.1,0.2".')
    p.add_argument("--method", choices=("angle", "lognorm"), default=None, help="Monte Carlo estimator for estimate.")
    p.add_argument("--kind", choices=("noise", "mathieu", "periodic"), default=None, help="Boundary kind for boundary.")
    p.add_argument("--verbose", action="store_true", help="Debug-level logging.")
    return p
