# autolyap.py

'''
autolyap.py

User-facing entrypoint for the stochastic stability toolkit.

This script:
- Parses command-line arguments.
- Loads and validates the run configuration, applying flag overrides.
- Calls runAutolyap() to dispatch one subcommand:
  - lambda2-sweep, boundary, estimate, simulate, psd, verify.

Exit codes: 0 success, 1 invalid input or config, 2 numerical failure, 3 verify suite failed.
'''

import sys

from stochstab import commands, config, utils
from stochstab.cli_common import buildAutolyapArgparser
from stochstab.errors import EXIT_VALIDATION, StochStabError, exitCodeFor

logger = utils.getLogger("stochstab.autolyap")


def runAutolyap (args):
    '''
    Load the config, apply overrides and run the command.
    Inputs: args (Namespace)
    Outputs: int exit code
    '''
    utils.setVerbosity(args.verbose)
    cfg = config.loadConfig(args.config)
    cfg = cfg.withOverrides(seed=args.seed, eps=args.eps, method=args.method, kind=args.kind, out=args.out)
    return commands.run(cfg, args.command)

def main (argv=None):
    '''
    Entry point for the script.
    '''
    parser = buildAutolyapArgparser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        #bad flags are input errors; --help exits 0
        return EXIT_VALIDATION if e.code else 0
    try:
        code = runAutolyap(args)
    except StochStabError as e:
        logger.error("%s", e)
        code = exitCodeFor(e)
    return code

if __name__ == "__main__":
    sys.exit(main())
