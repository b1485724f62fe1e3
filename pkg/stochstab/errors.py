# errors.py

'''
errors.py

Purpose: Named error kinds raised across the toolkit.
- They subclass the built-in exceptions so callers that only know about ValueError
  or RuntimeError still catch them. The CLI uses the StochStabError base to pick an exit code.
'''


class StochStabError (Exception):
    '''Base class of every error raised by the toolkit.'''


#Bad inputs (parameters, shapes, queries, configs)
class InvalidParam (StochStabError, ValueError):
    pass

class InvalidMassRatio (InvalidParam):
    pass

class InvalidQuery (InvalidParam):
    pass

class DimensionMismatch (StochStabError, ValueError):
    pass

class EffectiveLengthViolation (InvalidParam):
    pass

class NotBlockModel (StochStabError, ValueError):
    pass

class FrequencyMismatch (StochStabError, ValueError):
    pass

class KernelTooNarrow (StochStabError, ValueError):
    pass


#Inputs that are well-formed but outside the regime a computation needs
class NonHurwitz (StochStabError, ValueError):
    '''Drift matrix has an eigenvalue with nonnegative real part; no stationary measure.'''

class OverdampedPendulum (StochStabError, ValueError):
    '''zeta2 >= kappa, so the damped frequency kappa_d is not real and positive.'''


#Numerical failures at run time
class NumericalBlowup (StochStabError, RuntimeError):
    '''Simulated state left the representable range; the step size is too large.'''

class SingularResolvent (StochStabError, RuntimeError):
    pass

class LyapunovSolveFailed (StochStabError, RuntimeError):
    '''Kronecker solve of A R + R A^T = -M left a residual above tolerance.'''


#Config file problems
class ParseError (StochStabError, ValueError):
    pass

class ConfigValidationError (StochStabError, ValueError):
    pass

class ConfigIoError (StochStabError, OSError):
    pass


#Exit codes used by autolyap.py
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3

NUMERICAL_ERRORS = (NumericalBlowup, SingularResolvent, LyapunovSolveFailed, NonHurwitz, OverdampedPendulum)


def exitCodeFor (err):
    '''
    Map a toolkit exception to the CLI exit code.
    Inputs: err (Exception)
    Outputs: int
    '''
    if isinstance(err, NUMERICAL_ERRORS):
        return EXIT_NUMERICAL
    return EXIT_VALIDATION
