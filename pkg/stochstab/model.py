# model.py

'''
model.py

Purpose: Parameter containers and conversions for the block-pendulum system
Output: ScaledParams (the five scaled constants plus the mass ratio), and the GeneralModel that
        describes a pendulum parametrically excited by xi = <a, v> + <gamma, dW/dt> where v is an
        Ornstein-Uhlenbeck process dv = A v dt + B dW.
- The block-pendulum embeds into the general frame through blockEmbedding().
'''

from dataclasses import dataclass, field
from typing import Optional
import math

import numpy as np

from .errors import (
    DimensionMismatch,
    EffectiveLengthViolation,
    InvalidMassRatio,
    InvalidParam,
    OverdampedPendulum,
)
from .linalg import asRect, asSquare, validateOuSystem, requireHurwitz


def _requirePositive (name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise InvalidParam(f"{name} must be a positive finite number, got {value!r}")

def _requireNonNegative (name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
        raise InvalidParam(f"{name} must be a nonnegative finite number, got {value!r}")


@dataclass(frozen=True)
class PhysicalParams :
    '''
    Physical constants of the block (mass m1, damping c1, spring k1) and the simple pendulum
    (bob mass m2, damping c2, length ell) under gravity g, with noise intensity nuHat.
    Damping coefficients may be zero (undamped limit); everything else must be positive.
    '''
    m1: float
    m2: float
    c1: float
    c2: float
    k1: float
    ell: float
    g: float
    nuHat: float

    def __post_init__ (self):
        for name in ("m1", "m2", "k1", "ell", "g", "nuHat"):
            _requirePositive(name, getattr(self, name))
        for name in ("c1", "c2"):
            _requireNonNegative(name, getattr(self, name))

@dataclass(frozen=True)
class CompoundParams :
    '''Physical constants with a compound pendulum: moment of inertia about the pivot and pivot-to-centre distance d.'''
    m1: float
    m2: float
    c1: float
    c2: float
    k1: float
    g: float
    nuHat: float
    inertia: float
    d: float

    def __post_init__ (self):
        for name in ("m1", "m2", "k1", "g", "nuHat", "inertia", "d"):
            _requirePositive(name, getattr(self, name))
        for name in ("c1", "c2"):
            _requireNonNegative(name, getattr(self, name))

    @property
    def effectiveLength (self):
        '''L = I / (m2 d).'''
        return self.inertia / (self.m2 * self.d)


@dataclass(frozen=True)
class ScaledParams :
    '''
    Scaled block-pendulum constants: damping zeta1 (block) and zeta2 (pendulum), block frequency chi,
    pendulum frequency kappa, scaled noise intensity nu and mass ratio rMass in (0, 1).
    '''
    zeta1: float
    zeta2: float
    chi: float
    kappa: float
    nu: float
    rMass: float

    def __post_init__ (self):
        for name in ("zeta1", "zeta2", "chi", "kappa", "nu"):
            _requireNonNegative(name, getattr(self, name))
        if not (isinstance(self.rMass, (int, float)) and 0.0 < self.rMass < 1.0):
            raise InvalidMassRatio(f"r_mass must lie in (0,1), got {self.rMass!r}")

    @property
    def kappaD (self):
        '''Damped pendulum frequency sqrt(kappa^2 - zeta2^2); raises OverdampedPendulum if not real and positive.'''
        return dampedFrequency(self.zeta2, self.kappa)

    def withNu (self, nu):
        '''Copy with a different noise intensity.'''
        return ScaledParams(self.zeta1, self.zeta2, self.chi, self.kappa, nu, self.rMass)


def dampedFrequency (zeta2, kappa):
    '''
    Function: dampedFrequency
    Purpose: kappa_d = sqrt(kappa^2 - zeta2^2), the oscillation frequency of the underdamped pendulum
    Inputs: zeta2 (float), kappa (float)
    Outputs: float > 0 (raises OverdampedPendulum when zeta2 >= kappa)
    '''
    if zeta2 >= kappa:
        raise OverdampedPendulum(f"pendulum is not underdamped: zeta2={zeta2} >= kappa={kappa}")
    return math.sqrt(kappa * kappa - zeta2 * zeta2)


@dataclass(frozen=True, eq=False)
class OuSystem :
    '''Drift A (d x d) and diffusion B (d x m) of the Ornstein-Uhlenbeck process dv = A v dt + B dW.'''
    A: np.ndarray
    B: np.ndarray

    def __post_init__ (self):
        A = asSquare(self.A, "A")
        B = asRect(self.B, A.shape[0], "B")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def dim (self):
        return self.A.shape[0]

    @property
    def noiseDim (self):
        return self.B.shape[1]

    def validate (self):
        return validateOuSystem(self.A, self.B)

@dataclass(frozen=True, eq=False)
class Excitation :
    '''Excitation vectors: a (length d) weights the colored noise, gamma (length m) the white noise.'''
    a: np.ndarray
    gamma: np.ndarray

    def __post_init__ (self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        if a.ndim != 1 or gamma.ndim != 1:
            raise DimensionMismatch("excitation vectors a and gamma must be 1-d")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(gamma))):
            raise InvalidParam("excitation vectors must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "gamma", gamma)

    @property
    def isZero (self):
        return not (np.any(self.a) or np.any(self.gamma))

@dataclass(frozen=True, eq=False)
class GeneralModel :
    '''
    OU driver plus excitation plus the pendulum constants zeta2, kappa.
    block holds the ScaledParams when the model came from blockEmbedding, else None.
    '''
    ou: OuSystem
    exc: Excitation
    zeta2: float
    kappa: float
    block: Optional[ScaledParams] = field(default=None)

    def __post_init__ (self):
        if self.exc.a.shape[0] != self.ou.dim:
            raise DimensionMismatch(f"a has length {self.exc.a.shape[0]} but A is {self.ou.dim}x{self.ou.dim}")
        if self.exc.gamma.shape[0] != self.ou.noiseDim:
            raise DimensionMismatch(f"gamma has length {self.exc.gamma.shape[0]} but B has {self.ou.noiseDim} columns")
        _requireNonNegative("zeta2", self.zeta2)
        _requirePositive("kappa", self.kappa)

    @property
    def kappaD (self):
        return dampedFrequency(self.zeta2, self.kappa)

    @property
    def isBlock (self):
        return self.block is not None

    def requireValid (self):
        '''
        Raise unless the OU pair is Hurwitz; controllability is reported but only the
        Hurwitz property is needed for the formulas to make sense.
        Outputs: ValidationReport
        '''
        requireHurwitz(self.ou.A)
        return self.ou.validate()


#Fraction of the horizon discarded when no burn-in is given
DEFAULT_BURN_FRACTION = 0.05

@dataclass(frozen=True)
class SimScheme :
    '''
    Time grid and Monte Carlo plumbing: step dt, horizon tFinal, burn-in discarded from averages,
    master seed (64-bit unsigned) and number of trajectories. burnIn=None means 5% of tFinal.
    '''
    dt: float
    tFinal: float
    burnIn: Optional[float] = None
    seed: int = 42
    nTraj: int = 16

    def __post_init__ (self):
        _requirePositive("dt", self.dt)
        _requirePositive("t_final", self.tFinal)
        if self.burnIn is None:
            object.__setattr__(self, "burnIn", DEFAULT_BURN_FRACTION * self.tFinal)
        _requireNonNegative("burn_in", self.burnIn)
        if not self.dt < self.tFinal:
            raise InvalidParam(f"dt={self.dt} must be smaller than t_final={self.tFinal}")
        if not self.burnIn < self.tFinal:
            raise InvalidParam(f"burn_in={self.burnIn} must be smaller than t_final={self.tFinal}")
        if not self.burnSteps < self.nSteps:
            raise InvalidParam(f"burn_in={self.burnIn} leaves no steps to average: {self.burnSteps} of "
                               f"{self.nSteps} steps at dt={self.dt}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2 ** 64:
            raise InvalidParam(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if isinstance(self.nTraj, bool) or not isinstance(self.nTraj, (int, np.integer)) or self.nTraj < 1:
            raise InvalidParam(f"n_traj must be a positive integer, got {self.nTraj!r}")

    @property
    def nSteps (self):
        return int(round(self.tFinal / self.dt))

    @property
    def burnSteps (self):
        return int(round(self.burnIn / self.dt))

    def replace (self, **changes):
        '''Copy with some fields changed.'''
        fields = dict(dt=self.dt, tFinal=self.tFinal, burnIn=self.burnIn, seed=self.seed, nTraj=self.nTraj)
        fields.update(changes)
        return SimScheme(**fields)


def physicalToScaled (p: PhysicalParams) -> ScaledParams:
    '''
    Function: physicalToScaled
    Purpose: Converts physical constants into the scaled equations of motion
    - Dividing the block equation by ell (m1 + m2) and the pendulum equation by m2 ell^2 gives
      zeta1 = c1 / (2 (m1 + m2)) and zeta2 = c2 / (2 m2 ell^2); chi^2 = k1 / (m1 + m2),
      kappa = sqrt(g / ell), R = m2 / (m1 + m2), nu = nuHat / (ell (m1 + m2)).
    - The coupling coefficient of the block equation is taken as m2 ell (the value that makes
      R = m2 / (m1 + m2) come out).
    Inputs: p (PhysicalParams)
    Outputs: ScaledParams
    '''
    total = p.m1 + p.m2
    return ScaledParams(
        zeta1=p.c1 / (2.0 * total),
        zeta2=p.c2 / (2.0 * p.m2 * p.ell ** 2),
        chi=math.sqrt(p.k1 / total),
        kappa=math.sqrt(p.g / p.ell),
        nu=p.nuHat / (p.ell * total),
        rMass=p.m2 / total,
    )

def compoundToScaled (p: CompoundParams) -> ScaledParams:
    '''
    Function: compoundToScaled
    Purpose: Same reduction for a compound pendulum, using the effective length L = I / (m2 d)
    - kappa = sqrt(g / L), R = (d / L) m2 / (m1 + m2), zeta2 = c2 / (2 I); needs L >= d.
    Inputs: p (CompoundParams)
    Outputs: ScaledParams
    '''
    L = p.effectiveLength
    if L < p.d:
        raise EffectiveLengthViolation(f"effective length L = I/(m2 d) = {L:.6g} is below d = {p.d:.6g}")
    total = p.m1 + p.m2
    return ScaledParams(
        zeta1=p.c1 / (2.0 * total),
        zeta2=p.c2 / (2.0 * p.inertia),
        chi=math.sqrt(p.k1 / total),
        kappa=math.sqrt(p.g / L),
        nu=p.nuHat / (L * total),
        rMass=(p.d / L) * p.m2 / total,
    )

def blockEmbedding (s: ScaledParams) -> GeneralModel:
    '''
    Function: blockEmbedding
    Purpose: Writes the block-pendulum linearization in the general OU frame
    - v = (eta, eta'), A = [[0, 1], [-chi^2, -2 zeta1]], B = [0; nu]; the excitation
      xi = eta'' = <a, v> + nu dW/dt gives a = (-chi^2, -2 zeta1), gamma = (nu).
    Inputs: s (ScaledParams)
    Outputs: GeneralModel with block=s
    '''
    chi2 = s.chi ** 2
    A = np.array([[0.0, 1.0], [-chi2, -2.0 * s.zeta1]])
    B = np.array([[0.0], [s.nu]])
    exc = Excitation(a=np.array([-chi2, -2.0 * s.zeta1]), gamma=np.array([s.nu]))
    return GeneralModel(ou=OuSystem(A=A, B=B), exc=exc, zeta2=s.zeta2, kappa=s.kappa, block=s)
