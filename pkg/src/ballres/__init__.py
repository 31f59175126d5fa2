"""Resonances of balls, scattering determinants, heat invariants and the
rigidity test for unions of equal balls."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BallresError, CalibrationMissing, ContourTooClose, DegenerateProfile, FactorPole,
    IllConditioned, NonConvergence, NonPositiveInvariant, PhaseUnwrapFailure,
    PoleAtResonance, QuadratureStall, TruncationNotReached,
)
from .radial import (  # noqa: E402
    DIRICHLET, NEUMANN, BoundaryCondition, RadialPolynomial, Resonance, ResonanceSet,
    ball_resonances, radial_polynomial, scale_resonances, sh_dim,
)
