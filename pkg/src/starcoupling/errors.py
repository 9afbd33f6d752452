"""Exception hierarchy shared by all starcoupling modules."""


class StarCouplingError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(StarCouplingError):
    """Experiment configuration is malformed or violates the schema."""


class SupportViolation(StarCouplingError):
    """A potential profile extends beyond the unit interval."""


class MeanViolation(StarCouplingError):
    """Total integral of the potential over the graph is not zero.

    Carries the offending residual in ``residual``.
    """

    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"potential has nonzero total mean: residual={residual:.3e}")


class ResonantWithZeroA(StarCouplingError):
    """Resonant scaling requested but the coupling integral A vanishes."""


class DegenerateTheta(StarCouplingError):
    """Two first moments coincide; the boundary matrices are not defined."""


class ZeroB(StarCouplingError):
    """Second-moment combination B vanishes while the coupling is nontrivial."""


class AtPole(StarCouplingError):
    """Evaluation requested at (or too close to) a resolvent pole."""


class SingularSystem(StarCouplingError):
    """A dense or sparse linear solve hit a numerically singular matrix."""


class QuadratureNotConverged(StarCouplingError):
    """Doubling the quadrature order changed the result beyond tolerance."""


class MultipleSignChanges(StarCouplingError):
    """Root bracketing found more than one sign change; pole not unique."""


class FredholmSingular(StarCouplingError):
    """The scattering Fredholm denominator 1 - D vanished (resonance).

    Carries the offending momentum in ``k``.
    """

    def __init__(self, k: float, denominator: complex):
        self.k = k
        self.denominator = denominator
        super().__init__(
            f"Fredholm denominator 1-D = {denominator:.3e} too small at k={k}"
        )


class GridTooCoarse(StarCouplingError):
    """Finite-difference grid rejected (admissibility or Richardson guard)."""
