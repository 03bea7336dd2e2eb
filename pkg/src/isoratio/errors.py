"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI:
  2 -- invariant violations (bugs or impossible inputs detected mid-run)
  3 -- oracle/formula disagreement
  4 -- input errors (parsing, singular models, bad configuration)
"""


class IsoratioError(Exception):
    """Base class for all package errors."""


class ParseError(IsoratioError):
    """Malformed input text; carries the offending position when known."""

    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (position {position})")
        self.position = position


class SingularModelError(IsoratioError):
    """Weierstrass coefficients with vanishing discriminant."""


class PrecisionExhausted(IsoratioError):
    """l-adic certification failed at the configured precision cap."""


class NotAKernelError(IsoratioError):
    """Candidate polynomial does not cut out a rational p-subgroup."""


class DualNotFoundError(IsoratioError):
    """No candidate dual isogeny validated; internal failure for valid input."""


class InvariantViolation(IsoratioError):
    """A structural invariant failed; signals a bug, never a legitimate outcome."""


class NonPPowerTamagawaRatio(InvariantViolation):
    """Tamagawa ratio of a p-isogeny pair was not an exact power of p."""


class CompositionMismatch(InvariantViolation):
    """Local exponents of phi and its dual failed the [p]-additivity identity."""

    def __init__(self, place, got, expected):
        super().__init__(f"composition mismatch at v={place}: {got} != {expected}")
        self.place = place


class InconclusiveSampling(IsoratioError):
    """Sampled divisible fraction was not near any power of 1/p."""
