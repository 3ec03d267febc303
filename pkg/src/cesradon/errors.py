"""Exception and warning types shared across the package.

Every numerical routine that can fail in a structured way raises one of these
instead of a bare ValueError, so the CLI can map failures onto stable exit
codes (see ``cesradon.cli``).
"""


class CesradonError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(CesradonError):
    """Malformed or inconsistent run configuration / input document."""


class OutOfRange(CesradonError, ValueError):
    """Argument outside its documented domain (e.g. alpha not in (0, 1])."""


class PoleError(CesradonError, ValueError):
    """Special-function evaluation requested at a pole."""


class NonConvergent(CesradonError):
    """Adaptive quadrature or iteration exhausted its budget."""


class UnboundedRegion(CesradonError):
    """Integration region is unbounded in a direction the measure does not
    control (some price coordinate is zero while the density support is
    unbounded along that axis)."""


class StripViolation(CesradonError, ValueError):
    """Mellin strip parameter outside the admissible range (some c_k >= 1)."""


class BoundaryLeak(CesradonError):
    """Log-grid samples do not decay toward the grid edges; the discrete
    Mellin transform would alias badly.  Widen the grid or move the strip."""


class TailDivergence(CesradonError):
    """A semi-infinite tail integral keeps growing under refinement."""


class MethodUnavailable(CesradonError):
    """Requested evaluation method does not apply to the given input
    (wrong dimension, non-density measure, ...)."""


class CharacterizationFailure(CesradonError):
    """Raised by CLI-level drivers when a characterization check fails.

    Library code returns CheckReport objects instead of raising; this is
    only used to thread the exit-code path through the command layer.
    """


class TruncationWarning(UserWarning):
    """Frequency/contour truncation is visibly biasing a result."""


# CLI exit codes (external contract, keep stable).
EXIT_OK = 0
EXIT_SELFTEST_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CHARACTERIZATION_FAIL = 4
EXIT_INCONCLUSIVE = 5
