"""Exception hierarchy shared by every module.

Configuration problems derive from :class:`ConfigurationError` so the CLI can
map them to exit code 2 in one place.
"""


class HBSError(Exception):
    """Base class for all library errors."""


class ConfigurationError(HBSError, ValueError):
    """Invalid input: knot vectors, indices, scenario files."""


class KnotVectorError(ConfigurationError):
    pass


class NotOpen(KnotVectorError):
    """End knots do not appear exactly ``p`` times."""


class ExcessMultiplicity(KnotVectorError):
    """An interior knot repeats more than ``p`` times."""


class NotSorted(KnotVectorError):
    pass


class BadRange(KnotVectorError):
    """Knots outside [0, 1] or ends different from 0 and 1."""


class BadDegree(ConfigurationError):
    pass


class IndexOutOfRange(ConfigurationError, IndexError):
    pass


class OutOfDomain(ConfigurationError):
    pass


class NotNested(ConfigurationError):
    pass


class DegreeMismatch(ConfigurationError):
    pass


class NotContained(ConfigurationError):
    """A refinement domain is not inside the previous one."""


class ZeroFormUnionViolation(ConfigurationError):
    """A refinement cell set is not a union of coarse 0-form supports."""


class NotRefined(HBSError, ValueError):
    """A 0-form used in an admissibility query is not supported on the next domain."""


class ShapeMismatch(HBSError, ValueError):
    pass


class UnsupportedDimension(ConfigurationError):
    pass


class ClosureViolated(HBSError):
    """The derivative of a hierarchical space leaves the next hierarchical space."""


class DimensionMismatch(HBSError):
    """Two independent routes to a cohomology dimension disagree."""


class BackendCapExceeded(HBSError):
    """The exact rank backend refused a matrix above its size cap."""


class NumericalIndeterminacy(HBSError):
    """Floating-point rank decision without a clear singular-value gap."""


class ScenarioParseError(ConfigurationError):
    """Malformed scenario file; ``location`` names the offending field."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class ScenarioValidationError(ScenarioParseError):
    """Well-formed scenario describing an invalid hierarchy; ``rule`` names the broken requirement."""

    rule: str = ""
