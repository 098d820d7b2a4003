"""Exception hierarchy and the unreachable-distance sentinel.

Every exception carries an ``error_class`` tag that the HTTP service puts in
its error payloads and the CLI maps to a stable exit code.
"""


class DeployError(Exception):
    error_class = "runtime"


class ParseError(DeployError):
    """Input file or document could not be parsed at all."""

    error_class = "parse"


class ValidationError(DeployError):
    """Scenario or parameter invariant broken; message names the field."""

    error_class = "validation"


class MetricGeometryMismatch(DeployError):
    """Requested distance metric incompatible with the scenario geometry."""

    error_class = "metric_mismatch"


class InvalidQuery(DeployError):
    """Distance query endpoint outside the free workspace."""

    error_class = "validation"


class WindowTooLarge(DeployError):
    pass


class InvalidWeights(DeployError):
    error_class = "validation"


class OutOfGrid(DeployError):
    error_class = "validation"


class InvalidEndpoint(DeployError):
    error_class = "validation"


class InvalidParams(DeployError):
    """Operation parameters outside their documented domain."""

    error_class = "validation"


class InvalidD0(DeployError):
    pass


class EmptySet(DeployError):
    pass


class PhantomInSelection(DeployError):
    pass


class ElementAlreadyInSet(DeployError):
    pass


class InvalidK(DeployError):
    pass


class InvalidConstraint(DeployError):
    pass


class InstanceTooLarge(DeployError):
    pass


class DimensionMismatch(DeployError):
    pass


class _Unreachable:
    """Singleton sentinel for point pairs with no feasible path."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNREACHABLE"

    def __bool__(self):
        return False


UNREACHABLE = _Unreachable()
