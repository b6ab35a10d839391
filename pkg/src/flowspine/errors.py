"""Exception and warning types raised by flowspine."""


class FlowspineError(Exception):
    """Base class for all flowspine errors."""


class MalformedRecord(FlowspineError, ValueError):
    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class DuplicateNodeId(MalformedRecord):
    pass


class NegativeWeight(MalformedRecord):
    pass


class NegativeValue(MalformedRecord):
    pass


class UnknownNode(FlowspineError, KeyError):
    pass


class CoreTooSmall(FlowspineError, ValueError):
    pass


class WeightNotIncident(FlowspineError, ValueError):
    pass


class UnknownMetric(FlowspineError, ValueError):
    pass


class NoInEdges(FlowspineError, ValueError):
    pass


class FrobeniusViolation(FlowspineError, ValueError):
    """The integrated model has no non-negative solution.

    ``offending`` holds the strongly connected components (as lists of node
    labels or indices) that have no leaking node.
    """

    def __init__(self, offending):
        self.offending = [list(c) for c in offending]
        parts = ["{" + ", ".join(str(x) for x in c) + "}" for c in self.offending]
        super().__init__(
            "Frobenius condition violated; closed strongly connected "
            "component(s): " + "; ".join(parts)
        )


class NonConvergence(FlowspineError, RuntimeError):
    pass


class BadThreshold(FlowspineError, ValueError):
    pass


class UnreachableTheta(FlowspineError, ValueError):
    def __init__(self, theta_hat, max_theta):
        self.theta_hat = theta_hat
        self.max_theta = max_theta
        super().__init__(
            f"controlled value never reaches theta_hat={theta_hat:g}; "
            f"maximum achievable fraction is {max_theta:.6g}"
        )


class EmptyBackbone(FlowspineError, ValueError):
    pass


class EmptySubnetwork(FlowspineError, ValueError):
    pass


class RegionEExcluded(FlowspineError, ValueError):
    pass


class OwnershipDataWarning(UserWarning):
    """Data-quality issue repaired during ingestion or normalization."""
