class TwoCrossError(Exception):
    """Base class for library errors."""


class GeneralPositionError(TwoCrossError, ValueError):
    def __init__(self, indices, reason="collinear points"):
        self.indices = tuple(indices)
        super().__init__(f"{reason}: {self.indices}")


class ParseError(TwoCrossError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class BudgetExceeded(TwoCrossError):
    """Raised when a search hits its node limit.

    ``lower`` and ``upper`` bracket the optimum found so far; ``witness`` is
    the best solution seen (may be None).
    """

    def __init__(self, lower, upper, witness=None, nodes=0):
        self.lower = lower
        self.upper = upper
        self.witness = witness
        self.nodes = nodes
        super().__init__(f"node budget exhausted after {nodes} nodes: {lower} <= value <= {upper}")


class TieAtPoint(TwoCrossError, ValueError):
    def __init__(self, point, count):
        self.point = point
        super().__init__(f"colour classes tie at point {point} ({count} each)")


class OddCardinality(TwoCrossError, ValueError):
    pass


class InvalidMatching(TwoCrossError, ValueError):
    pass


class NotFound(TwoCrossError):
    def __init__(self, matched, total):
        self.matched = matched
        self.total = total
        super().__init__(f"no halving matching: maximum matches {matched} of {total} points")


class EmptyFamily(TwoCrossError, ValueError):
    pass


class ValidationFailed(TwoCrossError, AssertionError):
    pass
