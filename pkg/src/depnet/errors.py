"""Exception types shared across the toolkit."""


class DepnetError(Exception):
    """Base class for domain errors raised by depnet."""


class GraphBuildError(DepnetError, ValueError):
    """Edge or label input cannot be turned into a graph."""


class EmptyInputError(DepnetError, ValueError):
    """An operation that needs at least one node received an empty graph."""


class ParameterError(DepnetError, ValueError):
    """A numeric or categorical parameter is outside its valid range."""


class NodeRangeError(DepnetError, IndexError):
    """A NodeId does not exist in the graph it was used with."""
