"""Exception types raised across the package.

Everything derives from BiplinkError so the CLI can map library failures
to exit code 1 while argparse/IO problems stay exit code 2.
"""


class BiplinkError(Exception):
    """Base class for all library errors."""


class ParseError(BiplinkError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class EmptyGraphError(BiplinkError):
    """An operation produced or received a graph with no usable nodes/edges."""


class SplitInfeasibleError(BiplinkError):
    """A left node has too few edges to appear in both train and test."""


class DivergenceError(BiplinkError):
    """Attenuation factor too large for the series to converge."""


class ConvergenceError(BiplinkError):
    """An iterative solver hit its iteration cap before converging."""


class GraphTooLargeError(BiplinkError):
    """Dense computation refused: graph exceeds the configured node cap."""


class CapacityError(BiplinkError):
    """More samples requested than the population can provide."""


class DegenerateLabelsError(BiplinkError):
    """Supervised fit received a single-class label vector."""


class DegenerateDataError(BiplinkError):
    """Feature matrix too degenerate to fit (e.g. singular scatter)."""


class SchemaError(BiplinkError):
    """Feature width or column layout does not match the fitted model."""


class MetricUndefinedError(BiplinkError):
    """Ranking metric undefined for the given label vector."""
