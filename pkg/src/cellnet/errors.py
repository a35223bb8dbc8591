"""Exception hierarchy shared across the package."""


class CellnetError(Exception):
    """Base class for all library errors."""


class BadDimension(CellnetError):
    """Cell dimension outside the supported range."""


class DanglingBoundary(CellnetError):
    """Boundary entry references a cell that was never declared."""


class NotACycle(CellnetError):
    """2-cell boundary edges do not form a single closed cycle."""


class SelfLoopEdge(CellnetError):
    """1-cell whose two endpoints are not distinct."""


class UnknownCell(CellnetError):
    """Cell id not present in the complex."""


class ShapeMismatch(CellnetError):
    """Feature / parameter matrices have inconsistent shapes."""


class TooLarge(CellnetError):
    """Input exceeds a configured size cap."""


class MissingLabels(CellnetError):
    """Feature scheme requires labels the graph does not carry."""


class Diverged(CellnetError):
    """Training loss became non-finite."""


class BadSkip(CellnetError):
    """Invalid skip parameter for a circulant generator."""


class MalformedGraph6(CellnetError):
    """graph6 line could not be decoded."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ParseError(CellnetError):
    """Graph input file could not be parsed."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
