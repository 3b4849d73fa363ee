"""Exception hierarchy shared across the toolkit.

Every error carries a short machine-readable ``code`` so the HTTP service
can mirror module errors without string matching.
"""


class TsbError(Exception):
    code = "TsbError"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class EmptyContent(TsbError):
    code = "EmptyContent"


class UnsupportedChar(TsbError):
    code = "UnsupportedChar"


class WidthTooSmall(TsbError):
    code = "WidthTooSmall"


class LengthOverflow(TsbError):
    code = "LengthOverflow"


class EmptyLibrary(TsbError):
    code = "EmptyLibrary"


class RenderOverflow(TsbError):
    code = "RenderOverflow"


class ParseError(TsbError):
    code = "ParseError"


class BoxOutOfBounds(TsbError):
    code = "BoxOutOfBounds"


class BadShape(TsbError):
    code = "BadShape"


class RowCountMismatch(TsbError):
    code = "RowCountMismatch"


class NoLabels(TsbError):
    code = "NoLabels"


class NaNLoss(TsbError):
    code = "NaNLoss"


class VersionMismatch(TsbError):
    code = "VersionMismatch"


class ArchMismatch(TsbError):
    code = "ArchMismatch"


class EmptySet(TsbError):
    code = "EmptySet"


class TooFewSamples(TsbError):
    code = "TooFewSamples"


class DegenerateBox(TsbError):
    code = "DegenerateBox"


class SolverDivergence(TsbError):
    code = "SolverDivergence"
