"""Error hierarchy shared by every module.

Each error carries a stable ``code`` string used by the command line front end.
"""
from __future__ import annotations


class ZebraError(Exception):
    code = "Error"

    def __init__(self, message: str = "", **info: object) -> None:
        super().__init__(message or self.code)
        self.info = info


def _make(name: str, base: type = ZebraError) -> type:
    return type(name, (base,), {"code": name})


class InputError(ZebraError):
    code = "InputError"


DegenerateTriangle = _make("DegenerateTriangle", InputError)
UnpairedEdge = _make("UnpairedEdge", InputError)
NonParallelGluing = _make("NonParallelGluing", InputError)
SelfGluedEdge = _make("SelfGluedEdge", InputError)
NegativeDerivativeOnDilationSurface = _make("NegativeDerivativeOnDilationSurface", InputError)
ConditionDViolated = _make("ConditionDViolated", InputError)
ConditionEViolated = _make("ConditionEViolated", InputError)
UnknownExample = _make("UnknownExample", InputError)
SemanticError = _make("SemanticError", InputError)
DirectionNotInWedge = _make("DirectionNotInWedge", InputError)
InvalidCrossing = _make("InvalidCrossing", InputError)
NotALoop = _make("NotALoop", InputError)
StartAtVertex = _make("StartAtVertex", InputError)
RemovableVertex = _make("RemovableVertex", InputError)
AddressInvalid = _make("AddressInvalid", InputError)
NotLeafTriangulation = _make("NotLeafTriangulation", InputError)
NotAPolygon = _make("NotAPolygon", InputError)
SurfaceHasPoles = _make("SurfaceHasPoles", InputError)
ClassIsPower = _make("ClassIsPower", InputError)
ClassTrivial = _make("ClassTrivial", InputError)
NotAllPiSide = _make("NotAllPiSide", InputError)
InvalidRegion = _make("InvalidRegion", InputError)
NotClosed = _make("NotClosed", InputError)
BoundTooLarge = _make("BoundTooLarge", InputError)
BudgetExhausted = _make("BudgetExhausted")
NotCovered = _make("NotCovered")
ConnectFailed = _make("ConnectFailed")


class SurfaceSyntaxError(InputError):
    """Malformed surface file; carries 1-based line and column."""

    code = "SyntaxError"

    def __init__(self, message: str, line: int = 0, column: int = 0) -> None:
        super().__init__(f"{message} (line {line}, column {column})", line=line, column=column)
        self.line = line
        self.column = column


class InternalInvariantError(ZebraError):
    """A runtime self-check failed; indicates a library bug, never bad input."""

    code = "InternalInvariantError"
