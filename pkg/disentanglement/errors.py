# This file is part of disentanglement
#
# MIT License

from enum import Enum, auto
from typing import Optional


class StateErrorKind(Enum):
    UNKNOWN_LABEL = auto()
    NOT_HERMITIAN = auto()
    NEGATIVE_EIGENVALUE = auto()
    DIM_MISMATCH = auto()
    BAD_PARAMETER = auto()
    SUBNORMALIZED = auto()
    BAD_PARTITION = auto()
    INVALID_STATE = auto()


class SolverErrorKind(Enum):
    SOLVER_FAILURE = auto()
    INFEASIBLE_SUPPORT = auto()


class ProtocolErrorKind(Enum):
    DIMENSION_BLOWUP = auto()
    PRECONDITION_VIOLATED = auto()
    SINGULAR_CONDITIONER = auto()


def _to_friendly(kind: Enum) -> str:
    return kind.name.lower().replace("_", " ")


class DisentanglementError(Exception):
    pass


class StateError(DisentanglementError):
    def __init__(self, kind: StateErrorKind, message: str) -> None:
        super().__init__(message)
        self.kind = kind
        self.message = message

    def __str__(self) -> str:
        return f"{_to_friendly(self.kind)}: {self.message}"


class SolverError(DisentanglementError):
    def __init__(
        self,
        kind: SolverErrorKind,
        message: str,
        exc: Optional[BaseException] = None,
    ) -> None:
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.exc = exc

    def __str__(self) -> str:
        msg = f"{_to_friendly(self.kind)}: {self.message}"
        if self.exc:
            msg += f" (from exception: {self.exc!r})"
        return msg


class ProtocolError(DisentanglementError):
    def __init__(self, kind: ProtocolErrorKind, message: str, dim: Optional[int] = None) -> None:
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.dim = dim

    def __str__(self) -> str:
        msg = f"{_to_friendly(self.kind)}: {self.message}"
        if self.dim is not None:
            msg += f" (dimension {self.dim})"
        return msg


class StateFileError(DisentanglementError):
    def __init__(
        self, message: str, field: Optional[str] = None, line: Optional[int] = None
    ) -> None:
        super().__init__(message)
        self.message = message
        self.field = field
        self.line = line

    def __str__(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.field is not None:
            where.append(f"field {self.field!r}")
        loc = f" ({', '.join(where)})" if where else ""
        return f"error on parsing state file{loc}: {self.message}"
