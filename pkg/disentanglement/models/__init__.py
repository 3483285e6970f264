# This file is part of disentanglement
#
# MIT License

from .data import (
    DEFAULT_CONFIG,
    ComparisonReport,
    ConvexSplitSpec,
    CostBounds,
    DecouplingReport,
    DivergenceValue,
    LemmaCase,
    LemmaRow,
    ProtocolReport,
    RecoveryReport,
    RunConfig,
    SepApprox,
    SolverConfig,
)
from .enums import (
    ApproxMode,
    CertificationMethod,
    Command,
    MatrixFunction,
    OutputFormat,
    SolverStatus,
    VerifyTarget,
)

__all__ = [
    "DEFAULT_CONFIG",
    "ApproxMode",
    "CertificationMethod",
    "Command",
    "ComparisonReport",
    "ConvexSplitSpec",
    "CostBounds",
    "DecouplingReport",
    "DivergenceValue",
    "LemmaCase",
    "LemmaRow",
    "MatrixFunction",
    "OutputFormat",
    "ProtocolReport",
    "RecoveryReport",
    "RunConfig",
    "SepApprox",
    "SolverConfig",
    "SolverStatus",
    "VerifyTarget",
]
