# This file is part of disentanglement
#
# MIT License

import enum


class SolverStatus(enum.Enum):
    EXACT = "exact"
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible"


class ApproxMode(enum.Enum):
    PPT = "ppt"
    ENSEMBLE = "ensemble"
    BOTH = "both"


class MatrixFunction(enum.Enum):
    SQRT = "sqrt"
    LOG2 = "log2"
    EXP2 = "exp2"


class CertificationMethod(enum.Enum):
    """How a distance to the target set was certified."""

    PPT_EXACT = "ppt-exact"
    PPT_RELAXATION = "ppt-relaxation"
    ENSEMBLE = "ensemble"
    WITNESS_TYPES = "witness-types"
    WITNESS_DENSE = "witness-dense"
    WITNESS_COLLISION = "witness-collision"


class Command(enum.Enum):
    MEASURE = "measure"
    PROTOCOL = "protocol"
    VERIFY = "verify"
    SWEEP = "sweep"


class VerifyTarget(enum.Enum):
    LEMMA = "lemma"
    THM1 = "thm1"
    RECOVERY = "recovery"
    APPENDIX = "appendix"


class OutputFormat(enum.Enum):
    JSON = "json"
    CSV = "csv"
