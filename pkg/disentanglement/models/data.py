# This file is part of disentanglement
#
# MIT License

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Any, NamedTuple, Optional

from .enums import (
    ApproxMode,
    CertificationMethod,
    Command,
    OutputFormat,
    SolverStatus,
    VerifyTarget,
)

if TYPE_CHECKING:
    from ..qmatrix import DensityOperator


class SolverConfig(NamedTuple):
    solver: str = "CLARABEL"
    tol: float = 1e-7
    fw_tol: float = 1e-5
    max_iter: int = 200
    fw_max_iter: int = 500
    restarts: int = 32
    seed: int = 0
    max_dim: int = 4096
    max_registers: int = 4096


DEFAULT_CONFIG = SolverConfig()


class DivergenceValue(NamedTuple):
    bits: float
    certificate: Optional[DensityOperator] = None
    dual_bound: Optional[float] = None
    status: SolverStatus = SolverStatus.EXACT
    iterations: int = 0

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.bits)

    @property
    def gap(self) -> Optional[float]:
        if self.dual_bound is None or self.is_infinite:
            return None
        return abs(self.bits - self.dual_bound)


class SepApprox(NamedTuple):
    mode: ApproxMode
    cut_set: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...] = ()


class ConvexSplitSpec(NamedTuple):
    rho: DensityOperator
    sigma: DensityOperator
    N: int
    zeta: float = 0.0
    xi: float = 1.0


class LemmaCase(NamedTuple):
    rho_id: str
    rho: DensityOperator
    sigma_id: str
    sigma: DensityOperator
    zeta: float
    xi: float


class LemmaRow(NamedTuple):
    rho_id: str
    sigma_id: str
    zeta: float
    xi: float
    N: int
    dmax_bits: float
    measured_P: float
    bound: float
    passed: bool
    smoothed_P: float
    monotone: bool


class ProtocolReport(NamedTuple):
    M: int
    log2_M: float
    eps_target: float
    delta: float
    achieved_distance: float
    approx_mode: CertificationMethod
    lower_bound_bits: float
    upper_bound_bits: float
    catalyst_id: str
    passed: bool
    ppt_distance: Optional[float] = None

    def to_record(self) -> dict[str, Any]:
        record = self._asdict()
        record["approx_mode"] = self.approx_mode.value
        record["pass"] = record.pop("passed")
        return record


class CostBounds(NamedTuple):
    lower_bits: float
    upper_bits: float
    optimizer: Optional[DensityOperator] = None


class DecouplingReport(NamedTuple):
    M: int
    discarded_bits: float
    budget_bits: float
    residual: Optional[DensityOperator]
    distance: float
    approx_mode: CertificationMethod


class ComparisonReport(NamedTuple):
    eps: float
    delta: float
    product_cost_bits: float
    separable_cost_bits: float
    ratio: float


class RecoveryReport(NamedTuple):
    state_id: str
    eps: float
    delta: float
    M: int
    log2_M: float
    lower_bits: float
    upper_bits: float
    achieved_distance: float
    approx_mode: CertificationMethod
    passed: bool
    rec_value_bits: float
    cmi_bits: float
    petz_distance: float

    def to_record(self) -> dict[str, Any]:
        record = self._asdict()
        record["approx_mode"] = self.approx_mode.value
        record["pass"] = record.pop("passed")
        return record


class RunConfig(NamedTuple):
    command: Command
    state_spec: Optional[str] = None
    target: Optional[VerifyTarget] = None
    eps: float = 0.1
    delta: float = 0.05
    tol: float = 1e-4
    approx_mode: ApproxMode = ApproxMode.BOTH
    seed: int = 0
    out_path: Optional[str] = None
    fmt: OutputFormat = OutputFormat.JSON
    threads: Optional[int] = None
    grid: Optional[str] = None
    M: Optional[int] = None
    verbose: int = 0
