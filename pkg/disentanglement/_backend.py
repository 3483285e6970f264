# This file is part of disentanglement
#
# MIT License

from __future__ import annotations

import logging
from typing import Any, Optional, Sequence, Union

import cvxpy as cp
import numpy as np

from ._typings import ComplexArray
from .errors import SolverError, SolverErrorKind
from .models import DEFAULT_CONFIG, SolverConfig, SolverStatus

logger = logging.getLogger(__name__)

Constraint = Any
Expression = Any


def _solver_options(config: SolverConfig) -> dict[str, Any]:
    name = config.solver.upper()
    if name == "CLARABEL":
        return {
            "max_iter": config.max_iter,
            "tol_gap_abs": config.tol,
            "tol_gap_rel": config.tol,
            "tol_feas": config.tol,
        }
    if name == "SCS":
        return {
            "max_iters": max(config.max_iter, 20000),
            "eps_abs": config.tol,
            "eps_rel": config.tol,
        }
    return {}


class ConicHandler:
    """Runs one cvxpy problem and translates its outcome.

    Solver exceptions and infeasible or unbounded terminations become
    ``SolverError``; an inaccurate optimum is reported as ``MAX_ITER``.
    """

    def __init__(self, name: str, config: Optional[SolverConfig] = None) -> None:
        self._name = name
        self._config = DEFAULT_CONFIG if config is None else config

    @property
    def config(self) -> SolverConfig:
        return self._config

    def solve(self, problem: cp.Problem) -> tuple[float, SolverStatus]:
        logger.debug("solving %s with %s", self._name, self._config.solver)
        try:
            value = problem.solve(solver=self._config.solver.upper(), **_solver_options(self._config))
        except (cp.error.SolverError, ValueError, ArithmeticError) as exc:
            raise SolverError(
                SolverErrorKind.SOLVER_FAILURE, f"{self._name}: solver raised", exc
            ) from exc
        status = problem.status
        if status == cp.OPTIMAL:
            result = SolverStatus.CONVERGED
        elif status == cp.OPTIMAL_INACCURATE:
            logger.warning("%s: solver returned an inaccurate optimum", self._name)
            result = SolverStatus.MAX_ITER
        else:
            raise SolverError(
                SolverErrorKind.SOLVER_FAILURE, f"{self._name}: solver status {status!r}"
            )
        if value is None or not np.isfinite(value):
            raise SolverError(
                SolverErrorKind.SOLVER_FAILURE, f"{self._name}: no finite optimum ({value!r})"
            )
        logger.debug("%s finished: value=%.9g status=%s", self._name, value, result.value)
        return float(value), result

    def value_of(self, var: Union[cp.Variable, Expression]) -> ComplexArray:
        val = var.value
        if val is None:
            raise SolverError(
                SolverErrorKind.SOLVER_FAILURE, f"{self._name}: variable has no value"
            )
        return np.asarray(val, dtype=np.complex128)


def hermitian(d: int, name: Optional[str] = None) -> cp.Variable:
    return cp.Variable((d, d), hermitian=True, name=name)


def apply_partial_transpose(
    expr: Expression, dims: Sequence[int], systems: Sequence[int]
) -> Expression:
    out = expr
    for i in systems:
        out = cp.partial_transpose(out, list(dims), i)
    return out


def ppt_constraints(
    var: Expression, dims: Sequence[int], cuts: Sequence[Sequence[int]]
) -> list[Constraint]:
    """``var^{T_S} >= 0`` for each transposed side ``S``."""
    return [apply_partial_transpose(var, dims, side) >> 0 for side in cuts]


def fidelity_block(rho: Union[ComplexArray, Expression], sigma: Expression, d: int) -> tuple[Constraint, Expression]:
    """Uhlmann block ``[[rho, X], [X^H, sigma]] >= 0``.

    The returned expression ``Re Tr X`` is bounded above by ``F(rho, sigma)``
    and attains it at the optimum.
    """
    x = cp.Variable((d, d), complex=True)
    block = cp.bmat([[rho, x], [x.H, sigma]])
    return block >> 0, cp.real(cp.trace(x))


def ptrace_expr(expr: Expression, dims: Sequence[int], traced: Sequence[int]) -> Expression:
    out = expr
    ds = list(dims)
    for i in sorted(traced, reverse=True):
        out = cp.partial_trace(out, ds, i)
        ds.pop(i)
    return out
