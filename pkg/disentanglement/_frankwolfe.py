# This file is part of disentanglement
#
# MIT License

from __future__ import annotations

import logging
import math
from typing import Any, Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import optimize

from ._typings import ComplexArray, RealArray
from .models import SolverStatus

logger = logging.getLogger(__name__)

Objective = Callable[[ComplexArray], float]
Gradient = Callable[[ComplexArray], ComplexArray]
LinearOracle = Callable[[ComplexArray], tuple[ComplexArray, Any]]

_PRUNE: float = 1e-10
_DUPLICATE: float = 1e-12


class FrankWolfeResult(NamedTuple):
    x: ComplexArray
    value: float
    lower_bound: float
    gap: float
    iterations: int
    status: SolverStatus
    atoms: list[ComplexArray]
    payloads: list[Any]
    weights: RealArray


def _inner(a: ComplexArray, b: ComplexArray) -> float:
    return float(np.real(np.vdot(a, b)))


def _combine(atoms: list[ComplexArray], weights: RealArray) -> ComplexArray:
    return np.tensordot(weights, np.stack(atoms), axes=1)


def _line_search(f: Objective, x: ComplexArray, s: ComplexArray) -> float:
    def along(t: float) -> float:
        v = f((1 - t) * x + t * s)
        return v if math.isfinite(v) else 1e300

    res = optimize.minimize_scalar(along, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-10})
    t = float(res.x)
    return t if along(t) <= along(0.0) else 0.0


def _reweight(
    f: Objective, grad: Gradient, atoms: list[ComplexArray], w0: RealArray
) -> RealArray:
    n = len(atoms)
    if n < 2:
        return w0
    stack = np.stack(atoms)

    def fun(w: RealArray) -> float:
        v = f(np.tensordot(w, stack, axes=1))
        return v if math.isfinite(v) else 1e300

    def jac(w: RealArray) -> RealArray:
        g = grad(np.tensordot(w, stack, axes=1))
        return np.array([_inner(g, a) for a in atoms])

    res = optimize.minimize(
        fun,
        w0,
        jac=jac,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * n,
        constraints=[{"type": "eq", "fun": lambda w: np.sum(w) - 1, "jac": lambda w: np.ones_like(w)}],
        options={"maxiter": 200, "ftol": 1e-14},
    )
    w = np.clip(np.asarray(res.x, dtype=np.float64), 0.0, None)
    w = w / np.sum(w)
    return w if fun(w) <= fun(w0) else w0


def minimize(
    f: Objective,
    grad: Gradient,
    lmo: LinearOracle,
    start: Sequence[tuple[ComplexArray, Any]],
    start_weights: Optional[Sequence[float]] = None,
    *,
    tol: float,
    max_iter: int,
    name: str = "frank-wolfe",
    corrective: bool = True,
) -> FrankWolfeResult:
    """Fully corrective Frank-Wolfe over the convex hull of oracle atoms.

    ``lmo(g)`` returns the atom minimizing ``Re Tr[g s]`` together with an
    arbitrary payload kept alongside the atom (the certificate pieces).
    The returned ``lower_bound`` is the best ``f(x) - gap`` seen.
    """
    atoms = [np.asarray(a, dtype=np.complex128) for a, _ in start]
    payloads: list[Any] = [p for _, p in start]
    if start_weights is None:
        weights = np.full(len(atoms), 1.0 / len(atoms))
    else:
        weights = np.asarray(start_weights, dtype=np.float64)
        weights = weights / np.sum(weights)
    x = _combine(atoms, weights)
    value = f(x)
    lower = -math.inf
    gap = math.inf
    status = SolverStatus.MAX_ITER
    it = 0
    for it in range(1, max_iter + 1):
        g = grad(x)
        s, payload = lmo(g)
        gap = _inner(g, x - s)
        lower = max(lower, value - gap)
        logger.debug("%s iter %d: value=%.10g gap=%.3e atoms=%d", name, it, value, gap, len(atoms))
        if gap <= tol:
            status = SolverStatus.CONVERGED
            break
        if min(float(np.max(np.abs(s - a))) for a in atoms) > _DUPLICATE:
            atoms.append(s)
            payloads.append(payload)
            weights = np.append(weights, 0.0)
        idx = next(i for i, a in enumerate(atoms) if float(np.max(np.abs(s - a))) <= _DUPLICATE)
        t = _line_search(f, x, s)
        weights = (1 - t) * weights
        weights[idx] += t
        if corrective:
            weights = _reweight(f, grad, atoms, weights)
        keep = weights > _PRUNE
        atoms = [a for a, k in zip(atoms, keep) if k]
        payloads = [p for p, k in zip(payloads, keep) if k]
        weights = weights[keep] / np.sum(weights[keep])
        x = _combine(atoms, weights)
        new_value = f(x)
        if t == 0.0 and new_value >= value - 1e-15:
            logger.warning("%s stalled at iteration %d with gap %.3e", name, it, gap)
            value = new_value
            break
        value = new_value
    else:
        logger.warning("%s hit the iteration cap (%d) with gap %.3e", name, max_iter, gap)
    return FrankWolfeResult(
        x=x,
        value=value,
        lower_bound=min(lower, value),
        gap=max(gap, 0.0),
        iterations=it,
        status=status,
        atoms=atoms,
        payloads=payloads,
        weights=weights,
    )

