# This file is part of disentanglement
#
# MIT License

"""Entropies and divergences, all in bits."""

from __future__ import annotations

import logging
import math
from typing import Final, Optional

import cvxpy as cp
import numpy as np

from ._backend import ConicHandler, fidelity_block, hermitian
from ._lowlevel import lowlevel
from ._typings import ComplexArray, LabelsArg, RealArray
from .errors import SolverError, StateError, StateErrorKind
from .models import DEFAULT_CONFIG, DivergenceValue, SolverConfig, SolverStatus
from .qmatrix import DensityOperator, hermitian_eig, partial_trace
from .subsystems import check_partition, parse_cut, parse_labels

logger = logging.getLogger(__name__)

SUPPORT_TOL: Final[float] = 1e-10
LEAK_TOL: Final[float] = 1e-9
GRADIENT_FLOOR: Final[float] = 1e-12

_ll = lowlevel(cutoff=SUPPORT_TOL)
_floored = lowlevel(cutoff=GRADIENT_FLOOR)


class RelativeEntropyTarget:
    """``sigma -> D(rho || sigma)`` and its gradient in ``sigma``, eigenvalues floored."""

    def __init__(self, rho: ComplexArray) -> None:
        self._rho = rho
        w = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
        w = w[w > GRADIENT_FLOOR]
        self._neg_entropy = float(np.sum(w * np.log2(w)))

    def value(self, sigma: ComplexArray) -> float:
        w, v = _floored.eigh(sigma)
        logs = (v * np.log2(np.clip(w, GRADIENT_FLOOR, None))) @ v.conj().T
        return self._neg_entropy - float(np.real(np.vdot(logs, self._rho)))

    def gradient(self, sigma: ComplexArray) -> ComplexArray:
        return -_floored.log2_frechet(sigma, self._rho)


def _check_pair(rho: DensityOperator, sigma: DensityOperator) -> None:
    if rho.dim != sigma.dim:
        raise StateError(
            StateErrorKind.DIM_MISMATCH, f"dimensions differ: {rho.dims} vs {sigma.dims}"
        )


def _normalized_pair(rho: DensityOperator, sigma: DensityOperator) -> bool:
    return not (rho.subnormalized or sigma.subnormalized)


def _entropy_of_spectrum(w: RealArray) -> float:
    w = w[w > SUPPORT_TOL]
    return float(-np.sum(w * np.log2(w)))


def support_leak(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Weight of ``rho`` outside the support of ``sigma``."""
    w, v = _ll.eigh(sigma.op)
    ker = v[:, w <= SUPPORT_TOL]
    if ker.shape[1] == 0:
        return 0.0
    return float(np.real(np.trace(ker.conj().T @ rho.op @ ker)))


def von_neumann_entropy(s: DensityOperator) -> float:
    if s.subnormalized:
        raise StateError(StateErrorKind.SUBNORMALIZED, "entropy needs a normalized state")
    h = _entropy_of_spectrum(hermitian_eig(s)[0])
    return min(max(h, 0.0), math.log2(s.dim))


def _entropy(s: DensityOperator, labels: tuple[str, ...]) -> float:
    if not labels:
        return 0.0
    return von_neumann_entropy(partial_trace(s, labels))


def relative_entropy(rho: DensityOperator, sigma: DensityOperator) -> DivergenceValue:
    """``Tr[rho (log rho - log sigma)]``, ``inf`` when supports do not nest."""
    _check_pair(rho, sigma)
    if support_leak(rho, sigma) > LEAK_TOL:
        return DivergenceValue(math.inf, status=SolverStatus.EXACT)
    wr = hermitian_eig(rho)[0]
    wr = wr[wr > SUPPORT_TOL]
    tr_rho_log_rho = float(np.sum(wr * np.log2(wr)))
    log_sigma = _ll.spectral(sigma.op, np.log2, on_support=True)
    value = tr_rho_log_rho - float(np.real(np.trace(rho.op @ log_sigma)))
    if _normalized_pair(rho, sigma):
        value = max(value, 0.0)
    return DivergenceValue(value, dual_bound=value, status=SolverStatus.EXACT)


def mutual_information(s: DensityOperator, cut: tuple[LabelsArg, LabelsArg]) -> float:
    a, b = parse_cut(cut, s.dims)
    return max(0.0, _entropy(s, a) + _entropy(s, b) - von_neumann_entropy(s))


def conditional_mutual_information(
    s: DensityOperator, a: LabelsArg, b: LabelsArg, c: LabelsArg
) -> float:
    la, lb, lc = parse_labels(a), parse_labels(b), parse_labels(c)
    check_partition(s.dims, la, lb, lc)
    value = (
        _entropy(s, (*la, *lc))
        + _entropy(s, (*lb, *lc))
        - von_neumann_entropy(s)
        - _entropy(s, lc)
    )
    return max(0.0, value)


def d_max(rho: DensityOperator, sigma: DensityOperator) -> DivergenceValue:
    """``log2`` of the smallest ``lambda`` with ``rho <= lambda sigma``."""
    _check_pair(rho, sigma)
    if support_leak(rho, sigma) > LEAK_TOL:
        return DivergenceValue(math.inf, status=SolverStatus.EXACT)
    inv_sqrt = _ll.spectral(sigma.op, lambda w: 1 / np.sqrt(w), on_support=True)
    lam = float(np.linalg.eigvalsh(inv_sqrt @ rho.op @ inv_sqrt)[-1])
    if lam <= 0:
        return DivergenceValue(-math.inf, status=SolverStatus.EXACT)
    value = math.log2(lam)
    if _normalized_pair(rho, sigma):
        value = max(value, 0.0)
    return DivergenceValue(value, dual_bound=value, status=SolverStatus.EXACT)


def _check_eps(eps: float) -> None:
    if not 0 <= eps < 1:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"eps must lie in [0, 1), got {eps!r}")


def smooth_d_max(
    rho: DensityOperator,
    sigma: DensityOperator,
    eps: float,
    config: Optional[SolverConfig] = None,
) -> DivergenceValue:
    """Smooth max-relative entropy over the purified-distance ball of ``rho``.

    One SDP in ``(lambda, rho_bar, X)``: ``rho_bar <= lambda sigma``,
    ``Tr rho_bar <= 1`` and the Uhlmann block certifying
    ``F(rho, rho_bar) >= sqrt(1 - eps^2)``. The value is clamped at zero
    for normalized inputs.
    """
    _check_pair(rho, sigma)
    _check_eps(eps)
    if rho.subnormalized:
        raise StateError(StateErrorKind.SUBNORMALIZED, "smoothing needs a normalized rho")
    exact = d_max(rho, sigma)
    if eps == 0:
        return exact._replace(certificate=rho)
    if exact.bits == 0:
        return DivergenceValue(0.0, certificate=rho, dual_bound=0.0, status=SolverStatus.EXACT)
    config = DEFAULT_CONFIG if config is None else config
    d = rho.dim
    lam = cp.Variable(nonneg=True)
    rho_bar = hermitian(d)
    block, re_tr_x = fidelity_block(rho.op, rho_bar, d)
    constraints = [
        rho_bar >> 0,
        cp.real(cp.trace(rho_bar)) <= 1,
        lam * sigma.op - rho_bar >> 0,
        block,
        re_tr_x >= math.sqrt(1 - eps**2),
    ]
    handler = ConicHandler("smooth_d_max", config)
    try:
        value, status = handler.solve(cp.Problem(cp.Minimize(lam), constraints))
    except SolverError:
        if not exact.is_infinite:
            raise
        logger.debug("smooth_d_max eps=%.4g: no state in the ball fits the support", eps)
        return exact
    cert = DensityOperator.from_solver(handler.value_of(rho_bar), rho.dims, subnormalized=True)
    bits = math.log2(max(value, 1e-300))
    lower = math.log2(max(value - config.tol, 1e-300))
    bits = min(bits, exact.bits)
    if _normalized_pair(rho, sigma):
        bits, lower = max(bits, 0.0), max(lower, 0.0)
    logger.debug("smooth_d_max eps=%.4g: %.9g bits (%s)", eps, bits, status.value)
    return DivergenceValue(bits, certificate=cert, dual_bound=min(lower, bits), status=status)


def max_entropy(s: DensityOperator, party: LabelsArg) -> float:
    """Unsmoothed ``2 log2 Tr sqrt(rho_party)``."""
    w = np.clip(hermitian_eig(partial_trace(s, party))[0], 0.0, None)
    return 2 * math.log2(float(np.sum(np.sqrt(w))))


def smooth_max_entropy(
    s: DensityOperator,
    party: LabelsArg,
    eps: float,
    config: Optional[SolverConfig] = None,
) -> DivergenceValue:
    """Smooth max-entropy of the marginal on ``party``.

    The optimal smoothing commutes with the marginal, so the search runs
    over square roots ``t_i`` of its eigenvalues: minimize ``sum t`` with
    ``sum sqrt(p_i) t_i >= sqrt(1 - eps^2)`` and ``sum t^2 <= 1``.
    """
    _check_eps(eps)
    if s.subnormalized:
        raise StateError(StateErrorKind.SUBNORMALIZED, "smoothing needs a normalized state")
    marginal = partial_trace(s, party)
    w, v = hermitian_eig(marginal)
    p = np.clip(w, 0.0, None)
    if eps == 0:
        value = 2 * math.log2(float(np.sum(np.sqrt(p))))
        return DivergenceValue(value, certificate=marginal, dual_bound=value, status=SolverStatus.EXACT)
    t = cp.Variable(p.shape[0], nonneg=True)
    constraints = [np.sqrt(p) @ t >= math.sqrt(1 - eps**2), cp.sum_squares(t) <= 1]
    handler = ConicHandler("smooth_max_entropy", config)
    value, status = handler.solve(cp.Problem(cp.Minimize(cp.sum(t)), constraints))
    weights = np.clip(np.real(handler.value_of(t)), 0.0, None) ** 2
    cert = DensityOperator.from_solver((v * weights) @ v.conj().T, marginal.dims, subnormalized=True)
    bits = 2 * math.log2(max(value, 1e-300))
    tol = handler.config.tol
    return DivergenceValue(
        bits,
        certificate=cert,
        dual_bound=2 * math.log2(max(value - tol, 1e-300)),
        status=status,
    )


def collision_divergence(rho: DensityOperator, sigma: DensityOperator) -> DivergenceValue:
    """Petz order-2 divergence ``log2 Tr[rho^2 sigma^-1]`` on the support of ``sigma``."""
    _check_pair(rho, sigma)
    if support_leak(rho, sigma) > LEAK_TOL:
        return DivergenceValue(math.inf, status=SolverStatus.EXACT)
    inv = _ll.spectral(sigma.op, lambda w: 1 / w, on_support=True)
    q = float(np.real(np.trace(rho.op @ rho.op @ inv)))
    value = math.log2(max(q, 1e-300))
    if _normalized_pair(rho, sigma):
        value = max(value, 0.0)
    return DivergenceValue(value, dual_bound=value, status=SolverStatus.EXACT)
