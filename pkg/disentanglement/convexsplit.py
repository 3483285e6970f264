# This file is part of disentanglement
#
# MIT License

"""Convex split: ``(1/N) sum_i rho_i (x) sigma^(N-1)`` against ``sigma^N``.

Distances are evaluated exactly by type classes when ``rho`` and ``sigma``
commute, densely while ``dim^N`` stays under the configured cap, and
otherwise bounded through the order-2 (collision) divergence:
``P <= sqrt((Q - 1) / (N + Q - 1))`` with ``Q = Tr[rho^2 sigma^-1]``.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Final, Optional, Sequence

import numpy as np
from scipy.special import comb, gammaln

from ._lowlevel import lowlevel
from ._typings import RealArray
from .divergences import collision_divergence, smooth_d_max
from .errors import ProtocolError, ProtocolErrorKind, StateError, StateErrorKind
from .models import (
    DEFAULT_CONFIG,
    CertificationMethod,
    ConvexSplitSpec,
    LemmaCase,
    LemmaRow,
    SolverConfig,
)
from .qmatrix import DensityOperator, make_state, mix, random_state
from .subsystems import SubsystemDims

logger = logging.getLogger(__name__)

COMMUTE_TOL: Final[float] = 1e-9
TYPE_CLASS_LIMIT: Final[int] = 2_000_000
LEMMA_DENSE_DIM: Final[int] = 1024
_MIXING: Final[float] = 0.6180339887498949

_ll = lowlevel()


def _check_pair(rho: DensityOperator, sigma: DensityOperator) -> None:
    if rho.dims.local_dims != sigma.dims.local_dims:
        raise StateError(
            StateErrorKind.DIM_MISMATCH, f"rho on {rho.dims} but sigma on {sigma.dims}"
        )


def _check_spec(spec: ConvexSplitSpec) -> None:
    _check_pair(spec.rho, spec.sigma)
    if spec.N < 1:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"N must be positive, got {spec.N}")
    if spec.zeta < 0 or spec.xi <= 0 or spec.zeta + spec.xi > 1:
        raise StateError(
            StateErrorKind.BAD_PARAMETER,
            f"need zeta >= 0, xi > 0 and zeta + xi <= 1, got {spec.zeta!r}, {spec.xi!r}",
        )


def _guard_dim(sigma: DensityOperator, n: int, max_dim: int) -> int:
    dim = sigma.dim**n
    if dim > max_dim:
        raise ProtocolError(
            ProtocolErrorKind.DIMENSION_BLOWUP,
            f"{n} registers of dimension {sigma.dim} exceed the cap {max_dim}",
            dim=dim,
        )
    return dim


def register_dims(dims: SubsystemDims, n: int) -> SubsystemDims:
    out = dims.suffixed(1)
    for i in range(2, n + 1):
        out = out.concat(dims.suffixed(i))
    return out


def _convex_split_matrix(rho: np.ndarray, sigma: np.ndarray, n: int) -> np.ndarray:
    acc = np.zeros((rho.shape[0] ** n,) * 2, dtype=np.complex128)
    for i in range(n):
        acc += _ll.kron(*(rho if j == i else sigma for j in range(n)))
    return acc / n


def build_convex_split(spec: ConvexSplitSpec, config: Optional[SolverConfig] = None) -> DensityOperator:
    _check_spec(spec)
    config = DEFAULT_CONFIG if config is None else config
    _guard_dim(spec.sigma, spec.N, config.max_dim)
    op = _convex_split_matrix(spec.rho.op, spec.sigma.op, spec.N)
    return DensityOperator._unchecked(op, register_dims(spec.rho.dims, spec.N))


def joint_spectrum(rho: DensityOperator, sigma: DensityOperator) -> Optional[tuple[RealArray, RealArray]]:
    """Eigenvalue pairs in a common eigenbasis, or ``None`` if they do not commute."""
    _check_pair(rho, sigma)
    a, b = rho.op, sigma.op
    if float(np.max(np.abs(a @ b - b @ a))) > COMMUTE_TOL:
        return None
    _, v = _ll.eigh(a + _MIXING * b)
    ra = v.conj().T @ a @ v
    rb = v.conj().T @ b @ v
    off = max(
        float(np.max(np.abs(ra - np.diag(np.diag(ra))))),
        float(np.max(np.abs(rb - np.diag(np.diag(rb))))),
    )
    if off > 1e-8:
        return None
    return np.real(np.diag(ra)).copy(), np.real(np.diag(rb)).copy()


def _compositions(n: int, m: int) -> np.ndarray:
    if m == 1:
        return np.array([[n]])
    bars = np.array(list(itertools.combinations(range(n + m - 1), m - 1)))
    edges = np.hstack(
        [np.full((bars.shape[0], 1), -1), bars, np.full((bars.shape[0], 1), n + m - 1)]
    )
    return np.diff(edges, axis=1) - 1


def _ratio_classes(p: RealArray, q: RealArray) -> tuple[RealArray, RealArray]:
    keep = q > 1e-15
    ratios = np.clip(p[keep], 0.0, None) / q[keep]
    masses = q[keep]
    keys = np.round(ratios, 9)
    uniq = np.unique(keys)
    r = np.array([ratios[keys == k].mean() for k in uniq])
    mass = np.array([masses[keys == k].sum() for k in uniq])
    return r, mass / mass.sum()


def types_fidelity(p: RealArray, q: RealArray, n: int) -> Optional[float]:
    """Exact ``F(tau, sigma^n)`` for commuting inputs, summed over type classes."""
    r, mass = _ratio_classes(p, q)
    m = r.shape[0]
    if comb(n + m - 1, m - 1, exact=True) > TYPE_CLASS_LIMIT:
        return None
    counts = _compositions(n, m)
    with np.errstate(divide="ignore"):
        log_mass = np.log(mass)
    log_w = gammaln(n + 1) - np.sum(gammaln(counts + 1), axis=1) + np.sum(
        np.where(counts > 0, counts * log_mass, 0.0), axis=1
    )
    avg = counts @ r / n
    return float(min(1.0, np.sum(np.exp(log_w) * np.sqrt(avg))))


def dense_distance(rho: DensityOperator, sigma: DensityOperator, n: int) -> float:
    """``P(tau, sigma^n)`` from the explicit ``d^n``-dimensional convex-split state."""
    tau = _convex_split_matrix(rho.op, sigma.op, n)
    root = _ll.kron(*([_ll.sqrt_psd(sigma.op)] * n))
    inner = root @ tau @ root
    w = np.clip(np.linalg.eigvalsh((inner + inner.conj().T) / 2), 0.0, None)
    f = min(1.0, float(np.sum(np.sqrt(w))))
    return math.sqrt(max(0.0, 1 - f * f))


def collision_bound(rho: DensityOperator, sigma: DensityOperator, n: int) -> float:
    q = 2.0 ** collision_divergence(rho, sigma).bits
    if not math.isfinite(q):
        return 1.0
    return min(1.0, math.sqrt(max(0.0, q - 1) / (n + q - 1)))


def certify_convex_split(
    rho: DensityOperator,
    sigma: DensityOperator,
    N: int,
    config: Optional[SolverConfig] = None,
) -> tuple[float, CertificationMethod]:
    """Distance ``P(tau, sigma^N)``, exact where affordable, else an upper bound."""
    _check_pair(rho, sigma)
    config = DEFAULT_CONFIG if config is None else config
    spectra = joint_spectrum(rho, sigma)
    if spectra is not None:
        f = types_fidelity(*spectra, N)
        if f is not None:
            return math.sqrt(max(0.0, 1 - f * f)), CertificationMethod.WITNESS_TYPES
    if sigma.dim**N <= config.max_dim:
        return dense_distance(rho, sigma, N), CertificationMethod.WITNESS_DENSE
    return collision_bound(rho, sigma, N), CertificationMethod.WITNESS_COLLISION


def convex_split_distance(spec: ConvexSplitSpec, config: Optional[SolverConfig] = None) -> float:
    """Exact ``P(tau, sigma^N)``."""
    _check_spec(spec)
    config = DEFAULT_CONFIG if config is None else config
    distance, method = certify_convex_split(spec.rho, spec.sigma, spec.N, config)
    if method is CertificationMethod.WITNESS_COLLISION:
        raise ProtocolError(
            ProtocolErrorKind.DIMENSION_BLOWUP,
            "no exact evaluation available",
            dim=spec.sigma.dim**spec.N,
        )
    return distance


def registers_from_bits(dmax_bits: float, xi: float) -> int:
    if not math.isfinite(dmax_bits):
        raise ProtocolError(
            ProtocolErrorKind.DIMENSION_BLOWUP, "max-relative entropy is infinite"
        )
    return max(1, math.ceil(2.0**dmax_bits / xi - 1e-9))


def registers_for(
    rho: DensityOperator,
    sigma: DensityOperator,
    zeta: float,
    xi: float,
    config: Optional[SolverConfig] = None,
) -> int:
    """``ceil(2^{D_max^zeta(rho||sigma)} / xi)``."""
    if zeta < 0 or xi <= 0:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"need zeta >= 0 and xi > 0, got {zeta!r}, {xi!r}")
    return registers_from_bits(smooth_d_max(rho, sigma, zeta, config).bits, xi)


def _non_increasing(values: Sequence[float]) -> bool:
    return all(b <= a + 1e-12 for a, b in itertools.pairwise(values))


def _lemma_row(case: LemmaCase, config: SolverConfig) -> LemmaRow:
    smoothed = smooth_d_max(case.rho, case.sigma, case.zeta, config)
    n = registers_from_bits(smoothed.bits, case.xi)
    measured, method = certify_convex_split(case.rho, case.sigma, n, config)
    rho_bar = case.rho
    if smoothed.certificate is not None and smoothed.certificate.trace > 0:
        rho_bar = DensityOperator.from_solver(smoothed.certificate.op, case.rho.dims)
    smoothed_p, _ = certify_convex_split(rho_bar, case.sigma, n, config)
    sweep: list[float] = []
    for k in [*range(1, n + 1), 2 * n]:
        p, m = certify_convex_split(case.rho, case.sigma, k, config)
        if m is not CertificationMethod.WITNESS_COLLISION:
            sweep.append(p)
    bound = case.zeta + case.xi
    logger.debug(
        "lemma row %s/%s zeta=%g xi=%g: N=%d P=%.6g (%s)",
        case.rho_id, case.sigma_id, case.zeta, case.xi, n, measured, method.value,
    )
    return LemmaRow(
        rho_id=case.rho_id,
        sigma_id=case.sigma_id,
        zeta=case.zeta,
        xi=case.xi,
        N=n,
        dmax_bits=smoothed.bits,
        measured_P=measured,
        bound=bound,
        passed=measured <= bound,
        smoothed_P=smoothed_p,
        monotone=_non_increasing(sweep),
    )


def default_lemma_grid(seed: int = 0) -> list[LemmaCase]:
    """Two-qubit instances with ``supp rho`` inside ``supp sigma``.

    Bell-diagonal pairs commute with each other; the product-reference rows
    mix a seeded random state into a full-rank product ``sigma`` and do not.
    """
    dims = SubsystemDims.uniform("A,B", 2)
    flat = DensityOperator.maximally_mixed(dims)
    w_half = make_state("werner", 0.5)
    basis = np.zeros((4, 4), dtype=np.complex128)
    basis[0, 0] = 1
    pairs: list[tuple[str, DensityOperator, str, DensityOperator]] = [
        ("werner:0.5", w_half, "flat", flat),
        ("basis00", DensityOperator(basis, dims), "flat", flat),
        ("werner:0.75", make_state("werner", 0.75), "werner:0.5", w_half),
        ("werner:0.9", make_state("werner", 0.9), "werner:0.5", w_half),
        ("werner:0.5", w_half, "werner:0.5", w_half),
    ]
    local = np.diag([0.6, 0.4]).astype(np.complex128)
    product = DensityOperator(np.kron(local, local), dims)
    for k in range(2):
        noisy = mix(product, random_state(dims, seed + k), 0.1)
        pairs.append((f"mixed:{seed + k}", noisy, "product", product))
    return [
        LemmaCase(rho_id, rho, sigma_id, sigma, zeta, xi)
        for rho_id, rho, sigma_id, sigma in pairs
        for zeta in (0.05, 0.1)
        for xi in (0.25, 0.5)
    ]


def verify_lemma(
    grid: Optional[Sequence[LemmaCase]] = None,
    config: Optional[SolverConfig] = None,
    threads: Optional[int] = None,
) -> list[LemmaRow]:
    """Evaluate every grid row; failures are recorded, never raised."""
    config = DEFAULT_CONFIG if config is None else config
    config = config._replace(max_dim=min(config.max_dim, LEMMA_DENSE_DIM))
    cases = default_lemma_grid(config.seed) if grid is None else list(grid)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(lambda c: _lemma_row(c, config), cases))
    failed = sum(not r.passed for r in rows)
    if failed:
        logger.warning("%d of %d convex split rows exceed zeta + xi", failed, len(rows))
    return rows
