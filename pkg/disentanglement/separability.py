# This file is part of disentanglement
#
# MIT License

"""The separable set and its two computable surrogates.

``ppt`` mode works over the PPT spectrahedron (a superset of SEP, exact for
2x2 and 2x3), ``ensemble`` mode over explicit product ensembles (a subset).
Minimizations therefore give a lower bound in ``ppt`` mode and an upper
bound in ``ensemble`` mode.
"""

from __future__ import annotations

import itertools
import logging
import math
import string
from typing import Final, Optional, Sequence, Union

import cvxpy as cp
import numpy as np
import numpy.typing as npt

from . import _frankwolfe
from ._backend import ConicHandler, fidelity_block, hermitian, ppt_constraints
from ._lowlevel import lowlevel
from ._typings import ComplexArray, CutArg, LabelsArg
from .divergences import RelativeEntropyTarget
from .errors import ProtocolError, ProtocolErrorKind, StateError, StateErrorKind
from .models import (
    DEFAULT_CONFIG,
    ApproxMode,
    DivergenceValue,
    SepApprox,
    SolverConfig,
    SolverStatus,
)
from .qmatrix import (
    DensityOperator,
    hermitian_eig,
    partial_transpose,
    purified_distance,
    reorder,
)
from .subsystems import SubsystemDims, check_partition, parse_labels

logger = logging.getLogger(__name__)

PPT_TOL: Final[float] = 1e-9
EIG_FLOOR: Final[float] = 1e-12
GROUP_JOIN: Final[str] = "+"
MAX_ENSEMBLE_POINTS: Final[int] = 1 << 16

Partition = tuple[tuple[str, ...], ...]
Bipartition = tuple[tuple[str, ...], tuple[str, ...]]
PartitionArg = Union[None, str, CutArg, Sequence[LabelsArg]]

_ll = lowlevel(cutoff=EIG_FLOOR)


class ProductEnsemble:
    """Convex combination of product pure states, one vector per party."""

    def __init__(
        self,
        parties: SubsystemDims,
        points: Sequence[tuple[float, Sequence[npt.ArrayLike]]],
    ) -> None:
        if not points:
            raise StateError(StateErrorKind.BAD_PARAMETER, "empty product ensemble")
        checked: list[tuple[float, tuple[ComplexArray, ...]]] = []
        for weight, vecs in points:
            w = float(weight)
            if not w > 0:
                raise StateError(StateErrorKind.BAD_PARAMETER, f"weight {w!r} is not positive")
            if len(vecs) != len(parties):
                raise StateError(
                    StateErrorKind.DIM_MISMATCH,
                    f"point has {len(vecs)} local states for {len(parties)} parties",
                )
            local: list[ComplexArray] = []
            for (label, dim), vec in zip(parties, vecs):
                v = np.array(vec, dtype=np.complex128).reshape(-1)
                if v.shape[0] != dim:
                    raise StateError(
                        StateErrorKind.DIM_MISMATCH,
                        f"local state of {label!r} has length {v.shape[0]}, expected {dim}",
                    )
                norm = float(np.linalg.norm(v))
                if abs(norm - 1) > 1e-10:
                    raise StateError(
                        StateErrorKind.INVALID_STATE, f"local state of {label!r} has norm {norm!r}"
                    )
                v.setflags(write=False)
                local.append(v)
            checked.append((w, tuple(local)))
        total = sum(w for w, _ in checked)
        if abs(total - 1) > 1e-9:
            raise StateError(StateErrorKind.BAD_PARAMETER, f"weights sum to {total!r}")
        self._parties = parties
        self._points = tuple(checked)

    @classmethod
    def normalized(
        cls,
        parties: SubsystemDims,
        points: Sequence[tuple[float, Sequence[npt.ArrayLike]]],
    ) -> ProductEnsemble:
        """Rescale weights and local vectors, dropping zero-weight points."""
        kept = [(float(w), [np.asarray(v) / np.linalg.norm(v) for v in vecs]) for w, vecs in points if w > 0]
        total = sum(w for w, _ in kept)
        return cls(parties, [(w / total, vecs) for w, vecs in kept])

    @property
    def parties(self) -> SubsystemDims:
        return self._parties

    @property
    def points(self) -> tuple[tuple[float, tuple[ComplexArray, ...]], ...]:
        return self._points

    def __len__(self) -> int:
        return len(self._points)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(parties={str(self._parties)!r}, points={len(self)})"


def _product_vector(vecs: Sequence[ComplexArray]) -> ComplexArray:
    out = np.ones(1, dtype=np.complex128)
    for v in vecs:
        out = np.kron(out, v)
    return out


def realize(ens: ProductEnsemble) -> DensityOperator:
    d = ens.parties.total_dim
    op = np.zeros((d, d), dtype=np.complex128)
    for w, vecs in ens.points:
        v = _product_vector(vecs)
        op += w * np.outer(v, v.conj())
    return DensityOperator._unchecked(op, ens.parties)


def ensemble_tensor(a: ProductEnsemble, b: ProductEnsemble) -> ProductEnsemble:
    if len(a) * len(b) > MAX_ENSEMBLE_POINTS:
        raise ProtocolError(
            ProtocolErrorKind.DIMENSION_BLOWUP,
            f"ensemble product would hold {len(a) * len(b)} points",
        )
    parties = a.parties.concat(b.parties)
    points = [(wa * wb, (*va, *vb)) for (wa, va), (wb, vb) in itertools.product(a.points, b.points)]
    return ProductEnsemble(parties, points)


def ensemble_power(e: ProductEnsemble, n: int, *, start: int = 1) -> ProductEnsemble:
    """``n`` copies with labels suffixed like ``qmatrix.tensor_power``."""
    if n < 1:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"ensemble power needs n >= 1, got {n}")
    copies = [ProductEnsemble(e.parties.suffixed(start + i), e.points) for i in range(n)]
    out = copies[0]
    for c in copies[1:]:
        out = ensemble_tensor(out, c)
    return out


def resolve_partition(dims: SubsystemDims, cut: PartitionArg = None) -> Partition:
    """Party groups for a separability question.

    ``None`` means every label is its own party; a string uses ``:``
    between groups and ``,`` inside a group (``"A,A1:B,B1"``).
    """
    if cut is None:
        groups: list[tuple[str, ...]] = [(label,) for label in dims.labels]
    elif isinstance(cut, str):
        groups = [parse_labels(g) for g in cut.split(":")]
    else:
        groups = [parse_labels(g) for g in cut]
    if len(groups) < 2:
        raise StateError(StateErrorKind.BAD_PARTITION, "a separability cut needs two or more groups")
    check_partition(dims, *groups)
    return tuple(groups)


def bipartitions(dims: SubsystemDims, cut: PartitionArg = None) -> tuple[Bipartition, ...]:
    """Group subsets up to half the parties, one per complementary pair."""
    groups = resolve_partition(dims, cut)
    k = len(groups)
    out: list[Bipartition] = []
    for size in range(1, k // 2 + 1):
        for chosen in itertools.combinations(range(k), size):
            if 2 * size == k and 0 not in chosen:
                continue
            side = tuple(label for i in chosen for label in groups[i])
            rest = tuple(label for i in range(k) if i not in chosen for label in groups[i])
            out.append((rest, side))
    return tuple(out)


def _cut_set(dims: SubsystemDims, cut: PartitionArg, approx: SepApprox) -> tuple[Bipartition, ...]:
    if approx.cut_set:
        return approx.cut_set
    return bipartitions(dims, cut)


def _transposed_sides(dims: SubsystemDims, cuts: Sequence[Bipartition]) -> list[tuple[int, ...]]:
    return [dims.indices(side) for _, side in cuts]


def is_ppt(s: DensityOperator, cut: PartitionArg = None) -> tuple[bool, float]:
    """PPT test across a bipartition (or every bipartition of a partition)."""
    min_eig = math.inf
    for _, side in bipartitions(s.dims, cut):
        w = hermitian_eig(partial_transpose(s, side))[0]
        min_eig = min(min_eig, float(w[-1]))
    return min_eig >= -PPT_TOL, min_eig


def is_ppt_exact(dims: SubsystemDims, cut: PartitionArg = None) -> bool:
    """Whether PPT coincides with SEP for this cut (2x2, 2x3 or a trivial side)."""
    groups = resolve_partition(dims, cut)
    if len(groups) != 2:
        return False
    da, db = sorted(dims.dim_of(g) for g in groups)
    return da == 1 or (da == 2 and db in (2, 3))


def _grouped(s: DensityOperator, groups: Partition) -> tuple[DensityOperator, list[int]]:
    flat = [label for g in groups for label in g]
    return reorder(s, flat), [s.dims.dim_of(g) for g in groups]


def _group_dims(groups: Partition, s: DensityOperator) -> SubsystemDims:
    return SubsystemDims((GROUP_JOIN.join(g), s.dims.dim_of(g)) for g in groups)


def _reduced(g: ComplexArray, dims: Sequence[int], vecs: Sequence[ComplexArray], p: int) -> ComplexArray:
    k = len(dims)
    letters = string.ascii_letters
    ket, bra = letters[:k], letters[k : 2 * k]
    operands: list[ComplexArray] = [g.reshape(tuple(dims) * 2)]
    subs = [ket + bra]
    for q in range(k):
        if q != p:
            operands.extend([vecs[q].conj(), vecs[q]])
            subs.extend([ket[q], bra[q]])
    return np.einsum(",".join(subs) + "->" + ket[p] + bra[p], *operands)


def _local_seed(vec: ComplexArray, dims: Sequence[int], p: int) -> ComplexArray:
    t = np.moveaxis(vec.reshape(tuple(dims)), p, 0).reshape(dims[p], -1)
    u = np.linalg.svd(t, full_matrices=False)[0]
    return u[:, 0]


def _random_unit(d: int, rng: np.random.Generator) -> ComplexArray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def best_product_state(
    g: ComplexArray,
    dims: Sequence[int],
    restarts: int = 32,
    seed: Union[int, np.random.Generator] = 0,
) -> tuple[float, tuple[ComplexArray, ...]]:
    """Minimize ``<a_1...a_k| g |a_1...a_k>`` over product unit vectors.

    Alternating minimum-eigenvector updates per party, from the Schmidt
    vectors of the minimal eigenvector of ``g`` and from seeded random
    starts; the best local optimum is returned.
    """
    rng = np.random.default_rng(seed)
    k = len(dims)
    herm = (g + g.conj().T) / 2
    psi = _ll.eigh(herm)[1][:, -1]
    starts = [[_local_seed(psi, dims, p) for p in range(k)]]
    starts.extend([_random_unit(d, rng) for d in dims] for _ in range(restarts))
    best_val, best_vecs = math.inf, tuple(starts[0])
    for start in starts:
        vecs = list(start)
        val = math.inf
        for _ in range(200):
            for p in range(k):
                w, v = _ll.eigh(_reduced(herm, dims, vecs, p))
                vecs[p] = v[:, -1]
                new_val = float(w[-1])
            if val - new_val < 1e-12:
                val = min(val, new_val)
                break
            val = new_val
        if val < best_val:
            best_val, best_vecs = val, tuple(vecs)
    return best_val, best_vecs


def _diagonal_start(op: ComplexArray, dims: Sequence[int]) -> tuple[list[tuple[ComplexArray, tuple[ComplexArray, ...]]], list[float]]:
    diag = np.real(np.diag(op))
    d = op.shape[0]
    start: list[tuple[ComplexArray, tuple[ComplexArray, ...]]] = []
    weights: list[float] = []
    for i in np.flatnonzero(diag > 1e-14):
        atom = np.zeros((d, d), dtype=np.complex128)
        atom[i, i] = 1
        idx = np.unravel_index(int(i), tuple(dims))
        vecs = tuple(np.eye(dm, dtype=np.complex128)[j] for dm, j in zip(dims, idx))
        start.append((atom, vecs))
        weights.append(float(diag[i]))
    return start, weights


def _resolve(approx: Optional[SepApprox], config: Optional[SolverConfig]) -> tuple[SepApprox, SolverConfig]:
    return (
        SepApprox(ApproxMode.PPT) if approx is None else approx,
        DEFAULT_CONFIG if config is None else config,
    )


class _PptOracle:
    """Linear minimization over PPT states, one cached parametrized SDP."""

    def __init__(self, dims: SubsystemDims, cuts: Sequence[Bipartition], config: SolverConfig) -> None:
        d = dims.total_dim
        self._gr = cp.Parameter((d, d))
        self._gi = cp.Parameter((d, d))
        self._sigma = hermitian(d)
        objective = cp.sum(cp.multiply(self._gr, cp.real(self._sigma))) + cp.sum(
            cp.multiply(self._gi, cp.imag(self._sigma))
        )
        constraints = [self._sigma >> 0, cp.real(cp.trace(self._sigma)) == 1]
        constraints += ppt_constraints(self._sigma, dims.local_dims, _transposed_sides(dims, cuts))
        self._problem = cp.Problem(cp.Minimize(objective), constraints)
        self._handler = ConicHandler("ppt linear oracle", config)
        self._dims = dims

    def __call__(self, g: ComplexArray) -> tuple[ComplexArray, None]:
        self._gr.value = np.real(g)
        self._gi.value = np.imag(g)
        self._handler.solve(self._problem)
        s = DensityOperator.from_solver(self._handler.value_of(self._sigma), self._dims)
        return np.array(s.op), None


class _EnsembleOracle:
    def __init__(self, dims: Sequence[int], config: SolverConfig) -> None:
        self._dims = list(dims)
        self._restarts = config.restarts
        self._rng = np.random.default_rng(config.seed)

    def __call__(self, g: ComplexArray) -> tuple[ComplexArray, tuple[ComplexArray, ...]]:
        _, vecs = best_product_state(g, self._dims, self._restarts, self._rng)
        v = _product_vector(vecs)
        return np.outer(v, v.conj()), vecs


def _ensemble_from(result: _frankwolfe.FrankWolfeResult, parties: SubsystemDims) -> ProductEnsemble:
    return ProductEnsemble.normalized(parties, list(zip(result.weights, result.payloads)))


def _ree_ppt(rho: DensityOperator, cut: PartitionArg, approx: SepApprox, tol: float, config: SolverConfig) -> DivergenceValue:
    cuts = _cut_set(rho.dims, cut, approx)
    target = RelativeEntropyTarget(rho.op)
    start, weights = _diagonal_start(rho.op, rho.dims.local_dims)
    result = _frankwolfe.minimize(
        target.value,
        target.gradient,
        _PptOracle(rho.dims, cuts, config),
        start,
        weights,
        tol=tol,
        max_iter=config.fw_max_iter,
        name="ree[ppt]",
    )
    cert = DensityOperator.from_solver(result.x, rho.dims)
    return DivergenceValue(
        max(result.value, 0.0),
        certificate=cert,
        dual_bound=max(result.lower_bound, 0.0),
        status=result.status,
        iterations=result.iterations,
    )


def closest_product_ensemble(
    rho: DensityOperator,
    cut: PartitionArg = None,
    tol: Optional[float] = None,
    config: Optional[SolverConfig] = None,
) -> tuple[DivergenceValue, ProductEnsemble]:
    """Relative entropy to the hull of product states, with the ensemble found."""
    config = DEFAULT_CONFIG if config is None else config
    tol = config.fw_tol if tol is None else tol
    groups = resolve_partition(rho.dims, cut)
    grouped, gdims = _grouped(rho, groups)
    target = RelativeEntropyTarget(grouped.op)
    start, weights = _diagonal_start(grouped.op, gdims)
    result = _frankwolfe.minimize(
        target.value,
        target.gradient,
        _EnsembleOracle(gdims, config),
        start,
        weights,
        tol=tol,
        max_iter=config.fw_max_iter,
        name="ree[ensemble]",
    )
    ens = _ensemble_from(result, _group_dims(groups, rho))
    cert = reorder(DensityOperator.from_solver(result.x, grouped.dims), rho.labels)
    value = DivergenceValue(
        max(result.value, 0.0),
        certificate=cert,
        dual_bound=max(result.lower_bound, 0.0),
        status=result.status,
        iterations=result.iterations,
    )
    return value, ens


def ree(
    rho: DensityOperator,
    cut: PartitionArg = None,
    approx: Optional[SepApprox] = None,
    tol: Optional[float] = None,
    config: Optional[SolverConfig] = None,
) -> DivergenceValue:
    """Relative entropy of entanglement across ``cut``.

    With ``ApproxMode.BOTH`` the ensemble value is returned with the PPT
    value as its ``dual_bound``.
    """
    if rho.subnormalized:
        raise StateError(StateErrorKind.SUBNORMALIZED, "ree needs a normalized state")
    approx, config = _resolve(approx, config)
    tol = config.fw_tol if tol is None else tol
    logger.info("ree on %s (%s mode)", rho.dims, approx.mode.value)
    if approx.mode is ApproxMode.PPT:
        return _ree_ppt(rho, cut, approx, tol, config)
    upper, _ = closest_product_ensemble(rho, cut, tol, config)
    if approx.mode is ApproxMode.ENSEMBLE:
        return upper
    lower = _ree_ppt(rho, cut, approx, tol, config)
    status = upper.status if upper.status is not SolverStatus.CONVERGED else lower.status
    return upper._replace(dual_bound=lower.bits, status=status)


def _ball(rho: DensityOperator, eps: float) -> tuple[Union[cp.Variable, ComplexArray], list[object]]:
    if eps == 0:
        return rho.op, []
    d = rho.dim
    rho_bar = hermitian(d)
    block, re_tr_x = fidelity_block(rho.op, rho_bar, d)
    constraints: list[object] = [
        rho_bar >> 0,
        cp.real(cp.trace(rho_bar)) <= 1,
        block,
        re_tr_x >= math.sqrt(1 - eps**2),
    ]
    return rho_bar, constraints


def _e_max_ppt(rho: DensityOperator, cut: PartitionArg, eps: float, approx: SepApprox, config: SolverConfig) -> DivergenceValue:
    d = rho.dim
    s = hermitian(d)
    rho_bar, constraints = _ball(rho, eps)
    constraints += [s >> 0, s - rho_bar >> 0]
    constraints += ppt_constraints(s, rho.dims.local_dims, _transposed_sides(rho.dims, _cut_set(rho.dims, cut, approx)))
    handler = ConicHandler("e_max_smooth[ppt]", config)
    value, status = handler.solve(cp.Problem(cp.Minimize(cp.real(cp.trace(s))), constraints))
    cert = DensityOperator.from_solver(handler.value_of(s), rho.dims)
    bits = max(0.0, math.log2(max(value, 1e-300)))
    lower = max(0.0, math.log2(max(value - config.tol, 1e-300)))
    return DivergenceValue(bits, certificate=cert, dual_bound=min(lower, bits), status=status)


def _e_max_ensemble(rho: DensityOperator, cut: PartitionArg, eps: float, config: SolverConfig) -> DivergenceValue:
    groups = resolve_partition(rho.dims, cut)
    grouped, gdims = _grouped(rho, groups)
    d = grouped.dim
    rng = np.random.default_rng(config.seed)
    atoms: list[ComplexArray] = []
    for i in range(d):
        basis = np.zeros((d, d), dtype=np.complex128)
        basis[i, i] = 1
        atoms.append(basis)
    rounds = 0
    value, status, weights = math.inf, SolverStatus.MAX_ITER, np.zeros(0)
    for rounds in range(1, config.max_iter + 1):
        w = cp.Variable(len(atoms), nonneg=True)
        rho_bar, constraints = _ball(grouped, eps)
        mixture = sum(w[j] * atoms[j] for j in range(len(atoms)))
        dominance = mixture - rho_bar >> 0
        handler = ConicHandler("e_max_smooth[ensemble]", config)
        value, _ = handler.solve(cp.Problem(cp.Minimize(cp.sum(w)), [*constraints, dominance]))
        weights = np.clip(np.asarray(w.value, dtype=np.float64), 0.0, None)
        z = np.asarray(dominance.dual_value, dtype=np.complex128)
        z = (z + z.conj().T) / 2
        active = [float(np.real(np.vdot(z, atoms[j]))) for j in np.flatnonzero(weights > 1e-8)]
        if active and abs(np.mean(active)) > 1e-12:
            z = z / float(np.mean(active))
        added = 0
        for candidate in (z, z.conj()):
            price, vecs = best_product_state(-candidate, gdims, config.restarts, rng)
            logger.debug("column generation round %d: pricing %.9g", rounds, -price)
            if -price > 1 + 1e-7:
                v = _product_vector(vecs)
                atoms.append(np.outer(v, v.conj()))
                added += 1
        if not added:
            status = SolverStatus.CONVERGED
            break
    sigma = sum(wj * a for wj, a in zip(weights, atoms))
    cert = reorder(DensityOperator.from_solver(sigma, grouped.dims), rho.labels)
    bits = max(0.0, math.log2(max(value, 1e-300)))
    return DivergenceValue(bits, certificate=cert, status=status, iterations=rounds)


def e_max_smooth(
    rho: DensityOperator,
    cut: PartitionArg = None,
    eps: float = 0.0,
    approx: Optional[SepApprox] = None,
    config: Optional[SolverConfig] = None,
) -> DivergenceValue:
    """Smooth max-relative entropy of entanglement.

    ``ppt`` mode is one SDP with ``lambda sigma`` absorbed into ``S``;
    ``ensemble`` mode prices new product atoms against the dual of the
    dominance constraint. ``BOTH`` returns the ensemble value with the
    PPT value as ``dual_bound``.
    """
    if not 0 <= eps < 1:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"eps must lie in [0, 1), got {eps!r}")
    if rho.subnormalized:
        raise StateError(StateErrorKind.SUBNORMALIZED, "e_max_smooth needs a normalized state")
    approx, config = _resolve(approx, config)
    if approx.mode is ApproxMode.PPT:
        return _e_max_ppt(rho, cut, eps, approx, config)
    upper = _e_max_ensemble(rho, cut, eps, config)
    if approx.mode is ApproxMode.ENSEMBLE:
        return upper
    lower = _e_max_ppt(rho, cut, eps, approx, config)
    return upper._replace(dual_bound=lower.bits)


class _FidelityTarget:
    """``sigma -> -F(rho, sigma)`` and its gradient on the support."""

    def __init__(self, rho: ComplexArray) -> None:
        self._sqrt_rho = _ll.sqrt_psd(rho)

    def value(self, sigma: ComplexArray) -> float:
        inner = self._sqrt_rho @ sigma @ self._sqrt_rho
        w = np.clip(np.linalg.eigvalsh((inner + inner.conj().T) / 2), 0.0, None)
        return -float(np.sum(np.sqrt(w)))

    def gradient(self, sigma: ComplexArray) -> ComplexArray:
        inner = self._sqrt_rho @ sigma @ self._sqrt_rho
        inv_sqrt = _ll.spectral((inner + inner.conj().T) / 2, lambda w: 1 / np.sqrt(w), on_support=True)
        return -0.5 * self._sqrt_rho @ inv_sqrt @ self._sqrt_rho


def _nearest_ppt(s: DensityOperator, cut: PartitionArg, approx: SepApprox, config: SolverConfig) -> tuple[float, DensityOperator]:
    ppt, _ = is_ppt(s, cut)
    if ppt and not approx.cut_set:
        return 0.0, s
    d = s.dim
    sigma = hermitian(d)
    block, re_tr_x = fidelity_block(s.op, sigma, d)
    constraints = [sigma >> 0, cp.real(cp.trace(sigma)) == 1, block]
    constraints += ppt_constraints(sigma, s.dims.local_dims, _transposed_sides(s.dims, _cut_set(s.dims, cut, approx)))
    handler = ConicHandler("nearest_sep_distance[ppt]", config)
    handler.solve(cp.Problem(cp.Maximize(re_tr_x), constraints))
    witness = DensityOperator.from_solver(handler.value_of(sigma), s.dims)
    return purified_distance(s, witness), witness


def nearest_separable_ensemble(
    s: DensityOperator, cut: PartitionArg = None, config: Optional[SolverConfig] = None
) -> tuple[float, DensityOperator, ProductEnsemble]:
    """Fidelity maximization over product ensembles by Frank-Wolfe."""
    config = DEFAULT_CONFIG if config is None else config
    groups = resolve_partition(s.dims, cut)
    grouped, gdims = _grouped(s, groups)
    target = _FidelityTarget(grouped.op)
    start, weights = _diagonal_start(grouped.op, gdims)
    result = _frankwolfe.minimize(
        target.value,
        target.gradient,
        _EnsembleOracle(gdims, config),
        start,
        weights,
        tol=config.fw_tol,
        max_iter=config.fw_max_iter,
        name="nearest_sep_distance[ensemble]",
    )
    ens = _ensemble_from(result, _group_dims(groups, s))
    witness = reorder(DensityOperator.from_solver(result.x, grouped.dims), s.labels)
    return purified_distance(s, witness), witness, ens


def nearest_sep_distance(
    s: DensityOperator,
    cut: PartitionArg = None,
    approx: Optional[SepApprox] = None,
    config: Optional[SolverConfig] = None,
) -> tuple[float, DensityOperator]:
    """Purified distance to the approximating set and the optimizer found.

    ``BOTH`` uses the PPT program where it is exact and product ensembles
    otherwise.
    """
    if s.subnormalized:
        raise StateError(StateErrorKind.SUBNORMALIZED, "nearest_sep_distance needs a normalized state")
    approx, config = _resolve(approx, config)
    mode = approx.mode
    if mode is ApproxMode.BOTH:
        mode = ApproxMode.PPT if is_ppt_exact(s.dims, cut) else ApproxMode.ENSEMBLE
    if mode is ApproxMode.PPT:
        return _nearest_ppt(s, cut, approx, config)
    distance, witness, _ = nearest_separable_ensemble(s, cut, config)
    return distance, witness

