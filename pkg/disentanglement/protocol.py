# This file is part of disentanglement
#
# MIT License

"""Catalytic disentangling by coordinated local randomizing maps.

The achievability side mixes ``rho`` into ``M`` copies of a separable
catalyst with swap unitaries acting identically on every party's copies;
the converse side provides the controlled-unitary dilation over a
classically correlated ancilla and the operator inequality it satisfies.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Final, Mapping, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt
from scipy.stats import unitary_group

from ._typings import ComplexArray
from .convexsplit import certify_convex_split, register_dims
from .divergences import smooth_d_max
from .errors import ProtocolError, ProtocolErrorKind, StateError, StateErrorKind
from .models import (
    DEFAULT_CONFIG,
    ApproxMode,
    CertificationMethod,
    ComparisonReport,
    CostBounds,
    DecouplingReport,
    ProtocolReport,
    SepApprox,
    SolverConfig,
)
from .qmatrix import (
    DensityOperator,
    conjugate,
    embed_operator,
    hermitian_eig,
    make_state,
    mix,
    partial_trace,
    permutation_operator,
    purified_distance,
    relabel,
    reorder,
    tensor_power,
    tensor_product,
)
from .separability import (
    PartitionArg,
    ProductEnsemble,
    e_max_smooth,
    is_ppt,
    is_ppt_exact,
    nearest_sep_distance,
    realize,
    ree,
    resolve_partition,
)
from .subsystems import SubsystemDims

logger = logging.getLogger(__name__)

UNITARY_TOL: Final[float] = 1e-10
SUPPORT_TOL: Final[float] = 1e-9
INEQUALITY_TOL: Final[float] = 1e-9
SANDWICH_SLACK: Final[float] = 1e-3
REPAIR_LIMIT: Final[float] = 1e-6
EXPLICIT_DIM: Final[int] = 1024
PPT_CERTIFY_DIM: Final[int] = 64

SeparableArg = Union[DensityOperator, ProductEnsemble]
Candidate = tuple[str, SeparableArg]


def party_registers(dims: SubsystemDims, party: str) -> tuple[str, ...]:
    """Registers owned by ``party``: the label itself or the label with a copy index."""
    return tuple(
        label
        for label in dims.labels
        if label == party or (label.startswith(party) and label[len(party):].isdigit())
    )


class UnitaryEnsemble:
    """``M`` local unitaries per party, applied jointly with uniform weights."""

    def __init__(self, dims: SubsystemDims, per_party: Mapping[str, Sequence[npt.ArrayLike]]) -> None:
        if not per_party:
            raise StateError(StateErrorKind.BAD_PARAMETER, "unitary ensemble has no parties")
        lengths = {len(us) for us in per_party.values()}
        if len(lengths) != 1 or 0 in lengths:
            raise StateError(
                StateErrorKind.BAD_PARAMETER, f"parties hold unequal or empty lists: {sorted(lengths)}"
            )
        checked: dict[str, tuple[ComplexArray, ...]] = {}
        registers: dict[str, tuple[str, ...]] = {}
        claimed: set[str] = set()
        for party, unitaries in per_party.items():
            regs = party_registers(dims, party)
            if not regs:
                raise StateError(StateErrorKind.UNKNOWN_LABEL, f"no register belongs to party {party!r}")
            if claimed & set(regs):
                raise StateError(StateErrorKind.BAD_PARTITION, f"party {party!r} shares registers")
            claimed.update(regs)
            d = dims.dim_of(regs)
            mats: list[ComplexArray] = []
            for u in unitaries:
                m = np.array(u, dtype=np.complex128)
                if m.shape != (d, d):
                    raise StateError(
                        StateErrorKind.DIM_MISMATCH,
                        f"unitary of shape {m.shape} for party {party!r} of dimension {d}",
                    )
                err = float(np.max(np.abs(m.conj().T @ m - np.eye(d))))
                if err > UNITARY_TOL:
                    raise StateError(
                        StateErrorKind.BAD_PARAMETER, f"matrix for party {party!r} is not unitary ({err:.3e})"
                    )
                m.setflags(write=False)
                mats.append(m)
            checked[party] = tuple(mats)
            registers[party] = regs
        self._dims = dims
        self._per_party = checked
        self._registers = registers
        self._M = lengths.pop()

    @classmethod
    def haar(
        cls,
        dims: SubsystemDims,
        M: int,
        seed: Union[int, np.random.Generator] = 0,
        parties: Optional[Sequence[str]] = None,
    ) -> UnitaryEnsemble:
        rng = np.random.default_rng(seed)
        parties = dims.labels if parties is None else parties
        per_party: dict[str, list[ComplexArray]] = {}
        for party in parties:
            d = dims.dim_of(party_registers(dims, party))
            per_party[party] = [
                np.eye(1, dtype=np.complex128) if d == 1 else unitary_group.rvs(d, random_state=rng)
                for _ in range(M)
            ]
        return cls(dims, per_party)

    @property
    def M(self) -> int:
        return self._M

    @property
    def dims(self) -> SubsystemDims:
        return self._dims

    @property
    def parties(self) -> tuple[str, ...]:
        return tuple(self._per_party)

    @property
    def per_party(self) -> Mapping[str, tuple[ComplexArray, ...]]:
        return dict(self._per_party)

    def registers(self, party: str) -> tuple[str, ...]:
        return self._registers[party]

    def joint(self, i: int) -> ComplexArray:
        """``U_A^i (x) U_B^i (x) ...`` on the full register space."""
        u = np.eye(self._dims.total_dim, dtype=np.complex128)
        for party, mats in self._per_party.items():
            u = embed_operator(mats[i], self._registers[party], self._dims) @ u
        return u

    def __len__(self) -> int:
        return self._M

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(dims={str(self._dims)!r}, M={self._M})"


def _check_dims(ens: UnitaryEnsemble, s: DensityOperator) -> None:
    if s.dims != ens.dims:
        raise StateError(
            StateErrorKind.DIM_MISMATCH, f"ensemble acts on {ens.dims}, state lives on {s.dims}"
        )


def apply_randomizing_map(ens: UnitaryEnsemble, s: DensityOperator) -> DensityOperator:
    _check_dims(ens, s)
    acc = np.zeros_like(s.op)
    for i in range(ens.M):
        u = ens.joint(i)
        acc += u @ s.op @ u.conj().T
    return DensityOperator._unchecked(acc / ens.M, s.dims, s.subnormalized)


def build_swap_ensemble(
    M: int, party_dims: SubsystemDims, config: Optional[SolverConfig] = None
) -> UnitaryEnsemble:
    """Entry ``i`` swaps copy 1 with copy ``i`` on every party; entry 1 is the identity."""
    if M < 1:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"M must be positive, got {M}")
    config = DEFAULT_CONFIG if config is None else config
    dims = register_dims(party_dims, M)
    per_party: dict[str, list[ComplexArray]] = {}
    for party in party_dims.labels:
        regs = [f"{party}{i}" for i in range(1, M + 1)]
        local = dims.select(regs)
        if local.total_dim > config.max_dim:
            raise ProtocolError(
                ProtocolErrorKind.DIMENSION_BLOWUP,
                f"{M} copies of party {party!r} exceed the cap {config.max_dim}",
                dim=local.total_dim,
            )
        swaps: list[ComplexArray] = []
        for i in range(M):
            order = list(regs)
            order[0], order[i] = order[i], order[0]
            swaps.append(permutation_operator(order, local))
        per_party[party] = swaps
    return UnitaryEnsemble(dims, per_party)


def catalyst_input(rho: DensityOperator, sigma: DensityOperator, M: int) -> DensityOperator:
    """``rho`` on copy 1 followed by the catalyst ``sigma`` on copies 2..M."""
    first = relabel(rho, rho.dims.suffixed(1).labels)
    if M == 1:
        return first
    return tensor_product(first, tensor_power(sigma, M - 1, start=2))


def _repair_ppt(sigma: DensityOperator, cut: PartitionArg) -> DensityOperator:
    ok, min_eig = is_ppt(sigma, cut)
    if ok or min_eig < -REPAIR_LIMIT:
        return sigma
    t = min(1.0, 2 * -min_eig * sigma.dim)
    logger.debug("mixing %.3e of white noise into a solver candidate", t)
    return mix(sigma, DensityOperator.maximally_mixed(sigma.dims), t)


def certify_separable(
    sigma: SeparableArg, cut: PartitionArg = None
) -> tuple[DensityOperator, CertificationMethod]:
    """Separable state behind ``sigma`` and how separability was established."""
    if isinstance(sigma, ProductEnsemble):
        return realize(sigma), CertificationMethod.ENSEMBLE
    ok, min_eig = is_ppt(sigma, cut)
    if not ok:
        raise ProtocolError(
            ProtocolErrorKind.PRECONDITION_VIOLATED,
            f"catalyst is not PPT (minimum partial-transpose eigenvalue {min_eig:.3e})",
        )
    if is_ppt_exact(sigma.dims, cut):
        return sigma, CertificationMethod.PPT_EXACT
    logger.warning("catalyst on %s is only certified PPT, not separable", sigma.dims)
    return sigma, CertificationMethod.PPT_RELAXATION


def _check_eps_delta(eps: float, delta: float) -> None:
    if not 0 < delta <= eps <= 1:
        raise StateError(
            StateErrorKind.BAD_PARAMETER, f"need 1 >= eps >= delta > 0, got eps={eps!r} delta={delta!r}"
        )


def cost_bounds(
    rho: DensityOperator,
    eps: float,
    delta: float,
    cut: PartitionArg = None,
    config: Optional[SolverConfig] = None,
) -> CostBounds:
    """The sandwich ``E_max^eps <= cost <= E_max^(eps-delta) + log2(1/delta) + 1``.

    The lower side uses the PPT relaxation; the upper side is evaluated
    over a set contained in SEP, and its optimizer is returned.
    """
    _check_eps_delta(eps, delta)
    if eps < 1:
        low = e_max_smooth(rho, cut, eps, SepApprox(ApproxMode.PPT), config)
        lower = low.bits if low.dual_bound is None else min(low.bits, low.dual_bound)
    else:
        lower = 0.0
    mode = ApproxMode.PPT if is_ppt_exact(rho.dims, cut) else ApproxMode.ENSEMBLE
    high = e_max_smooth(rho, cut, eps - delta, SepApprox(mode), config)
    upper = high.bits + math.log2(1 / delta) + 1
    optimizer = None if high.certificate is None else _repair_ppt(high.certificate, cut)
    logger.info("cost bounds for %s at eps=%g: [%.6g, %.6g]", rho.dims, eps, lower, upper)
    return CostBounds(lower, upper, optimizer)


def budget_registers(
    rho: DensityOperator,
    sigma: DensityOperator,
    eps: float,
    delta: float,
    config: Optional[SolverConfig] = None,
) -> int:
    """``floor(2^{D_max^(eps-delta)(rho||sigma)} / (delta/2))``."""
    _check_eps_delta(eps, delta)
    config = DEFAULT_CONFIG if config is None else config
    bits = smooth_d_max(rho, sigma, eps - delta, config).bits
    if not math.isfinite(bits):
        raise ProtocolError(
            ProtocolErrorKind.DIMENSION_BLOWUP, "rho is not supported inside the catalyst"
        )
    m = max(1, math.floor(2.0**bits / (delta / 2) + 1e-9))
    if m > config.max_registers:
        raise ProtocolError(
            ProtocolErrorKind.DIMENSION_BLOWUP,
            f"{m} registers exceed the cap {config.max_registers}",
            dim=m,
        )
    return m


def certify_protocol_output(
    rho: DensityOperator,
    sigma: DensityOperator,
    M: int,
    cut: PartitionArg = None,
    config: Optional[SolverConfig] = None,
) -> tuple[float, CertificationMethod, Optional[float]]:
    """Distance of ``Lambda^M(rho (x) sigma^(M-1))`` to ``sigma^M`` and its PPT distance.

    Outputs up to ``EXPLICIT_DIM`` are built with the swap ensemble and
    measured directly; larger ones fall back to the convex-split
    certificate. The PPT distance across the lifted cut is a lower bound
    on the distance to the separable set and is only computed for outputs
    up to ``PPT_CERTIFY_DIM``.
    """
    config = DEFAULT_CONFIG if config is None else config
    if rho.dim**M > min(EXPLICIT_DIM, config.max_dim):
        distance, method = certify_convex_split(rho, sigma, M, config)
        return distance, method, None
    ens = build_swap_ensemble(M, rho.dims, config)
    output = apply_randomizing_map(ens, catalyst_input(rho, sigma, M))
    distance = purified_distance(output, tensor_power(sigma, M))
    ppt_distance: Optional[float] = None
    if output.dim <= PPT_CERTIFY_DIM:
        lifted = [
            [f"{label}{i}" for label in group for i in range(1, M + 1)]
            for group in resolve_partition(rho.dims, cut)
        ]
        ppt_distance, _ = nearest_sep_distance(output, lifted, SepApprox(ApproxMode.PPT), config)
    logger.debug("explicit output at M=%d: P=%.6g, PPT distance %s", M, distance, ppt_distance)
    return distance, CertificationMethod.WITNESS_DENSE, ppt_distance


def _report(
    M: int,
    distance: float,
    method: CertificationMethod,
    separability: CertificationMethod,
    eps: float,
    delta: float,
    bounds: CostBounds,
    catalyst_id: str,
    ppt_distance: Optional[float] = None,
) -> ProtocolReport:
    log2_m = math.log2(M)
    if separability is CertificationMethod.PPT_RELAXATION:
        method = separability
    passed = (
        distance <= eps
        and bounds.lower_bits <= log2_m + 1e-6
        and log2_m <= bounds.upper_bits + SANDWICH_SLACK
    )
    return ProtocolReport(
        M=M,
        log2_M=log2_m,
        eps_target=eps,
        delta=delta,
        achieved_distance=distance,
        approx_mode=method,
        lower_bound_bits=bounds.lower_bits,
        upper_bound_bits=bounds.upper_bits,
        catalyst_id=catalyst_id,
        passed=passed,
        ppt_distance=ppt_distance,
    )


def run_disentangling(
    rho: DensityOperator,
    sigma_sep: SeparableArg,
    eps: float,
    delta: float,
    cut: PartitionArg = None,
    config: Optional[SolverConfig] = None,
    catalyst_id: str = "custom",
    bounds: Optional[CostBounds] = None,
) -> ProtocolReport:
    """One protocol run at the register budget (or ``M = 1`` when already close).

    The output for the chosen ``M`` is re-certified by ``certify_protocol_output``.
    """
    _check_eps_delta(eps, delta)
    config = DEFAULT_CONFIG if config is None else config
    sigma, separability = certify_separable(sigma_sep, cut)
    if sigma.dims.local_dims != rho.dims.local_dims:
        raise StateError(StateErrorKind.DIM_MISMATCH, f"catalyst on {sigma.dims}, rho on {rho.dims}")
    bounds = cost_bounds(rho, eps, delta, cut, config) if bounds is None else bounds
    distance, _ = certify_convex_split(rho, sigma, 1, config)
    m = 1
    if distance > eps:
        m = budget_registers(rho, sigma, eps, delta, config)
    distance, method, ppt_distance = certify_protocol_output(rho, sigma, m, cut, config)
    report = _report(m, distance, method, separability, eps, delta, bounds, catalyst_id, ppt_distance)
    logger.info("protocol run with %s: M=%d P=%.6g pass=%s", catalyst_id, m, distance, report.passed)
    return report


def _search_candidate(
    rho: DensityOperator,
    catalyst_id: str,
    sigma_sep: SeparableArg,
    eps: float,
    delta: float,
    bounds: CostBounds,
    cut: PartitionArg,
    config: SolverConfig,
) -> ProtocolReport:
    sigma, separability = certify_separable(sigma_sep, cut)
    budget = budget_registers(rho, sigma, eps, delta, config)
    distance, method = certify_convex_split(rho, sigma, 1, config)
    m = 1
    while distance > eps and m < budget:
        m += 1
        distance, method = certify_convex_split(rho, sigma, m, config)
        logger.debug("%s: M=%d P=%.6g (%s)", catalyst_id, m, distance, method.value)
    distance, method, ppt_distance = certify_protocol_output(rho, sigma, m, cut, config)
    return _report(m, distance, method, separability, eps, delta, bounds, catalyst_id, ppt_distance)


def _pinched(rho: DensityOperator, sigma: DensityOperator) -> DensityOperator:
    w, v = hermitian_eig(rho)
    acc = np.zeros_like(sigma.op)
    start = 0
    for stop in range(1, w.shape[0] + 1):
        if stop == w.shape[0] or abs(w[stop] - w[start]) > 1e-9:
            block = v[:, start:stop]
            proj = block @ block.conj().T
            acc += proj @ sigma.op @ proj
            start = stop
    return DensityOperator.from_solver(acc, sigma.dims)


def default_candidates(
    rho: DensityOperator,
    cut: PartitionArg = None,
    config: Optional[SolverConfig] = None,
    optimizer: Optional[DensityOperator] = None,
) -> list[Candidate]:
    """Catalyst anchors: nearest separable witness, REE optimizer, ``I/d``.

    The witness pinched in the eigenbasis of ``rho`` is added when it is
    still PPT in a dimension where that certifies separability, and a
    smooth max-relative entropy optimizer when one is given.
    """
    exact = is_ppt_exact(rho.dims, cut)
    mode = ApproxMode.PPT if exact else ApproxMode.ENSEMBLE
    _, witness = nearest_sep_distance(rho, cut, SepApprox(ApproxMode.BOTH), config)
    witness = _repair_ppt(witness, cut)
    out: list[Candidate] = [("witness", witness)]
    ree_value = ree(rho, cut, SepApprox(mode), config=config)
    if ree_value.certificate is not None:
        out.append(("ree", _repair_ppt(ree_value.certificate, cut)))
    out.append(("flat", DensityOperator.maximally_mixed(rho.dims)))
    if exact:
        pinched = _repair_ppt(_pinched(rho, witness), cut)
        if is_ppt(pinched, cut)[0]:
            out.append(("pinched", pinched))
    if optimizer is not None:
        out.append(("emax", optimizer))
    return out


def one_shot_cost_search(
    rho: DensityOperator,
    eps: float,
    delta: float,
    sigma_candidates: Optional[Sequence[Candidate]] = None,
    cut: PartitionArg = None,
    config: Optional[SolverConfig] = None,
) -> ProtocolReport:
    """Smallest certified ``M`` over the catalyst candidates.

    Each candidate is scanned from ``M = 1`` up to its register budget;
    candidates whose budget is infinite or too large are skipped.
    """
    _check_eps_delta(eps, delta)
    config = DEFAULT_CONFIG if config is None else config
    bounds = cost_bounds(rho, eps, delta, cut, config)
    if sigma_candidates is None:
        sigma_candidates = default_candidates(rho, cut, config, bounds.optimizer)
    if not sigma_candidates:
        raise StateError(StateErrorKind.BAD_PARAMETER, "no catalyst candidates given")
    reports: list[ProtocolReport] = []
    skipped: Optional[ProtocolError] = None
    for catalyst_id, sigma in sigma_candidates:
        try:
            reports.append(_search_candidate(rho, catalyst_id, sigma, eps, delta, bounds, cut, config))
        except ProtocolError as exc:
            if exc.kind is not ProtocolErrorKind.DIMENSION_BLOWUP:
                raise
            logger.warning("skipping catalyst %s: %s", catalyst_id, exc)
            skipped = exc
    if not reports:
        assert skipped is not None
        raise skipped
    return min(reports, key=lambda r: (not r.passed, r.M, r.achieved_distance))


def _correlated_indicator(xdims: SubsystemDims) -> ComplexArray:
    m = xdims.local_dims[0]
    flat = np.zeros(xdims.total_dim, dtype=np.complex128)
    for i in range(m):
        flat[np.ravel_multi_index((i,) * len(xdims), xdims.local_dims)] = 1
    return np.diag(flat)


def gamma_dilation(
    ens: UnitaryEnsemble, s: DensityOperator, config: Optional[SolverConfig] = None
) -> DensityOperator:
    """Controlled unitaries ``sum_i U_P^i (x) |i><i|_XP`` applied to ``s (x) gamma``.

    ``gamma`` is the classically maximally correlated state on one index
    register ``X<party>`` per party.
    """
    _check_dims(ens, s)
    config = DEFAULT_CONFIG if config is None else config
    xlabels = [f"X{p}" for p in ens.parties]
    clash = set(xlabels) & set(s.labels)
    if clash:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"index register labels {sorted(clash)} already in use")
    xdims = SubsystemDims((x, ens.M) for x in xlabels)
    full = s.dims.concat(xdims)
    if full.total_dim > config.max_dim:
        raise ProtocolError(
            ProtocolErrorKind.DIMENSION_BLOWUP,
            f"dilation space exceeds the cap {config.max_dim}",
            dim=full.total_dim,
        )
    gamma = DensityOperator._unchecked(_correlated_indicator(xdims) / ens.M, xdims)
    u = np.eye(full.total_dim, dtype=np.complex128)
    for party, xlabel in zip(ens.parties, xlabels):
        regs = ens.registers(party)
        controlled = sum(
            np.kron(mat, np.diag(np.eye(ens.M)[i]).astype(np.complex128))
            for i, mat in enumerate(ens.per_party[party])
        )
        u = embed_operator(controlled, [*regs, xlabel], full) @ u
    return conjugate(tensor_product(s, gamma), u)


def check_operator_inequality(
    sigma_ext: DensityOperator, sigma_marginal: DensityOperator, M: int
) -> tuple[bool, float]:
    """Minimum eigenvalue of ``M sigma_marginal (x) gamma - sigma_ext``.

    The index registers are the labels of ``sigma_ext`` missing from
    ``sigma_marginal``; each must have dimension ``M``.
    """
    missing = set(sigma_marginal.labels) - set(sigma_ext.labels)
    if missing:
        raise StateError(StateErrorKind.UNKNOWN_LABEL, f"marginal registers {sorted(missing)} not in extension")
    xlabels = [label for label in sigma_ext.labels if label not in sigma_marginal.labels]
    if not xlabels or any(sigma_ext.dims.dim_of(x) != M for x in xlabels):
        raise StateError(StateErrorKind.DIM_MISMATCH, f"index registers {xlabels} must have dimension {M}")
    ordered = reorder(sigma_ext, [*sigma_marginal.labels, *xlabels])
    if sigma_marginal.dims != ordered.dims.select(sigma_marginal.labels):
        raise StateError(StateErrorKind.DIM_MISMATCH, "marginal registers differ in dimension")
    pi = _correlated_indicator(ordered.dims.select(xlabels))
    proj = np.kron(np.eye(sigma_marginal.dim), pi)
    leak = float(np.max(np.abs(proj @ ordered.op @ proj - ordered.op)))
    if leak > SUPPORT_TOL:
        raise ProtocolError(
            ProtocolErrorKind.PRECONDITION_VIOLATED,
            f"extension leaves the correlated subspace ({leak:.3e})",
        )
    diff = np.kron(sigma_marginal.op, pi) - ordered.op
    slack = float(np.linalg.eigvalsh((diff + diff.conj().T) / 2)[0])
    return slack >= -INEQUALITY_TOL, slack


def decouple_to_separable(
    rho: DensityOperator,
    sigma_sep: SeparableArg,
    eps: float,
    delta: float,
    cut: PartitionArg = None,
    config: Optional[SolverConfig] = None,
) -> DecouplingReport:
    """Coordinated channel realized through the index ancillas, then discarded.

    Each party drops its index register of ``log2 M`` bits, and
    ``discarded_bits`` is their sum: two parties discard ``2 log2 M``, twice
    the per-register ``budget_bits``. The residual is only materialized
    when the dilation fits the dimension cap.
    """
    _check_eps_delta(eps, delta)
    config = DEFAULT_CONFIG if config is None else config
    sigma, _ = certify_separable(sigma_sep, cut)
    distance, method = certify_convex_split(rho, sigma, 1, config)
    m = 1
    if distance > eps:
        m = budget_registers(rho, sigma, eps, delta, config)
        distance, method = certify_convex_split(rho, sigma, m, config)
    parties = len(rho.dims)
    residual: Optional[DensityOperator] = None
    if rho.dim**m * m**parties <= config.max_dim:
        ens = build_swap_ensemble(m, rho.dims, config)
        mu = catalyst_input(rho, sigma, m)
        residual = partial_trace(gamma_dilation(ens, mu, config), mu.labels)
        distance = purified_distance(residual, tensor_power(sigma, m))
        method = CertificationMethod.WITNESS_DENSE
    budget_bits = smooth_d_max(rho, sigma, eps - delta, config).bits + math.log2(1 / delta) + 1
    return DecouplingReport(
        M=m,
        discarded_bits=parties * math.log2(m),
        budget_bits=budget_bits,
        residual=residual,
        distance=distance,
        approx_mode=method,
    )


def product_target(rho: DensityOperator, cut: PartitionArg = None) -> DensityOperator:
    """Product of the group marginals, in the label order of ``rho``."""
    groups = resolve_partition(rho.dims, cut)
    marginals = [partial_trace(rho, g) for g in groups]
    return reorder(tensor_product(*marginals), rho.labels)


def decoupling_comparison(
    rho: DensityOperator,
    eps: float,
    delta: float,
    cut: PartitionArg = None,
    config: Optional[SolverConfig] = None,
) -> ComparisonReport:
    """Cost of reaching the product of marginals against reaching SEP."""
    product = one_shot_cost_search(rho, eps, delta, [("product", product_target(rho, cut))], cut, config)
    separable = one_shot_cost_search(rho, eps, delta, None, cut, config)
    if separable.log2_M > 0:
        ratio = product.log2_M / separable.log2_M
    else:
        ratio = 1.0 if product.log2_M == 0 else math.inf
    return ComparisonReport(
        eps=eps,
        delta=delta,
        product_cost_bits=product.log2_M,
        separable_cost_bits=separable.log2_M,
        ratio=ratio,
    )


def default_theorem_grid() -> list[tuple[str, DensityOperator, float, float]]:
    states = [
        ("bell", make_state("bell")),
        ("werner:0.9", make_state("werner", 0.9)),
        ("maxcorr:2", make_state("maxcorr", 2)),
    ]
    return [(sid, s, eps, delta) for sid, s in states for eps, delta in ((0.3, 0.1), (0.2, 0.1))]


def verify_theorem(
    grid: Optional[Sequence[tuple[str, DensityOperator, float, float]]] = None,
    config: Optional[SolverConfig] = None,
    threads: Optional[int] = None,
) -> list[tuple[str, ProtocolReport]]:
    """Cost search per grid row, rows evaluated concurrently and returned in grid order."""
    rows = default_theorem_grid() if grid is None else list(grid)

    def run(row: tuple[str, DensityOperator, float, float]) -> tuple[str, ProtocolReport]:
        sid, s, eps, delta = row
        return sid, one_shot_cost_search(s, eps, delta, config=config)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, rows))
