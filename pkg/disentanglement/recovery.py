# This file is part of disentanglement
#
# MIT License

"""Local recoverability of tripartite states.

Channels are stored as Choi matrices with the input register first,
``J = sum_ij |i><j| (x) R(|i><j|)``, so trace preservation reads
``Tr_out J = I``. A recovery map acts on ``C`` and rebuilds ``A C``; the
recovered state is ``(I_B (x) R)(rho_BC)`` in the labels of ``rho``.
"""

from __future__ import annotations

import logging
import math
from typing import Final, NamedTuple, Optional, Sequence

import cvxpy as cp
import numpy as np
import numpy.typing as npt
from scipy.stats import unitary_group

from . import _frankwolfe
from ._backend import ConicHandler, fidelity_block, hermitian, ptrace_expr
from ._lowlevel import lowlevel
from ._typings import ComplexArray, LabelsArg
from .convexsplit import certify_convex_split, registers_from_bits
from .divergences import RelativeEntropyTarget, conditional_mutual_information, smooth_d_max
from .errors import ProtocolError, ProtocolErrorKind, StateError, StateErrorKind
from .models import (
    DEFAULT_CONFIG,
    CertificationMethod,
    DivergenceValue,
    RecoveryReport,
    SolverConfig,
)
from .protocol import (
    UnitaryEnsemble,
    apply_randomizing_map,
    build_swap_ensemble,
    catalyst_input,
    check_operator_inequality,
    gamma_dilation,
)
from .qmatrix import (
    DensityOperator,
    partial_trace,
    purified_distance,
    random_state,
    reorder,
    tensor_power,
)
from .subsystems import SubsystemDims, check_partition, parse_labels

logger = logging.getLogger(__name__)

CHOI_TOL: Final[float] = 1e-9
COMMUTATION_TOL: Final[float] = 1e-9
EXPLICIT_DIM: Final[int] = 1024
RECOVERY_PARTIES: Final[tuple[str, str, str]] = ("A", "B", "C")

_ll = lowlevel(cutoff=1e-12)


class ChannelChoi:
    """Trace-preserving channel from ``in_dims`` to ``out_dims`` in Choi form."""

    def __init__(self, choi: npt.ArrayLike, in_dims: SubsystemDims, out_dims: SubsystemDims) -> None:
        j = np.array(choi, dtype=np.complex128)
        d_in, d_out = in_dims.total_dim, out_dims.total_dim
        if j.shape != (d_in * d_out, d_in * d_out):
            raise StateError(
                StateErrorKind.DIM_MISMATCH,
                f"Choi matrix of shape {j.shape} for {in_dims} -> {out_dims}",
            )
        j = (j + j.conj().T) / 2
        min_eig = float(np.linalg.eigvalsh(j)[0])
        if min_eig < -CHOI_TOL:
            raise StateError(
                StateErrorKind.NEGATIVE_EIGENVALUE, f"Choi matrix has eigenvalue {min_eig:.3e}"
            )
        marginal = _ll.ptrace(j, (d_in, d_out), [0])
        err = float(np.max(np.abs(marginal - np.eye(d_in))))
        if err > CHOI_TOL:
            raise StateError(StateErrorKind.INVALID_STATE, f"channel is not trace preserving ({err:.3e})")
        j.setflags(write=False)
        self._choi = j
        self._in_dims = in_dims
        self._out_dims = out_dims

    @classmethod
    def identity(cls, dims: SubsystemDims) -> ChannelChoi:
        d = dims.total_dim
        omega = np.eye(d, dtype=np.complex128).reshape(-1)
        return cls(np.outer(omega, omega), dims, dims)

    @classmethod
    def replacer(cls, in_dims: SubsystemDims, state: DensityOperator) -> ChannelChoi:
        """``X -> Tr[X] state``."""
        return cls(np.kron(np.eye(in_dims.total_dim), state.op), in_dims, state.dims)

    @property
    def choi(self) -> ComplexArray:
        return self._choi

    @property
    def in_dims(self) -> SubsystemDims:
        return self._in_dims

    @property
    def out_dims(self) -> SubsystemDims:
        return self._out_dims

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({str(self._in_dims)!r} -> {str(self._out_dims)!r})"


def _contract(choi: ComplexArray, x: ComplexArray, d_in: int, d_rest: int, d_out: int) -> ComplexArray:
    jt = choi.reshape(d_in, d_out, d_in, d_out)
    xt = x.reshape(d_in, d_rest, d_in, d_rest)
    d = d_rest * d_out
    return np.einsum("iajb,irjs->rasb", jt, xt).reshape(d, d)


def apply_channel(ch: ChannelChoi, s: DensityOperator, on: LabelsArg) -> DensityOperator:
    """Apply ``ch`` to the registers ``on``; outputs follow the untouched registers."""
    inputs = parse_labels(on)
    if tuple(s.dims.dim_of(label) for label in inputs) != ch.in_dims.local_dims:
        raise StateError(
            StateErrorKind.DIM_MISMATCH, f"channel input {ch.in_dims} does not match {list(inputs)!r}"
        )
    rest = s.dims.complement(inputs)
    clash = set(rest) & set(ch.out_dims.labels)
    if clash:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"output labels {sorted(clash)} already in use")
    arranged = reorder(s, [*inputs, *rest])
    d_rest = s.dim // ch.in_dims.total_dim
    out = _contract(ch.choi, arranged.op, ch.in_dims.total_dim, d_rest, ch.out_dims.total_dim)
    dims = s.dims.select(rest).concat(ch.out_dims) if rest else ch.out_dims
    return DensityOperator.from_solver(out, dims, subnormalized=s.subnormalized)


def _split(s: DensityOperator, a: LabelsArg, b: LabelsArg, c: LabelsArg) -> tuple[tuple[str, ...], ...]:
    la, lb, lc = parse_labels(a), parse_labels(b), parse_labels(c)
    check_partition(s.dims, la, lb, lc)
    return la, lb, lc


def petz_map(
    s: DensityOperator, from_: LabelsArg, rebuild: LabelsArg, *, strict: bool = False
) -> ChannelChoi:
    """Petz recovery ``C -> A C`` built from the marginal of ``s`` on ``A C``.

    Off the support of ``rho_C`` the map traces out and prepares ``rho_AC``;
    with ``strict`` a singular ``rho_C`` is an error instead.
    """
    lc, la = parse_labels(from_), parse_labels(rebuild)
    if set(lc) & set(la):
        raise StateError(StateErrorKind.BAD_PARTITION, "rebuilt and conditioning registers overlap")
    rho_c = reorder(partial_trace(s, lc), lc)
    rho_ac = reorder(partial_trace(s, (*la, *lc)), (*la, *lc))
    w, v = _ll.eigh(rho_c.op)
    support = w > _ll.cutoff
    if not np.all(support):
        if strict:
            raise ProtocolError(
                ProtocolErrorKind.SINGULAR_CONDITIONER,
                f"marginal on {list(lc)!r} has rank {int(np.sum(support))} of {rho_c.dim}",
            )
        logger.warning("marginal on %s is singular, extending Petz map by trace-and-replace", list(lc))
    keep = v[:, support]
    inv_sqrt = (keep / np.sqrt(w[support])) @ keep.conj().T
    kernel = np.eye(rho_c.dim) - keep @ keep.conj().T
    root = _ll.sqrt_psd(rho_ac.op)
    eye_a = np.eye(rho_ac.dim // rho_c.dim, dtype=np.complex128)
    d_in = rho_c.dim
    choi = np.zeros((d_in * rho_ac.dim,) * 2, dtype=np.complex128)
    for i in range(d_in):
        for j in range(d_in):
            unit = np.zeros((d_in, d_in), dtype=np.complex128)
            unit[i, j] = 1
            image = root @ np.kron(eye_a, inv_sqrt @ unit @ inv_sqrt) @ root
            image = image + np.trace(kernel @ unit) * rho_ac.op
            choi += np.kron(unit, image)
    return ChannelChoi(choi, rho_c.dims, rho_ac.dims)


def recovered_state(
    ch: ChannelChoi, s: DensityOperator, a: LabelsArg, b: LabelsArg, c: LabelsArg
) -> DensityOperator:
    """``(I_B (x) R_{C -> AC})(rho_BC)`` in the label order of ``s``."""
    la, lb, lc = _split(s, a, b, c)
    if sorted(ch.out_dims.labels) != sorted((*la, *lc)):
        raise StateError(
            StateErrorKind.DIM_MISMATCH, f"channel rebuilds {ch.out_dims}, expected {[*la, *lc]}"
        )
    rho_bc = partial_trace(s, (*lb, *lc))
    return reorder(apply_channel(ch, rho_bc, lc), s.labels)


def markov_state(seed: int = 0) -> DensityOperator:
    """Three-qubit quantum Markov chain ``A - C - B`` with full-rank marginals.

    ``C`` stores a classical index correlating ``A`` and ``B`` and is then
    rotated by a random unitary.
    """
    rng = np.random.default_rng(seed)
    qubit = SubsystemDims([("Q", 2)])
    q = rng.dirichlet([2.0, 2.0])
    op = np.zeros((8, 8), dtype=np.complex128)
    for k in range(2):
        ra = random_state(qubit, rng).op
        rb = random_state(qubit, rng).op
        flag = np.zeros((2, 2), dtype=np.complex128)
        flag[k, k] = 1
        op += q[k] * np.kron(np.kron(ra, rb), flag)
    u = np.kron(np.eye(4), unitary_group.rvs(2, random_state=rng))
    dims = SubsystemDims.uniform(RECOVERY_PARTIES, 2)
    return DensityOperator._unchecked(u @ op @ u.conj().T, dims)


class _RecoveryMap:
    """``J -> (I_B (x) R_J)(rho_BC)`` with outputs ordered ``B, A, C``."""

    def __init__(self, s: DensityOperator, la: Sequence[str], lb: Sequence[str], lc: Sequence[str]) -> None:
        rho_cb = reorder(partial_trace(s, (*lb, *lc)), (*lc, *lb))
        self.d_in = s.dims.dim_of(lc)
        self.d_rest = s.dims.dim_of(lb)
        self.d_out = s.dims.dim_of((*la, *lc))
        self._x = rho_cb.op.reshape(self.d_in, self.d_rest, self.d_in, self.d_rest)
        self.target = reorder(s, (*lb, *la, *lc))
        self.in_dims = s.dims.select(lc).reorder(lc)
        self.out_dims = SubsystemDims((label, s.dims.dim_of(label)) for label in (*la, *lc))

    def apply(self, j: ComplexArray) -> ComplexArray:
        return _contract(j, self._x.reshape(self.d_in * self.d_rest, -1), self.d_in, self.d_rest, self.d_out)

    def adjoint(self, g: ComplexArray) -> ComplexArray:
        gt = g.reshape(self.d_rest, self.d_out, self.d_rest, self.d_out)
        d = self.d_in * self.d_out
        return np.einsum("rasb,irjs->iajb", gt, self._x.conj()).reshape(d, d)

    def expression(self, j: cp.Expression) -> cp.Expression:
        do = self.d_out
        terms = [
            cp.kron(self._x[i, :, k, :], j[i * do:(i + 1) * do, k * do:(k + 1) * do])
            for i in range(self.d_in)
            for k in range(self.d_in)
        ]
        return sum(terms[1:], terms[0])

    def choi_variable(self, scale: Optional[cp.Expression] = None) -> tuple[cp.Variable, list[object]]:
        j = hermitian(self.d_in * self.d_out)
        eye = np.eye(self.d_in)
        marginal = ptrace_expr(j, [self.d_in, self.d_out], [1])
        rhs = eye if scale is None else scale * eye
        return j, [j >> 0, marginal == rhs]


class _ChoiOracle:
    """Linear minimization over trace-preserving Choi matrices, one cached SDP."""

    def __init__(self, rmap: _RecoveryMap, config: SolverConfig) -> None:
        d = rmap.d_in * rmap.d_out
        self._gr = cp.Parameter((d, d))
        self._gi = cp.Parameter((d, d))
        self._j, constraints = rmap.choi_variable()
        objective = cp.sum(cp.multiply(self._gr, cp.real(self._j))) + cp.sum(
            cp.multiply(self._gi, cp.imag(self._j))
        )
        self._problem = cp.Problem(cp.Minimize(objective), constraints)
        self._handler = ConicHandler("choi linear oracle", config)

    def __call__(self, g: ComplexArray) -> tuple[ComplexArray, None]:
        self._gr.value = np.real(g)
        self._gi.value = np.imag(g)
        self._handler.solve(self._problem)
        j = self._handler.value_of(self._j)
        return (j + j.conj().T) / 2, None


class RecoveryOptimum(NamedTuple):
    value: DivergenceValue
    channel: ChannelChoi
    petz_bits: float


def _project_choi(j: ComplexArray, d_in: int, d_out: int) -> ComplexArray:
    w, v = _ll.eigh((j + j.conj().T) / 2)
    j = (v * np.clip(w, 0.0, None)) @ v.conj().T
    marginal = _ll.ptrace(j, (d_in, d_out), [0])
    fix = _ll.spectral(marginal, lambda x: 1 / np.sqrt(x), on_support=True)
    lift = np.kron(fix, np.eye(d_out))
    return lift @ j @ lift.conj().T


def rel_entropy_of_recovery(
    s: DensityOperator,
    a: LabelsArg,
    b: LabelsArg,
    c: LabelsArg,
    tol: Optional[float] = None,
    config: Optional[SolverConfig] = None,
) -> RecoveryOptimum:
    """``min_R D(rho_ABC || (I_B (x) R_{C -> AC})(rho_BC))`` by Frank-Wolfe over Choi matrices.

    The search starts at the Petz map, whose value is kept as ``petz_bits``.
    """
    if s.subnormalized:
        raise StateError(StateErrorKind.SUBNORMALIZED, "recovery needs a normalized state")
    config = DEFAULT_CONFIG if config is None else config
    tol = config.fw_tol if tol is None else tol
    la, lb, lc = _split(s, a, b, c)
    rmap = _RecoveryMap(s, la, lb, lc)
    target = RelativeEntropyTarget(rmap.target.op)
    petz = petz_map(s, lc, la)
    petz_choi = np.array(petz.choi)

    def value(j: ComplexArray) -> float:
        return target.value(rmap.apply(j))

    def gradient(j: ComplexArray) -> ComplexArray:
        return rmap.adjoint(target.gradient(rmap.apply(j)))

    petz_bits = max(0.0, value(petz_choi))
    result = _frankwolfe.minimize(
        value,
        gradient,
        _ChoiOracle(rmap, config),
        [(petz_choi, None)],
        tol=tol,
        max_iter=config.fw_max_iter,
        name="rel_entropy_of_recovery",
    )
    best = _project_choi(result.x, rmap.d_in, rmap.d_out)
    channel = ChannelChoi(best, rmap.in_dims, rmap.out_dims)
    bits = min(max(0.0, result.value), petz_bits)
    logger.info("relative entropy of recovery: %.9g bits (Petz %.9g)", bits, petz_bits)
    out = DivergenceValue(
        bits,
        certificate=recovered_state(channel, s, la, lb, lc),
        dual_bound=max(0.0, result.lower_bound),
        status=result.status,
        iterations=result.iterations,
    )
    return RecoveryOptimum(out, channel, petz_bits)


def recovery_max_divergence(
    s: DensityOperator,
    a: LabelsArg,
    b: LabelsArg,
    c: LabelsArg,
    eps: float = 0.0,
    config: Optional[SolverConfig] = None,
) -> DivergenceValue:
    """``min_R D_max^eps(rho || (I_B (x) R)(rho_BC))`` as one SDP.

    ``lambda R`` is carried by an unnormalized Choi matrix whose output
    trace is ``lambda I``.
    """
    if not 0 <= eps < 1:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"eps must lie in [0, 1), got {eps!r}")
    config = DEFAULT_CONFIG if config is None else config
    la, lb, lc = _split(s, a, b, c)
    rmap = _RecoveryMap(s, la, lb, lc)
    d = s.dim
    lam = cp.Variable(nonneg=True)
    j, constraints = rmap.choi_variable(lam)
    if eps == 0:
        rho_bar: object = rmap.target.op
    else:
        rho_bar = hermitian(d)
        block, re_tr_x = fidelity_block(rmap.target.op, rho_bar, d)
        constraints += [rho_bar >> 0, cp.real(cp.trace(rho_bar)) <= 1, block, re_tr_x >= math.sqrt(1 - eps**2)]
    constraints.append(rmap.expression(j) - rho_bar >> 0)
    handler = ConicHandler("recovery_max_divergence", config)
    value, status = handler.solve(cp.Problem(cp.Minimize(lam), constraints))
    bits = max(0.0, math.log2(max(value, 1e-300)))
    lower = max(0.0, math.log2(max(value - config.tol, 1e-300)))
    choi = handler.value_of(j) / max(value, 1e-300)
    cert = DensityOperator.from_solver(rmap.apply(choi), rmap.target.dims)
    return DivergenceValue(bits, certificate=reorder(cert, s.labels), dual_bound=lower, status=status)


def fidelity_of_recovery(
    s: DensityOperator,
    a: LabelsArg,
    b: LabelsArg,
    c: LabelsArg,
    config: Optional[SolverConfig] = None,
) -> tuple[float, ChannelChoi]:
    """``max_R F(rho, (I_B (x) R)(rho_BC))`` with the Uhlmann block."""
    config = DEFAULT_CONFIG if config is None else config
    la, lb, lc = _split(s, a, b, c)
    rmap = _RecoveryMap(s, la, lb, lc)
    j, constraints = rmap.choi_variable()
    block, re_tr_x = fidelity_block(rmap.target.op, rmap.expression(j), s.dim)
    handler = ConicHandler("fidelity_of_recovery", config)
    value, _ = handler.solve(cp.Problem(cp.Maximize(re_tr_x), [*constraints, block]))
    choi = _project_choi(handler.value_of(j), rmap.d_in, rmap.d_out)
    return min(1.0, max(0.0, value)), ChannelChoi(choi, rmap.in_dims, rmap.out_dims)


def _three_parties(rho: DensityOperator, parties: Sequence[str]) -> tuple[str, str, str]:
    if len(parties) != 3:
        raise StateError(StateErrorKind.BAD_PARTITION, f"expected three parties, got {list(parties)!r}")
    check_partition(rho.dims, *([p] for p in parties))
    a, b, c = parties
    return a, b, c


def simulate_recovery_degrading(
    rho: DensityOperator,
    M: Optional[int],
    eps: float,
    delta: float = 0.05,
    *,
    state_id: str = "custom",
    parties: Sequence[str] = RECOVERY_PARTIES,
    config: Optional[SolverConfig] = None,
) -> RecoveryReport:
    """Convex split against the Petz-recovered state, swap ensemble on all three parties.

    Without ``M`` the register count is ``1`` when ``rho`` is already
    within ``eps`` of its recovery, else the smooth max-divergence budget.
    """
    if not 0 < delta <= eps < 1:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"need 1 > eps >= delta > 0, got {eps!r}, {delta!r}")
    config = DEFAULT_CONFIG if config is None else config
    a, b, c = _three_parties(rho, parties)
    petz = petz_map(rho, [c], [a])
    sigma = recovered_state(petz, rho, a, b, c)
    petz_distance = purified_distance(rho, sigma)
    smoothed = smooth_d_max(rho, sigma, eps - delta, config).bits
    upper = smoothed + math.log2(1 / delta) + 1
    if M is None:
        M = 1 if petz_distance <= eps else registers_from_bits(smoothed + 1, delta)
    if M < 1:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"M must be positive, got {M}")
    if rho.dim**M <= min(EXPLICIT_DIM, config.max_dim):
        ens = build_swap_ensemble(M, rho.dims, config)
        mixed = apply_randomizing_map(ens, catalyst_input(rho, sigma, M))
        distance = purified_distance(mixed, tensor_power(sigma, M))
        method = CertificationMethod.WITNESS_DENSE
    else:
        distance, method = certify_convex_split(rho, sigma, M, config)
    lower = recovery_max_divergence(rho, a, b, c, eps, config).bits
    optimum = rel_entropy_of_recovery(rho, a, b, c, config=config)
    cmi = conditional_mutual_information(rho, a, b, c)
    logger.info("recovery degrading %s: M=%d P=%.6g (%s)", state_id, M, distance, method.value)
    return RecoveryReport(
        state_id=state_id,
        eps=eps,
        delta=delta,
        M=M,
        log2_M=math.log2(M),
        lower_bits=lower,
        upper_bits=upper,
        achieved_distance=distance,
        approx_mode=method,
        passed=distance <= eps,
        rec_value_bits=optimum.value.bits,
        cmi_bits=cmi,
        petz_distance=petz_distance,
    )


def _inverse_swaps(perms: Sequence[ComplexArray]) -> list[ComplexArray]:
    return [p.conj().T for p in perms]


def appendix_converse_check(
    rho: DensityOperator,
    M: int,
    parties: Sequence[str] = RECOVERY_PARTIES,
    config: Optional[SolverConfig] = None,
) -> tuple[bool, float]:
    """Two ingredients of the converse for permutation-restricted maps.

    First, a permutation controlled on the ``C`` copies of
    ``rho_BC^(x)M`` equals the inverse permutation controlled on the ``B``
    copies. Second, the controlled swap dilation of ``rho^(x)M`` obeys
    ``beta <= M beta_marginal (x) gamma`` on the index registers.
    """
    if M < 1:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"M must be positive, got {M}")
    config = DEFAULT_CONFIG if config is None else config
    a, b, c = _three_parties(rho, parties)
    bc = reorder(partial_trace(rho, [b, c]), [b, c])
    swaps = build_swap_ensemble(M, bc.dims, config)
    power = tensor_power(bc, M)
    on_c = gamma_dilation(UnitaryEnsemble(swaps.dims, {c: swaps.per_party[c]}), power, config)
    on_b = gamma_dilation(
        UnitaryEnsemble(swaps.dims, {b: _inverse_swaps(swaps.per_party[b])}), power, config
    )
    residual = float(np.max(np.abs(on_c.op - on_b.op)))
    logger.debug("permutation commutation residual %.3e at M=%d", residual, M)
    ens = build_swap_ensemble(M, rho.dims, config)
    beta = gamma_dilation(ens, tensor_power(rho, M), config)
    marginal = partial_trace(beta, ens.dims.labels)
    holds, slack = check_operator_inequality(beta, marginal, M)
    if residual > COMMUTATION_TOL:
        logger.warning("permutation commutation fails by %.3e", residual)
    return holds and residual <= COMMUTATION_TOL, slack
