# This file is part of disentanglement
#
# MIT License

"""Dense operator algebra over labelled multipartite registers."""

from __future__ import annotations

import logging
import math
import string
from typing import Final, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt

from ._lowlevel import lowlevel
from ._typings import ComplexArray, LabelsArg, RealArray
from .errors import StateError, StateErrorKind
from .models import MatrixFunction
from .subsystems import SubsystemDims, parse_labels

logger = logging.getLogger(__name__)

TOL_HERM: Final[float] = 1e-10
TOL_PSD: Final[float] = 1e-9
TOL_TRACE: Final[float] = 1e-9
TOL_NORM: Final[float] = 1e-10

_ll = lowlevel()


def _as_matrix(m: npt.ArrayLike) -> ComplexArray:
    arr = np.array(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise StateError(StateErrorKind.DIM_MISMATCH, f"expected a matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise StateError(StateErrorKind.INVALID_STATE, "matrix has non-finite entries")
    return arr


def _hermiticity_error(m: ComplexArray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def default_labels(k: int) -> tuple[str, ...]:
    if k > len(string.ascii_uppercase):
        return tuple(f"P{i}" for i in range(1, k + 1))
    return tuple(string.ascii_uppercase[:k])


class DensityOperator:
    """Immutable Hermitian PSD operator attached to a register structure."""

    def __init__(
        self,
        op: npt.ArrayLike,
        dims: SubsystemDims,
        *,
        subnormalized: bool = False,
    ) -> None:
        m = _as_matrix(op)
        if m.shape != (dims.total_dim, dims.total_dim):
            raise StateError(
                StateErrorKind.DIM_MISMATCH,
                f"matrix shape {m.shape} does not match dims {dims} (total {dims.total_dim})",
            )
        herr = _hermiticity_error(m)
        if herr > TOL_HERM:
            raise StateError(
                StateErrorKind.NOT_HERMITIAN, f"max |op - op^H| = {herr:.3e}"
            )
        m = (m + m.conj().T) / 2
        min_eig = float(np.linalg.eigvalsh(m)[0])
        if min_eig < -TOL_PSD:
            raise StateError(
                StateErrorKind.NEGATIVE_EIGENVALUE, f"minimum eigenvalue {min_eig:.3e}"
            )
        tr = float(np.real(np.trace(m)))
        if subnormalized:
            if tr > 1 + TOL_TRACE:
                raise StateError(
                    StateErrorKind.INVALID_STATE, f"subnormalized trace {tr!r} exceeds 1"
                )
        elif abs(tr - 1) > TOL_TRACE:
            raise StateError(StateErrorKind.INVALID_STATE, f"trace {tr!r} is not 1")
        self._set(m, dims, subnormalized)

    def _set(self, m: ComplexArray, dims: SubsystemDims, subnormalized: bool) -> None:
        m.setflags(write=False)
        self._op = m
        self._dims = dims
        self._subnormalized = subnormalized

    @classmethod
    def _unchecked(
        cls, op: ComplexArray, dims: SubsystemDims, subnormalized: bool = False
    ) -> DensityOperator:
        obj = cls.__new__(cls)
        m = np.array(op, dtype=np.complex128)
        obj._set((m + m.conj().T) / 2, dims, subnormalized)
        return obj

    @classmethod
    def from_solver(
        cls, op: npt.ArrayLike, dims: SubsystemDims, *, subnormalized: bool = False
    ) -> DensityOperator:
        """Repair a numerically noisy operator.

        Hermitizes, clips negative eigenvalues to zero and renormalizes
        (a subnormalized result is only scaled down when its trace exceeds 1).
        """
        m = _as_matrix(op)
        m = (m + m.conj().T) / 2
        w, v = _ll.eigh(m)
        if w[-1] < -1e-6:
            logger.debug("clipping eigenvalue %.3e of solver output", w[-1])
        w = np.clip(w, 0.0, None)
        tr = float(np.sum(w))
        if tr <= 0:
            raise StateError(StateErrorKind.INVALID_STATE, "solver output has zero trace")
        if not subnormalized or tr > 1:
            w = w / tr
        return cls._unchecked((v * w) @ v.conj().T, dims, subnormalized)

    @classmethod
    def maximally_mixed(cls, dims: SubsystemDims) -> DensityOperator:
        d = dims.total_dim
        return cls._unchecked(np.eye(d, dtype=np.complex128) / d, dims)

    @property
    def op(self) -> ComplexArray:
        return self._op

    @property
    def dims(self) -> SubsystemDims:
        return self._dims

    @property
    def labels(self) -> tuple[str, ...]:
        return self._dims.labels

    @property
    def dim(self) -> int:
        return self._dims.total_dim

    @property
    def subnormalized(self) -> bool:
        return self._subnormalized

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self._op)))

    def eigvals(self) -> RealArray:
        return hermitian_eig(self._op)[0]

    def rank(self, tol: float = 1e-9) -> int:
        return int(np.sum(self.eigvals() > tol))

    def marginal(self, keep: LabelsArg) -> DensityOperator:
        return partial_trace(self, keep)

    def allclose(self, other: DensityOperator, atol: float = 1e-9) -> bool:
        return self._op.shape == other.op.shape and bool(
            np.allclose(self._op, other.op, atol=atol, rtol=0)
        )

    def __repr__(self) -> str:
        flag = ", subnormalized" if self._subnormalized else ""
        return f"{self.__class__.__name__}(dims={str(self._dims)!r}{flag})"


class PureState:
    def __init__(self, vec: npt.ArrayLike, dims: SubsystemDims) -> None:
        v = np.array(vec, dtype=np.complex128).reshape(-1)
        if v.shape[0] != dims.total_dim:
            raise StateError(
                StateErrorKind.DIM_MISMATCH,
                f"vector length {v.shape[0]} does not match dims {dims}",
            )
        norm = float(np.linalg.norm(v))
        if abs(norm - 1) > TOL_NORM:
            raise StateError(StateErrorKind.INVALID_STATE, f"vector norm {norm!r} is not 1")
        v.setflags(write=False)
        self._vec = v
        self._dims = dims

    @classmethod
    def normalized(cls, vec: npt.ArrayLike, dims: SubsystemDims) -> PureState:
        v = np.array(vec, dtype=np.complex128).reshape(-1)
        norm = float(np.linalg.norm(v))
        if norm == 0:
            raise StateError(StateErrorKind.BAD_PARAMETER, "zero vector")
        return cls(v / norm, dims)

    @classmethod
    def product(cls, vecs: Sequence[npt.ArrayLike], dims: SubsystemDims) -> PureState:
        if len(vecs) != len(dims):
            raise StateError(
                StateErrorKind.DIM_MISMATCH,
                f"{len(vecs)} local vectors for {len(dims)} parties",
            )
        out = np.ones(1, dtype=np.complex128)
        for v in vecs:
            out = np.kron(out, np.asarray(v, dtype=np.complex128).reshape(-1))
        return cls.normalized(out, dims)

    @property
    def vec(self) -> ComplexArray:
        return self._vec

    @property
    def dims(self) -> SubsystemDims:
        return self._dims

    def projector(self) -> DensityOperator:
        return DensityOperator._unchecked(np.outer(self._vec, self._vec.conj()), self._dims)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(dims={str(self._dims)!r})"


def tensor_product(a: DensityOperator, b: DensityOperator, *rest: DensityOperator) -> DensityOperator:
    states = (a, b, *rest)
    dims = states[0].dims
    for s in states[1:]:
        dims = dims.concat(s.dims)
    op = _ll.kron(*(s.op for s in states))
    return DensityOperator._unchecked(op, dims, any(s.subnormalized for s in states))


def tensor_power(s: DensityOperator, n: int, *, start: int = 1) -> DensityOperator:
    """``s`` on ``n`` register copies labelled ``A1, B1, A2, B2, ...``."""
    if n < 1:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"tensor power needs n >= 1, got {n}")
    copies = [relabel(s, s.dims.suffixed(start + i).labels) for i in range(n)]
    if n == 1:
        return copies[0]
    return tensor_product(*copies)


def partial_trace(s: DensityOperator, keep: LabelsArg) -> DensityOperator:
    kept = sorted(s.dims.indices(keep))
    op = _ll.ptrace(s.op, s.dims.local_dims, kept)
    return DensityOperator._unchecked(op, s.dims.select([s.labels[i] for i in kept]), s.subnormalized)


def partial_transpose(s: DensityOperator, party: LabelsArg) -> ComplexArray:
    systems = s.dims.indices(party)
    return _ll.ptranspose(s.op, s.dims.local_dims, systems)


def relabel(s: DensityOperator, labels: LabelsArg) -> DensityOperator:
    return DensityOperator._unchecked(s.op, s.dims.relabel(labels), s.subnormalized)


def reorder(s: DensityOperator, labels: LabelsArg) -> DensityOperator:
    new_dims = s.dims.reorder(labels)
    order = [s.dims.index(label) for label in new_dims.labels]
    op = _ll.permute(s.op, s.dims.local_dims, order)
    return DensityOperator._unchecked(op, new_dims, s.subnormalized)


def mix(a: DensityOperator, b: DensityOperator, t: float) -> DensityOperator:
    """``(1 - t) a + t b``."""
    if a.dims != b.dims:
        raise StateError(StateErrorKind.DIM_MISMATCH, f"cannot mix {a.dims} with {b.dims}")
    if not 0 <= t <= 1:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"mixing weight {t!r} outside [0, 1]")
    return DensityOperator._unchecked(
        (1 - t) * a.op + t * b.op, a.dims, a.subnormalized or b.subnormalized
    )


def embed_operator(op: npt.ArrayLike, on: LabelsArg, dims: SubsystemDims) -> ComplexArray:
    """Lift a local operator on ``on`` (in that order) to the whole register space."""
    local = parse_labels(on)
    m = _as_matrix(op)
    d_on = math.prod(dims.dim_of(label) for label in local)
    if m.shape != (d_on, d_on):
        raise StateError(
            StateErrorKind.DIM_MISMATCH,
            f"operator shape {m.shape} does not act on {list(local)!r} (dim {d_on})",
        )
    rest = dims.complement(local)
    d_rest = math.prod(dims.dim_of(label) for label in rest) if rest else 1
    full = np.kron(m, np.eye(d_rest, dtype=np.complex128))
    arranged = [*local, *rest]
    arranged_dims = [dims.dim_of(label) for label in arranged]
    order = [arranged.index(label) for label in dims.labels]
    return _ll.permute(full, arranged_dims, order)


def permutation_operator(order: LabelsArg, dims: SubsystemDims) -> ComplexArray:
    """Unitary that moves register ``order[j]`` into slot ``j``."""
    labels = parse_labels(order)
    new_dims = dims.reorder(labels)
    if new_dims.local_dims != dims.local_dims:
        raise StateError(
            StateErrorKind.DIM_MISMATCH,
            f"permutation {list(labels)!r} mixes registers of different dimension",
        )
    idx = [dims.index(label) for label in labels]
    d = dims.total_dim
    eye = np.eye(d, dtype=np.complex128).reshape(*dims.local_dims, d)
    return eye.transpose(*idx, len(idx)).reshape(d, d)


def conjugate(s: DensityOperator, u: ComplexArray) -> DensityOperator:
    return DensityOperator._unchecked(u @ s.op @ u.conj().T, s.dims, s.subnormalized)


def hermitian_eig(m: Union[ComplexArray, DensityOperator]) -> tuple[RealArray, ComplexArray]:
    """Eigenpairs of a Hermitian matrix, eigenvalues in descending order."""
    arr = m.op if isinstance(m, DensityOperator) else _as_matrix(m)
    herr = _hermiticity_error(arr)
    if herr > TOL_HERM:
        raise StateError(StateErrorKind.NOT_HERMITIAN, f"max |m - m^H| = {herr:.3e}")
    return _ll.eigh((arr + arr.conj().T) / 2)


def matrix_fn(
    m: Union[ComplexArray, DensityOperator],
    fn: Union[MatrixFunction, str],
    on_support: bool = True,
) -> ComplexArray:
    fn = MatrixFunction(fn)
    w, v = hermitian_eig(m)
    if fn is not MatrixFunction.EXP2 and w.size and w[-1] < -TOL_PSD:
        raise StateError(
            StateErrorKind.NEGATIVE_EIGENVALUE,
            f"{fn.value} needs a PSD argument, minimum eigenvalue {w[-1]:.3e}",
        )
    if fn is MatrixFunction.EXP2:
        out = np.exp2(w)
    else:
        support = w > _ll.cutoff
        if fn is MatrixFunction.LOG2 and not on_support and not np.all(support):
            raise StateError(
                StateErrorKind.BAD_PARAMETER, "log2 of a singular matrix is only defined on support"
            )
        out = np.zeros_like(w)
        mask = support if on_support else np.ones_like(support)
        if fn is MatrixFunction.SQRT:
            out[mask] = np.sqrt(np.clip(w[mask], 0.0, None))
        else:
            out[mask] = np.log2(w[mask])
    return (v * out) @ v.conj().T


def _check_same_space(a: DensityOperator, b: DensityOperator) -> None:
    if a.dim != b.dim:
        raise StateError(
            StateErrorKind.DIM_MISMATCH, f"dimensions differ: {a.dims} vs {b.dims}"
        )


def fidelity(a: DensityOperator, b: DensityOperator) -> float:
    """Generalized Uhlmann fidelity ``||sqrt(a) sqrt(b)||_1``."""
    _check_same_space(a, b)
    f = _ll.trace_norm(_ll.sqrt_psd(a.op) @ _ll.sqrt_psd(b.op))
    if a.subnormalized or b.subnormalized:
        f += math.sqrt(max(0.0, 1 - a.trace) * max(0.0, 1 - b.trace))
    return min(1.0, max(0.0, f))


def purified_distance(a: DensityOperator, b: DensityOperator) -> float:
    f = fidelity(a, b)
    return math.sqrt(max(0.0, 1 - f * f))


def _bell_vector() -> ComplexArray:
    return np.array([1, 0, 0, 1], dtype=np.complex128) / math.sqrt(2)


def _singlet_vector() -> ComplexArray:
    return np.array([0, 1, -1, 0], dtype=np.complex128) / math.sqrt(2)


def _check_unit_interval(name: str, x: float) -> None:
    if not 0 <= x <= 1:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"{name} must lie in [0, 1], got {x!r}")


def _need(family: str, params: Sequence[float], lo: int, hi: int) -> None:
    if not lo <= len(params) <= hi:
        raise StateError(
            StateErrorKind.BAD_PARAMETER,
            f"{family!r} takes between {lo} and {hi} parameters, got {len(params)}",
        )


def _as_int(name: str, x: float, minimum: int) -> int:
    if float(x) != int(x) or int(x) < minimum:
        raise StateError(
            StateErrorKind.BAD_PARAMETER, f"{name} must be an integer >= {minimum}, got {x!r}"
        )
    return int(x)


def make_state(
    family: str,
    *params: float,
    rank: Optional[int] = None,
    labels: Optional[LabelsArg] = None,
) -> DensityOperator:
    """Build a named state.

    Families: ``bell``, ``werner(p)``, ``isotropic(f[, d])``, ``ghz(k)``,
    ``maxcorr(M)`` and ``random(seed, d1, d2, ...)`` with an optional rank.
    """
    family = family.lower()
    if family == "bell":
        _need(family, params, 0, 0)
        dims = SubsystemDims.uniform(labels or default_labels(2), 2)
        return PureState(_bell_vector(), dims).projector()
    if family == "werner":
        _need(family, params, 1, 1)
        p = float(params[0])
        _check_unit_interval("p", p)
        singlet = np.outer(_singlet_vector(), _singlet_vector().conj())
        op = p * singlet + (1 - p) * (np.eye(4) - singlet) / 3
        return DensityOperator._unchecked(op, SubsystemDims.uniform(labels or default_labels(2), 2))
    if family == "isotropic":
        _need(family, params, 1, 2)
        f = float(params[0])
        _check_unit_interval("f", f)
        d = _as_int("d", params[1], 2) if len(params) > 1 else 2
        phi = np.eye(d, dtype=np.complex128).reshape(-1) / math.sqrt(d)
        proj = np.outer(phi, phi.conj())
        op = f * proj + (1 - f) * (np.eye(d * d) - proj) / (d * d - 1)
        return DensityOperator._unchecked(op, SubsystemDims.uniform(labels or default_labels(2), d))
    if family == "ghz":
        _need(family, params, 1, 1)
        k = _as_int("k", params[0], 2)
        vec = np.zeros(2**k, dtype=np.complex128)
        vec[0] = vec[-1] = 1 / math.sqrt(2)
        return PureState(vec, SubsystemDims.uniform(labels or default_labels(k), 2)).projector()
    if family == "maxcorr":
        _need(family, params, 1, 1)
        m = _as_int("M", params[0], 1)
        op = np.zeros((m * m, m * m), dtype=np.complex128)
        for i in range(m):
            op[i * m + i, i * m + i] = 1 / m
        return DensityOperator._unchecked(op, SubsystemDims.uniform(labels or default_labels(2), m))
    if family == "random":
        _need(family, params, 2, 16)
        seed = _as_int("seed", params[0], 0)
        local = [_as_int("local dimension", d, 1) for d in params[1:]]
        names = parse_labels(labels) if labels else default_labels(len(local))
        dims = SubsystemDims(zip(names, local))
        return random_state(dims, seed, rank=rank)
    raise StateError(StateErrorKind.BAD_PARAMETER, f"unknown state family {family!r}")


def random_state(
    dims: SubsystemDims, seed: Union[int, np.random.Generator], *, rank: Optional[int] = None
) -> DensityOperator:
    """Induced-measure state: partial trace of a Haar pure state of the given rank."""
    rng = np.random.default_rng(seed)
    d = dims.total_dim
    r = d if rank is None else rank
    if not 1 <= r <= d:
        raise StateError(StateErrorKind.BAD_PARAMETER, f"rank must lie in [1, {d}], got {r}")
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    op = g @ g.conj().T
    return DensityOperator._unchecked(op / np.real(np.trace(op)), dims)


def random_pure_vector(d: int, rng: np.random.Generator) -> ComplexArray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)
