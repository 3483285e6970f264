import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from disentanglement.errors import StateError, StateErrorKind
from disentanglement.models import MatrixFunction
from disentanglement.qmatrix import (
    DensityOperator,
    PureState,
    embed_operator,
    fidelity,
    hermitian_eig,
    make_state,
    matrix_fn,
    mix,
    partial_trace,
    partial_transpose,
    permutation_operator,
    purified_distance,
    random_state,
    reorder,
    tensor_power,
    tensor_product,
)
from disentanglement.subsystems import SubsystemDims

QUBIT = SubsystemDims.from_spec("A:2")
TWO_QUBITS = SubsystemDims.from_spec("A:2,B:2")


class TestDensityOperator:
    def test_validates_trace(self) -> None:
        with pytest.raises(StateError) as info:
            DensityOperator(np.eye(2), QUBIT)
        assert info.value.kind is StateErrorKind.INVALID_STATE

    def test_subnormalized_trace(self) -> None:
        s = DensityOperator(np.eye(2) / 4, QUBIT, subnormalized=True)
        assert s.trace == pytest.approx(0.5)
        with pytest.raises(StateError):
            DensityOperator(np.eye(2), QUBIT, subnormalized=True)

    def test_not_hermitian(self) -> None:
        with pytest.raises(StateError) as info:
            DensityOperator([[0.5, 0.1], [0.0, 0.5]], QUBIT)
        assert info.value.kind is StateErrorKind.NOT_HERMITIAN

    def test_negative(self) -> None:
        with pytest.raises(StateError) as info:
            DensityOperator([[1.2, 0.0], [0.0, -0.2]], QUBIT)
        assert info.value.kind is StateErrorKind.NEGATIVE_EIGENVALUE

    def test_shape_mismatch(self) -> None:
        with pytest.raises(StateError) as info:
            DensityOperator(np.eye(4) / 4, QUBIT)
        assert info.value.kind is StateErrorKind.DIM_MISMATCH

    def test_non_finite(self) -> None:
        with pytest.raises(StateError):
            DensityOperator([[np.nan, 0], [0, 1]], QUBIT)

    def test_immutable(self) -> None:
        s = make_state("bell")
        with pytest.raises(ValueError):
            s.op[0, 0] = 1.0

    def test_from_solver_repairs(self) -> None:
        noisy = np.array([[1.0 + 1e-8, 0.0], [0.0, -1e-8]])
        s = DensityOperator.from_solver(noisy, QUBIT)
        assert s.trace == pytest.approx(1.0)
        assert s.eigvals()[-1] >= 0.0

    def test_maximally_mixed(self) -> None:
        s = DensityOperator.maximally_mixed(TWO_QUBITS)
        assert_allclose(s.op, np.eye(4) / 4)
        assert s.rank() == 4


class TestFamilies:
    def test_bell_is_pure(self) -> None:
        s = make_state("bell")
        assert s.rank() == 1
        assert_allclose(partial_trace(s, "A").op, np.eye(2) / 2, atol=1e-12)

    @pytest.mark.parametrize("p", [0.0, 0.25, 0.5, 0.9, 1.0])
    def test_werner_singlet_weight(self, p: float) -> None:
        s = make_state("werner", p)
        singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
        assert float(np.real(singlet @ s.op @ singlet)) == pytest.approx(p)

    def test_isotropic_dimension(self) -> None:
        s = make_state("isotropic", 0.5, 3)
        assert s.dims.local_dims == (3, 3)
        assert s.trace == pytest.approx(1.0)

    def test_ghz(self) -> None:
        s = make_state("ghz", 3)
        assert s.labels == ("A", "B", "C")
        assert s.op[0, 7] == pytest.approx(0.5)

    def test_maxcorr_is_classical(self) -> None:
        s = make_state("maxcorr", 3)
        assert_allclose(s.op, np.diag(np.diag(s.op)))
        assert s.rank() == 3

    def test_random_is_reproducible(self) -> None:
        a = make_state("random", 7, 2, 3)
        b = make_state("random", 7, 2, 3)
        assert a.allclose(b)
        assert a.dims.local_dims == (2, 3)

    def test_random_rank(self) -> None:
        s = random_state(TWO_QUBITS, 1, rank=2)
        assert s.rank() == 2
        with pytest.raises(StateError):
            random_state(TWO_QUBITS, 1, rank=5)

    @pytest.mark.parametrize(
        ("family", "params"),
        [("werner", (1.5,)), ("bell", (1.0,)), ("ghz", (1.5,)), ("nope", ())],
    )
    def test_bad_parameters(self, family: str, params: tuple[float, ...]) -> None:
        with pytest.raises(StateError) as info:
            make_state(family, *params)
        assert info.value.kind is StateErrorKind.BAD_PARAMETER


class TestAlgebra:
    def test_partial_trace_of_product(self) -> None:
        a = random_state(QUBIT, 1)
        b = random_state(SubsystemDims.from_spec("B:3"), 2)
        ab = tensor_product(a, b)
        assert partial_trace(ab, "A").allclose(a)
        assert partial_trace(ab, "B").allclose(b)

    def test_tensor_power_labels(self) -> None:
        s = tensor_power(make_state("bell"), 2)
        assert s.labels == ("A1", "B1", "A2", "B2")
        assert s.dim == 16

    def test_reorder_roundtrip(self) -> None:
        s = random_state(SubsystemDims.from_spec("A:2,B:3,C:2"), 4)
        back = reorder(reorder(s, "C,A,B"), "A,B,C")
        assert back.allclose(s)
        assert reorder(s, "B,A,C").dims.local_dims == (3, 2, 2)

    def test_partial_transpose_of_bell(self) -> None:
        w = np.linalg.eigvalsh(partial_transpose(make_state("bell"), "B"))
        assert w[0] == pytest.approx(-0.5)

    @pytest.mark.parametrize("seed", range(100))
    def test_partial_transpose_is_an_involution(self, seed: int) -> None:
        s = random_state(SubsystemDims.from_spec("A:2,B:3,C:2"), seed)
        pt = partial_transpose(s, "B")
        assert_allclose(partial_transpose(s, "A,C").T, pt, atol=1e-12)
        assert_allclose(partial_transpose(s, "A,B,C"), s.op.T, atol=1e-12)
        assert_allclose(pt, pt.conj().T, atol=1e-12)

    def test_mix(self) -> None:
        bell = make_state("bell")
        noise = DensityOperator.maximally_mixed(bell.dims)
        assert_allclose(mix(bell, noise, 1.0).op, noise.op)
        with pytest.raises(StateError):
            mix(bell, noise, 1.5)

    def test_embed_operator_order(self) -> None:
        dims = SubsystemDims.from_spec("A:2,B:2")
        x = np.array([[0, 1], [1, 0]])
        assert_allclose(embed_operator(x, "B", dims), np.kron(np.eye(2), x))
        assert_allclose(embed_operator(x, "A", dims), np.kron(x, np.eye(2)))

    def test_swap(self) -> None:
        dims = SubsystemDims.from_spec("A:2,B:2")
        swap = permutation_operator("B,A", dims)
        prod = PureState.product([[1, 0], [0, 1]], dims)
        assert_allclose(swap @ prod.vec, np.kron([0, 1], [1, 0]))

    def test_hermitian_eig_descending(self) -> None:
        w, v = hermitian_eig(np.diag([0.1, 0.7, 0.2]).astype(complex))
        assert_allclose(w, [0.7, 0.2, 0.1])
        assert_allclose(v @ np.diag(w) @ v.conj().T, np.diag([0.1, 0.7, 0.2]), atol=1e-12)

    def test_matrix_fn(self) -> None:
        s = DensityOperator(np.diag([0.5, 0.5, 0.0, 0.0]), TWO_QUBITS)
        assert_allclose(np.diag(matrix_fn(s, MatrixFunction.LOG2)).real, [-1, -1, 0, 0])
        assert_allclose(matrix_fn(s, "sqrt") @ matrix_fn(s, "sqrt"), s.op, atol=1e-12)
        with pytest.raises(StateError):
            matrix_fn(s, MatrixFunction.LOG2, on_support=False)


class TestDistances:
    def test_fidelity_of_orthogonal(self) -> None:
        zero = DensityOperator(np.diag([1.0, 0.0]), QUBIT)
        one = DensityOperator(np.diag([0.0, 1.0]), QUBIT)
        assert fidelity(zero, one) == pytest.approx(0.0, abs=1e-9)
        assert purified_distance(zero, one) == pytest.approx(1.0)

    def test_purified_distance_pure(self) -> None:
        bell = make_state("bell")
        mixed = DensityOperator.maximally_mixed(bell.dims)
        # F = sqrt(<phi|I/4|phi>) = 1/2
        assert purified_distance(bell, mixed) == pytest.approx(math.sqrt(0.75))

    def test_symmetric_and_bounded(self) -> None:
        a = random_state(TWO_QUBITS, 3)
        b = random_state(TWO_QUBITS, 4)
        d = purified_distance(a, b)
        assert d == pytest.approx(purified_distance(b, a), abs=1e-9)
        assert 0.0 < d < 1.0
        assert purified_distance(a, a) == pytest.approx(0.0, abs=1e-6)

    def test_subnormalized_generalized_fidelity(self) -> None:
        a = DensityOperator(np.diag([0.5, 0.0]), QUBIT, subnormalized=True)
        b = DensityOperator(np.diag([0.0, 0.5]), QUBIT, subnormalized=True)
        assert fidelity(a, b) == pytest.approx(0.5)
