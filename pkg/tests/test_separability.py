import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from disentanglement.errors import ProtocolError, StateError
from disentanglement.models import ApproxMode, SepApprox, SolverConfig
from disentanglement.qmatrix import DensityOperator, make_state, partial_transpose, random_state
from disentanglement.separability import (
    ProductEnsemble,
    best_product_state,
    bipartitions,
    closest_product_ensemble,
    e_max_smooth,
    ensemble_power,
    is_ppt,
    is_ppt_exact,
    nearest_sep_distance,
    realize,
    ree,
    resolve_partition,
)
from disentanglement.subsystems import SubsystemDims

PPT = SepApprox(ApproxMode.PPT)
ENSEMBLE = SepApprox(ApproxMode.ENSEMBLE)
BOTH = SepApprox(ApproxMode.BOTH)
FAST = SolverConfig(restarts=8, fw_tol=1e-5)


def binary_entropy(p: float) -> float:
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


class TestPartitions:
    def test_default_is_every_label(self) -> None:
        dims = SubsystemDims.from_spec("A:2,B:2,C:2")
        assert resolve_partition(dims) == (("A",), ("B",), ("C",))
        assert resolve_partition(dims, "A,B:C") == (("A", "B"), ("C",))

    def test_bipartitions_of_three(self) -> None:
        cuts = bipartitions(SubsystemDims.from_spec("A:2,B:2,C:2"))
        assert len(cuts) == 3
        assert {side for _, side in cuts} == {("A",), ("B",), ("C",)}

    def test_single_group_rejected(self) -> None:
        with pytest.raises(StateError):
            resolve_partition(SubsystemDims.from_spec("A:2,B:2"), ["A,B"])

    @pytest.mark.parametrize(
        ("spec", "expected"),
        [("A:2,B:2", True), ("A:2,B:3", True), ("A:3,B:3", False), ("A:2,B:4", False)],
    )
    def test_ppt_exactness(self, spec: str, expected: bool) -> None:
        assert is_ppt_exact(SubsystemDims.from_spec(spec)) is expected

    def test_multipartite_is_never_exact(self) -> None:
        assert not is_ppt_exact(SubsystemDims.from_spec("A:2,B:2,C:2"))


class TestPpt:
    @pytest.mark.parametrize("p", [0.0, 0.25, 0.5, 0.501, 0.75, 1.0])
    def test_werner_threshold(self, p: float) -> None:
        ppt, min_eig = is_ppt(make_state("werner", p))
        assert ppt is (p <= 0.5)
        assert min_eig == pytest.approx(min(0.5 - p, (1 + 2 * p) / 6), abs=1e-9)

    def test_bell_is_npt(self) -> None:
        ppt, min_eig = is_ppt(make_state("bell"))
        assert not ppt
        assert min_eig == pytest.approx(-0.5)


class TestEnsembles:
    def test_realize_classical(self) -> None:
        parties = SubsystemDims.from_spec("A:2,B:2")
        ens = ProductEnsemble(parties, [(0.5, [[1, 0], [1, 0]]), (0.5, [[0, 1], [0, 1]])])
        assert realize(ens).allclose(make_state("maxcorr", 2))

    def test_validation(self) -> None:
        parties = SubsystemDims.from_spec("A:2,B:2")
        with pytest.raises(StateError):
            ProductEnsemble(parties, [])
        with pytest.raises(StateError):
            ProductEnsemble(parties, [(0.5, [[1, 0], [1, 0]])])
        with pytest.raises(StateError):
            ProductEnsemble(parties, [(1.0, [[1, 1], [1, 0]])])

    def test_normalized(self) -> None:
        parties = SubsystemDims.from_spec("A:2,B:2")
        ens = ProductEnsemble.normalized(parties, [(2.0, [[1, 1], [1, 0]]), (0.0, [[1, 0], [1, 0]])])
        assert len(ens) == 1
        assert realize(ens).trace == pytest.approx(1.0)

    def test_power_labels(self) -> None:
        parties = SubsystemDims.from_spec("A:2,B:2")
        ens = ProductEnsemble(parties, [(0.5, [[1, 0], [1, 0]]), (0.5, [[0, 1], [0, 1]])])
        sq = ensemble_power(ens, 2)
        assert sq.parties.labels == ("A1", "B1", "A2", "B2")
        assert len(sq) == 4

    def test_power_blowup(self) -> None:
        parties = SubsystemDims.from_spec("A:2,B:2")
        vecs = [[1, 0], [1, 0]]
        ens = ProductEnsemble(parties, [(1 / 64, vecs)] * 64)
        with pytest.raises(ProtocolError):
            ensemble_power(ens, 6)

    def test_best_product_state(self) -> None:
        # -|00><00| is minimized by |00>
        g = np.zeros((4, 4), dtype=np.complex128)
        g[0, 0] = -1
        value, vecs = best_product_state(g, [2, 2], restarts=4, seed=0)
        assert value == pytest.approx(-1.0)
        assert abs(vecs[0][0]) == pytest.approx(1.0)


class TestRelativeEntropyOfEntanglement:
    def test_bell(self) -> None:
        value = ree(make_state("bell"), approx=PPT, config=FAST)
        assert value.bits == pytest.approx(1.0, abs=2e-3)
        assert value.dual_bound is not None
        assert value.dual_bound <= value.bits + 1e-9

    @pytest.mark.parametrize("p", [0.75, 0.9])
    def test_werner_closed_form(self, p: float) -> None:
        value = ree(make_state("werner", p), approx=PPT, config=FAST)
        assert value.bits == pytest.approx(1 - binary_entropy(p), abs=5e-3)

    def test_separable_is_zero(self) -> None:
        assert ree(make_state("maxcorr", 2), approx=PPT, config=FAST).bits == pytest.approx(0.0, abs=1e-4)
        assert ree(make_state("werner", 0.4), approx=PPT, config=FAST).bits == pytest.approx(0.0, abs=1e-3)

    def test_both_brackets(self) -> None:
        value = ree(make_state("werner", 0.9), approx=BOTH, config=FAST)
        assert value.dual_bound is not None
        assert value.dual_bound <= value.bits + 5e-3

    def test_ensemble_certificate(self) -> None:
        value, ens = closest_product_ensemble(make_state("bell"), config=FAST)
        assert value.bits == pytest.approx(1.0, abs=1e-2)
        assert realize(ens).trace == pytest.approx(1.0)
        assert is_ppt(realize(ens))[0]

    def test_subnormalized_rejected(self) -> None:
        s = DensityOperator(np.eye(4) / 8, SubsystemDims.from_spec("A:2,B:2"), subnormalized=True)
        with pytest.raises(StateError):
            ree(s)


class TestMaxRelativeEntropyOfEntanglement:
    def test_bell_unsmoothed(self) -> None:
        value = e_max_smooth(make_state("bell"), eps=0.0, approx=PPT)
        assert value.bits == pytest.approx(1.0, abs=1e-4)
        assert value.certificate is not None
        assert is_ppt(value.certificate)[0]

    def test_separable_is_zero(self) -> None:
        assert e_max_smooth(make_state("maxcorr", 2), approx=PPT).bits == pytest.approx(0.0, abs=1e-5)

    def test_non_increasing_in_eps(self) -> None:
        values = [e_max_smooth(make_state("bell"), eps=eps, approx=PPT).bits for eps in (0.0, 0.1, 0.2, 0.3)]
        assert all(b <= a + 1e-5 for a, b in zip(values, values[1:]))
        assert values[-1] < values[0]

    def test_dominates_ree(self) -> None:
        s = make_state("werner", 0.9)
        assert e_max_smooth(s, approx=PPT).bits >= ree(s, approx=PPT, config=FAST).bits - 1e-3

    def test_ensemble_mode_upper_bounds_ppt(self) -> None:
        s = make_state("bell")
        value = e_max_smooth(s, eps=0.1, approx=BOTH, config=FAST)
        assert value.dual_bound is not None
        assert value.bits >= value.dual_bound - 1e-4

    def test_bad_eps(self) -> None:
        with pytest.raises(StateError):
            e_max_smooth(make_state("bell"), eps=1.0)


class TestNearestSeparable:
    def test_bell_distance(self) -> None:
        # best separable fidelity with a Bell state is 1/2
        distance, witness = nearest_sep_distance(make_state("bell"), approx=PPT)
        assert distance == pytest.approx(math.sqrt(0.5), abs=1e-4)
        assert is_ppt(witness)[0]

    def test_separable_has_zero_distance(self) -> None:
        distance, witness = nearest_sep_distance(make_state("maxcorr", 2), approx=PPT)
        assert distance == 0.0
        assert_allclose(witness.op, make_state("maxcorr", 2).op)

    def test_ensemble_mode_close_to_ppt(self) -> None:
        s = make_state("werner", 0.8)
        ppt_distance, _ = nearest_sep_distance(s, approx=PPT)
        ens_distance, _ = nearest_sep_distance(s, approx=ENSEMBLE, config=FAST)
        assert ens_distance >= ppt_distance - 1e-4
        assert ens_distance == pytest.approx(ppt_distance, abs=2e-2)

    def test_partial_transpose_helper(self) -> None:
        assert partial_transpose(make_state("bell"), "A").shape == (4, 4)


@pytest.mark.slow
class TestRandomTwoQubitStates:
    DIMS = SubsystemDims.from_spec("A:2,B:2")

    @pytest.mark.parametrize("seed", range(100))
    def test_ppt_and_ensemble_agree(self, seed: int) -> None:
        s = random_state(self.DIMS, seed)
        ppt_value = ree(s, approx=PPT, config=FAST)
        ensemble_value = ree(s, approx=ENSEMBLE, config=FAST)
        assert ensemble_value.bits == pytest.approx(ppt_value.bits, abs=2e-3)
        assert ensemble_value.bits >= ppt_value.bits - 1e-4

    @pytest.mark.parametrize("seed", range(100))
    def test_ppt_states_are_at_distance_zero(self, seed: int) -> None:
        s = random_state(self.DIMS, seed)
        if not is_ppt(s)[0]:
            pytest.skip("entangled instance")
        distance, _ = nearest_sep_distance(s, approx=PPT, config=FAST)
        assert distance == pytest.approx(0.0, abs=1e-6)
