import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from disentanglement.divergences import conditional_mutual_information
from disentanglement.errors import ProtocolError, ProtocolErrorKind, StateError
from disentanglement.models import CertificationMethod, SolverConfig
from disentanglement.qmatrix import DensityOperator, make_state, purified_distance, random_state
from disentanglement.recovery import (
    ChannelChoi,
    apply_channel,
    appendix_converse_check,
    fidelity_of_recovery,
    markov_state,
    petz_map,
    recovered_state,
    recovery_max_divergence,
    rel_entropy_of_recovery,
    simulate_recovery_degrading,
)
from disentanglement.subsystems import SubsystemDims

GHZ = make_state("ghz", 3)
ABC = SubsystemDims.uniform("A,B,C", 2)


def classical_ghz() -> DensityOperator:
    return DensityOperator(np.diag([0.5, 0, 0, 0, 0, 0, 0, 0.5]), ABC)


class TestChannels:
    def test_identity(self) -> None:
        ch = ChannelChoi.identity(SubsystemDims.from_spec("C:2"))
        assert apply_channel(ch, GHZ, "C").allclose(GHZ)

    def test_replacer(self) -> None:
        zero = DensityOperator(np.diag([1.0, 0.0]), SubsystemDims.from_spec("B:2"))
        ch = ChannelChoi.replacer(SubsystemDims.from_spec("B:2"), zero)
        out = apply_channel(ch, make_state("bell"), "B")
        assert out.labels == ("A", "B")
        assert_allclose(out.op, np.kron(np.eye(2) / 2, zero.op), atol=1e-12)

    def test_not_trace_preserving(self) -> None:
        dims = SubsystemDims.from_spec("C:2")
        with pytest.raises(StateError):
            ChannelChoi(np.eye(4) / 4, dims, dims)

    def test_not_positive(self) -> None:
        dims = SubsystemDims.from_spec("C:2")
        with pytest.raises(StateError):
            ChannelChoi(np.diag([2.0, -1.0, 0.0, 1.0]), dims, dims)

    def test_wrong_shape(self) -> None:
        dims = SubsystemDims.from_spec("C:2")
        with pytest.raises(StateError):
            ChannelChoi(np.eye(2), dims, dims)

    def test_input_dims_checked(self) -> None:
        ch = ChannelChoi.identity(SubsystemDims.from_spec("C:3"))
        with pytest.raises(StateError):
            apply_channel(ch, GHZ, "C")


class TestPetz:
    def test_ghz_recovery(self) -> None:
        petz = petz_map(GHZ, "C", "A")
        assert petz.in_dims.labels == ("C",)
        assert petz.out_dims.labels == ("A", "C")
        sigma = recovered_state(petz, GHZ, "A", "B", "C")
        assert sigma.allclose(classical_ghz(), atol=1e-9)
        assert purified_distance(GHZ, sigma) == pytest.approx(math.sqrt(0.5), abs=1e-9)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_markov_chain_is_recovered(self, seed: int) -> None:
        s = markov_state(seed)
        assert conditional_mutual_information(s, "A", "B", "C") == pytest.approx(0.0, abs=1e-8)
        sigma = recovered_state(petz_map(s, "C", "A"), s, "A", "B", "C")
        assert sigma.allclose(s, atol=1e-8)

    def test_singular_marginal(self) -> None:
        op = np.zeros((8, 8))
        op[0, 0] = 1
        s = DensityOperator(op, ABC)
        with pytest.raises(ProtocolError) as info:
            petz_map(s, "C", "A", strict=True)
        assert info.value.kind is ProtocolErrorKind.SINGULAR_CONDITIONER
        # trace-and-replace keeps the map a channel
        sigma = recovered_state(petz_map(s, "C", "A"), s, "A", "B", "C")
        assert sigma.allclose(s, atol=1e-9)

    def test_overlapping_registers(self) -> None:
        with pytest.raises(StateError):
            petz_map(GHZ, "C", "A,C")


class TestOptimizedRecovery:
    def test_markov_chain_has_zero_cost(self) -> None:
        s = markov_state(1)
        optimum = rel_entropy_of_recovery(s, "A", "B", "C")
        assert optimum.value.bits == pytest.approx(0.0, abs=1e-4)
        assert optimum.petz_bits == pytest.approx(0.0, abs=1e-6)

    def test_ghz(self) -> None:
        optimum = rel_entropy_of_recovery(GHZ, "A", "B", "C")
        assert optimum.petz_bits == pytest.approx(1.0, abs=1e-6)
        assert optimum.value.bits <= optimum.petz_bits + 1e-9
        assert optimum.value.bits == pytest.approx(1.0, abs=1e-2)
        assert optimum.channel.out_dims.labels == ("A", "C")
        assert optimum.value.certificate is not None

    def test_random_state_below_petz(self) -> None:
        s = random_state(ABC, 11)
        optimum = rel_entropy_of_recovery(s, "A", "B", "C")
        assert 0.0 <= optimum.value.bits <= optimum.petz_bits + 1e-9

    def test_max_divergence(self) -> None:
        assert recovery_max_divergence(markov_state(2), "A", "B", "C").bits == pytest.approx(0.0, abs=1e-4)
        assert recovery_max_divergence(GHZ, "A", "B", "C").bits == pytest.approx(1.0, abs=1e-3)

    def test_max_divergence_smoothing(self) -> None:
        exact = recovery_max_divergence(GHZ, "A", "B", "C").bits
        smooth = recovery_max_divergence(GHZ, "A", "B", "C", eps=0.2).bits
        assert smooth <= exact + 1e-6

    def test_fidelity(self) -> None:
        f, channel = fidelity_of_recovery(GHZ, "A", "B", "C")
        assert f == pytest.approx(math.sqrt(0.5), abs=1e-3)
        assert channel.in_dims.labels == ("C",)
        f_markov, _ = fidelity_of_recovery(markov_state(0), "A", "B", "C")
        assert f_markov == pytest.approx(1.0, abs=1e-4)

    def test_bad_partition(self) -> None:
        with pytest.raises(StateError):
            rel_entropy_of_recovery(GHZ, "A", "B", "B")


class TestDegrading:
    def test_ghz(self) -> None:
        report = simulate_recovery_degrading(GHZ, None, 0.2, 0.05, state_id="ghz3")
        assert report.state_id == "ghz3"
        assert report.petz_distance == pytest.approx(math.sqrt(0.5), abs=1e-9)
        assert report.M > 1
        assert report.approx_mode is CertificationMethod.WITNESS_COLLISION
        assert report.passed
        assert report.cmi_bits == pytest.approx(1.0, abs=1e-9)
        assert report.rec_value_bits == pytest.approx(1.0, abs=1e-2)
        assert report.lower_bits <= report.upper_bits
        record = report.to_record()
        assert record["pass"] is True
        assert record["approx_mode"] == "witness-collision"

    def test_markov_needs_one_register(self) -> None:
        report = simulate_recovery_degrading(markov_state(0), None, 0.1, 0.05)
        assert report.M == 1
        assert report.approx_mode is CertificationMethod.WITNESS_DENSE
        assert report.achieved_distance == pytest.approx(0.0, abs=1e-6)

    def test_explicit_registers(self) -> None:
        report = simulate_recovery_degrading(GHZ, 2, 0.2, 0.05)
        assert report.M == 2
        assert report.approx_mode is CertificationMethod.WITNESS_DENSE
        assert 0.0 < report.achieved_distance <= math.sqrt(0.5) + 1e-9

    def test_parameters(self) -> None:
        with pytest.raises(StateError):
            simulate_recovery_degrading(GHZ, None, 0.05, 0.1)
        with pytest.raises(StateError):
            simulate_recovery_degrading(GHZ, 0, 0.2, 0.05)
        with pytest.raises(StateError):
            simulate_recovery_degrading(make_state("bell"), None, 0.2, 0.05)


class TestConverse:
    @pytest.mark.parametrize("state", [GHZ, markov_state(0), random_state(ABC, 3)])
    def test_holds(self, state: DensityOperator) -> None:
        holds, slack = appendix_converse_check(state, 2)
        assert holds
        assert slack >= -1e-9

    def test_single_register(self) -> None:
        holds, _ = appendix_converse_check(GHZ, 1)
        assert holds

    def test_blowup(self) -> None:
        with pytest.raises(ProtocolError):
            appendix_converse_check(GHZ, 3)

    def test_bad_m(self) -> None:
        with pytest.raises(StateError):
            appendix_converse_check(GHZ, 0)


class TestMarkovFamily:
    @pytest.mark.parametrize("seed", range(20))
    def test_petz_recovers_exactly(self, seed: int) -> None:
        s = markov_state(seed)
        sigma = recovered_state(petz_map(s, "C", "A"), s, "A", "B", "C")
        assert sigma.allclose(s, atol=1e-9)
        assert purified_distance(s, sigma) <= 1e-6

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(20))
    def test_optimized_recovery_is_free(self, seed: int) -> None:
        optimum = rel_entropy_of_recovery(markov_state(seed), "A", "B", "C")
        assert optimum.value.bits <= SolverConfig().fw_tol

    @pytest.mark.parametrize("seed", range(10))
    def test_converse_on_random_states(self, seed: int) -> None:
        holds, slack = appendix_converse_check(random_state(ABC, 100 + seed), 2)
        assert holds
        assert slack >= -1e-9

    def test_ghz_degrading_at_larger_error(self) -> None:
        report = simulate_recovery_degrading(GHZ, None, 0.3, 0.05)
        assert report.passed
        assert report.achieved_distance <= 0.3
        assert report.lower_bits <= report.upper_bits
