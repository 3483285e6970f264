import math

import numpy as np
import pytest

from disentanglement.convexsplit import (
    build_convex_split,
    certify_convex_split,
    collision_bound,
    convex_split_distance,
    default_lemma_grid,
    dense_distance,
    joint_spectrum,
    register_dims,
    registers_for,
    registers_from_bits,
    types_fidelity,
    verify_lemma,
)
from disentanglement.errors import ProtocolError, ProtocolErrorKind, StateError
from disentanglement.models import CertificationMethod, ConvexSplitSpec, SolverConfig
from disentanglement.qmatrix import DensityOperator, make_state, mix, partial_trace, random_state
from disentanglement.subsystems import SubsystemDims

DIMS = SubsystemDims.uniform("A,B", 2)
BELL = make_state("bell")
MAXCORR = make_state("maxcorr", 2)


def product_reference() -> DensityOperator:
    local = np.diag([0.6, 0.4])
    return DensityOperator(np.kron(local, local), DIMS)


def bell_against_maxcorr(n: int) -> float:
    # ratios 2 and 0 with mass 1/2 each: F = E sqrt(2k/n), k ~ Bin(n, 1/2)
    f = sum(math.comb(n, k) / 2**n * math.sqrt(2 * k / n) for k in range(n + 1))
    return math.sqrt(1 - f * f)


class TestConstruction:
    def test_single_register_is_rho(self) -> None:
        tau = build_convex_split(ConvexSplitSpec(BELL, MAXCORR, 1))
        assert np.allclose(tau.op, BELL.op)
        assert tau.labels == ("A1", "B1")

    def test_marginals(self) -> None:
        rho, sigma = make_state("werner", 0.9), make_state("werner", 0.5)
        tau = build_convex_split(ConvexSplitSpec(rho, sigma, 3))
        assert tau.trace == pytest.approx(1.0)
        assert tau.labels == register_dims(DIMS, 3).labels
        one = partial_trace(tau, "A1,B1")
        assert np.allclose(one.op, (rho.op + 2 * sigma.op) / 3)

    def test_dimension_guard(self) -> None:
        with pytest.raises(ProtocolError) as info:
            build_convex_split(ConvexSplitSpec(BELL, MAXCORR, 4), SolverConfig(max_dim=64))
        assert info.value.kind is ProtocolErrorKind.DIMENSION_BLOWUP
        assert info.value.dim == 256

    @pytest.mark.parametrize(("n", "zeta", "xi"), [(0, 0.0, 0.5), (2, -0.1, 0.5), (2, 0.0, 0.0), (2, 0.6, 0.5)])
    def test_bad_spec(self, n: int, zeta: float, xi: float) -> None:
        with pytest.raises(StateError):
            build_convex_split(ConvexSplitSpec(BELL, MAXCORR, n, zeta, xi))

    def test_mismatched_registers(self) -> None:
        with pytest.raises(StateError):
            build_convex_split(ConvexSplitSpec(BELL, make_state("isotropic", 0.5, 3), 2))


class TestDistances:
    def test_joint_spectrum(self) -> None:
        spectra = joint_spectrum(BELL, MAXCORR)
        assert spectra is not None
        p, q = spectra
        assert sorted(np.round(p, 9)) == [0, 0, 0, 1]
        assert float(np.sum(q)) == pytest.approx(1.0)
        assert joint_spectrum(mix(product_reference(), random_state(DIMS, 0), 0.1), product_reference()) is None

    @pytest.mark.parametrize("n", [1, 2, 4, 5])
    def test_types_closed_form(self, n: int) -> None:
        distance, method = certify_convex_split(BELL, MAXCORR, n)
        assert method is CertificationMethod.WITNESS_TYPES
        assert distance == pytest.approx(bell_against_maxcorr(n), abs=1e-9)

    def test_known_register_counts(self) -> None:
        assert certify_convex_split(BELL, MAXCORR, 4)[0] > 0.3
        assert certify_convex_split(BELL, MAXCORR, 5)[0] < 0.3

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_types_agree_with_dense(self, n: int) -> None:
        rho, sigma = make_state("werner", 0.9), make_state("werner", 0.5)
        spectra = joint_spectrum(rho, sigma)
        assert spectra is not None
        f = types_fidelity(*spectra, n)
        assert f is not None
        dense = dense_distance(rho, sigma, n)
        assert math.sqrt(max(0.0, 1 - f * f)) == pytest.approx(dense, abs=1e-6)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_collision_bound_dominates(self, n: int) -> None:
        sigma = product_reference()
        rho = mix(sigma, random_state(DIMS, 3), 0.3)
        exact, method = certify_convex_split(rho, sigma, n)
        assert method is CertificationMethod.WITNESS_DENSE
        assert collision_bound(rho, sigma, n) >= exact - 1e-9

    def test_collision_fallback(self) -> None:
        sigma = product_reference()
        rho = mix(sigma, random_state(DIMS, 3), 0.3)
        config = SolverConfig(max_dim=16)
        _, method = certify_convex_split(rho, sigma, 3, config)
        assert method is CertificationMethod.WITNESS_COLLISION
        with pytest.raises(ProtocolError):
            convex_split_distance(ConvexSplitSpec(rho, sigma, 3), config)

    def test_support_leak_bound_is_trivial(self) -> None:
        zero = np.zeros((4, 4))
        zero[1, 1] = 1
        rho = DensityOperator(zero, DIMS)
        assert collision_bound(rho, MAXCORR, 10) == 1.0

    def test_non_increasing_in_registers(self) -> None:
        values = [certify_convex_split(BELL, MAXCORR, n)[0] for n in range(1, 12)]
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


class TestRegisterCounts:
    def test_from_bits(self) -> None:
        assert registers_from_bits(1.0, 0.5) == 4
        assert registers_from_bits(0.0, 1.0) == 1
        with pytest.raises(ProtocolError):
            registers_from_bits(math.inf, 0.5)

    def test_registers_for_bell(self) -> None:
        # D_max(Bell || maxcorr) = 1
        assert registers_for(BELL, MAXCORR, 0.0, 0.25) == 8
        assert registers_for(BELL, MAXCORR, 0.1, 0.25) <= 8

    def test_bad_parameters(self) -> None:
        with pytest.raises(StateError):
            registers_for(BELL, MAXCORR, 0.0, 0.0)


def test_default_grid_shape() -> None:
    grid = default_lemma_grid()
    assert len(grid) >= 20
    assert all(case.rho.dims.local_dims == (2, 2) for case in grid)


@pytest.mark.slow
def test_lemma_holds_on_default_grid() -> None:
    rows = verify_lemma(threads=2)
    assert len(rows) == len(default_lemma_grid())
    for row in rows:
        assert row.passed, row
        assert row.measured_P <= row.bound + 1e-9
        assert row.monotone, row
        assert row.N >= 1
