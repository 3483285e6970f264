import logging

import numpy as np
import pytest

from disentanglement import _frankwolfe
from disentanglement._typings import ComplexArray
from disentanglement.models import SolverStatus

A = np.diag([1.0, 0.0]).astype(np.complex128)
B = np.diag([0.0, 1.0]).astype(np.complex128)


def distance_to(target: ComplexArray) -> tuple[_frankwolfe.Objective, _frankwolfe.Gradient]:
    def f(x: ComplexArray) -> float:
        return float(np.sum(np.abs(x - target) ** 2))

    def grad(x: ComplexArray) -> ComplexArray:
        return 2 * (x - target)

    return f, grad


def best_vertex(g: ComplexArray) -> tuple[ComplexArray, str]:
    if np.real(np.vdot(g, A)) <= np.real(np.vdot(g, B)):
        return A, "a"
    return B, "b"


def test_converges_to_interior_point() -> None:
    f, grad = distance_to((A + B) / 2)
    result = _frankwolfe.minimize(f, grad, best_vertex, [(A, "a")], tol=1e-9, max_iter=50)
    assert result.status is SolverStatus.CONVERGED
    assert result.value == pytest.approx(0.0, abs=1e-9)
    assert result.lower_bound <= result.value
    assert sorted(result.payloads) == ["a", "b"]
    assert np.sum(result.weights) == pytest.approx(1.0)


def test_stall_is_reported(caplog: pytest.LogCaptureFixture) -> None:
    f, grad = distance_to(A)

    def away(g: ComplexArray) -> tuple[ComplexArray, str]:
        return B, "b"

    with caplog.at_level(logging.WARNING, logger="disentanglement._frankwolfe"):
        result = _frankwolfe.minimize(f, grad, away, [(A, "a")], tol=-1.0, max_iter=50, name="stuck")
    assert result.status is SolverStatus.MAX_ITER
    assert result.iterations == 1
    assert result.value == pytest.approx(0.0, abs=1e-12)
    assert any("stuck stalled" in r.getMessage() for r in caplog.records)


def test_iteration_cap_is_reported(caplog: pytest.LogCaptureFixture) -> None:
    f, grad = distance_to((A + B) / 2)
    with caplog.at_level(logging.WARNING, logger="disentanglement._frankwolfe"):
        result = _frankwolfe.minimize(
            f, grad, best_vertex, [(A, "a")], tol=1e-9, max_iter=1, corrective=False, name="capped"
        )
    assert result.status is SolverStatus.MAX_ITER
    assert any("capped hit the iteration cap" in r.getMessage() for r in caplog.records)
