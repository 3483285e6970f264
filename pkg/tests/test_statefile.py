import json
from pathlib import Path
from typing import Any, Callable

import numpy as np
import pytest

from disentanglement.errors import StateFileError
from disentanglement.qmatrix import make_state
from disentanglement.separability import ProductEnsemble, realize
from disentanglement.statefile import (
    dumps_ensemble,
    dumps_state,
    load_ensemble,
    load_state,
    loads_ensemble,
    loads_state,
    save_state,
)
from disentanglement.subsystems import SubsystemDims

BELL_JSON = """{
  "dims": [{"label": "A", "dim": 2}, {"label": "B", "dim": 2}],
  "subnormalized": false,
  "matrix_re": [[0.5, 0, 0, 0.5], [0, 0, 0, 0], [0, 0, 0, 0], [0.5, 0, 0, 0.5]],
  "matrix_im": [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
}"""


def test_loads_bell() -> None:
    s = loads_state(BELL_JSON)
    assert s.allclose(make_state("bell"))
    assert s.labels == ("A", "B")


def test_imaginary_part_is_optional() -> None:
    data = json.loads(BELL_JSON)
    del data["matrix_im"]
    assert loads_state(json.dumps(data)).allclose(make_state("bell"))


def test_save_and_load(tmp_path: Path) -> None:
    s = make_state("random", 3, 2, 3)
    path = tmp_path / "state.json"
    save_state(s, path)
    assert load_state(path).allclose(s, atol=1e-12)


def test_dumps_complex_entries() -> None:
    s = make_state("random", 5, 2, 2)
    data = json.loads(dumps_state(s))
    assert data["dims"] == [{"label": "A", "dim": 2}, {"label": "B", "dim": 2}]
    assert np.any(np.abs(np.array(data["matrix_im"])) > 0)


def test_syntax_error_reports_line() -> None:
    with pytest.raises(StateFileError) as info:
        loads_state('{\n  "dims": [\n')
    assert info.value.line is not None
    assert "line" in str(info.value)


@pytest.mark.parametrize(
    ("mutate", "field"),
    [
        (lambda d: d.pop("dims"), "dims"),
        (lambda d: d.update(dims=[{"label": "A", "dim": 0}, {"label": "B", "dim": 2}]), "dims[0]"),
        (lambda d: d.update(subnormalized="no"), "subnormalized"),
        (lambda d: d.update(matrix_re=[[1, 0], [0, 0]]), "matrix_re"),
        (lambda d: d.update(matrix_im=[["x"] * 4] * 4), "matrix_im"),
    ],
)
def test_field_errors(mutate: Callable[[dict[str, Any]], object], field: str) -> None:
    data = json.loads(BELL_JSON)
    mutate(data)
    with pytest.raises(StateFileError) as info:
        loads_state(json.dumps(data))
    assert info.value.field == field


def test_invalid_physics_is_a_file_error() -> None:
    data = json.loads(BELL_JSON)
    data["matrix_re"][0][0] = 2.0
    with pytest.raises(StateFileError) as info:
        loads_state(json.dumps(data))
    assert info.value.field == "matrix_re"


def test_missing_file(tmp_path: Path) -> None:
    with pytest.raises(StateFileError):
        load_state(tmp_path / "absent.json")


class TestEnsemble:
    parties = SubsystemDims.from_spec("A:2,B:2")

    def ensemble(self) -> ProductEnsemble:
        return ProductEnsemble(
            self.parties,
            [
                (0.5, [np.array([1, 0]), np.array([1, 0])]),
                (0.5, [np.array([0, 1]), np.array([0, 1])]),
            ],
        )

    def test_write_and_read(self, tmp_path: Path) -> None:
        path = tmp_path / "ens.json"
        path.write_text(dumps_ensemble(self.ensemble()), encoding="utf-8")
        back = load_ensemble(path)
        assert len(back) == 2
        assert realize(back).allclose(make_state("maxcorr", 2))

    def test_bad_amplitudes(self) -> None:
        text = json.dumps(
            {
                "parties": [{"label": "A", "dim": 2}, {"label": "B", "dim": 2}],
                "points": [{"weight": 1.0, "states": [[1, 0], [[1, 0], [0, 0]]]}],
            }
        )
        with pytest.raises(StateFileError) as info:
            loads_ensemble(text)
        assert info.value.field == "points[0].states[0]"

    def test_empty_points(self) -> None:
        text = json.dumps({"parties": [{"label": "A", "dim": 2}], "points": []})
        with pytest.raises(StateFileError) as info:
            loads_ensemble(text)
        assert info.value.field == "points"
