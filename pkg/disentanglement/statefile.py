# This file is part of disentanglement
#
# MIT License

"""JSON files for density operators and product ensembles.

State::

    {"dims": [{"label": "A", "dim": 2}, ...], "subnormalized": false,
     "matrix_re": [[...]], "matrix_im": [[...]]}

Ensemble::

    {"parties": [{"label": "A", "dim": 2}, ...],
     "points": [{"weight": w, "states": [[[re, im], ...], ...]}]}

with one list of ``[re, im]`` amplitudes per party in ``states``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Union

import numpy as np

from ._typings import ComplexArray
from .errors import StateError, StateFileError
from .qmatrix import DensityOperator
from .separability import ProductEnsemble
from .subsystems import SubsystemDims

PathArg = Union[str, Path]


def _decode(text: str) -> dict[str, Any]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFileError(exc.msg, line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise StateFileError("top level must be an object")
    return data  # pyright: ignore[reportUnknownVariableType]


def _field(data: dict[str, Any], name: str) -> Any:
    try:
        return data[name]
    except KeyError:
        raise StateFileError("missing field", field=name) from None


def _dims(raw: Any, name: str) -> SubsystemDims:
    if not isinstance(raw, list) or not raw:
        raise StateFileError("expected a non-empty list of parties", field=name)
    parties: list[tuple[str, int]] = []
    for i, entry in enumerate(raw):  # pyright: ignore[reportUnknownVariableType, reportUnknownArgumentType]
        where = f"{name}[{i}]"
        if not isinstance(entry, dict):
            raise StateFileError("expected an object with label and dim", field=where)
        label, dim = entry.get("label"), entry.get("dim")  # pyright: ignore[reportUnknownMemberType, reportUnknownVariableType]
        if not isinstance(label, str) or not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise StateFileError("label must be a string and dim a positive integer", field=where)
        parties.append((label, dim))
    try:
        return SubsystemDims(parties)
    except StateError as exc:
        raise StateFileError(str(exc), field=name) from exc


def _real_matrix(raw: Any, name: str, d: int) -> np.ndarray:
    try:
        arr = np.array(raw, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise StateFileError("expected a matrix of numbers", field=name) from exc
    if arr.shape != (d, d):
        raise StateFileError(f"expected shape ({d}, {d}), got {arr.shape}", field=name)
    return arr


def loads_state(text: str) -> DensityOperator:
    data = _decode(text)
    dims = _dims(_field(data, "dims"), "dims")
    subnormalized = data.get("subnormalized", False)
    if not isinstance(subnormalized, bool):
        raise StateFileError("expected true or false", field="subnormalized")
    d = dims.total_dim
    re = _real_matrix(_field(data, "matrix_re"), "matrix_re", d)
    im = _real_matrix(data.get("matrix_im", np.zeros((d, d)).tolist()), "matrix_im", d)
    try:
        return DensityOperator(re + 1j * im, dims, subnormalized=subnormalized)
    except StateError as exc:
        raise StateFileError(str(exc), field="matrix_re") from exc


def _dims_record(dims: SubsystemDims) -> list[dict[str, Any]]:
    return [{"label": label, "dim": dim} for label, dim in dims]


def dumps_state(s: DensityOperator) -> str:
    record = {
        "dims": _dims_record(s.dims),
        "subnormalized": s.subnormalized,
        "matrix_re": np.real(s.op).tolist(),
        "matrix_im": np.imag(s.op).tolist(),
    }
    return json.dumps(record, indent=2) + "\n"


def load_state(path: PathArg) -> DensityOperator:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StateFileError(f"cannot read {path}: {exc.strerror}") from exc
    return loads_state(text)


def save_state(s: DensityOperator, path: PathArg) -> None:
    Path(path).write_text(dumps_state(s), encoding="utf-8")


def _amplitudes(raw: Any, name: str) -> ComplexArray:
    try:
        arr = np.array(raw, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise StateFileError("expected a list of [re, im] pairs", field=name) from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise StateFileError("expected a list of [re, im] pairs", field=name)
    return arr[:, 0] + 1j * arr[:, 1]


def loads_ensemble(text: str) -> ProductEnsemble:
    data = _decode(text)
    parties = _dims(_field(data, "parties"), "parties")
    raw_points = _field(data, "points")
    if not isinstance(raw_points, list) or not raw_points:
        raise StateFileError("expected a non-empty list", field="points")
    points: list[tuple[float, list[ComplexArray]]] = []
    for i, point in enumerate(raw_points):  # pyright: ignore[reportUnknownVariableType, reportUnknownArgumentType]
        where = f"points[{i}]"
        if not isinstance(point, dict):
            raise StateFileError("expected an object with weight and states", field=where)
        weight, states = point.get("weight"), point.get("states")  # pyright: ignore[reportUnknownMemberType, reportUnknownVariableType]
        if not isinstance(weight, (int, float)) or isinstance(weight, bool):
            raise StateFileError("weight must be a number", field=f"{where}.weight")
        if not isinstance(states, list):
            raise StateFileError("expected one amplitude list per party", field=f"{where}.states")
        vecs = [_amplitudes(v, f"{where}.states[{k}]") for k, v in enumerate(states)]  # pyright: ignore[reportUnknownVariableType, reportUnknownArgumentType]
        points.append((float(weight), vecs))
    try:
        return ProductEnsemble(parties, points)
    except StateError as exc:
        raise StateFileError(str(exc), field="points") from exc


def dumps_ensemble(ens: ProductEnsemble) -> str:
    record = {
        "parties": _dims_record(ens.parties),
        "points": [
            {
                "weight": w,
                "states": [np.stack([np.real(v), np.imag(v)], axis=1).tolist() for v in vecs],
            }
            for w, vecs in ens.points
        ],
    }
    return json.dumps(record, indent=2) + "\n"


def load_ensemble(path: PathArg) -> ProductEnsemble:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StateFileError(f"cannot read {path}: {exc.strerror}") from exc
    return loads_ensemble(text)
