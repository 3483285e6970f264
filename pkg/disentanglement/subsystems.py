# This file is part of disentanglement
#
# MIT License

from __future__ import annotations

import math
from typing import Final, Iterable, Iterator, Sequence

from ._typings import CutArg, LabelsArg
from .errors import StateError, StateErrorKind

LABEL_SEP: Final[str] = ","
CUT_SEP: Final[str] = ":"


def parse_labels(labels: LabelsArg) -> tuple[str, ...]:
    """Normalize a label argument.

    A plain string is either one label (``"A"``) or a comma separated list
    (``"A,C"``). Any other sequence is taken as-is.
    """
    if isinstance(labels, str):
        parts = [p.strip() for p in labels.split(LABEL_SEP)]
    else:
        parts = [str(p).strip() for p in labels]
    parts = [p for p in parts if p]
    if not parts:
        raise StateError(StateErrorKind.UNKNOWN_LABEL, "empty label set")
    if len(set(parts)) != len(parts):
        raise StateError(StateErrorKind.BAD_PARTITION, f"repeated label in {parts!r}")
    return tuple(parts)


def _parse_party(spec: str) -> tuple[str, int]:
    label, _, dim = spec.partition(CUT_SEP)
    try:
        d = int(dim)
    except ValueError as exc:
        raise StateError(
            StateErrorKind.BAD_PARAMETER, f"bad party specification {spec!r}"
        ) from exc
    return label.strip(), d


class SubsystemDims:
    """Ordered register structure ``(label, local_dim)`` of an operator."""

    def __init__(self, parties: Iterable[tuple[str, int]]) -> None:
        ps = tuple((str(label), int(dim)) for label, dim in parties)
        if not ps:
            raise StateError(StateErrorKind.DIM_MISMATCH, "no parties given")
        labels = [label for label, _ in ps]
        if len(set(labels)) != len(labels):
            raise StateError(
                StateErrorKind.BAD_PARTITION, f"labels must be unique, got {labels!r}"
            )
        for label, dim in ps:
            if not label:
                raise StateError(StateErrorKind.UNKNOWN_LABEL, "empty party label")
            if dim < 1:
                raise StateError(
                    StateErrorKind.BAD_PARAMETER,
                    f"local dimension of {label!r} must be positive, got {dim}",
                )
        self._parties = ps

    @classmethod
    def from_spec(cls, spec: str) -> SubsystemDims:
        """Parse ``"A:2,B:3"``."""
        return cls(_parse_party(p) for p in spec.split(LABEL_SEP) if p.strip())

    @classmethod
    def uniform(cls, labels: LabelsArg, dim: int) -> SubsystemDims:
        return cls((label, dim) for label in parse_labels(labels))

    @property
    def parties(self) -> tuple[tuple[str, int], ...]:
        return self._parties

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self._parties)

    @property
    def local_dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self._parties)

    @property
    def total_dim(self) -> int:
        return math.prod(self.local_dims)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError as exc:
            raise StateError(
                StateErrorKind.UNKNOWN_LABEL,
                f"label {label!r} not in {list(self.labels)!r}",
            ) from exc

    def indices(self, labels: LabelsArg) -> tuple[int, ...]:
        return tuple(self.index(label) for label in parse_labels(labels))

    def dim_of(self, labels: LabelsArg) -> int:
        return math.prod(self._parties[i][1] for i in self.indices(labels))

    def select(self, labels: LabelsArg) -> SubsystemDims:
        """Sub-structure on ``labels``, kept in this structure's order."""
        idx = sorted(self.indices(labels))
        return self.__class__(self._parties[i] for i in idx)

    def complement(self, labels: LabelsArg) -> tuple[str, ...]:
        drop = set(parse_labels(labels))
        for label in drop:
            self.index(label)
        return tuple(label for label in self.labels if label not in drop)

    def concat(self, other: SubsystemDims) -> SubsystemDims:
        return self.__class__([*self._parties, *other.parties])

    def relabel(self, labels: LabelsArg) -> SubsystemDims:
        new = parse_labels(labels)
        if len(new) != len(self):
            raise StateError(
                StateErrorKind.DIM_MISMATCH,
                f"expected {len(self)} labels, got {len(new)}",
            )
        return self.__class__(zip(new, self.local_dims))

    def reorder(self, labels: LabelsArg) -> SubsystemDims:
        order = parse_labels(labels)
        if sorted(order) != sorted(self.labels):
            raise StateError(
                StateErrorKind.BAD_PARTITION,
                f"{list(order)!r} is not a reordering of {list(self.labels)!r}",
            )
        return self.__class__((label, self.dim_of(label)) for label in order)

    def suffixed(self, suffix: object) -> SubsystemDims:
        return self.__class__((f"{label}{suffix}", dim) for label, dim in self._parties)

    def __len__(self) -> int:
        return len(self._parties)

    def __iter__(self) -> Iterator[tuple[str, int]]:
        return iter(self._parties)

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubsystemDims):
            return NotImplemented
        return self._parties == other.parties

    def __hash__(self) -> int:
        return hash(self._parties)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({str(self)!r})"

    def __str__(self) -> str:
        return LABEL_SEP.join(f"{label}{CUT_SEP}{dim}" for label, dim in self._parties)


def parse_cut(
    cut: CutArg | str, dims: SubsystemDims
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Validate a bipartition of ``dims``.

    Accepts a pair of label sets or the string form ``"A,A1:B,B1"``.
    """
    if isinstance(cut, str):
        left, sep, right = cut.partition(CUT_SEP)
        if not sep:
            raise StateError(StateErrorKind.BAD_PARTITION, f"bad cut {cut!r}")
        cut = (left, right)
    a, b = (parse_labels(side) for side in cut)
    check_partition(dims, a, b)
    return a, b


def check_partition(dims: SubsystemDims, *groups: Sequence[str]) -> None:
    seen: list[str] = []
    for group in groups:
        if not group:
            raise StateError(StateErrorKind.BAD_PARTITION, "empty side in partition")
        seen.extend(group)
    if len(set(seen)) != len(seen):
        raise StateError(StateErrorKind.BAD_PARTITION, f"overlapping groups {groups!r}")
    if sorted(seen) != sorted(dims.labels):
        raise StateError(
            StateErrorKind.BAD_PARTITION,
            f"groups {groups!r} do not cover {list(dims.labels)!r}",
        )


def default_cut(dims: SubsystemDims) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """First party against the rest."""
    if len(dims) < 2:
        raise StateError(
            StateErrorKind.BAD_PARTITION, "a cut needs at least two parties"
        )
    return (dims.labels[0],), dims.labels[1:]
