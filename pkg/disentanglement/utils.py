# This file is part of disentanglement
#
# MIT License

from __future__ import annotations

import csv
import enum
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Mapping, Sequence, Union

SIGNIFICANT_DIGITS = 12


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{SIGNIFICANT_DIGITS}g}"


def round_float(x: float) -> Union[float, str]:
    """``x`` rounded to ``SIGNIFICANT_DIGITS``; non-finite values become ``"nan"``/``"inf"``."""
    if not math.isfinite(x):
        return format_float(x)
    return float(format_float(x))


def plain(value: Any, as_text: bool = False) -> Any:
    """Report value with floats rounded to fixed significant digits.

    With ``as_text`` floats become their formatted strings (CSV cells).
    """
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, float):
        return format_float(value) if as_text else round_float(value)
    if isinstance(value, Mapping):
        return {str(k): plain(v, as_text) for k, v in value.items()}  # pyright: ignore[reportUnknownVariableType]
    if isinstance(value, (list, tuple)):
        return [plain(v, as_text) for v in value]  # pyright: ignore[reportUnknownVariableType]
    return value


def render_json(records: Union[Mapping[str, Any], Sequence[Mapping[str, Any]]]) -> str:
    return json.dumps(plain(records), indent=2) + "\n"


def render_csv(records: Sequence[Mapping[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for record in records:
        row = plain(dict(record), as_text=True)
        writer.writerow({k: str(v).lower() if isinstance(v, bool) else v for k, v in row.items()})
    return buf.getvalue()


def atomic_write(path: Union[str, Path], text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        Path(tmp).replace(target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
