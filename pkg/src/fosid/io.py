"""CSV and flat key-value file formats shared by the CLI and the harness.

Datasets are stored as ``t,u,y`` rows, history segments as ``t,f`` rows,
and truth/model/config records as flat ``key = value`` text.  Floats are
serialized with 17 significant digits so a write/read round trip is
bit-exact.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .signalkit import Dataset, HistorySegment, SampledSignal, make_grid

__all__ = [
    "fmt_float",
    "write_dataset_csv",
    "read_dataset_csv",
    "write_history_csv",
    "read_history_csv",
    "write_kv",
    "read_kv",
]


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _check_uniform(t: np.ndarray, where: str) -> float:
    if t.size < 2:
        raise ValueError(f"{where}: need at least two samples to infer the step")
    h = float((t[-1] - t[0]) / (t.size - 1))
    if h <= 0 or not np.allclose(np.diff(t), h, rtol=1e-6, atol=1e-12 * max(1.0, abs(h))):
        raise ValueError(f"{where}: time column is not uniformly spaced")
    return h


def write_dataset_csv(path, dataset: Dataset) -> None:
    t = dataset.grid.estimation_times()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "u", "y"])
        for tk, uk, yk in zip(t, dataset.u.values, dataset.y.values):
            w.writerow([fmt_float(tk), fmt_float(uk), fmt_float(yk)])


def read_dataset_csv(path) -> Dataset:
    """Read a measured record; the returned grid carries no history window."""
    rows = _read_table(path, ("t", "u", "y"))
    t, u, y = rows[:, 0], rows[:, 1], rows[:, 2]
    h = _check_uniform(t, str(path))
    grid = make_grid(h, float(t[0]), 0, t.size)
    return Dataset(
        grid=grid,
        u=SampledSignal(float(t[0]), h, u),
        y=SampledSignal(float(t[0]), h, y),
    )


def write_history_csv(path, segment: HistorySegment, t_in: float, h: float) -> None:
    n3 = len(segment)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "f"])
        for m, val in enumerate(segment.values):
            w.writerow([fmt_float(t_in + (m - n3) * h), fmt_float(val)])


def read_history_csv(path) -> HistorySegment:
    rows = _read_table(path, ("t", "f"), allow_empty=True)
    if rows.size == 0:
        return HistorySegment.empty()
    if rows.shape[0] > 1:
        _check_uniform(rows[:, 0], str(path))
    return HistorySegment(rows[:, 1])


def _read_table(path, expected_header, allow_empty: bool = False) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = tuple(c.strip() for c in header)
        if header != tuple(expected_header):
            raise ValueError(
                f"{path}: expected header {','.join(expected_header)}, got {','.join(header)}"
            )
        data = [row for row in reader if row]
    if not data:
        if allow_empty:
            return np.zeros((0, len(expected_header)))
        raise ValueError(f"{path}: no data rows")
    try:
        return np.array([[float(c) for c in row] for row in data])
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric cell ({exc})") from None


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt_float(value)
    if isinstance(value, (list, tuple, np.ndarray)):
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def write_kv(path, record: dict, header: str | None = None) -> None:
    """Write a flat ``key = value`` text file."""
    lines = []
    if header:
        lines.append(f"# {header}")
    for key, value in record.items():
        lines.append(f"{key} = {_format_value(value)}")
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_scalar(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_kv(path) -> dict:
    """Parse a flat ``key = value`` file; comma-separated values become lists."""
    record: dict = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}: malformed line {raw!r}")
        key, _, value = line.partition("=")
        value = value.strip()
        if "," in value:
            record[key.strip()] = [_parse_scalar(v.strip()) for v in value.split(",")]
        else:
            record[key.strip()] = _parse_scalar(value)
    return record


def parse_intervals(text) -> tuple[tuple[int, int], ...]:
    """Parse interval lists like ``0:1, 1:2`` from config or model files."""
    if isinstance(text, (list, tuple)):
        parts = [str(p) for p in text]
    else:
        parts = str(text).split(",")
    out = []
    for part in parts:
        lo, sep, hi = part.strip().partition(":")
        if not sep:
            raise ValueError(f"malformed interval {part!r}, expected lo:hi")
        out.append((int(lo), int(hi)))
    return tuple(out)


def format_intervals(intervals) -> str:
    return ", ".join(f"{lo}:{hi}" for lo, hi in intervals)


def as_float_list(value) -> list[float]:
    if isinstance(value, (list, tuple, np.ndarray)):
        return [float(v) for v in value]
    if isinstance(value, str):
        return [float(v) for v in value.split(",")]
    if isinstance(value, (int, float, np.integer, np.floating)) and math.isfinite(value):
        return [float(value)]
    raise ValueError(f"cannot interpret {value!r} as a list of numbers")
