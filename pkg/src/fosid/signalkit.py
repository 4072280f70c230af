"""Value types for uniformly sampled records with a pre-start history window.

Time is represented as (start, step, index); absolute instants are derived,
never stored per sample, so long records do not accumulate floating-point
drift.  All types are immutable after construction and safe to share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SamplingGrid",
    "SampledSignal",
    "HistorySegment",
    "Dataset",
    "make_grid",
    "concat_history_output",
]


def _readonly_vector(values, name: str, allow_empty: bool = False) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not allow_empty and arr.size < 1:
        raise ValueError(f"{name} must contain at least one sample")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SamplingGrid:
    """Uniform discretization of a record born at ``t_abs``.

    The first ``n_history`` samples cover [t_abs, t_in) and the remaining
    ``n_estimation`` samples cover [t_in, T], where t_in = t_abs +
    n_history * h.
    """

    h: float
    t_abs: float
    n_history: int
    n_estimation: int

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError(f"sampling step must be positive and finite, got {self.h}")
        if not math.isfinite(self.t_abs):
            raise ValueError("birth time must be finite")
        if self.n_history < 0:
            raise ValueError(f"history sample count must be >= 0, got {self.n_history}")
        if self.n_estimation < 1:
            raise ValueError(f"estimation sample count must be >= 1, got {self.n_estimation}")

    @property
    def t_in(self) -> float:
        """Start of the measured window."""
        return self.t_abs + self.n_history * self.h

    @property
    def n_total(self) -> int:
        """Total sample count, history plus estimation window."""
        return self.n_history + self.n_estimation

    def history_times(self) -> np.ndarray:
        return self.t_abs + self.h * np.arange(self.n_history)

    def estimation_times(self) -> np.ndarray:
        return self.t_in + self.h * np.arange(self.n_estimation)


@dataclass(frozen=True)
class SampledSignal:
    """A finite real-valued time series sampled uniformly from ``t_start``."""

    t_start: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError(f"sampling step must be positive and finite, got {self.h}")
        if not math.isfinite(self.t_start):
            raise ValueError("start time must be finite")
        object.__setattr__(self, "values", _readonly_vector(self.values, "signal values"))

    def __len__(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.h * np.arange(self.values.size)


@dataclass(frozen=True)
class HistorySegment:
    """Pre-start samples, ordered oldest to newest, ending one step before t_in."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values", _readonly_vector(self.values, "history values", allow_empty=True)
        )

    def __len__(self) -> int:
        return self.values.size

    @classmethod
    def empty(cls) -> "HistorySegment":
        return cls(np.zeros(0))


@dataclass(frozen=True)
class Dataset:
    """Measured input/output pair on the estimation window of a grid."""

    grid: SamplingGrid
    u: SampledSignal
    y: SampledSignal

    def __post_init__(self):
        k = self.grid.n_estimation
        if len(self.u) != k or len(self.y) != k:
            raise ValueError(
                f"input/output must both have {k} samples, got {len(self.u)} and {len(self.y)}"
            )
        for name, sig in (("input", self.u), ("output", self.y)):
            if not math.isclose(sig.h, self.grid.h, rel_tol=1e-12, abs_tol=0.0):
                raise ValueError(f"{name} step {sig.h} does not match grid step {self.grid.h}")
            if not math.isclose(sig.t_start, self.grid.t_in, rel_tol=1e-9, abs_tol=1e-12):
                raise ValueError(
                    f"{name} starts at {sig.t_start}, expected window start {self.grid.t_in}"
                )


def make_grid(h: float, t_abs: float, n_history: int, n_estimation: int) -> SamplingGrid:
    """Build a sampling grid; see :class:`SamplingGrid` for the layout."""
    return SamplingGrid(h=h, t_abs=t_abs, n_history=int(n_history), n_estimation=int(n_estimation))


def concat_history_output(
    history: HistorySegment, y: SampledSignal, grid: SamplingGrid | None = None
) -> np.ndarray:
    """Combined sequence [history | output] used by the full-window kernels.

    When ``grid`` is given, both lengths are checked against it.
    """
    if grid is not None:
        if len(history) != grid.n_history:
            raise ValueError(
                f"history has {len(history)} samples, grid expects {grid.n_history}"
            )
        if len(y) != grid.n_estimation:
            raise ValueError(
                f"output has {len(y)} samples, grid expects {grid.n_estimation}"
            )
    z = np.concatenate([history.values, y.values])
    z.setflags(write=False)
    return z
