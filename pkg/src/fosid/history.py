"""Output-dependent history design: duplicate-cycle initialization windows.

The estimation history is built from the measured output itself by tiling
its first cycle backwards in time, which collapses the infinite-dimensional
space of initialization functions to a single count of duplicated cycles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signalkit import Dataset, HistorySegment, SampledSignal, make_grid

__all__ = ["HistorySpec", "build_duplicate_history", "apply_history"]

_MODES = ("zero", "duplicate", "file")


@dataclass(frozen=True)
class HistorySpec:
    """How to build the pre-start window for an estimation run.

    ``duplicate`` tiles the first ``cycle_length`` output samples
    ``n_cycles`` times; ``zero`` uses no history; ``file`` loads a stored
    segment from ``path``.
    """

    mode: str = "zero"
    n_cycles: int = 0
    cycle_length: int | None = None
    path: str | None = None

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"history mode must be one of {_MODES}, got {self.mode!r}")
        if self.mode == "duplicate":
            if self.n_cycles < 0:
                raise ValueError(f"cycle count must be >= 0, got {self.n_cycles}")
            if self.cycle_length is not None and self.cycle_length < 1:
                raise ValueError(f"cycle length must be >= 1, got {self.cycle_length}")
        if self.mode == "file" and not self.path:
            raise ValueError("file mode requires a path")


def build_duplicate_history(y: SampledSignal, cycle_length: int, n_cycles: int) -> HistorySegment:
    """History made of ``n_cycles`` back-to-back copies of the first cycle of y."""
    if n_cycles < 0:
        raise ValueError(f"cycle count must be >= 0, got {n_cycles}")
    if n_cycles == 0:
        return HistorySegment.empty()
    if not 1 <= cycle_length <= len(y):
        raise ValueError(
            f"cycle length must lie in [1, {len(y)}], got {cycle_length}"
        )
    return HistorySegment(np.tile(y.values[:cycle_length], n_cycles))


def apply_history(dataset: Dataset, segment: HistorySegment) -> Dataset:
    """Same measured data on a grid whose history window fits ``segment``."""
    old = dataset.grid
    n3 = len(segment)
    grid = make_grid(old.h, old.t_in - n3 * old.h, n3, old.n_estimation)
    return Dataset(grid=grid, u=dataset.u, y=dataset.y)
