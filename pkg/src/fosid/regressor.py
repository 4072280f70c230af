"""Assembly of the linear-in-parameters regression system F(alpha) p = R.

Column i <= N of F holds minus the initialized differintegral of the
measured output at order alpha_i, the last column holds the input samples,
and R holds the output samples, so that the discrete FOS reads F p = R
with p = (a_1 .. a_N, b).  The per-order sensitivity dF/dalpha_j is zero
outside column j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .glkernel import OrderValue, _order_as_float, binomial_table
from .signalkit import Dataset, HistorySegment

__all__ = ["RegressorBundle", "assemble", "sensitivities", "assemble_with_sensitivities"]


@dataclass(frozen=True)
class RegressorBundle:
    """Regressor matrix F (K x (N+1)), right-hand side R and sensitivities."""

    F: np.ndarray
    R: np.ndarray
    dF: tuple[np.ndarray, ...] | None = None

    @property
    def n_orders(self) -> int:
        return self.F.shape[1] - 1


def _normalize_orders(alphas) -> list[float]:
    return [_order_as_float(a) for a in alphas]


def _column_and_sensitivity(dataset, history, alpha, with_sensitivity):
    """Output column -D^a y and, optionally, its derivative in alpha.

    Writing the column as F_col = -h^(-a) * S(a) with S the weighted sums of
    output and history samples, the chain rule gives

        dF_col/da = -ln(h) F_col - h^(-a) S'(a),

    where S' replaces the weights C_j by dC_j/da.
    """
    grid = dataset.grid
    h = grid.h
    yv = dataset.y.values
    kk = grid.n_estimation
    n3 = grid.n_history
    table = binomial_table(alpha, grid.n_total - 1)
    scale = h ** (-alpha)

    col = np.convolve(yv, table.c[:kk])[:kk]
    if n3:
        col = col + np.correlate(table.c[1:], history.values[::-1], mode="valid")
    col = -scale * col
    if not with_sensitivity:
        return col, None

    dsum = np.convolve(yv, table.dc[:kk])[:kk]
    if n3:
        dsum = dsum + np.correlate(table.dc[1:], history.values[::-1], mode="valid")
    dcol = -math.log(h) * col - scale * dsum
    return col, dcol


def _build(dataset: Dataset, history: HistorySegment, alphas, with_sensitivities: bool):
    grid = dataset.grid
    if len(history) != grid.n_history:
        raise ValueError(
            f"history has {len(history)} samples, grid expects {grid.n_history}"
        )
    avals = _normalize_orders(alphas)
    for a, raw in zip(avals, alphas):
        if isinstance(raw, OrderValue):
            lo, hi = raw.interval
            if not lo < a < hi:
                raise ValueError(f"order {a} outside its admissible interval ({lo}, {hi})")

    kk = grid.n_estimation
    n = len(avals)
    f = np.empty((kk, n + 1))
    f[:, n] = dataset.u.values
    r = dataset.y.values.copy()

    dfs: list[np.ndarray] = []
    for j, a in enumerate(avals):
        col, dcol = _column_and_sensitivity(dataset, history, a, with_sensitivities)
        f[:, j] = col
        if with_sensitivities:
            dfj = np.zeros((kk, n + 1))
            dfj[:, j] = dcol
            dfs.append(dfj)

    f.setflags(write=False)
    r.setflags(write=False)
    if not with_sensitivities:
        return RegressorBundle(F=f, R=r)
    for dfj in dfs:
        dfj.setflags(write=False)
    return RegressorBundle(F=f, R=r, dF=tuple(dfs))


def assemble(dataset: Dataset, history: HistorySegment, alphas) -> RegressorBundle:
    """Regressor matrix and right-hand side at the given orders."""
    return _build(dataset, history, alphas, with_sensitivities=False)


def sensitivities(dataset: Dataset, history: HistorySegment, alphas) -> tuple[np.ndarray, ...]:
    """Per-order sensitivity matrices dF/dalpha_j, single nonzero column each."""
    return _build(dataset, history, alphas, with_sensitivities=True).dF


def assemble_with_sensitivities(
    dataset: Dataset, history: HistorySegment, alphas
) -> RegressorBundle:
    """F, R and all dF/dalpha_j in one pass (shared weight tables)."""
    return _build(dataset, history, alphas, with_sensitivities=True)
