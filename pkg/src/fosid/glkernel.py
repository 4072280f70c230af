"""Grunwald-Letnikov weights, initialized differintegrals and the forward solver.

The discrete differintegral of order ``alpha`` over a sequence z is

    D^a z[k] = h^(-a) * sum_{j=0..k} C_j * z[k-j],

with signed binomial weights C_j = (-1)^j binom(alpha, j) generated by the
recursion C_0 = 1, C_j = (1 - (1+alpha)/j) C_{j-1}.  An operator started at
t_in instead of the birth time t_abs is completed by the history term
``psi_init``, defined here as the history-indexed tail of the full-window
sum over the concatenated sequence [history | output].  With that
convention the split

    D^a_full(concat(f_in, y))[k + N3] = D^a_uninitialized(y)[k] + psi[k]

holds exactly, which is the identity every consumer of this module relies
on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .signalkit import HistorySegment, SampledSignal, SamplingGrid

__all__ = [
    "OrderValue",
    "BinomialTable",
    "FosModel",
    "binomial_table",
    "binom_coeffs",
    "binom_coeff_derivs",
    "gl_full",
    "gl_uninitialized",
    "psi_init",
    "psi_init_all",
    "gl_initialized",
    "gl_solve",
    "simulate_fos",
]

_SINGULAR_DENOMINATOR = 1e-12


@dataclass(frozen=True)
class OrderValue:
    """A fractional differentiation order inside an open integer interval."""

    alpha: float
    interval: tuple[int, int]

    def __post_init__(self):
        lo, hi = self.interval
        if int(lo) != lo or int(hi) != hi:
            raise ValueError(f"interval endpoints must be integers, got {self.interval}")
        object.__setattr__(self, "interval", (int(lo), int(hi)))
        if not lo < hi:
            raise ValueError(f"interval must be increasing, got {self.interval}")
        if not (lo < self.alpha < hi):
            raise ValueError(
                f"order {self.alpha} is not strictly inside ({lo}, {hi})"
            )

    @classmethod
    def from_alpha(cls, alpha: float) -> "OrderValue":
        """Wrap a non-integer order in its unit interval (floor(a), floor(a)+1)."""
        lo = int(np.floor(alpha))
        return cls(float(alpha), (lo, lo + 1))


def _order_as_float(alpha) -> float:
    return float(alpha.alpha) if isinstance(alpha, OrderValue) else float(alpha)


@dataclass(frozen=True)
class BinomialTable:
    """Signed GL binomial weights C_0..C_n and their order derivatives."""

    alpha: float
    c: np.ndarray
    dc: np.ndarray


@lru_cache(maxsize=512)
def _binomial_table_cached(alpha: float, n_max: int) -> BinomialTable:
    c = np.empty(n_max + 1)
    c[0] = 1.0
    if n_max >= 1:
        j = np.arange(1.0, n_max + 1.0)
        # cumprod replays the scalar recursion c[j] = (1-(1+a)/j) c[j-1] bit for bit
        c[1:] = np.cumprod(1.0 - (1.0 + alpha) / j)
    dc = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        dc[n] = (-1.0 / n) * c[n - 1] + (1.0 - (1.0 + alpha) / n) * dc[n - 1]
    c.setflags(write=False)
    dc.setflags(write=False)
    return BinomialTable(alpha=alpha, c=c, dc=dc)


def binomial_table(alpha, n_max: int) -> BinomialTable:
    """Weights and derivatives up to index ``n_max``, cached per (alpha, n_max)."""
    if n_max < 0:
        raise ValueError(f"table length must be >= 0, got {n_max}")
    return _binomial_table_cached(_order_as_float(alpha), int(n_max))


def binom_coeffs(alpha, n_max: int) -> np.ndarray:
    """Signed binomial weights C_0..C_{n_max}, equal to (-1)^j binom(alpha, j)."""
    return binomial_table(alpha, n_max).c


def binom_coeff_derivs(alpha, n_max: int) -> np.ndarray:
    """Derivatives dC_j/dalpha via dC_n = (-1/n) C_{n-1} + (1-(1+a)/n) dC_{n-1}."""
    return binomial_table(alpha, n_max).dc


def gl_full(z: np.ndarray, alpha, h: float, k: int) -> float:
    """Full-window differintegral of sequence ``z`` at index ``k``.

    The window reaches back to the start of ``z``, i.e. the value is
    h^(-a) * sum_{j=0..k} C_j z[k-j].
    """
    z = np.asarray(z, dtype=float)
    if not 0 <= k < z.size:
        raise IndexError(f"index {k} out of range for a sequence of {z.size} samples")
    a = _order_as_float(alpha)
    c = binom_coeffs(a, k)
    return h ** (-a) * float(np.dot(c, z[k::-1]))


def gl_uninitialized(values: np.ndarray, alpha, h: float) -> np.ndarray:
    """Uninitialized differintegral of a window at every index.

    Returns the array with entries h^(-a) sum_{j=0..k} C_j values[k-j],
    the operator that pretends the sequence was born at its own start.
    """
    values = np.asarray(values, dtype=float)
    a = _order_as_float(alpha)
    n = values.size
    c = binom_coeffs(a, n - 1)
    return h ** (-a) * np.convolve(values, c)[:n]


def psi_init(history: HistorySegment, alpha, grid: SamplingGrid, k: int) -> float:
    """History (initialization) term at estimation index ``k``.

    Equals h^(-a) * sum_{j=k+1..k+N3} C_j history[k+N3-j]; zero when the
    grid has no history window.
    """
    if not 0 <= k < grid.n_estimation:
        raise IndexError(
            f"index {k} out of range for an estimation window of {grid.n_estimation} samples"
        )
    n3 = grid.n_history
    if len(history) != n3:
        raise ValueError(f"history has {len(history)} samples, grid expects {n3}")
    if n3 == 0:
        return 0.0
    a = _order_as_float(alpha)
    c = binom_coeffs(a, k + n3)
    return grid.h ** (-a) * float(np.dot(c[k + 1 : k + n3 + 1], history.values[::-1]))


def psi_init_all(history: HistorySegment, alpha, grid: SamplingGrid) -> np.ndarray:
    """History term evaluated at every estimation index at once."""
    n3, kk = grid.n_history, grid.n_estimation
    if len(history) != n3:
        raise ValueError(f"history has {len(history)} samples, grid expects {n3}")
    if n3 == 0:
        return np.zeros(kk)
    a = _order_as_float(alpha)
    c = binom_coeffs(a, grid.n_total - 1)
    # entry k is sum_m c[k+1+m] * history[n3-1-m], a sliding correlation
    return grid.h ** (-a) * np.correlate(c[1:], history.values[::-1], mode="valid")


def gl_initialized(
    y: SampledSignal, history: HistorySegment, alpha, grid: SamplingGrid
) -> SampledSignal:
    """Initialized differintegral of the measured output on the grid.

    Sample k equals the full-window differintegral of [history | y] at
    index k + N3.
    """
    if len(y) != grid.n_estimation:
        raise ValueError(f"output has {len(y)} samples, grid expects {grid.n_estimation}")
    values = gl_uninitialized(y.values, alpha, grid.h) + psi_init_all(history, alpha, grid)
    return SampledSignal(t_start=grid.t_in, h=grid.h, values=values)


@dataclass(frozen=True)
class FosModel:
    """Linear non-commensurate fractional-order system

        y(t) + sum_i a_i D^{alpha_i} y(t) = b u(t)

    with strictly increasing orders alpha_1 < ... < alpha_N.
    """

    coeffs: np.ndarray
    gain: float
    orders: tuple[OrderValue, ...]

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size != len(self.orders):
            raise ValueError(
                f"need one coefficient per order, got {coeffs.size} for {len(self.orders)} orders"
            )
        if not np.all(np.isfinite(coeffs)) or not np.isfinite(self.gain):
            raise ValueError("model parameters must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "orders", tuple(self.orders))
        alphas = self.alphas
        if np.any(np.diff(alphas) <= 0):
            raise ValueError(f"orders must be strictly increasing, got {alphas}")

    @property
    def n_orders(self) -> int:
        return len(self.orders)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([o.alpha for o in self.orders])

    @classmethod
    def from_values(cls, coeffs, gain: float, alphas, intervals=None) -> "FosModel":
        """Build a model from plain order values, defaulting to unit intervals."""
        if intervals is None:
            orders = tuple(OrderValue.from_alpha(a) for a in alphas)
        else:
            orders = tuple(
                OrderValue(float(a), tuple(iv)) for a, iv in zip(alphas, intervals, strict=True)
            )
        return cls(coeffs=np.asarray(coeffs, dtype=float), gain=float(gain), orders=orders)


def simulate_fos(
    model: FosModel, u: SampledSignal, history: HistorySegment, grid: SamplingGrid
) -> SampledSignal:
    """Forward simulation of the discrete FOS on the estimation window.

    Solves, sample by sample,

        y_k = [b u_k - sum_i a_i (h^(-a_i) sum_{j=1..k} C_j y_{k-j} + psi_i[k])] / D,
        D = 1 + sum_i a_i h^(-a_i),

    which is the unique forward recursion of the discrete system.  The
    history acts only through the exogenous forcing psi_i.
    """
    kk = grid.n_estimation
    if len(u) != kk:
        raise ValueError(f"input has {len(u)} samples, grid expects {kk}")
    if len(history) != grid.n_history:
        raise ValueError(f"history has {len(history)} samples, grid expects {grid.n_history}")
    h = grid.h
    coeffs = model.coeffs
    scales = np.array([h ** (-o.alpha) for o in model.orders])
    denom = 1.0 + float(np.dot(coeffs, scales))
    if abs(denom) <= _SINGULAR_DENOMINATOR:
        raise ValueError(
            f"near-singular update denominator {denom:.3e}: "
            "step size and coefficients make the discrete system ill-posed"
        )
    tables = [binom_coeffs(o.alpha, grid.n_total - 1) for o in model.orders]
    forcing = np.zeros(kk)
    for a_i, order in zip(coeffs, model.orders):
        forcing += a_i * psi_init_all(history, order, grid)

    y = np.empty(kk)
    uv = u.values
    for k in range(kk):
        acc = model.gain * uv[k] - forcing[k]
        if k:
            tail = y[k - 1 :: -1]
            for a_i, s_i, c_i in zip(coeffs, scales, tables):
                acc -= a_i * s_i * float(np.dot(c_i[1 : k + 1], tail))
        y[k] = acc / denom
    return SampledSignal(t_start=grid.t_in, h=h, values=y)


def gl_solve(u: SampledSignal, alpha, h: float) -> SampledSignal:
    """Solve D^a y = u for a signal born at the start of ``u``.

    Inverts the full-window differintegral: gl_full of the returned values
    reproduces ``u`` at every index.
    """
    a = _order_as_float(alpha)
    uv = u.values
    n = uv.size
    c = binom_coeffs(a, n - 1)
    ha = h**a
    y = np.empty(n)
    for k in range(n):
        acc = ha * uv[k]
        if k:
            acc -= float(np.dot(c[1 : k + 1], y[k - 1 :: -1]))
        y[k] = acc
    return SampledSignal(t_start=u.t_start, h=h, values=y)


def fos_residual(
    model: FosModel,
    y: SampledSignal,
    u: SampledSignal,
    history: HistorySegment,
    grid: SamplingGrid,
) -> np.ndarray:
    """Discrete-equation residual b*u_k - y_k - sum_i a_i D^{a_i} y[k].

    Zero (to rounding) exactly when ``y`` solves the discrete FOS; used as
    the simulator's self-consistency oracle.
    """
    lhs = y.values.copy()
    for a_i, order in zip(model.coeffs, model.orders):
        lhs += a_i * gl_initialized(y, history, order, grid).values
    return model.gain * u.values - lhs
