"""Two-stage separable least-squares estimator for coefficients and orders.

For fixed orders the coefficients p enter linearly and are eliminated in
closed form, p_hat = F^+ R.  The orders are then found as a zero of the
projected residual J(alpha) = (I - F F^+) R via Newton iteration with an
analytic Jacobian assembled from the constant-rank derivative of the
Moore-Penrose pseudoinverse.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .glkernel import OrderValue
from .regressor import assemble_with_sensitivities
from .signalkit import Dataset, HistorySegment

__all__ = [
    "EstimationConfig",
    "EstimationResult",
    "pinv",
    "pinv_derivative",
    "solve_linear_params",
    "projection_residual",
    "jacobian",
    "estimate",
]


@dataclass(frozen=True)
class EstimationConfig:
    """Settings for one estimation run.

    ``alpha0`` is the initial order guess, ``epsilon`` the stopping
    threshold on ||J||/||R||, ``rank_tol`` the relative singular-value
    cutoff of every pseudoinverse and ``bounds_margin`` the clamp margin
    keeping iterates strictly inside their admissible intervals.  The
    optional ``step_halving`` safeguard shrinks a Newton step only when it
    increased the residual; it is off by default.
    """

    alpha0: tuple[float, ...]
    epsilon: float = 1e-8
    max_iter: int = 50
    rank_tol: float = 1e-10
    bounds_margin: float = 1e-3
    step_halving: bool = False
    max_halvings: int = 10

    def __post_init__(self):
        object.__setattr__(self, "alpha0", tuple(float(a) for a in np.atleast_1d(self.alpha0)))
        if not self.epsilon > 0:
            raise ValueError(f"stopping threshold must be positive, got {self.epsilon}")
        if self.max_iter < 1:
            raise ValueError(f"iteration cap must be >= 1, got {self.max_iter}")
        if not 0 < self.rank_tol < 1:
            raise ValueError(f"rank tolerance must lie in (0, 1), got {self.rank_tol}")
        if not self.bounds_margin > 0:
            raise ValueError(f"bounds margin must be positive, got {self.bounds_margin}")


@dataclass(frozen=True)
class EstimationResult:
    """Estimates plus per-iteration diagnostics of one run."""

    p_hat: np.ndarray
    alpha_hat: np.ndarray
    iterations: int
    residual_history: np.ndarray
    converged: bool
    final_output_error: float
    alpha_history: tuple[np.ndarray, ...] = field(default=(), repr=False)

    def __post_init__(self):
        res = np.array(self.residual_history, dtype=float)
        res.setflags(write=False)
        object.__setattr__(self, "residual_history", res)
        if res.size != self.iterations + 1:
            raise ValueError(
                f"residual history has {res.size} entries for {self.iterations} iterations"
            )


def pinv(m: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD.

    Singular values below rank_tol times the largest are treated as zero.
    """
    return np.linalg.pinv(np.asarray(m, dtype=float), rcond=rank_tol)


def _numerical_rank(m: np.ndarray, rank_tol: float) -> int:
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_tol * s[0]))


def pinv_derivative(
    m: np.ndarray, dm: np.ndarray, m_pinv: np.ndarray, rank_tol: float = 1e-10
) -> np.ndarray:
    """Derivative of the pseudoinverse along a matrix direction ``dm``.

    Uses the constant-rank formula

        dB = -B dM B + B B^T dM^T (I - M B) + (I - B M) dM^T B^T B,

    valid while rank(M) is locally constant.  A finite-difference rank
    probe warns when a rank change makes the result unreliable.
    """
    m = np.asarray(m, dtype=float)
    dm = np.asarray(dm, dtype=float)
    b = np.asarray(m_pinv, dtype=float)
    rows, cols = m.shape

    dm_scale = np.linalg.norm(dm)
    if dm_scale > 0:
        delta = np.sqrt(np.finfo(float).eps) * max(np.linalg.norm(m), 1.0) / dm_scale
        if _numerical_rank(m, rank_tol) != _numerical_rank(m + delta * dm, rank_tol):
            warnings.warn(
                "rank of M changes along dM; pseudoinverse derivative is unreliable",
                RuntimeWarning,
                stacklevel=2,
            )

    left_proj = np.eye(rows) - m @ b
    right_proj = np.eye(cols) - b @ m
    return -b @ dm @ b + b @ b.T @ dm.T @ left_proj + right_proj @ dm.T @ b.T @ b


def solve_linear_params(f: np.ndarray, r: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Least-squares coefficients p_hat = F^+ R at fixed orders."""
    f = np.asarray(f, dtype=float)
    if _numerical_rank(f, rank_tol) < min(f.shape):
        warnings.warn(
            "regressor matrix is rank deficient; returning the minimum-norm solution",
            RuntimeWarning,
            stacklevel=2,
        )
    return pinv(f, rank_tol) @ np.asarray(r, dtype=float)


def projection_residual(
    f: np.ndarray, r: np.ndarray, rank_tol: float = 1e-10
) -> tuple[np.ndarray, np.ndarray]:
    """Column-space projector P = F F^+ and projected residual J = (I - P) R."""
    f = np.asarray(f, dtype=float)
    r = np.asarray(r, dtype=float)
    p = f @ pinv(f, rank_tol)
    return p, r - p @ r


def jacobian(
    f: np.ndarray, df, r: np.ndarray, rank_tol: float = 1e-10
) -> np.ndarray:
    """Jacobian of the projected residual J(alpha) with respect to the orders.

    Column j is dJ/dalpha_j = -(F dB_j + dF_j B) R with B = F^+ and dB_j
    from :func:`pinv_derivative`; the sign follows from J = (I - P) R.
    """
    f = np.asarray(f, dtype=float)
    r = np.asarray(r, dtype=float)
    b = pinv(f, rank_tol)
    br = b @ r
    cols = []
    for dfj in df:
        dfj = np.asarray(dfj, dtype=float)
        db = pinv_derivative(f, dfj, b, rank_tol)
        cols.append(-(f @ (db @ r) + dfj @ br))
    return np.column_stack(cols)


def _feasible(alpha: np.ndarray, intervals, margin: float) -> np.ndarray:
    """Sorted, clamped copy of an order iterate, strictly inside each interval."""
    out = np.sort(np.asarray(alpha, dtype=float))
    for i, (lo, hi) in enumerate(intervals):
        out[i] = min(max(out[i], lo + margin), hi - margin)
        if i and out[i] <= out[i - 1]:
            # coincident intervals can clamp two orders onto each other
            out[i] = min(out[i - 1] + 1e-12, hi - margin / 2)
    return out


def _validate_intervals(intervals, alpha0):
    ivs = [(int(lo), int(hi)) for lo, hi in intervals]
    if len(ivs) != len(alpha0):
        raise ValueError(
            f"need one interval per order, got {len(ivs)} for {len(alpha0)} initial orders"
        )
    for (lo, hi), nxt in zip(ivs, ivs[1:]):
        if (nxt[0], nxt[1]) < (lo, hi):
            raise ValueError(f"intervals must be sorted ascending, got {ivs}")
    for a, (lo, hi) in zip(alpha0, ivs):
        if not lo < a < hi:
            raise ValueError(f"initial order {a} is not strictly inside ({lo}, {hi})")
    return ivs


def estimate(
    dataset: Dataset,
    history: HistorySegment,
    intervals,
    config: EstimationConfig,
) -> EstimationResult:
    """Joint estimation of coefficients and orders (two-stage Newton).

    Each iteration assembles F at the current orders, eliminates the
    coefficients in closed form and applies one Newton update
    alpha <- alpha - J'(alpha)^+ J(alpha), clamping the iterate back into
    its admissible intervals.  Hitting the iteration cap is reported via
    ``converged=False``, never raised.
    """
    ivs = _validate_intervals(intervals, config.alpha0)
    alpha = _feasible(np.array(config.alpha0), ivs, config.bounds_margin)
    margin = config.bounds_margin

    def evaluate(avec):
        orders = [OrderValue(float(a), iv) for a, iv in zip(avec, ivs)]
        bundle = assemble_with_sensitivities(dataset, history, orders)
        b = pinv(bundle.F, config.rank_tol)
        br = b @ bundle.R
        j = bundle.R - bundle.F @ br
        r_norm = float(np.linalg.norm(bundle.R))
        res = float(np.linalg.norm(j)) / r_norm if r_norm > 0 else 0.0
        return bundle, b, br, j, res

    alpha_history = [alpha.copy()]
    residual_history = []
    iterations = 0
    converged = False

    bundle, b, br, j, res = evaluate(alpha)
    residual_history.append(res)
    while True:
        if res <= config.epsilon:
            converged = True
            break
        if iterations >= config.max_iter:
            break
        jac = jacobian(bundle.F, bundle.dF, bundle.R, config.rank_tol)
        step = pinv(jac, config.rank_tol) @ j
        new_alpha = _feasible(alpha - step, ivs, margin)
        candidate = evaluate(new_alpha)
        if config.step_halving and candidate[4] > res:
            stalled = True
            for _ in range(config.max_halvings):
                step = 0.5 * step
                new_alpha = _feasible(alpha - step, ivs, margin)
                candidate = evaluate(new_alpha)
                if candidate[4] <= res:
                    stalled = False
                    break
            if stalled:
                # no step length improves the residual: stop at the current iterate
                break
        alpha = new_alpha
        bundle, b, br, j, res = candidate
        iterations += 1
        alpha_history.append(alpha.copy())
        residual_history.append(res)

    p_hat = br.copy()
    y_norm = float(np.linalg.norm(bundle.R))
    fit = bundle.F @ p_hat
    output_error = (
        100.0 * float(np.linalg.norm(fit - bundle.R)) / y_norm if y_norm > 0 else 0.0
    )
    return EstimationResult(
        p_hat=p_hat,
        alpha_hat=alpha.copy(),
        iterations=iterations,
        residual_history=np.array(residual_history),
        converged=converged,
        final_output_error=output_error,
        alpha_history=tuple(alpha_history),
    )
