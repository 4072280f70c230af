"""Shared builders for the test suite.

The two benchmark systems used throughout:

  system 1:  y + 1.0 D^0.7 y = 0.5 u          (pulse or step input)
  system 2:  y + 2 D^0.5 y + 3 D^1.5 y = u    (sinc burst input)

Inverse-crime data is generated by the package's own simulator with the
exact history later handed to the estimator, so the true parameters leave
a residual at rounding level.
"""

import numpy as np

from fosid import (
    Dataset,
    FosModel,
    HistorySegment,
    SampledSignal,
    make_grid,
    simulate_fos,
)

EX2_COEFFS = (2.0, 3.0)
EX2_GAIN = 1.0
EX2_ALPHAS = (0.5, 1.5)
EX2_INTERVALS = ((0, 1), (1, 2))

EX1_COEFF = 1.0
EX1_GAIN = 0.5
EX1_ALPHA = 0.7
PULSE_PERIOD_SAMPLES = 84


def ex1_model(interval=(0, 1)) -> FosModel:
    return FosModel.from_values([EX1_COEFF], EX1_GAIN, [EX1_ALPHA], [interval])


def ex2_model() -> FosModel:
    return FosModel.from_values(EX2_COEFFS, EX2_GAIN, EX2_ALPHAS, EX2_INTERVALS)


def sinc_input(t: np.ndarray) -> np.ndarray:
    x = 2.0 * np.pi * t
    out = np.full(t.shape, 10.0)
    nz = x != 0
    out[nz] = 10.0 * np.sin(x[nz]) / x[nz]
    return out


def pulse_input(t: np.ndarray) -> np.ndarray:
    return np.where((t % 0.84) < 0.27 * 0.84, 350.0, 0.0)


def ex2_inverse_crime(n_history: int = 0, seed: int = 0, n_samples: int = 100):
    """Example-2 dataset over [0, 10] at h = 0.1, exact by construction.

    With ``n_history`` > 0 a random history segment is used both to
    generate and to estimate, which keeps the inverse crime exact while
    exercising the initialization term.
    """
    h = 0.1
    rng = np.random.default_rng(seed)
    model = ex2_model()
    grid = make_grid(h, -n_history * h, n_history, n_samples)
    history = (
        HistorySegment(rng.uniform(-1.0, 1.0, n_history))
        if n_history
        else HistorySegment.empty()
    )
    t = grid.estimation_times()
    u = SampledSignal(grid.t_in, h, sinc_input(t))
    y = simulate_fos(model, u, history, grid)
    return Dataset(grid=grid, u=u, y=y), history, model


def ex1_pulse_inverse_crime(n_cycles: int = 10, n_output_cycles: int = 15, seed: int = 0):
    """Example-1 pulse dataset whose duplicate history is exact by construction."""
    from fosid import build_duplicate_history

    h = 0.01
    length = PULSE_PERIOD_SAMPLES
    model = ex1_model(interval=(0, 2))
    prefix, k = n_cycles * length, n_output_cycles * length
    full_grid = make_grid(h, -prefix * h, 0, prefix + k)
    t_full = full_grid.estimation_times()
    u_full = SampledSignal(full_grid.t_in, h, pulse_input(t_full))
    y_full = simulate_fos(model, u_full, HistorySegment.empty(), full_grid)

    u = SampledSignal(0.0, h, u_full.values[prefix:])
    proto_y = SampledSignal(0.0, h, y_full.values[prefix:])
    history = build_duplicate_history(proto_y, length, n_cycles)
    grid = make_grid(h, -prefix * h, prefix, k)
    y = simulate_fos(model, u, history, grid)
    return Dataset(grid=grid, u=u, y=y), history, model
