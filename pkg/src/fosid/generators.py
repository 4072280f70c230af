"""Synthetic experiment generators: benchmark systems and their input laws.

Each named example bundles a fractional-order model, a sampling step, an
input waveform and sensible estimation defaults.  Records are simulated
from zero history at their own birth instant; history design and protocol
mismatches are layered on top by :mod:`fosid.protocols`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .glkernel import FosModel, gl_solve, simulate_fos
from .io import format_intervals, write_dataset_csv, write_kv
from .signalkit import Dataset, HistorySegment, SampledSignal, make_grid

__all__ = [
    "ExampleSpec",
    "GeneratedExample",
    "example_names",
    "get_example",
    "generate",
    "gen_example",
    "neuro_param_map",
    "AberrationDemo",
    "aberration_demo",
]

PULSE_PERIOD = 0.84
PULSE_AMPLITUDE = 350.0
PULSE_DUTY = 0.27

# Invented ejection waveform for the arterial example: one half-sine of
# 0.3 s per 0.84 s cardiac cycle with peak flow 425.
EJECTION_DURATION = 0.3
EJECTION_PEAK = 425.0

WINDKESSEL_TAU = 1.15
WINDKESSEL_RESISTANCE = 1.13
WINDKESSEL_ALPHA = 0.85  # invented truth; the arterial study reports none

NEURO_DECAY_RATE = 0.65
NEURO_ELIMINATION = 0.41


def _pulse_train(t: np.ndarray, rng) -> np.ndarray:
    return np.where((t % PULSE_PERIOD) < PULSE_DUTY * PULSE_PERIOD, PULSE_AMPLITUDE, 0.0)


def _uniform_random(t: np.ndarray, rng) -> np.ndarray:
    return rng.uniform(0.0, 100.0, t.size)


def _sinc_burst(t: np.ndarray, rng) -> np.ndarray:
    x = 2.0 * np.pi * t
    out = np.full(t.shape, 10.0)
    nz = x != 0
    out[nz] = 10.0 * np.sin(x[nz]) / x[nz]
    return out


def _square_window(t: np.ndarray, rng) -> np.ndarray:
    return np.where((t >= 2.0) & (t < 7.0), 1.0, 0.0)


def _ejection_wave(t: np.ndarray, rng) -> np.ndarray:
    phase = t % PULSE_PERIOD
    return np.where(
        phase < EJECTION_DURATION,
        EJECTION_PEAK * np.sin(np.pi * phase / EJECTION_DURATION),
        0.0,
    )


def _gaussian_activity(t: np.ndarray, rng) -> np.ndarray:
    return np.exp(-((t - 5.0) ** 2))


@dataclass(frozen=True)
class ExampleSpec:
    """Model, input law and estimation defaults of one named benchmark."""

    name: str
    model: FosModel
    h: float
    input_law: Callable[[np.ndarray, np.random.Generator], np.ndarray]
    record_samples: int
    cycle_samples: int | None = None
    alpha0: tuple[float, ...] = (0.5,)
    intervals: tuple[tuple[int, int], ...] = ((0, 1),)
    extras: dict = field(default_factory=dict)

    @property
    def n_orders(self) -> int:
        return self.model.n_orders

    def param_names(self) -> tuple[str, ...]:
        return tuple(f"a{i + 1}" for i in range(self.n_orders)) + ("b",)

    def truth_params(self) -> np.ndarray:
        return np.concatenate([self.model.coeffs, [self.model.gain]])


def _build_registry() -> dict[str, ExampleSpec]:
    ex1 = FosModel.from_values([1.0], 0.5, [0.7])
    ex2 = FosModel.from_values([2.0, 3.0], 1.0, [0.5, 1.5], [(0, 1), (1, 2)])
    wk = FosModel.from_values([WINDKESSEL_TAU], WINDKESSEL_RESISTANCE, [WINDKESSEL_ALPHA])
    neuro = FosModel.from_values(
        [NEURO_DECAY_RATE / NEURO_ELIMINATION, 1.0 / NEURO_ELIMINATION],
        1.0 / NEURO_ELIMINATION,
        [0.6, 1.7],
        [(0, 1), (1, 2)],
    )
    specs = [
        ExampleSpec(
            name="ex1-random",
            model=ex1,
            h=0.01,
            input_law=_uniform_random,
            record_samples=15 * 84,
            cycle_samples=84,
            alpha0=(0.5,),
        ),
        ExampleSpec(
            name="ex1-pulse",
            model=ex1,
            h=0.01,
            input_law=_pulse_train,
            record_samples=15 * 84,
            cycle_samples=84,
            alpha0=(0.5,),
        ),
        ExampleSpec(
            name="ex2-sinc",
            model=ex2,
            h=0.1,
            input_law=_sinc_burst,
            record_samples=100,
            alpha0=(0.6, 1.4),
            intervals=((0, 1), (1, 2)),
        ),
        ExampleSpec(
            name="ex2-square",
            model=ex2,
            h=0.01,
            input_law=_square_window,
            record_samples=1000,
            alpha0=(0.6, 1.4),
            intervals=((0, 1), (1, 2)),
        ),
        ExampleSpec(
            name="windkessel",
            model=wk,
            h=0.01,
            input_law=_ejection_wave,
            record_samples=10 * 84,
            cycle_samples=84,
            alpha0=(0.9,),
            extras={
                "tau_alpha": WINDKESSEL_TAU,
                "R_p": WINDKESSEL_RESISTANCE,
                "C_alpha": WINDKESSEL_TAU / WINDKESSEL_RESISTANCE,
            },
        ),
        ExampleSpec(
            name="neuro",
            model=neuro,
            h=0.1,
            input_law=_gaussian_activity,
            record_samples=150,
            alpha0=(0.5, 1.5),
            intervals=((0, 1), (1, 2)),
            extras={"k": NEURO_DECAY_RATE, "gamma": NEURO_ELIMINATION},
        ),
    ]
    return {spec.name: spec for spec in specs}


_REGISTRY = _build_registry()


def example_names() -> tuple[str, ...]:
    return tuple(_REGISTRY) + ("aberration",)


def get_example(name: str) -> ExampleSpec:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValueError(
            f"unknown example {name!r}; choose one of {', '.join(example_names())}"
        ) from None


@dataclass(frozen=True)
class GeneratedExample:
    """A simulated record plus everything needed to judge estimates on it."""

    spec: ExampleSpec
    seed: int
    dataset: Dataset
    true_history: HistorySegment

    def truth_record(self) -> dict:
        grid = self.dataset.grid
        spec = self.spec
        record = {
            "generator": spec.name,
            "seed": self.seed,
            "h": grid.h,
            "t_abs": grid.t_abs,
            "n_history": grid.n_history,
            "n_estimation": grid.n_estimation,
            "a": list(spec.model.coeffs),
            "b": spec.model.gain,
            "alpha": list(spec.model.alphas),
            "intervals": format_intervals(spec.intervals),
        }
        record.update(spec.extras)
        return record


def generate(
    name: str,
    seed: int = 42,
    n_samples: int | None = None,
    prefix_samples: int = 0,
) -> GeneratedExample:
    """Simulate a named example from zero history at its birth instant.

    The measured record starts at t = 0 and holds ``n_samples`` values;
    ``prefix_samples`` extra samples are simulated before t = 0 (driven by
    the same input law) and exposed as the record's true history.
    """
    spec = get_example(name)
    if n_samples is None:
        n_samples = spec.record_samples
    if n_samples < 1:
        raise ValueError(f"record length must be >= 1, got {n_samples}")
    if prefix_samples < 0:
        raise ValueError(f"history length must be >= 0, got {prefix_samples}")
    rng = np.random.default_rng(seed)
    total = prefix_samples + n_samples
    h = spec.h
    birth = -prefix_samples * h
    full_grid = make_grid(h, birth, 0, total)
    t = full_grid.estimation_times()
    u_full = SampledSignal(birth, h, spec.input_law(t, rng))
    y_full = simulate_fos(spec.model, u_full, HistorySegment.empty(), full_grid)

    grid = make_grid(h, birth, prefix_samples, n_samples)
    dataset = Dataset(
        grid=grid,
        u=SampledSignal(0.0, h, u_full.values[prefix_samples:]),
        y=SampledSignal(0.0, h, y_full.values[prefix_samples:]),
    )
    true_history = HistorySegment(y_full.values[:prefix_samples])
    return GeneratedExample(spec=spec, seed=seed, dataset=dataset, true_history=true_history)


def gen_example(name: str, seed: int, out_csv, n_samples: int | None = None) -> GeneratedExample:
    """Generate a named example and write its dataset CSV plus a truth file.

    The truth file lands next to the CSV with a ``_truth.txt`` suffix.  The
    ``aberration`` name is handled by :func:`aberration_demo` and its own
    CSV layout.
    """
    from pathlib import Path

    if name == "aberration":
        raise ValueError("the aberration demo has its own writer; use aberration_demo")
    gex = generate(name, seed=seed, n_samples=n_samples)
    out_csv = Path(out_csv)
    write_dataset_csv(out_csv, gex.dataset)
    write_kv(
        out_csv.with_name(out_csv.stem + "_truth.txt"),
        gex.truth_record(),
        header=f"truth record for generator {name}",
    )
    return gex


def neuro_param_map(p_hat, alpha_hat) -> tuple[float, float, float, float]:
    """Physical neurovascular parameters from the normalized-form estimate.

    The estimated system  y + a1 D^{a_low} y + a2 D^{a_high} y = b u  maps
    back to  D^{a_high} y + k D^{a_low} y + gamma y = u  via gamma = 1/b
    and k = a1 * gamma.  Returns (k, gamma, alpha_high, alpha_low).
    """
    p_hat = np.asarray(p_hat, dtype=float)
    alpha_hat = np.asarray(alpha_hat, dtype=float)
    if p_hat.size != 3 or alpha_hat.size != 2:
        raise ValueError("the neurovascular map expects two orders and three parameters")
    b_hat = p_hat[2]
    if b_hat == 0:
        raise ValueError("gain estimate is zero; the elimination constant is undefined")
    gamma = 1.0 / b_hat
    k = p_hat[0] * gamma
    return k, gamma, float(alpha_hat[1]), float(alpha_hat[0])


@dataclass(frozen=True)
class AberrationDemo:
    """Three responses of D^0.5 y = u under different pre-start drives."""

    t: np.ndarray
    outputs: tuple[np.ndarray, np.ndarray, np.ndarray]

    def divergence(self, t_from: float = 5.0) -> float:
        """Normalized sup distance of the two precharged outputs past ``t_from``."""
        mask = self.t > t_from
        y1, y2 = self.outputs[1][mask], self.outputs[2][mask]
        return float(np.max(np.abs(y1 - y2)) / np.max(np.abs(y1)))


def aberration_demo(t_end: float, h: float) -> AberrationDemo:
    """Simulate the half-order system under three pre-start inputs.

    All three inputs equal one for t >= 5 but differ on (0, 5): zero, a
    ramp t, and t^4/4.  The responses are simulated from the common birth
    at t = 0, so any disagreement after t = 5 is carried purely by the
    operator's memory of the pre-start window.
    """
    if t_end <= 5.0:
        raise ValueError(f"demo horizon must exceed the start instant 5, got {t_end}")
    n = int(round(t_end / h)) + 1
    t = h * np.arange(n)
    laws = (
        np.where(t >= 5.0, 1.0, 0.0),
        np.where(t >= 5.0, 1.0, np.where(t > 0, t, 0.0)),
        np.where(t >= 5.0, 1.0, np.where(t > 0, 0.25 * t**4, 0.0)),
    )
    outputs = tuple(gl_solve(SampledSignal(0.0, h, u), 0.5, h).values for u in laws)
    return AberrationDemo(t=t, outputs=outputs)
