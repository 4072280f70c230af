"""Percent relative error metrics used in every report."""

from __future__ import annotations

import numpy as np

from .signalkit import SampledSignal

__all__ = ["relative_error_param", "relative_error_signal"]


def relative_error_param(true_value: float, estimate: float) -> float:
    """|est - true| / |true| in percent; the reference must be nonzero."""
    if true_value == 0:
        raise ValueError("relative error is undefined for a zero reference value")
    return 100.0 * abs(estimate - true_value) / abs(true_value)


def _values(signal) -> np.ndarray:
    if isinstance(signal, SampledSignal):
        return signal.values
    return np.asarray(signal, dtype=float)


def relative_error_signal(true_signal, estimate) -> float:
    """||est - true||_2 / ||true||_2 in percent."""
    ref = _values(true_signal)
    est = _values(estimate)
    if ref.shape != est.shape:
        raise ValueError(f"signals differ in length: {ref.shape} vs {est.shape}")
    ref_norm = float(np.linalg.norm(ref))
    if ref_norm == 0:
        raise ValueError("relative error is undefined for a zero-norm reference signal")
    return 100.0 * float(np.linalg.norm(est - ref)) / ref_norm
