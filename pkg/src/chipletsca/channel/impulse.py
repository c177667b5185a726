"""Externally computed port-to-port impulse responses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from ..traces import Trace, TraceSet
from .solver import ChannelOutput


@dataclass(frozen=True)
class ImpulseResponse:
    """Impulse response in 1/s (output per unit input per second)."""

    samples: np.ndarray
    sample_period: float

    def resampled(self, period: float) -> np.ndarray:
        if period == self.sample_period:
            return self.samples
        t_src = np.arange(self.samples.size) * self.sample_period
        t_dst = np.arange(0.0, t_src[-1] + 0.5 * period, period)
        return np.interp(t_dst, t_src, self.samples)


def import_impulse_response(samples, sample_period: float) -> ImpulseResponse:
    h = np.asarray(samples, dtype=np.float64).ravel()
    if h.size == 0:
        raise ValueError("impulse response is empty")
    if not np.all(np.isfinite(h)):
        raise ValueError("impulse response contains non-finite values")
    if not sample_period > 0:
        raise ValueError("sample_period must be positive")
    return ImpulseResponse(h, float(sample_period))


def load_impulse_response_csv(path) -> ImpulseResponse:
    """Read a two-column ``time_s, amplitude`` CSV (an optional header is skipped)."""
    with open(path) as f:
        first = f.readline()
    skip = 0 if _is_numeric_row(first) else 1
    data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    if data.shape[1] != 2 or data.shape[0] == 0:
        raise ValueError(f"{path}: expected two columns (time_s, amplitude)")
    t = data[:, 0]
    if t.size == 1:
        raise ValueError(f"{path}: need at least two samples to infer the sample period")
    steps = np.diff(t)
    period = float(steps.mean())
    if not period > 0 or np.max(np.abs(steps - period)) > 1e-6 * period:
        raise ValueError(f"{path}: time column must be uniformly increasing")
    return import_impulse_response(data[:, 1], period)


def _is_numeric_row(line: str) -> bool:
    try:
        [float(v) for v in line.split(",")]
    except ValueError:
        return False
    return True


def apply_impulse_response(ir: ImpulseResponse, excitation: Trace | TraceSet) -> ChannelOutput:
    h = ir.resampled(excitation.sample_period)
    x = np.atleast_2d(np.asarray(excitation.samples, dtype=np.float64))
    n = x.shape[1]
    y = fftconvolve(x, h[None, :], axes=1)[:, :n] * excitation.sample_period
    if isinstance(excitation, TraceSet):
        return ChannelOutput(excitation.with_samples(y, integrated=False))
    return ChannelOutput(excitation.with_samples(y[0], integrated=False))
