"""Trace conditioning: running-sum reconstruction, differencing, windows, offsets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .traces import Trace, TraceSet

OFFSET_MODES = ("none", "subtract_mean", "subtract_first")


@dataclass(frozen=True)
class Window:
    start_index: int
    end_index: int

    def check(self, length: int) -> None:
        if not 0 <= self.start_index < self.end_index <= length:
            raise ValueError(f"window [{self.start_index}, {self.end_index}) "
                             f"invalid for a trace of {length} samples")

    @classmethod
    def trailing(cls, length: int, start_fraction: float) -> "Window":
        """Window from ``start_fraction`` of the trace to its end."""
        if not 0 <= start_fraction < 1:
            raise ValueError("start_fraction must lie in [0, 1)")
        return cls(int(round(start_fraction * length)), length)


def cumulative_integrate(y: Trace | TraceSet):
    """Running sum along time: out[n] = out[n-1] + y[n], with out[-1] = 0."""
    s = np.cumsum(np.asarray(y.samples, dtype=np.float64), axis=-1)
    return y.with_samples(s, integrated=True)


def finite_difference(x: Trace | TraceSet):
    """Backward difference with the first sample kept: y[0] = x[0]."""
    if x.samples.shape[-1] < 2:
        raise ValueError("finite_difference needs at least 2 samples")
    d = np.diff(np.asarray(x.samples, dtype=np.float64), axis=-1, prepend=0.0)
    return x.with_samples(d, integrated=False)


def apply_window(t: Trace | TraceSet, w: Window):
    w.check(t.samples.shape[-1])
    return t.with_samples(t.samples[..., w.start_index:w.end_index])


def remove_offset(t: Trace | TraceSet, mode: str = "none"):
    if mode == "none":
        return t
    s = np.asarray(t.samples, dtype=np.float64)
    if mode == "subtract_mean":
        return t.with_samples(s - s.mean(axis=-1, keepdims=True))
    if mode == "subtract_first":
        return t.with_samples(s - s[..., :1])
    raise ValueError(f"unknown offset mode {mode!r}, expected one of {OFFSET_MODES}")
