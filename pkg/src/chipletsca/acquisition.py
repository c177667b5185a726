"""Observer-side acquisition chain: front-end gain, input noise, ADC."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .traces import Trace, TraceSet

FULL_SCALE_HEADROOM = 1.2


@dataclass(frozen=True)
class AdcConfig:
    """ADC parameters.

    ``full_scale=None`` means "calibrate": :func:`digitize_set` sets it to
    1.2x the largest amplified input magnitude. ``sample_period=None`` keeps
    the input rate.
    """

    resolution_bits: int = 10
    full_scale: float | None = None
    sample_period: float | None = None
    gain: float = 1.0
    input_noise_sigma: float = 0.0

    def validate(self) -> None:
        if not 1 <= int(self.resolution_bits) <= 24:
            raise ValueError("resolution_bits must lie in [1, 24]")
        if self.full_scale is not None and not self.full_scale > 0:
            raise ValueError("full_scale must be positive")
        if self.sample_period is not None and not self.sample_period > 0:
            raise ValueError("sample_period must be positive")
        if not self.gain > 0:
            raise ValueError("gain must be positive")
        if not self.input_noise_sigma >= 0:
            raise ValueError("input_noise_sigma must be non-negative")

    @property
    def lsb(self) -> float:
        return 2.0 * self.full_scale / 2 ** int(self.resolution_bits)


def quantize(values, full_scale: float, bits: int) -> np.ndarray:
    """Clip to +/-full_scale and map to the centre of one of 2**bits equal bins."""
    lsb = 2.0 * full_scale / 2**bits
    half = 2 ** (bits - 1)
    codes = np.clip(np.floor(np.asarray(values, dtype=np.float64) / lsb), -half, half - 1)
    return (codes + 0.5) * lsb


def _decimation(a: AdcConfig, period: float) -> int:
    if a.sample_period is None:
        return 1
    ratio = a.sample_period / period
    factor = int(round(ratio))
    if factor < 1 or abs(ratio - factor) > 1e-6 * ratio:
        raise ValueError("ADC sample period must be an integer multiple of the trace period")
    return factor


def _convert(x: np.ndarray, a: AdcConfig, period: float, rng: np.random.Generator):
    x = a.gain * x
    if a.input_noise_sigma > 0:
        x = x + rng.normal(0.0, a.input_noise_sigma, x.shape)
    factor = _decimation(a, period)
    if factor > 1:
        # Boxcar anti-alias average over each window, then keep one sample per window.
        n = x.shape[-1] // factor
        if n == 0:
            raise ValueError("trace shorter than one decimation window")
        x = x[..., : n * factor].reshape(*x.shape[:-1], n, factor).mean(axis=-1)
    return quantize(x, a.full_scale, int(a.resolution_bits)), period * factor


def calibrate_full_scale(samples, gain: float = 1.0,
                         headroom: float = FULL_SCALE_HEADROOM) -> float:
    """Smallest power of two covering ``headroom`` times the peak input."""
    peak = float(np.max(np.abs(samples))) * gain
    if peak == 0:
        raise ValueError("cannot calibrate full scale on an all-zero signal")
    # A power-of-two range gives a dyadic LSB, so running sums of ADC output
    # are exact in floating point and integration can be undone losslessly.
    return float(2.0 ** np.ceil(np.log2(headroom * peak)))


def digitize(t: Trace, a: AdcConfig, rng_seed: int = 0) -> Trace:
    a.validate()
    if a.full_scale is None:
        a = replace(a, full_scale=calibrate_full_scale(t.samples, a.gain))
    out, period = _convert(t.samples, a, t.sample_period, np.random.default_rng(rng_seed))
    return Trace(out, period, t.plaintext, t.unit, t.integrated)


def digitize_set(ts: TraceSet, a: AdcConfig, rng_seed: int = 0) -> tuple[TraceSet, AdcConfig]:
    """Digitize every trace; returns the set and the config actually used."""
    a.validate()
    if a.full_scale is None:
        a = replace(a, full_scale=calibrate_full_scale(ts.samples, a.gain))
    out, period = _convert(ts.samples.astype(np.float64), a, ts.sample_period,
                           np.random.default_rng(rng_seed))
    return ts.with_samples(out, sample_period=period), a
