"""Behavioral supply-current model of the XOR + AES S-box datapath.

Each execution precharges to zero and then charges the load of every S-box
output bit that settles to 1, so the charge drawn from the supply is
``HW(SBox(x ^ k)) * C_bit * Vdd``. The charge is delivered as a normalized
double-exponential pulse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .traces import Trace, TraceSet

# fmt: off
SBOX = np.array([
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
], dtype=np.uint8)
# fmt: on

HW = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


def sbox_lookup(b):
    """AES forward S-box. Accepts a byte or an integer array."""
    return SBOX[np.asarray(b, dtype=np.int64) & 0xFF] if np.ndim(b) else int(SBOX[b & 0xFF])


def intermediate_value(x, k):
    return sbox_lookup(np.bitwise_xor(x, k))


def hamming_weight(b):
    return HW[np.asarray(b, dtype=np.int64) & 0xFF] if np.ndim(b) else int(HW[b & 0xFF])


@dataclass(frozen=True)
class VictimParams:
    supply_voltage: float = 1.2
    load_capacitance_per_bit: float = 5e-15
    pulse_rise_tau: float = 50e-12
    pulse_fall_tau: float = 500e-12
    transition_time: float = 6e-9
    baseline_current: float = 0.0
    noise_sigma: float = 0.0
    sample_period: float = 10e-12
    trace_length: int = 1024

    def validate(self) -> None:
        if not self.supply_voltage > 0:
            raise ValueError("supply_voltage must be positive")
        if not self.load_capacitance_per_bit > 0:
            raise ValueError("load_capacitance_per_bit must be positive")
        if not self.pulse_fall_tau > self.pulse_rise_tau > 0:
            raise ValueError("need pulse_fall_tau > pulse_rise_tau > 0")
        if not self.sample_period > 0:
            raise ValueError("sample_period must be positive")
        if int(self.trace_length) < 1:
            raise ValueError("trace_length must be at least 1")
        if not 0 < self.transition_time < self.trace_length * self.sample_period:
            raise ValueError("transition_time must lie inside the trace")
        if not self.noise_sigma >= 0:
            raise ValueError("noise_sigma must be non-negative")

    @property
    def charge_per_bit(self) -> float:
        return self.load_capacitance_per_bit * self.supply_voltage

    def pulse_peak(self, hw: int = 8) -> float:
        """Peak current of the charging pulse for an intermediate of weight ``hw``."""
        tr, tf = self.pulse_rise_tau, self.pulse_fall_tau
        t_peak = np.log(tf / tr) * tr * tf / (tf - tr)
        shape = (np.exp(-t_peak / tf) - np.exp(-t_peak / tr)) / (tf - tr)
        return float(hw * self.charge_per_bit * shape)


def unit_pulse(p: VictimParams) -> np.ndarray:
    """Sampled pulse carrying 1 C of charge, starting at ``transition_time``."""
    t = np.arange(p.trace_length) * p.sample_period - p.transition_time
    tr, tf = p.pulse_rise_tau, p.pulse_fall_tau
    out = np.zeros(p.trace_length)
    on = t >= 0
    out[on] = (np.exp(-t[on] / tf) - np.exp(-t[on] / tr)) / (tf - tr)
    return out


def _noise_rng(rng_seed: int, x: int) -> np.random.Generator:
    # Per-plaintext streams keep traces independent of generation order.
    return np.random.default_rng([int(rng_seed), int(x)])


def synthesize_trace(x: int, k: int, p: VictimParams, rng_seed: int = 0) -> Trace:
    p.validate()
    charge = hamming_weight(intermediate_value(x, k)) * p.charge_per_bit
    samples = p.baseline_current + charge * unit_pulse(p)
    if p.noise_sigma > 0:
        samples = samples + _noise_rng(rng_seed, x).normal(0.0, p.noise_sigma, p.trace_length)
    return Trace(samples, p.sample_period, plaintext=x, unit="amperes")


def generate_trace_set(k: int, p: VictimParams, rng_seed: int = 0) -> TraceSet:
    """One trace per plaintext 0x00..0xFF, in ascending order."""
    p.validate()
    xs = np.arange(256)
    charges = hamming_weight(intermediate_value(xs, k)) * p.charge_per_bit
    samples = p.baseline_current + charges[:, None] * unit_pulse(p)[None, :]
    if p.noise_sigma > 0:
        noise = np.stack([_noise_rng(rng_seed, x).normal(0.0, p.noise_sigma, p.trace_length)
                          for x in xs])
        samples = samples + noise
    return TraceSet(samples, xs, p.sample_period, unit="amperes", true_key=k)
