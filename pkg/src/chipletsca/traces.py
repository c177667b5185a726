"""Trace containers and the binary trace file format.

On disk a trace set is stored as (little-endian)::

    magic "CCSC" | version u16 | unit u8 | reserved u8 |
    n_traces u32 | n_samples u32 | sample_period f64 |
    n_traces x (plaintext u8, n_samples x f32)

Sample storage is float32 everywhere a TraceSet is involved, so a
write/read round trip is bit-exact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

MAGIC = b"CCSC"
FORMAT_VERSION = 1
UNITS = ("amperes", "volts", "dimensionless")

_HEADER = struct.Struct("<4sHBBIId")


class TraceFileError(ValueError):
    """Raised when a trace file cannot be parsed."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


def _check_unit(unit: str) -> str:
    if unit not in UNITS:
        raise ValueError(f"unknown unit {unit!r}, expected one of {UNITS}")
    return unit


@dataclass(frozen=True, eq=False)
class Trace:
    """A uniformly sampled waveform for one execution.

    ``integrated`` marks traces produced by running-sum reconstruction;
    their amplitude is in ``unit`` times samples.
    """

    samples: np.ndarray
    sample_period: float
    plaintext: int = 0
    unit: str = "amperes"
    integrated: bool = False

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("trace samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise ValueError("trace samples must be finite")
        if not self.sample_period > 0:
            raise ValueError("sample_period must be positive")
        if not 0 <= int(self.plaintext) <= 255:
            raise ValueError("plaintext must be a byte")
        _check_unit(self.unit)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "plaintext", int(self.plaintext))

    def __len__(self):
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) * self.sample_period

    def with_samples(self, samples, **changes) -> "Trace":
        return replace(self, samples=samples, **changes)


@dataclass(frozen=True, eq=False)
class TraceSet:
    """Rectangular collection of traces sharing length and sample period.

    ``samples`` has shape ``(n_traces, n_samples)`` and is stored as float32.
    ``true_key`` is only known for simulated fixtures.
    """

    samples: np.ndarray
    plaintexts: np.ndarray
    sample_period: float
    unit: str = "amperes"
    true_key: int | None = None
    integrated: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 2 or samples.shape[0] == 0 or samples.shape[1] == 0:
            raise ValueError("TraceSet samples must be a non-empty 2-D array")
        samples = np.ascontiguousarray(samples, dtype=np.float32)
        if not np.all(np.isfinite(samples)):
            raise ValueError("TraceSet samples must be finite")
        plaintexts = np.asarray(self.plaintexts)
        if plaintexts.shape != (samples.shape[0],):
            raise ValueError("need exactly one plaintext per trace")
        if np.any((plaintexts < 0) | (plaintexts > 255)):
            raise ValueError("plaintexts must be bytes")
        if not self.sample_period > 0:
            raise ValueError("sample_period must be positive")
        _check_unit(self.unit)
        if self.true_key is not None and not 0 <= self.true_key <= 255:
            raise ValueError("true_key must be a byte")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "plaintexts", plaintexts.astype(np.uint8))

    @classmethod
    def from_traces(cls, traces, true_key=None) -> "TraceSet":
        traces = list(traces)
        if not traces:
            raise ValueError("cannot build a TraceSet from zero traces")
        first = traces[0]
        for t in traces[1:]:
            if len(t) != len(first) or t.sample_period != first.sample_period:
                raise ValueError("all traces must share length and sample period")
            if t.unit != first.unit:
                raise ValueError("all traces must share the same unit")
        return cls(
            samples=np.stack([t.samples for t in traces]),
            plaintexts=np.array([t.plaintext for t in traces]),
            sample_period=first.sample_period,
            unit=first.unit,
            true_key=true_key,
            integrated=first.integrated,
        )

    def __len__(self):
        return self.samples.shape[0]

    def __getitem__(self, i) -> Trace:
        return Trace(self.samples[i], self.sample_period, int(self.plaintexts[i]),
                     self.unit, self.integrated)

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    def with_samples(self, samples, **changes) -> "TraceSet":
        return replace(self, samples=samples, **changes)

    def equals(self, other: "TraceSet") -> bool:
        """Bit-exact comparison of samples, plaintexts and time base."""
        return (
            self.samples.shape == other.samples.shape
            and self.sample_period == other.sample_period
            and self.unit == other.unit
            and np.array_equal(self.plaintexts, other.plaintexts)
            and self.samples.tobytes() == other.samples.tobytes()
        )


def write_trace_file(ts: TraceSet, path) -> None:
    n, m = ts.samples.shape
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, UNITS.index(ts.unit), 0, n, m,
                          float(ts.sample_period))
    rows = np.empty(n, dtype=[("pt", "u1"), ("s", "<f4", (m,))])
    rows["pt"] = ts.plaintexts
    rows["s"] = ts.samples
    with open(path, "wb") as f:
        f.write(header)
        f.write(rows.tobytes())


def read_trace_file(path) -> TraceSet:
    """Parse a trace file.

    The header is validated completely before any sample storage is
    allocated; every failure reports the byte offset where parsing stopped.
    """
    data = Path(path).read_bytes()
    if len(data) < 4:
        raise TraceFileError(f"file too short for magic: expected 4 bytes, "
                             f"{len(data)} available", len(data))
    if data[:4] != MAGIC:
        raise TraceFileError(f"bad magic {data[:4]!r}, expected {MAGIC!r}", 0)
    if len(data) < _HEADER.size:
        raise TraceFileError(f"truncated header: expected {_HEADER.size} bytes, "
                             f"{len(data)} available", len(data))
    _, version, unit, reserved, n, m, period = _HEADER.unpack_from(data)
    if version != FORMAT_VERSION:
        raise TraceFileError(f"unsupported format version {version}", 4)
    if unit >= len(UNITS):
        raise TraceFileError(f"unknown unit tag {unit}", 6)
    if reserved != 0:
        raise TraceFileError(f"reserved byte must be 0, got {reserved}", 7)
    if n == 0 or m == 0:
        raise TraceFileError(f"empty trace set ({n} traces x {m} samples)", 8)
    if not (np.isfinite(period) and period > 0):
        raise TraceFileError(f"invalid sample period {period!r}", 16)
    expected = _HEADER.size + n * (1 + 4 * m)
    if len(data) != expected:
        raise TraceFileError(
            f"payload length mismatch: expected {expected} bytes, "
            f"{len(data)} available", min(len(data), expected))
    rows = np.frombuffer(data, dtype=[("pt", "u1"), ("s", "<f4", (m,))],
                         count=n, offset=_HEADER.size)
    bad = ~np.all(np.isfinite(rows["s"]), axis=1)
    if bad.any():
        i = int(np.argmax(bad))
        raise TraceFileError(f"non-finite sample in trace {i}",
                             _HEADER.size + i * (1 + 4 * m))
    return TraceSet(
        samples=rows["s"].astype(np.float32),
        plaintexts=rows["pt"].copy(),
        sample_period=period,
        unit=UNITS[unit],
    )
