"""Element values derived from probe geometry (engineering estimates)."""

from __future__ import annotations

from dataclasses import dataclass

from scipy.constants import epsilon_0

# Rule-of-thumb partial self-inductance of an on-chip supply line.
INDUCTANCE_PER_METER = 1.0e-9 / 1e-3


@dataclass(frozen=True)
class ProbeGeometry:
    probe_kind: str = "capacitive_plate"
    plate_side: float = 50e-6
    line_length: float = 1e-3
    line_width: float = 20e-6
    gap: float = 20e-6
    gap_permittivity: float = 1.0

    def validate(self) -> None:
        if self.probe_kind not in ("capacitive_plate", "inductive_line"):
            raise ValueError(f"unknown probe_kind {self.probe_kind!r}")
        for name in ("plate_side", "line_length", "line_width", "gap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.gap_permittivity >= 1:
            raise ValueError("gap_permittivity must be >= 1")


def parallel_plate_capacitance(side: float, gap: float, eps_r: float = 1.0) -> float:
    """Capacitance of a square ``side`` x ``side`` plate over a plane at ``gap``."""
    if not (side > 0 and gap > 0):
        raise ValueError("plate side and gap must be positive")
    if not eps_r >= 1:
        raise ValueError("relative permittivity must be >= 1")
    return epsilon_0 * eps_r * side * side / gap


def broadside_capacitance(length: float, width: float, gap: float, eps_r: float = 1.0) -> float:
    if not (length > 0 and width > 0 and gap > 0):
        raise ValueError("line dimensions and gap must be positive")
    if not eps_r >= 1:
        raise ValueError("relative permittivity must be >= 1")
    return epsilon_0 * eps_r * length * width / gap


def line_inductance(length: float) -> float:
    """Partial self-inductance estimate of 1 nH per mm of line."""
    if not length > 0:
        raise ValueError("line length must be positive")
    return length * INDUCTANCE_PER_METER
