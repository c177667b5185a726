"""Lumped networks for the two probe types.

Both share the victim side: the victim current source sinks ``i_in`` from
node ``A`` (the Vdd terminal), which is fed from the DC pad ``P`` through the
supply line modeled as ``R_line`` in series with ``L1``.
"""

from __future__ import annotations

from dataclasses import replace

from .geometry import (ProbeGeometry, broadside_capacitance, line_inductance,
                       parallel_plate_capacitance)
from .netlist import GROUND, Netlist

RECEIVER_LOAD = 50.0
LINE_RESISTANCE = 0.5
K_MUTUAL = 0.3
SUPPLY_VOLTAGE = 1.2

DEFAULT_CAPACITIVE = ProbeGeometry("capacitive_plate")
DEFAULT_INDUCTIVE = ProbeGeometry("inductive_line")


def _supply_path(g: ProbeGeometry, line_resistance: float) -> Netlist:
    net = Netlist()
    net.current_source("Iin", "A", GROUND, "in")
    net.resistor("Rline", "A", "N1", line_resistance)
    net.inductor("L1", "N1", "P", line_inductance(g.line_length))
    net.dc_voltage_source("Vdd", "P", GROUND, SUPPLY_VOLTAGE)
    return net


def build_capacitive_channel(g: ProbeGeometry = DEFAULT_CAPACITIVE,
                             receiver_load: float = RECEIVER_LOAD,
                             line_resistance: float = LINE_RESISTANCE) -> Netlist:
    if g.probe_kind != "capacitive_plate":
        raise ValueError("capacitive channel needs a capacitive_plate probe")
    g.validate()
    if not receiver_load > 0:
        raise ValueError("receiver_load must be positive")
    net = _supply_path(g, line_resistance)
    net.capacitor("Ccouple", "A", "B",
                  parallel_plate_capacitance(g.plate_side, g.gap, g.gap_permittivity))
    net.resistor("Rload", "B", GROUND, receiver_load)
    net.ports = {"victim_vdd": ("A", GROUND), "receiver_load": ("B", GROUND),
                 "dc_pad": ("P", GROUND)}
    net.receiver = "Rload"
    net.validate()
    return net


def build_inductive_capacitive_channel(g: ProbeGeometry = DEFAULT_INDUCTIVE,
                                       receiver_load: float = RECEIVER_LOAD,
                                       k_mutual: float = K_MUTUAL,
                                       line_resistance: float = LINE_RESISTANCE,
                                       coupling_capacitance: float | None = None) -> Netlist:
    """Broadside probe line: mutual inductance plus one lumped coupling capacitor.

    ``coupling_capacitance`` overrides the geometric value; 0 removes the
    capacitor, and together with ``k_mutual=0`` fully decouples the probe.
    """
    if g.probe_kind != "inductive_line":
        raise ValueError("inductive+capacitive channel needs an inductive_line probe")
    g.validate()
    if not receiver_load > 0:
        raise ValueError("receiver_load must be positive")
    if not 0 <= k_mutual < 1:
        raise ValueError("k_mutual must lie in [0, 1)")
    if coupling_capacitance is None:
        coupling_capacitance = broadside_capacitance(g.line_length, g.line_width, g.gap,
                                                     g.gap_permittivity)
    if coupling_capacitance < 0:
        raise ValueError("coupling_capacitance must be non-negative")
    net = _supply_path(g, line_resistance)
    if coupling_capacitance > 0:
        net.capacitor("Ccouple", "A", "B", coupling_capacitance)
    net.inductor("L2", "B", "M", line_inductance(g.line_length))
    net.resistor("Rload", "M", GROUND, receiver_load)
    if k_mutual > 0:
        net.mutual("K12", "L1", "L2", k_mutual)
    net.ports = {"victim_vdd": ("A", GROUND), "receiver_load": ("M", GROUND),
                 "dc_pad": ("P", GROUND)}
    net.receiver = "Rload"
    net.validate()
    return net


def default_geometry(kind: str, **changes) -> ProbeGeometry:
    base = DEFAULT_CAPACITIVE if kind == "capacitive_plate" else DEFAULT_INDUCTIVE
    return replace(base, **changes)
