from .builders import (build_capacitive_channel, build_inductive_capacitive_channel,
                       default_geometry)
from .geometry import (ProbeGeometry, broadside_capacitance, line_inductance,
                       parallel_plate_capacitance)
from .impulse import (ImpulseResponse, apply_impulse_response, import_impulse_response,
                      load_impulse_response_csv)
from .netlist import GROUND, Element, Netlist, NetlistError
from .solver import (ChannelOutput, SingularCircuitError, SolverInstabilityError,
                     transient_solve)

__all__ = [
    "ProbeGeometry", "parallel_plate_capacitance", "broadside_capacitance", "line_inductance",
    "Netlist", "Element", "NetlistError", "GROUND",
    "build_capacitive_channel", "build_inductive_capacitive_channel", "default_geometry",
    "transient_solve", "ChannelOutput", "SingularCircuitError", "SolverInstabilityError",
    "ImpulseResponse", "import_impulse_response", "apply_impulse_response",
    "load_impulse_response_csv",
]
