"""Desk-scale simulation of a cross-chiplet power side channel.

Victim supply-current traces are pushed through lumped capacitive or
inductive+capacitive coupling networks, digitized, reconstructed and
attacked with DPA.
"""

from .acquisition import AdcConfig, digitize, digitize_set
from .dpa import (HW_SBOX_OUT, KeyRanking, LeakageModel, attack, difference_of_means,
                  key_rank, pearson_correlation, predict_leakage)
from .reconstruct import (Window, apply_window, cumulative_integrate, finite_difference,
                          remove_offset)
from .scenario import Scenario, load_scenario, parse_scenario, run_scenario
from .traces import Trace, TraceFileError, TraceSet, read_trace_file, write_trace_file
from .victim import (VictimParams, generate_trace_set, hamming_weight, intermediate_value,
                     sbox_lookup, synthesize_trace)

__version__ = "0.1.0"
