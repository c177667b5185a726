from dataclasses import replace

import pytest

from chipletsca import VictimParams, generate_trace_set
from chipletsca.channel import (build_capacitive_channel, build_inductive_capacitive_channel,
                                transient_solve)

KEY = 0x2A
# Victim noise used by the coupled-channel scenarios, relative to the HW=8 pulse peak.
CHANNEL_NOISE_FRACTION = 0.02


@pytest.fixture(scope="session")
def params():
    return VictimParams()


@pytest.fixture(scope="session")
def clean_set(params):
    return generate_trace_set(KEY, params)


@pytest.fixture(scope="session")
def noisy_channel_set(params):
    p = replace(params, noise_sigma=CHANNEL_NOISE_FRACTION * params.pulse_peak(8))
    return generate_trace_set(KEY, p, rng_seed=0)


@pytest.fixture(scope="session")
def capacitive_clean(clean_set):
    return transient_solve(build_capacitive_channel(), clean_set, record_nodes=True)


@pytest.fixture(scope="session")
def capacitive_noisy(noisy_channel_set):
    return transient_solve(build_capacitive_channel(), noisy_channel_set)


@pytest.fixture(scope="session")
def inductive_noisy(noisy_channel_set):
    return transient_solve(build_inductive_capacitive_channel(), noisy_channel_set)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
