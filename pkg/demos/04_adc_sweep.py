# ADC resolution sweep on the capacitive channel, driven through a scenario.
from dataclasses import replace
import tempfile

from chipletsca import AdcConfig, Scenario, VictimParams, run_scenario
from chipletsca.scenario import format_scenario

p = VictimParams()
p = replace(p, noise_sigma=0.02 * p.pulse_peak(8))
base = Scenario(channel="capacitive", victim=p, reconstruction="integrate", seeds=(0,))
print(format_scenario(base))

with tempfile.TemporaryDirectory() as d:
    for bits in (4, 6, 8, 10, 12):
        s = replace(base, adc=AdcConfig(bits))
        summary = run_scenario(s, out_dir=f"{d}/bits{bits}")
        print("%2d bits: rank %3d, margin %.3f (%.1f s)"
              % (bits, summary.ranks[0], summary.margins[0], summary.runtime_s))
