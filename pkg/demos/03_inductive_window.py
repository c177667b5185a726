# Inductive + capacitive probe: attack trailing windows of the raw signal.
from dataclasses import replace

from chipletsca import (AdcConfig, VictimParams, Window, apply_window, attack, digitize_set,
                        generate_trace_set, key_rank)
from chipletsca.channel import build_inductive_capacitive_channel, transient_solve

key = 0x2A
p = VictimParams()
p = replace(p, noise_sigma=0.02 * p.pulse_peak(8))
victim = generate_trace_set(key, p, rng_seed=0)

out = transient_solve(build_inductive_capacitive_channel(), victim)
digitized, _ = digitize_set(out.i_leak, AdcConfig(10), rng_seed=1)
n = digitized.n_samples

print("full trace: rank", key_rank(attack(digitized), key))
for start in (0.5, 0.6, 0.7, 0.75, 0.8, 0.9):
    w = Window.trailing(n, start)
    r = attack(apply_window(digitized, w))
    print("window [%4d, %4d): rank %3d, margin %.3f"
          % (w.start_index, w.end_index, key_rank(r, key), r.margin))
