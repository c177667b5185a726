# Baseline: attack the victim's supply current directly, with and without noise.
from dataclasses import replace

import numpy as np

from chipletsca import VictimParams, attack, generate_trace_set, key_rank

key = 0x2A
p = VictimParams()
print("HW=8 pulse peak: %.3e A" % p.pulse_peak(8))

# One trace per plaintext byte, 256 in total.
ts = generate_trace_set(key, p)
print(ts.samples.shape, ts.unit)

for kind in ("difference_of_means", "pearson_correlation"):
    r = attack(ts, kind)
    print(kind, "best guess 0x%02X, margin %.3f" % (r.best, r.margin))

# Gaussian noise relative to the largest pulse; correlation degrades gracefully.
for frac in (0.05, 0.1, 0.2, 0.5):
    noisy = generate_trace_set(key, replace(p, noise_sigma=frac * p.pulse_peak(8)), rng_seed=1)
    r = attack(noisy, "pearson_correlation")
    print("noise %4.2f x peak -> rank %3d, margin %.3f" % (frac, key_rank(r, key), r.margin))

# The top five hypotheses after the noisiest run.
top = r.sorted()[:5]
print(np.array(top))
