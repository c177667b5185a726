# Capacitive probe: the coupled current looks like a derivative of the
# victim current, so integrating the digitized trace restores the leakage.
from dataclasses import replace

from chipletsca import (AdcConfig, VictimParams, attack, cumulative_integrate, digitize_set,
                        generate_trace_set, key_rank)
from chipletsca.channel import build_capacitive_channel, transient_solve

key = 0x2A
p = VictimParams()
p = replace(p, noise_sigma=0.02 * p.pulse_peak(8))
victim = generate_trace_set(key, p, rng_seed=0)

net = build_capacitive_channel()
print(net.to_text())

out = transient_solve(net, victim)
print("max KCL residual %.1e" % out.max_kcl_residual)

digitized, adc = digitize_set(out.i_leak, AdcConfig(10), rng_seed=1)
print("ADC full scale %.3e A, LSB %.3e A" % (adc.full_scale, adc.lsb))

raw = attack(digitized)
integ = attack(cumulative_integrate(digitized))
print("raw:        rank %d, margin %.3f" % (key_rank(raw, key), raw.margin))
print("integrated: rank %d, margin %.3f" % (key_rank(integ, key), integ.margin))
