import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from chipletsca import AdcConfig, Trace, TraceSet, digitize, digitize_set
from chipletsca.acquisition import quantize

FINITE = st.floats(-3.0, 3.0, allow_nan=False)


def test_24_bit_error_bound():
    x = Trace(np.random.default_rng(0).uniform(-0.9, 0.9, 500), 1e-11)
    out = digitize(x, AdcConfig(24, full_scale=1.0))
    assert np.max(np.abs(out.samples - x.samples)) <= 1.0 / 2**23


def test_over_range_clips_to_top_code():
    a = AdcConfig(10, full_scale=1.0)
    out = digitize(Trace(np.full(16, 2.0), 1e-11), a)
    top = quantize(np.inf, 1.0, 10)
    assert np.all(out.samples == top)
    assert top == pytest.approx(1.0 - a.lsb / 2)


def test_zero_input_maps_to_code_nearest_zero():
    a = AdcConfig(8, full_scale=1.0)
    out = digitize(Trace(np.zeros(32), 1e-11), a)
    assert np.all(out.samples == a.lsb / 2)


@settings(max_examples=50)
@given(arrays(np.float64, 40, elements=FINITE), st.integers(1, 16), st.floats(0.1, 10.0))
def test_half_lsb_bound_after_clipping(x, bits, gain):
    a = AdcConfig(bits, full_scale=1.0, gain=gain)
    out = digitize(Trace(x, 1e-11), a).samples
    assert np.all(np.abs(out - np.clip(gain * x, -1.0, 1.0)) <= a.lsb / 2 * (1 + 1e-12))


@settings(max_examples=50)
@given(arrays(np.float64, 40, elements=FINITE), arrays(np.float64, 40, elements=st.floats(0, 1)),
       st.integers(1, 12))
def test_monotone(x, bump, bits):
    a = AdcConfig(bits, full_scale=1.5)
    lo = digitize(Trace(x, 1e-11), a).samples
    hi = digitize(Trace(x + bump, 1e-11), a).samples
    assert np.all(hi >= lo)


def test_noise_is_seeded():
    x = Trace(np.zeros(100), 1e-11)
    a = AdcConfig(12, full_scale=1.0, input_noise_sigma=0.1)
    assert np.array_equal(digitize(x, a, 5).samples, digitize(x, a, 5).samples)
    assert not np.array_equal(digitize(x, a, 5).samples, digitize(x, a, 6).samples)


def test_decimation_averages_each_window():
    x = Trace(np.repeat([0.1, 0.3, -0.2], 4) + np.tile([-0.05, 0.05, -0.05, 0.05], 3), 1e-11)
    out = digitize(x, AdcConfig(24, full_scale=1.0, sample_period=4e-11))
    assert out.sample_period == pytest.approx(4e-11)
    assert np.allclose(out.samples, [0.1, 0.3, -0.2], atol=1e-6)


def test_decimation_must_be_integer():
    with pytest.raises(ValueError):
        digitize(Trace(np.zeros(10), 1e-11), AdcConfig(8, 1.0, sample_period=2.5e-11))


def test_auto_full_scale_calibrates_on_whole_set():
    ts = TraceSet(np.array([[0.0, 1.0], [0.5, -2.0]]), [0, 1], 1e-11)
    out, used = digitize_set(ts, AdcConfig(12))
    assert used.full_scale == 4.0        # 1.2 x peak, rounded up to a power of two
    assert np.max(np.abs(out.samples)) <= 2.0 + used.lsb


def test_auto_calibrated_output_integrates_exactly():
    from chipletsca import cumulative_integrate, finite_difference
    rng = np.random.default_rng(3)
    ts = TraceSet(rng.normal(0, 1e-4, (8, 1024)), np.arange(8), 1e-11)
    out, _ = digitize_set(ts, AdcConfig(12))
    assert np.array_equal(finite_difference(cumulative_integrate(out)).samples, out.samples)


@pytest.mark.parametrize("kw", [dict(resolution_bits=0), dict(resolution_bits=25),
                                dict(full_scale=-1.0), dict(gain=0.0),
                                dict(input_noise_sigma=-1.0), dict(sample_period=0.0)])
def test_invalid_config_rejected(kw):
    with pytest.raises(ValueError):
        digitize(Trace(np.zeros(4), 1e-11), AdcConfig(**{"full_scale": 1.0, **kw}))
