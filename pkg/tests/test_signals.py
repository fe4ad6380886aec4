import numpy as np
import pytest

from crutchlab.grf import ForceSeries, detect_crutch_strikes, lowpass_filter


def vertical_series(v, rate=1000.0):
    samples = np.zeros((len(v), 3))
    samples[:, 2] = v
    return ForceSeries(samples, rate)


# ---------------------------------------------------------------- detection

def test_constant_zero_has_no_events():
    assert detect_crutch_strikes(vertical_series(np.zeros(500))) == []


def test_square_pulse_detected_with_exact_onset():
    v = np.zeros(400)
    v[100:150] = 30.0  # 50 ms at 1000 Hz
    events = detect_crutch_strikes(vertical_series(v))
    assert len(events) == 1
    assert events[0].onset == 100
    assert events[0].offset == 150


def test_pulse_below_maintenance_window_ignored():
    v = np.zeros(400)
    v[100:105] = 30.0  # 5 ms < 10 ms
    assert detect_crutch_strikes(vertical_series(v)) == []


def test_exact_ten_ms_pulse_kept():
    v = np.zeros(400)
    v[100:110] = 30.0
    events = detect_crutch_strikes(vertical_series(v))
    assert [(e.onset, e.offset) for e in events] == [(100, 110)]


def test_short_dip_does_not_split_a_stance():
    v = np.zeros(600)
    v[100:400] = 50.0
    v[200:205] = 5.0  # 5 ms dip
    events = detect_crutch_strikes(vertical_series(v))
    assert [(e.onset, e.offset) for e in events] == [(100, 400)]


def test_long_dip_splits_the_stance():
    v = np.zeros(600)
    v[100:400] = 50.0
    v[200:230] = 5.0  # 30 ms dip
    events = detect_crutch_strikes(vertical_series(v))
    assert [(e.onset, e.offset) for e in events] == [(100, 200), (230, 400)]


def test_empty_series_yields_empty_list():
    assert detect_crutch_strikes(vertical_series(np.zeros(0))) == []


def test_detection_mirrors_under_time_reversal():
    v = np.zeros(500)
    v[50:120] = 40.0
    v[300:460] = 25.0
    fwd = detect_crutch_strikes(vertical_series(v))
    rev = detect_crutch_strikes(vertical_series(v[::-1].copy()))
    n = len(v)
    mirrored = sorted((n - e.offset, n - e.onset) for e in fwd)
    assert [(e.onset, e.offset) for e in rev] == mirrored


def test_threshold_is_inclusive():
    v = np.zeros(100)
    v[10:40] = 20.0
    events = detect_crutch_strikes(vertical_series(v), threshold=20.0)
    assert len(events) == 1


# ---------------------------------------------------------------- filtering

def test_dc_gain_is_one():
    series = vertical_series(np.full(2000, 100.0))
    out = lowpass_filter(series)
    np.testing.assert_allclose(out.vertical, 100.0, atol=1e-9)


def test_passband_sinusoid_preserved():
    rate, freq, amp = 1000.0, 5.0, 80.0
    t = np.arange(3000) / rate
    series = vertical_series(amp * np.sin(2 * np.pi * freq * t), rate)
    out = lowpass_filter(series, order=4, cutoff_hz=50.0)
    interior = out.vertical[1000:2000]
    assert abs(interior.max() - amp) / amp < 0.01


def test_stopband_sinusoid_attenuated_40_db():
    rate, freq, amp = 1000.0, 400.0, 80.0
    t = np.arange(3000) / rate
    series = vertical_series(amp * np.sin(2 * np.pi * freq * t), rate)
    out = lowpass_filter(series, order=4, cutoff_hz=50.0)
    interior = np.abs(out.vertical[1000:2000]).max()
    assert interior < amp * 10 ** (-40 / 20)


def test_cutoff_at_or_above_nyquist_rejected():
    series = vertical_series(np.zeros(100), rate=1000.0)
    with pytest.raises(ValueError, match="Nyquist"):
        lowpass_filter(series, cutoff_hz=500.0)


def test_filter_applies_to_all_axes():
    rng = np.random.default_rng(7)
    samples = rng.normal(size=(2000, 3)) * 50 + 100
    out = lowpass_filter(ForceSeries(samples, 1000.0))
    assert np.abs(out.samples.mean(axis=0) - samples.mean(axis=0)).max() < 2.0
    assert out.samples.std(axis=0).max() < samples.std(axis=0).min()


# ---------------------------------------------------------------- types

def test_force_series_validation():
    with pytest.raises(ValueError):
        ForceSeries(np.zeros((10, 2)))
    with pytest.raises(ValueError):
        ForceSeries(np.zeros((10, 3)), sample_rate=0.0)
    bad = np.zeros((5, 3))
    bad[2, 2] = np.nan
    with pytest.raises(ValueError):
        ForceSeries(bad)
