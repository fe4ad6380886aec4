import math

import numpy as np
import pytest

from crutchlab.grf import (
    StanceCycle,
    normalize_stance,
    peak_loading_rate,
    stance_impulse,
    validate_stance,
)

BW = 700.0


def make_cycle(vertical, rate=1000.0, bw=BW, ap=None, ml=None):
    n = len(vertical)
    forces = np.zeros((n, 3))
    forces[:, 2] = vertical
    if ap is not None:
        forces[:, 0] = ap
    if ml is not None:
        forces[:, 1] = ml
    return StanceCycle(forces, rate, bw)


def half_sine(amplitude, duration, rate):
    t = np.arange(int(round(duration * rate))) / rate
    return amplitude * np.sin(np.pi * t / duration)


# ---------------------------------------------------------------- validation

def test_half_sine_stance_accepted():
    cycle = make_cycle(half_sine(1.0 * BW, 0.6, 1000.0))
    verdict = validate_stance(cycle)
    assert verdict.accepted
    assert verdict.reasons() == []


def test_short_stance_rejected_on_duration():
    cycle = make_cycle(half_sine(1.0 * BW, 0.3, 1000.0))
    verdict = validate_stance(cycle)
    assert not verdict.duration_ok
    assert "400 ms" in verdict.reasons()[0]


def test_weak_stance_rejected_on_peak():
    cycle = make_cycle(half_sine(0.2 * BW, 0.6, 1000.0))
    verdict = validate_stance(cycle)
    assert verdict.duration_ok and not verdict.peak_ok


def test_plateau_then_decay_rejected_on_rising_rule():
    n = 600
    v = np.concatenate([np.full(60, BW), BW * np.linspace(1.0, 0.0, n - 60)])
    verdict = validate_stance(make_cycle(v))
    assert verdict.duration_ok and verdict.peak_ok and not verdict.rising_ok


# ---------------------------------------------------------------- normalization

def test_constant_stance_normalizes_to_unit_bw():
    ns = normalize_stance(make_cycle(np.full(600, BW)))
    assert ns.forces_bw.shape == (101, 3)
    np.testing.assert_allclose(ns.forces_bw[:, 2], 1.0)
    np.testing.assert_allclose(ns.percent, np.linspace(0, 100, 101))


def test_linear_ramp_normalizes_to_percent_fractions():
    n = 600
    cycle = make_cycle(np.linspace(0.0, BW, n))
    ns = normalize_stance(cycle)
    np.testing.assert_allclose(ns.forces_bw[:, 2], np.arange(101) / 100.0, atol=1e-9)


def test_resampling_stability_of_half_sine():
    # same analytic curve over [0, T], sampled inclusively at two rates
    T = 0.6

    def sampled(n_samples, rate):
        t = np.linspace(0.0, T, n_samples)
        return make_cycle(BW * np.sin(np.pi * t / T), rate=rate)

    a = normalize_stance(sampled(600, 1000.0))
    b = normalize_stance(sampled(450, 750.0))
    assert np.abs(a.forces_bw[:, 2] - b.forces_bw[:, 2]).max() < 1e-3


def test_normalize_requires_two_samples():
    with pytest.raises(ValueError):
        normalize_stance(make_cycle(np.array([BW])))


# ---------------------------------------------------------------- loading rate

def test_linear_ramp_loading_rate_exact():
    v = np.concatenate([np.linspace(0.0, 350.0, 101), np.full(500, 350.0)])
    rates = peak_loading_rate(make_cycle(v))
    assert rates.vertical == pytest.approx(5.0, abs=1e-12)
    assert not rates.truncated


def test_constant_force_loading_rate_zero():
    rates = peak_loading_rate(make_cycle(np.full(600, BW)))
    assert rates.vertical == 0.0
    assert rates.ap == 0.0 and rates.ml == 0.0


def brute_force_peak(forces, rate, bw, window=0.200, time_bin=0.010):
    nbin = int(round(time_bin * rate))
    nwin = int(round(window * rate))
    limit = min(nwin, len(forces) - 1)
    best_signed, best_abs = -np.inf, -np.inf
    for i in range(0, limit - nbin + 1):
        slope = (forces[i + nbin] - forces[i]) * rate / nbin / bw
        best_signed = max(best_signed, slope)
        best_abs = max(best_abs, abs(slope))
    return best_signed, best_abs


def test_half_sine_peak_matches_brute_force_and_analytic():
    v = half_sine(BW, 0.6, 1000.0)
    cycle = make_cycle(v, ap=0.3 * v, ml=-0.1 * v)
    rates = peak_loading_rate(cycle)
    oracle_v, _ = brute_force_peak(v, 1000.0, BW)
    _, oracle_ap = brute_force_peak(0.3 * v, 1000.0, BW)
    _, oracle_ml = brute_force_peak(-0.1 * v, 1000.0, BW)
    assert rates.vertical == pytest.approx(oracle_v, abs=1e-12)
    assert rates.ap == pytest.approx(oracle_ap, abs=1e-12)
    assert rates.ml == pytest.approx(oracle_ml, abs=1e-12)
    # chord slope of the half-sine is largest from the onset
    b, T = 0.010, 0.6
    analytic = math.sin(math.pi * b / T) / b
    assert rates.vertical == pytest.approx(analytic, rel=1e-6)


def test_ap_ml_use_slope_magnitude():
    n = 600
    ap = np.concatenate([np.linspace(0.0, -200.0, 101), np.full(n - 101, -200.0)])
    rates = peak_loading_rate(make_cycle(np.full(n, BW), ap=ap))
    assert rates.ap == pytest.approx(2000.0 / BW, abs=1e-12)


def test_short_cycle_flagged_truncated():
    v = half_sine(BW, 0.15, 1000.0)
    rates = peak_loading_rate(make_cycle(v))
    assert rates.truncated
    assert np.isfinite(rates.vertical)


# ---------------------------------------------------------------- impulse

def test_constant_vertical_impulse_is_duration():
    n = 1000  # 1.0 s
    imp = stance_impulse(make_cycle(np.full(n, BW), rate=1000.0))
    # trapezoid over n samples spans (n-1)/rate seconds
    assert imp.vertical == pytest.approx((n - 1) / 1000.0, abs=1e-12)


def test_half_sine_impulse_matches_analytic():
    rate, T = 20_000.0, 0.6
    imp = stance_impulse(make_cycle(half_sine(BW, T, rate), rate=rate))
    assert imp.vertical == pytest.approx(2 * T / math.pi, abs=1e-6)


def test_full_sine_ap_braking_equals_propulsion():
    rate, T = 2000.0, 0.6
    t = np.linspace(0.0, T, int(T * rate) + 1)  # closes the full period
    ap = 100.0 * np.sin(2 * np.pi * t / T)  # positive then negative lobe
    imp = stance_impulse(make_cycle(np.full(t.size, BW), rate=rate, ap=ap))
    assert imp.ap_braking == pytest.approx(imp.ap_propulsive, rel=1e-9)
    assert imp.ap_braking > 0


def test_ml_impulse_uses_magnitude():
    rate = 1000.0
    ml = np.concatenate([np.full(300, -50.0), np.full(300, 50.0)])
    imp = stance_impulse(make_cycle(np.full(600, BW), rate=rate, ml=ml))
    direct = np.trapezoid(np.abs(ml), dx=1 / rate) / BW
    assert imp.ml == pytest.approx(direct, abs=1e-12)


def test_impulse_additivity():
    rng = np.random.default_rng(3)
    v = rng.uniform(0, 2 * BW, size=901)
    whole = stance_impulse(make_cycle(v))
    left = stance_impulse(make_cycle(v[:451]))
    right = stance_impulse(make_cycle(v[450:]))
    assert whole.vertical == pytest.approx(left.vertical + right.vertical, abs=1e-9)


def test_normalization_scale_invariance():
    v = half_sine(BW, 0.6, 1000.0)
    base = make_cycle(v, ap=0.2 * v, ml=0.05 * v)
    scaled = StanceCycle(base.forces * 3.0, base.sample_rate, BW * 3.0)
    for attr in ("vertical", "ap_braking", "ap_propulsive", "ml"):
        assert getattr(stance_impulse(base), attr) == pytest.approx(
            getattr(stance_impulse(scaled), attr), abs=1e-12)
    r1, r2 = peak_loading_rate(base), peak_loading_rate(scaled)
    assert r1.vertical == pytest.approx(r2.vertical, abs=1e-12)
    n1, n2 = normalize_stance(base), normalize_stance(scaled)
    np.testing.assert_allclose(n1.forces_bw, n2.forces_bw, atol=1e-12)
