import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssolab.modalid import PronyError, dominant_mode, envelope_growth, matrix_pencil, prony_fit


def ringdown(t, *modes, offset=0.0):
    """Sum of damped cosines given as (f_hz, zeta, amplitude, phase)."""
    y = np.full_like(t, offset)
    for f, z, a, ph in modes:
        w = 2 * math.pi * f
        sigma = -z * w / math.sqrt(1 - z ** 2)
        y += a * np.exp(sigma * t) * np.cos(w * t + ph)
    return y


T = np.arange(0, 1.0 + 1e-9, 1e-3)
TWO_MODE = ((40.7, -0.0024, 1.0, 0.3), (1.2, 0.10, 0.8, -1.0))


def test_single_damped_cosine():
    y = np.exp(-0.5 * T) * np.cos(2 * math.pi * 40 * T)
    (m,) = prony_fit(T, y, order=2).modes
    assert m.f_hz == pytest.approx(40.0, rel=1e-6)
    assert -m.sigma == pytest.approx(0.5, rel=1e-6)
    assert m.zeta == pytest.approx(0.5 / math.hypot(0.5, 80 * math.pi), rel=1e-6)
    assert 100 * m.zeta == pytest.approx(0.199, abs=5e-4)


@pytest.mark.parametrize("fit", [prony_fit, matrix_pencil])
def test_two_mode_recovery(fit):
    est = fit(T, ringdown(T, *TWO_MODE), order=4)
    got = sorted(est.modes, key=lambda m: -m.f_hz)
    for m, (f, z, _, _) in zip(got, TWO_MODE):
        assert m.f_hz == pytest.approx(f, rel=1e-4)
        assert m.zeta == pytest.approx(z, rel=1e-4)


def test_dominant_mode_in_band():
    est = prony_fit(T, ringdown(T, *TWO_MODE), order=4)
    assert dominant_mode(est, (5, 55)).f_hz == pytest.approx(40.7, rel=1e-6)
    with pytest.raises(PronyError):
        dominant_mode(est, (60, 90))


@pytest.mark.parametrize("band", [(5, 41), (39, 55), (5, 55)])
def test_single_mode_whatever_band(band):
    est = prony_fit(T, ringdown(T, (40.0, 0.01, 1.0, 0.0)), order=2)
    assert dominant_mode(est, band).f_hz == pytest.approx(40.0, rel=1e-9)


def test_constant_signal():
    est = prony_fit(T, np.full_like(T, 3.2), order=8)
    assert [m for m in est.modes if m.f_hz > 0 and m.amplitude > 1e-9] == []


def test_offset_absorbed():
    est = prony_fit(T, ringdown(T, (40.0, 0.02, 0.01, 0.0), offset=60.0), order=2)
    assert dominant_mode(est).f_hz == pytest.approx(40.0, rel=1e-6)


def test_estimate_invariants():
    est = prony_fit(T, ringdown(T, *TWO_MODE, (17.0, 0.05, 0.3, 0.0)), order=8)
    amps = [m.amplitude for m in est.modes]
    assert amps == sorted(amps, reverse=True)
    assert est.residual >= 0
    for m in est.modes:
        assert m.zeta == pytest.approx(-m.sigma / math.hypot(m.sigma, 2 * math.pi * m.f_hz), abs=1e-15)


@pytest.mark.parametrize("kw, msg", [
    (dict(window=(0.5, 2.0)), "outside"),
    (dict(window=(0.0, 0.01), order=8), "samples"),
    (dict(order=0), "order"),
])
def test_errors(kw, msg):
    with pytest.raises(PronyError, match=msg):
        prony_fit(T, np.sin(2 * math.pi * 40 * T), **kw)


def test_non_uniform_samples():
    t = np.sort(np.random.default_rng(0).uniform(0, 1, 400))
    with pytest.raises(PronyError, match="uniform"):
        prony_fit(t, np.sin(t), order=2)


def test_rank_deficient():
    with pytest.raises(PronyError, match="rank"):
        # only the last sample moves, so every prediction row is constant
        prony_fit(T, (np.arange(T.size) == T.size - 1).astype(float), order=8)


@given(st.floats(20.0, 50.0), st.floats(-0.03, 0.05), st.floats(0.5, 6.0), st.floats(0.5, 3.0))
def test_exact_recovery_property(f, z, f2, a2):
    y = ringdown(T, (f, z, 1.0, 0.2), (f2, 0.1, a2, 1.0))
    est = prony_fit(T, y, order=4)
    got = sorted(est.modes, key=lambda m: -m.f_hz)[:2]
    for m, (fr, zr) in zip(got, ((f, z), (f2, 0.1))):
        w = 2 * math.pi * fr
        s = -zr * w / math.sqrt(1 - zr ** 2)
        assert abs(m.f_hz - fr) <= 1e-6 * fr
        assert abs(m.sigma - s) <= 1e-6 * max(abs(s), w)


@given(st.integers(0, 2 ** 31))
def test_noise_robustness(seed):
    r = np.random.default_rng(seed)
    y = ringdown(T, (40.7, 0.005, 1.0, r.uniform(0, 6)))
    noise = r.standard_normal(T.size)
    y = y + noise * np.sqrt(np.mean(y ** 2) / 1e6)  # 60 dB SNR
    m = dominant_mode(prony_fit(T, y, order=8))
    assert abs(m.f_hz - 40.7) <= 0.05
    assert abs(100 * (m.zeta - 0.005)) <= 0.1


@given(st.floats(1e-6, 1e6), st.floats(0.0, 0.4))
def test_scaling_and_shift_invariance(scale, start):
    y = ringdown(T, (33.0, 0.03, 1.0, 0.0))
    ref = dominant_mode(prony_fit(T, y, order=2))
    m = dominant_mode(prony_fit(T, scale * y, window=(start, 1.0), order=2))
    assert m.f_hz == pytest.approx(ref.f_hz, rel=1e-6)
    assert m.zeta == pytest.approx(ref.zeta, rel=1e-5, abs=1e-9)
    assert m.amplitude == pytest.approx(scale * ref.amplitude * math.exp(ref.sigma * T[T >= start - 1e-12][0]),
                                        rel=1e-5)


@pytest.mark.parametrize("z, sign", [(-0.01, 1), (0.02, -1)])
def test_envelope_sign(z, sign):
    t = np.arange(0, 2, 1e-3)
    y = 60 + ringdown(t, (40.0, z, 0.01, 0.0), (1.0, 0.2, 0.05, 0.0))
    slope = envelope_growth(t, y, (0.2, 1.8), band=(30, 55))
    assert np.sign(slope) == sign
    sigma = -z * 2 * math.pi * 40 / math.sqrt(1 - z * z)
    assert slope == pytest.approx(sigma, rel=0.05)


def test_to_dict_reports_percent():
    d = prony_fit(T, ringdown(T, (40.0, 0.01, 1.0, 0.0)), order=2).to_dict()
    assert d["modes"][0]["zeta_pct"] == pytest.approx(1.0, rel=1e-6)
    assert d["method"] == "prony" and d["window_s"] == [0.0, 1.0]
