import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssolab.phasor import (FrameAngle, PerUnitBase, SpacePhasor, frame_rotate, from_space_phasor,
                           inverse_park_matrix, park_matrix, to_space_phasor)

angles = st.floats(-20.0, 20.0, allow_nan=False)
vals = st.floats(-10.0, 10.0, allow_nan=False)
BALANCED = np.array([1.0, -0.5, -0.5])


@pytest.mark.parametrize("rho, expected", [(0.0, (1.0, 0.0)), (math.pi / 2, (0.0, -1.0))])
def test_park_on_balanced_set(rho, expected):
    dq0 = park_matrix(rho) @ BALANCED
    np.testing.assert_allclose(dq0, [*expected, 0.0], atol=1e-15)


@given(angles)
def test_park_of_zero_is_zero(rho):
    assert np.all(park_matrix(rho) @ np.zeros(3) == 0.0)


def test_park_scaling_convention():
    P = park_matrix(0.3)
    np.testing.assert_allclose(P @ inverse_park_matrix(0.3), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(P @ P.T, np.diag([2 / 3, 2 / 3, 1 / 3]), atol=1e-15)


def _abc(t, w0=2 * math.pi * 60, amp=1.0):
    th = w0 * t
    return amp * np.array([math.cos(th), math.cos(th - 2 * math.pi / 3), math.cos(th + 2 * math.pi / 3)])


@pytest.mark.parametrize("t", np.linspace(0, 0.05, 11))
def test_synchronous_frame(t):
    w0 = 2 * math.pi * 60
    p = to_space_phasor(_abc(t), w0 * t)
    assert p.d == pytest.approx(1.0, abs=1e-12) and p.q == pytest.approx(0.0, abs=1e-12)
    p = to_space_phasor(_abc(t), w0 * t - math.pi / 2)
    assert p.d == pytest.approx(0.0, abs=1e-12) and p.q == pytest.approx(1.0, abs=1e-12)


@given(st.floats(0, 1, allow_nan=False), st.floats(0.01, 100))
def test_linearity(t, k):
    a = to_space_phasor(_abc(t), 0.7)
    b = to_space_phasor(k * _abc(t), 0.7)
    assert b.d == pytest.approx(k * a.d, abs=1e-9) and b.q == pytest.approx(k * a.q, abs=1e-9)


@given(vals, vals, angles)
def test_round_trip_zero_sequence_free(a, b, rho):
    abc = np.array([a, b, -a - b])
    back = from_space_phasor(to_space_phasor(abc, rho), rho)
    np.testing.assert_allclose(back, abc, atol=1e-12 * max(1.0, abs(a), abs(b)))


@given(vals, vals, vals, angles)
def test_round_trip_with_zero_sequence(a, b, c, rho):
    abc = np.array([a, b, c])
    dq0 = park_matrix(rho) @ abc
    back = from_space_phasor(SpacePhasor(dq0[0], dq0[1]), rho, dq0[2])
    np.testing.assert_allclose(back, abc, atol=1e-12 * max(1.0, np.abs(abc).max()))


@pytest.mark.parametrize("p, dtheta, expected", [
    ((1.0, 0.0), math.pi / 2, (0.0, -1.0)),
    ((0.3, 0.4), 0.0, (0.3, 0.4)),
])
def test_frame_rotate_examples(p, dtheta, expected):
    r = frame_rotate(SpacePhasor(*p), dtheta)
    assert (r.d, r.q) == pytest.approx(expected, abs=1e-15)


@given(vals, vals, angles)
def test_rotation_inverse_and_magnitude(d, q, th):
    p = SpacePhasor(d, q)
    r = frame_rotate(p, th)
    assert abs(r) == pytest.approx(abs(p), rel=1e-12, abs=1e-12)
    back = frame_rotate(r, -th)
    assert back.d == pytest.approx(d, abs=1e-12) and back.q == pytest.approx(q, abs=1e-12)


@given(angles, angles)
def test_rotations_compose(a, b):
    p = SpacePhasor(0.8, -0.6)
    r1 = frame_rotate(frame_rotate(p, a), b)
    r2 = frame_rotate(p, a + b)
    assert r1.complex == pytest.approx(r2.complex, abs=1e-12)


@given(vals, vals, angles, angles)
def test_magnitude_independent_of_frame(a, b, r1, r2):
    abc = np.array([a, b, -a - b])
    assert abs(to_space_phasor(abc, r1)) == pytest.approx(abs(to_space_phasor(abc, r2)), rel=1e-9, abs=1e-12)


def test_frame_angle_advance_and_finiteness():
    f = FrameAngle(0.0, 2 * math.pi * 60).advance(1.0)
    assert f.rho == pytest.approx(2 * math.pi * 60)  # unwrapped
    with pytest.raises(ValueError):
        FrameAngle(math.nan)


def test_per_unit_base():
    b = PerUnitBase(100.0, 230.0, 60.0)
    assert b.z_base == pytest.approx(529.0)
    assert b.omega_base == pytest.approx(2 * math.pi * 60)
    assert b.rebase(900.0) == pytest.approx(100 / 900)
    with pytest.raises(ValueError):
        PerUnitBase(0.0)
