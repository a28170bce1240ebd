import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from ssolab.smallsignal.grouping import classify_grouping
from ssolab.smallsignal.linear import CallableModel, LinearModel, linearize, pade_delay
from ssolab.smallsignal.modes import (eig_modes, full_spectrum, mode_shape, participation, peak_prominences_db,
                                      sigma_max_response, sso_modes)
from ssolab.smallsignal.sweep import delay_sweep

from conftest import case, linear, power_flow


def lin_of(A, B=None, C=None, D=None, states=None):
    A = np.atleast_2d(np.asarray(A, dtype=float)) if np.size(A) else np.zeros((0, 0))
    n = A.shape[0]
    B = np.zeros((n, 1)) if B is None else np.asarray(B, dtype=float).reshape(n, -1)
    C = np.zeros((1, n)) if C is None else np.asarray(C, dtype=float).reshape(-1, n)
    D = np.zeros((C.shape[0], B.shape[1])) if D is None else np.atleast_2d(D)
    return LinearModel(A, B, C, D, states or [f"x{i}" for i in range(n)], [f"u{j}" for j in range(B.shape[1])],
                       [f"y{j}" for j in range(C.shape[0])])


def pair(f, zeta):
    """Real 2x2 matrix with eigenvalues sigma ± j 2πf and damping ratio zeta."""
    w = 2 * math.pi * f
    sigma = -zeta * w / math.sqrt(1 - zeta ** 2)
    return np.array([[sigma, w], [-w, sigma]])


# linearization


def test_linear_round_trip(rng):
    M = rng.standard_normal((4, 4))
    N = rng.standard_normal((4, 2))
    lin = linearize(CallableModel(lambda x, u: M @ x + N @ u, 4, 2), x0=np.zeros(4))
    np.testing.assert_allclose(lin.A, M, atol=1e-8)
    np.testing.assert_allclose(lin.B, N, atol=1e-8)


def test_scalar_square():
    lin = linearize(CallableModel(lambda x, u: x ** 2, 1), x0=[3.0], check_equilibrium=False)
    assert lin.A[0, 0] == pytest.approx(6.0, abs=1e-6)


def test_equilibrium_is_enforced():
    from ssolab.smallsignal.linear import EquilibriumError
    with pytest.raises(EquilibriumError):
        linearize(CallableModel(lambda x, u: x + 1.0, 1), x0=[0.0])


def test_case4_delay_states_and_sso_pair():
    lin = linear(4, "SPC", 0.002)
    assert lin.n == lin.n_base + 2 * 4
    assert sum(s.endswith(".pade0") for s in lin.states) == 4
    assert any(35 <= m.f_hz <= 45 for m in sso_modes(lin))


# delay approximation


def test_zero_delay_is_identity():
    blk = pade_delay(0.0, 2)
    assert blk.n == 0 and blk.D[0, 0] == 1.0


def test_negative_delay_rejected():
    with pytest.raises(ValueError):
        pade_delay(-1e-3)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_unity_dc_gain(order):
    assert pade_delay(0.004, order).response(0.0)[()] == pytest.approx(1.0, abs=1e-12)


def test_phase_at_40hz_for_2ms():
    w = 2 * math.pi * 40
    ph = cmath.phase(pade_delay(0.002, 2).response(w)[()])
    assert ph == pytest.approx(-w * 0.002, rel=2e-3)


@pytest.mark.parametrize("order", [1, 2, 3])
@given(st.floats(1e-4, 0.05), st.floats(0.0, 1e4))
def test_all_pass(order, tau, w):
    assert abs(pade_delay(tau, order).response(w)[()]) == pytest.approx(1.0, abs=1e-12)


@given(st.floats(1e-4, 0.01), st.floats(0.0, 1.0))
def test_second_order_phase_within_a_degree(tau, wt):
    ph = cmath.phase(pade_delay(tau, 2).response(wt / tau)[()])
    assert abs(ph + wt) < math.radians(1.0)


# eigenanalysis


@pytest.mark.parametrize("f, zeta", [(40.59, -0.0027), (41.06, 0.0055)])
def test_eig_recovers_pair(f, zeta):
    (m,) = eig_modes(lin_of(pair(f, zeta)))
    assert m.f_hz == pytest.approx(f, rel=1e-12)
    assert m.zeta == pytest.approx(zeta, rel=1e-9)


def test_eig_example_matrix():
    (m,) = eig_modes(lin_of([[0.689, 255.07], [-255.07, 0.689]]))
    assert m.f_hz == pytest.approx(40.59, abs=0.01)
    assert 100 * m.zeta == pytest.approx(-0.27, abs=0.005)


def test_real_modes():
    modes = eig_modes(lin_of(np.diag([-1.0, -2.0])))
    assert [m.f_hz for m in modes] == [0.0, 0.0]
    assert [m.zeta for m in modes] == [1.0, 1.0]


@pytest.mark.filterwarnings("ignore:eigenvector matrix")
@given(arrays(float, (6, 6), elements=st.floats(-5, 5)))
def test_spectrum_reconstructs(A):
    if not np.all(np.isfinite(np.linalg.eigvals(A))):
        return
    modes = eig_modes(lin_of(A))
    got = np.sort_complex(full_spectrum(modes))
    ref = np.sort_complex(np.linalg.eigvals(A))
    assert got.size == 6
    np.testing.assert_allclose(got, ref, atol=1e-6 * max(1.0, np.abs(ref).max()))
    for m in modes:
        if m.omega > 0:
            assert -1 < m.zeta < 1
        else:
            # a real eigenvalue sits at the ends of the damping range
            assert abs(m.zeta) == 1.0
        assert m.sigma == 0 or np.sign(m.zeta) == -np.sign(m.sigma)


# participation


def test_diagonal_participation():
    np.testing.assert_allclose(participation(np.diag([-1.0, -3.0, -7.0])), np.eye(3), atol=1e-15)


def test_oscillator_participation():
    P = participation(np.array([[0.0, 1.0], [-4.0, 0.0]]), normalize=False)
    np.testing.assert_allclose(np.abs(P), 0.5, atol=1e-12)
    np.testing.assert_allclose(P.sum(axis=0), 1.0, atol=1e-12)


@given(st.integers(0, 10_000))
def test_participation_diagonal_scaling_invariant(seed):
    r = np.random.default_rng(seed)
    A = r.standard_normal((5, 5))
    d = np.exp(r.uniform(-2, 2, 5))
    B = np.diag(d) @ A @ np.diag(1 / d)
    # similar matrices: compare mode by mode after sorting eigenvalues identically
    wa, wb = np.linalg.eigvals(A), np.linalg.eigvals(B)
    ia, ib = np.lexsort((wa.imag, wa.real)), np.lexsort((wb.imag, wb.real))
    Pa, Pb = participation(A), participation(B)
    try:
        np.testing.assert_allclose(Pa[:, ia], Pb[:, ib], atol=1e-6)
    except AssertionError:
        # near-repeated eigenvalues make the pairing ambiguous; fall back to column sets
        gap = np.min(np.abs(np.subtract.outer(wa, wa)) + np.eye(5) * 1e9)
        assert gap < 1e-3


# mode shape


def two_oscillators(k=1.0, c=4.0):
    """Two identical unit masses joined by a spring: states (x1, v1, x2, v2)."""
    return np.array([[0, 1, 0, 0], [-k - c, -0.01, c, 0], [0, 0, 0, 1], [c, 0, -k - c, -0.01]], dtype=float)


def test_antiphase_mode_shape():
    lin = lin_of(two_oscillators(), states=["m1.x", "m1.v", "m2.x", "m2.v"])
    fast = max(eig_modes(lin), key=lambda m: m.f_hz)
    shape = mode_shape(lin, fast, {"m1": "m1.x", "m2": "m2.x"})
    assert abs(shape["m1"]) == pytest.approx(abs(shape["m2"]), rel=1e-9)
    d = math.degrees(abs(cmath.phase(shape["m1"] / shape["m2"])))
    assert d == pytest.approx(180.0, abs=1e-6)
    assert max(shape.values(), key=abs) == pytest.approx(1.0, abs=1e-12)


@given(st.floats(-math.pi, math.pi))
def test_mode_shape_gauge(phi):
    lin = lin_of(two_oscillators(c=2.0), states=["m1.x", "m1.v", "m2.x", "m2.v"])
    mode = max(eig_modes(lin), key=lambda m: m.f_hz)
    obs = {"m1": "m1.x", "m2": "m2.x"}
    a = mode_shape(lin, mode, obs)
    mode.right = mode.right * cmath.exp(1j * phi)
    b = mode_shape(lin, mode, obs)
    for k in a:
        assert b[k] == pytest.approx(a[k], abs=1e-12)


def test_mode_shape_missing_observable():
    lin = lin_of(two_oscillators(), states=["a", "b", "c", "d"])
    with pytest.raises(KeyError):
        mode_shape(lin, eig_modes(lin)[0], {"m1": "nope"})


# frequency response


def test_first_order_sigma():
    lin = lin_of([[-1.0]], [[1.0]], [[1.0]])
    s = sigma_max_response(lin, [0.0, 1 / (2 * math.pi)])
    np.testing.assert_allclose(s, [1.0, 1 / math.sqrt(2)], atol=1e-14)


def test_feedthrough_only():
    lin = LinearModel(np.zeros((0, 0)), np.zeros((0, 2)), np.zeros((2, 0)), np.eye(2), [], ["a", "b"], ["c", "d"])
    np.testing.assert_allclose(sigma_max_response(lin, [0.1, 1.0, 10.0]), 1.0)


def test_undamped_pole_reports_inf():
    lin = lin_of([[0.0, 1.0], [-1.0, 0.0]], [[0.0], [1.0]], [[1.0, 0.0]])
    assert np.isinf(sigma_max_response(lin, [1 / (2 * math.pi)])[0])


@given(st.integers(0, 10_000))
def test_siso_sigma_is_gain_magnitude(seed):
    r = np.random.default_rng(seed)
    A = r.standard_normal((4, 4)) - 6 * np.eye(4)
    B, C = r.standard_normal((4, 1)), r.standard_normal((1, 4))
    f = np.linspace(0.01, 5, 40)
    got = sigma_max_response(lin_of(A, B, C), f)
    ref = [abs((C @ np.linalg.solve(2j * math.pi * fk * np.eye(4) - A, B))[0, 0]) for fk in f]
    np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-14)


def test_case4_peak_only_in_spc():
    f = np.linspace(30, 55, 501)
    spc, qpc = linear(4, "SPC"), linear(4, "QPC")
    f_sso = [m.f_hz for m in sso_modes(spc)]
    peaks = [(fp, p) for fp, p in peak_prominences_db(f, sigma_max_response(spc, f)) if p >= 3.0]
    assert any(abs(fp - fm) <= 2.0 for fp, _ in peaks for fm in f_sso)
    assert not [p for _, p in peak_prominences_db(f, sigma_max_response(qpc, f)) if p >= 3.0]
    assert sso_modes(qpc) == []


# grouping

AREAS = {"GFC1": 1, "GFC2": 1, "GFC3": 2, "GFC4": 2}


def polar(**deg):
    return {k: cmath.rect(1.0, math.radians(v)) for k, v in deg.items()}


@pytest.mark.parametrize("shapes, a, b, label", [
    (polar(GFC1=0, GFC4=10, GFC2=178, GFC3=185), {"GFC1", "GFC4"}, {"GFC2", "GFC3"}, "cross-area"),
    (polar(GFC1=0, GFC3=5, GFC2=180, GFC4=175), {"GFC1", "GFC3"}, {"GFC2", "GFC4"}, "cross-area"),
    ({"GFC1": 1.0, "GFC2": -0.9, "GFC3": 0.01, "GFC4": 0.02j}, {"GFC1"}, {"GFC2"}, "intra-area"),
    (polar(GFC1=0, GFC2=8, GFC3=176, GFC4=183), {"GFC1", "GFC2"}, {"GFC3", "GFC4"}, "inter-area"),
])
def test_grouping_fixtures(shapes, a, b, label):
    g = classify_grouping(shapes, AREAS)
    assert g.label == label
    assert {frozenset(g.group_a), frozenset(g.group_b)} == {frozenset(a), frozenset(b)}


def test_single_participant_is_local():
    assert classify_grouping({"GFC1": 1.0, "GFC2": 0.05}, AREAS).label == "local/other"


FIXTURES = [polar(GFC1=0, GFC4=10, GFC2=178, GFC3=185), polar(GFC1=0, GFC3=5, GFC2=180, GFC4=175),
            {"GFC1": 1.0, "GFC2": -0.9, "GFC3": 0.01, "GFC4": 0.02j}, polar(GFC1=0, GFC2=8, GFC3=176, GFC4=183)]


@pytest.mark.parametrize("k", range(len(FIXTURES)))
@given(st.floats(-math.pi, math.pi), st.floats(1e-3, 1e3))
def test_grouping_gauge_invariance(k, phi, scale):
    base = classify_grouping(FIXTURES[k], AREAS)
    rot = {m: v * scale * cmath.exp(1j * phi) for m, v in FIXTURES[k].items()}
    g = classify_grouping(rot, AREAS)
    assert g.label == base.label
    assert {frozenset(g.group_a), frozenset(g.group_b)} == {frozenset(base.group_a), frozenset(base.group_b)}


# delay sweep


def test_single_point_sweep_equals_eig():
    rows = delay_sweep(case(4), [0.002], pf=power_flow(4))
    ref = sso_modes(linear(4, "SPC", 0.002))
    assert len(rows) == len(ref) > 0
    for row, m in zip(sorted(rows, key=lambda r: r.f_hz), sorted(ref, key=lambda m: m.f_hz)):
        assert abs(row.f_hz - m.f_hz) <= 1e-10 and abs(row.zeta - m.zeta) <= 1e-10


@pytest.mark.slow
def test_sweep_tracks_delay_trend():
    rows = delay_sweep(case(2), [0.0, 0.001, 0.002, 0.003], pf=power_flow(2))
    first = min((r for r in rows if r.tau == 0.0), key=lambda r: r.zeta)
    z = [r.zeta for r in rows if r.mode_id == first.mode_id]
    assert len(z) == 4 and all(b > a for a, b in zip(z, z[1:]))
    assert z[0] < 0 < z[2]
    assert not any(r.flagged for r in rows if r.mode_id == first.mode_id)
