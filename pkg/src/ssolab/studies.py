"""Cross-checks shared by the acceptance tests and the study scripts.

Each function runs one complete comparison on a :class:`SystemSpec`: linear
analysis against a simulated ringdown, the SPC/QPC modelling-adequacy check,
and the grow/decay check of the delay sweep.
"""
from dataclasses import dataclass
import math

import numpy as np

from .modalid import dominant_mode, envelope_growth, prony_fit
from .netmodel.powerflow import run_power_flow
from .smallsignal import (SSO_BAND, build_linear, eig_modes, peak_prominences_db, sigma_max_response,
                          sso_modes)
from .timedomain import pulse_scenario, simulate

# GFC parameter sets for case 4; every set keeps the spectrum stable outside the SSO band
PARAMETER_GRID = {
    "default": {},
    "low-droop": {"m_p": 0.02},
    "high-droop": {"m_p": 0.04},
    "stiff-current-loop": {"k_pc": 3.0},
    "soft-voltage-loop": {"k_pc": 3.0, "k_pv": 0.4},
    "stiff-low-droop": {"k_pc": 3.0, "m_p": 0.02},
}

# small pulse on the first converter's power reference, identified from its frequency
PULSE = dict(magnitude=0.001, t0=0.1, width=0.01)
RING_WINDOW = (0.1, 0.5)          # seconds after the pulse ends
PRONY_ORDER = 32
ENVELOPE_BAND = (30.0, 55.0)


@dataclass
class RingdownCheck:
    tau: float
    f_prony: float
    zeta_prony: float
    f_eig: float
    zeta_eig: float

    @property
    def df_rel(self):
        return abs(self.f_prony - self.f_eig) / self.f_eig

    @property
    def dzeta_pp(self):
        return 100 * abs(self.zeta_prony - self.zeta_eig)


def pulse_response(spec, tau, duration=1.5, pade_order=2, pf=None, machine=None):
    """(linear model, time series) for the standard small pulse at delay ``tau``."""
    lin, model, op = build_linear(spec, tau, pade_order, pf)
    machine = machine or model.gfc_ids[0]
    scn = pulse_scenario(f"{machine}.dP_ref", PULSE["magnitude"], PULSE["t0"], PULSE["width"], duration)
    return lin, simulate(model, op, scn)


def ringdown_check(spec, tau, pade_order=3, pf=None, order=PRONY_ORDER, machine=None):
    """Dominant Prony mode of the pulse response against the nearest SSO eigenmode."""
    lin, ts = pulse_response(spec, tau, pade_order=pade_order, pf=pf, machine=machine)
    machine = machine or [m.id for m in spec.gfcs][0]
    t_end = PULSE["t0"] + PULSE["width"]
    window = (t_end + RING_WINDOW[0], t_end + RING_WINDOW[1])
    est = dominant_mode(prony_fit(ts.t, ts[f"{machine}.omega_c"], window, order))
    ref = min(sso_modes(lin), key=lambda m: abs(m.f_hz - est.f_hz))
    return RingdownCheck(tau, est.f_hz, est.zeta, ref.f_hz, ref.zeta)


def envelope_slope(spec, tau, duration=2.0, pf=None, window=(0.3, 1.5), machine=None):
    """Growth rate (1/s) of the band-passed frequency oscillation after the pulse."""
    _, ts = pulse_response(spec, tau, duration, pf=pf, machine=machine)
    machine = machine or [m.id for m in spec.gfcs][0]
    return envelope_growth(ts.t, ts[f"{machine}.omega_c"], window, ENVELOPE_BAND)


@dataclass
class AdequacyCheck:
    spc_modes: list
    qpc_modes: list
    spc_peaks: list
    qpc_peaks: list
    max_real_spc: float
    max_real_qpc: float

    @property
    def holds(self):
        """SPC shows an SSO pair and a >= 3 dB peak; QPC shows neither."""
        return bool(self.spc_modes) and bool(self.spc_peaks) and not self.qpc_modes and not self.qpc_peaks


def adequacy_check(spec, tau=None, band=SSO_BAND, points=2000, min_db=3.0):
    """Compare SPC and QPC linear models built from the same spec."""
    f = np.geomspace(band[0], band[1], points)
    pf = run_power_flow(spec)
    out = {}
    for fw in ("SPC", "QPC"):
        lin = build_linear(spec.with_framework(fw), tau, pf=pf)[0]
        sig = sigma_max_response(lin, f)
        peaks = [(fp, p) for fp, p in peak_prominences_db(f, sig) if p >= min_db]
        modes = [m for m in eig_modes(lin) if m.omega > 0 and band[0] <= m.f_hz <= band[1]]
        out[fw] = (sso_modes(modes, band), peaks, max(m.sigma for m in eig_modes(lin)))
    return AdequacyCheck(out["SPC"][0], out["QPC"][0], out["SPC"][1], out["QPC"][1], out["SPC"][2], out["QPC"][2])


def sso_oscillations_qpc(spec, tau=None, band=SSO_BAND):
    """Every oscillatory QPC eigenpair in ``band`` regardless of damping."""
    lin = build_linear(spec.with_framework("QPC"), tau)[0]
    return [m for m in eig_modes(lin) if m.omega > 0 and band[0] <= m.f_hz <= band[1]]


def tracked_least_damped(rows):
    """Loci rows of the mode that starts least damped."""
    first = min((r for r in rows if r.tau == rows[0].tau), key=lambda r: r.zeta)
    return [r for r in rows if r.mode_id == first.mode_id]


__all__ = ["PARAMETER_GRID", "PULSE", "PRONY_ORDER", "RingdownCheck", "AdequacyCheck", "pulse_response",
           "ringdown_check", "envelope_slope", "adequacy_check", "sso_oscillations_qpc", "tracked_least_damped"]
