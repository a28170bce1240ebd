"""Equilibrium states and controller setpoints consistent with a solved power flow."""
from dataclasses import dataclass, field
import math

import numpy as np


class InfeasibleOperatingPoint(RuntimeError):
    pass


@dataclass
class OperatingPoint:
    x0: np.ndarray
    u0: np.ndarray
    g_sp: np.ndarray            # per GFC: P*, V*, v_dc*
    s_sp: np.ndarray            # per SG: V_ref, P_ref
    framework: str
    names: list
    pf: object = field(repr=False, default=None)
    gfc_ids: list = field(default_factory=list)
    sg_ids: list = field(default_factory=list)

    @property
    def setpoints(self):
        out = {}
        for gid, row in zip(self.gfc_ids, self.g_sp):
            out[gid] = {"p_star": float(row[0]), "v_star": float(row[1]), "v_dc_star": float(row[2])}
        for sid, row in zip(self.sg_ids, self.s_sp):
            out[sid] = {"v_ref": float(row[0]), "p_ref": float(row[1])}
        return out


def _machine_current(pf, m, s_base):
    """Terminal voltage (LV bus) and injected current on the machine base."""
    v = complex(pf.voltage(m.bus))
    s = pf.machine_s[m.id]
    i_sys = np.conj(s / v)
    return v, complex(i_sys) / (m.mva / s_base)


def _gfc_state(m, v_lv, i_m, omega_b):
    from ..dynamics import kernels as K
    p = m.params
    th = math.atan2(v_lv.imag, v_lv.real)
    rot = complex(math.cos(th), -math.sin(th))
    vc = complex(abs(v_lv), 0.0)
    it = i_m * rot
    i_f = it + 1j * p.b_f * vc
    if abs(i_f) > p.i_max:
        raise InfeasibleOperatingPoint(f"{m.id}: converter current {abs(i_f):.3f} pu exceeds i_max {p.i_max}")
    v_conv = vc + complex(p.r_f, p.x_f) * i_f
    x = np.zeros(len(K.GFC_STATES))
    x[K.IFD], x[K.IFQ] = i_f.real, i_f.imag
    x[K.VCD], x[K.VCQ] = vc.real, vc.imag
    x[K.ITD], x[K.ITQ] = it.real, it.imag
    x[K.VDC] = p.v_dc
    x[K.TH] = th
    p_meas = (vc * np.conj(it)).real
    x[K.PF] = p_meas
    x[K.XICD], x[K.XICQ] = p.r_f * i_f.real, p.r_f * i_f.imag
    x[K.XIVD], x[K.XIVQ] = (1.0 - p.ff_current) * it.real, (1.0 - p.ff_current) * it.imag
    x[K.XO] = vc.real
    x[K.XDC] = (v_conv * np.conj(i_f)).real / p.v_dc
    v_hv = v_lv - complex(p.r_t, p.x_t) * i_m
    return x, p_meas, abs(v_hv)


def _sg_state(m, v_lv, i_m, n_states):
    from ..dynamics import kernels as K
    p = m.params
    e_q = v_lv + complex(p.ra, p.xq) * i_m
    delta = math.atan2(e_q.imag, e_q.real)
    rot = np.exp(-1j * (delta - 0.5 * math.pi))
    v = v_lv * rot
    i = i_m * rot
    vd, vq, idd, iqq = v.real, v.imag, i.real, i.imag
    edp = (p.xq - p.xqp) * iqq
    edpp = (p.xq - p.xdpp) * iqq
    eqpp = vq + p.ra * iqq + p.xdpp * idd
    eqp = eqpp + (p.xdp - p.xdpp) * idd
    efd = eqp + (p.xd - p.xdp) * idd
    te = edpp * idd + eqpp * iqq
    x = np.zeros(10)
    x[K.DELTA] = delta
    x[K.OMEGA] = 1.0
    x[K.EQP], x[K.EDP], x[K.EQPP], x[K.EDPP] = eqp, edp, eqpp, edpp
    x[K.EFD] = efd
    x[K.PM] = te
    xtot = p.xdpp + p.x_t
    x[K.PSID], x[K.PSIQ] = xtot * idd, xtot * iqq
    v_ref = abs(v_lv) + efd / p.ka
    return x[:n_states], v_ref, te


def initialize_states(spec, pf=None, framework=None, model=None):
    """Equilibrium ``x0`` (and setpoints) of ``spec`` at power-flow solution ``pf``.

    Raises :class:`InfeasibleOperatingPoint` when a converter would exceed its current limit.
    """
    from ..dynamics.assemble import assemble
    from .powerflow import run_power_flow
    if framework is not None:
        spec = spec.with_framework(framework)
    if pf is None:
        pf = run_power_flow(spec)
    if model is None:
        model = assemble(spec, pf)
    wb = spec.omega_b
    x0 = np.zeros(model.n)
    g_sp = np.zeros((len(spec.gfcs), 3))
    s_sp = np.zeros((len(spec.sgs), 2))
    a = model.arrays
    for g, m in enumerate(spec.gfcs):
        v_lv, i_m = _machine_current(pf, m, spec.s_base)
        xg, p_meas, v_hv = _gfc_state(m, v_lv, i_m, wb)
        o = a["g_off"][g]
        x0[o:o + len(xg)] = xg
        p_star = p_meas if m.params.p_star is None else m.params.p_star
        v_star = v_hv if m.params.v_star is None else m.params.v_star
        g_sp[g] = [p_star, v_star, m.params.v_dc]
    n_sg = 10 if model.framework == "SPC" else 8
    for k, m in enumerate(spec.sgs):
        v_lv, i_m = _machine_current(pf, m, spec.s_base)
        xs, v_ref, p_ref = _sg_state(m, v_lv, i_m, n_sg)
        o = a["s_off"][k]
        x0[o:o + n_sg] = xs
        s_sp[k] = [v_ref, p_ref]
    if model.framework == "SPC":
        _network_state(model, pf, x0)
    return OperatingPoint(x0, np.zeros(len(model.inputs)), g_sp, s_sp, model.framework,
                          list(model.states.names), pf, model.gfc_ids, model.sg_ids)


def _network_state(model, pf, x0):
    from .network import series_admittance
    net, dnet = model.net, model.dnet
    v = pf.vc
    n_off = model.arrays["n_off"]
    loads = {}
    for b, y in zip(net.load_bus, _load_y(model)):
        loads[f"iload[{net.bus_ids[b]}]"] = v[b] * y
    branches = {f"i[{el.name}]": (v[el.f] - v[el.t]) * series_admittance(el)
                for el in net.series if el.kind != "machine_xfmr"}
    buses = {f"v[{net.bus_ids[b]}]": v[b] for b in net.grid_buses()}
    for k, lab in enumerate(dnet.labels):
        z = branches.get(lab, buses.get(lab, loads.get(lab)))
        x0[n_off + 2 * k] = z.real
        x0[n_off + 2 * k + 1] = z.imag


def _load_y(model):
    from .network import load_admittances
    return load_admittances(model.net, model.pf.v)
