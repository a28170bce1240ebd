"""Compiled residual kernels and the fixed-step RK4 integrator.

All machine quantities are per unit on the machine rating; network
quantities on the system base. Complex phasors are stored as interleaved
(d, q) pairs in the flat state vector.
"""
import math

import numpy as np
from numba import njit

# GFC parameter columns
(G_XF, G_RF, G_BF, G_XT, G_RT, G_CDC, G_MP, G_WSTAR, G_WF, G_KPC, G_KIC, G_KPV, G_KIV,
 G_KPO, G_KIO, G_KPDC, G_KIDC, G_FF, G_SR) = range(19)
N_GPAR = 19
# GFC setpoint columns
GS_PSTAR, GS_VSTAR, GS_VDC = range(3)
# GFC state offsets
IFD, IFQ, VCD, VCQ, ITD, ITQ, VDC, TH, PF, XICD, XICQ, XIVD, XIVQ, XO, XDC = range(15)
GFC_STATES = ("if_d", "if_q", "vc_d", "vc_q", "it_d", "it_q", "vdc", "theta", "p_filt",
              "xi_cd", "xi_cq", "xi_vd", "xi_vq", "xi_o", "xi_dc")

# SG parameter columns
(S_XD, S_XQ, S_XDP, S_XQP, S_XPP, S_RA, S_TD0P, S_TQ0P, S_TD0PP, S_TQ0PP, S_H, S_D, S_XT, S_RT,
 S_KA, S_TA, S_RG, S_TG, S_SR) = range(19)
N_SPAR = 19
SS_VREF, SS_PREF = range(2)
DELTA, OMEGA, EQP, EDP, EQPP, EDPP, EFD, PM, PSID, PSIQ = range(10)
SG_STATES = ("delta", "omega", "eq_p", "ed_p", "eq_pp", "ed_pp", "efd", "pm", "psi_d", "psi_q")

N_GAUX = 3      # omega_c, p_meas, |v_grid|
N_SAUX = 3      # omega, t_elec, |v_terminal|


@njit(cache=True)
def gfc_eval(x, o, vD, vQ, pdel, du, p, sp, wb, dx, aux, ka):
    """Derivatives of one GFC; returns the injected current in the network frame (system base)."""
    ifd = x[o + IFD]
    ifq = x[o + IFQ]
    vcd = x[o + VCD]
    vcq = x[o + VCQ]
    itd = x[o + ITD]
    itq = x[o + ITQ]
    vdc = x[o + VDC]
    th = x[o + TH]
    c = math.cos(th)
    s = math.sin(th)
    vgd = vD * c + vQ * s
    vgq = -vD * s + vQ * c

    pmeas = vcd * itd + vcq * itq
    wc = p[G_WSTAR] + p[G_MP] * (sp[GS_PSTAR] + du - pdel)
    dx[o + TH] = wb * (wc - 1.0)
    dx[o + PF] = p[G_WF] * (pmeas - x[o + PF])

    vgm = math.sqrt(vgd * vgd + vgq * vgq)
    eo = sp[GS_VSTAR] - vgm
    vrd = x[o + XO] + p[G_KPO] * eo
    dx[o + XO] = p[G_KIO] * eo

    bf = p[G_BF]
    evd = vrd - vcd
    evq = -vcq
    ird = p[G_FF] * itd - wc * bf * vcq + p[G_KPV] * evd + x[o + XIVD]
    irq = p[G_FF] * itq + wc * bf * vcd + p[G_KPV] * evq + x[o + XIVQ]
    dx[o + XIVD] = p[G_KIV] * evd
    dx[o + XIVQ] = p[G_KIV] * evq

    xf = p[G_XF]
    eid = ird - ifd
    eiq = irq - ifq
    vmd = vcd - wc * xf * ifq + p[G_KPC] * eid + x[o + XICD]
    vmq = vcq + wc * xf * ifd + p[G_KPC] * eiq + x[o + XICQ]
    dx[o + XICD] = p[G_KIC] * eid
    dx[o + XICQ] = p[G_KIC] * eiq

    rf = p[G_RF]
    dx[o + IFD] = wb / xf * (vmd - vcd - rf * ifd + wc * xf * ifq)
    dx[o + IFQ] = wb / xf * (vmq - vcq - rf * ifq - wc * xf * ifd)
    dx[o + VCD] = wb / bf * (ifd - itd + wc * bf * vcq)
    dx[o + VCQ] = wb / bf * (ifq - itq - wc * bf * vcd)
    xt = p[G_XT]
    rt = p[G_RT]
    dx[o + ITD] = wb / xt * (vcd - vgd - rt * itd + wc * xt * itq)
    dx[o + ITQ] = wb / xt * (vcq - vgq - rt * itq - wc * xt * itd)

    pconv = vmd * ifd + vmq * ifq
    edc = sp[GS_VDC] - vdc
    dx[o + XDC] = p[G_KIDC] * edc
    dx[o + VDC] = wb / p[G_CDC] * (p[G_KPDC] * edc + x[o + XDC] - pconv / vdc)

    aux[ka] = wc
    aux[ka + 1] = pmeas
    aux[ka + 2] = vgm
    sr = p[G_SR]
    return complex((itd * c - itq * s) * sr, (itd * s + itq * c) * sr)


@njit(cache=True)
def sg_eval(x, o, vD, vQ, spc, du, p, sp, wb, dx, aux, ka):
    """Derivatives of one synchronous machine; returns injected current (network frame, system base).

    ``spc`` selects stator-transient (flux) dynamics; otherwise the stator is algebraic.
    """
    th = x[o + DELTA] - 0.5 * math.pi
    c = math.cos(th)
    s = math.sin(th)
    vd = vD * c + vQ * s
    vq = -vD * s + vQ * c
    xtot = p[S_XPP] + p[S_XT]
    rtot = p[S_RA] + p[S_RT]
    w = x[o + OMEGA]
    edpp = x[o + EDPP]
    eqpp = x[o + EQPP]
    if spc:
        idd = x[o + PSID] / xtot
        iqq = x[o + PSIQ] / xtot
        dx[o + PSID] = wb * (edpp - vd - rtot * idd + w * x[o + PSIQ])
        dx[o + PSIQ] = wb * (eqpp - vq - rtot * iqq - w * x[o + PSID])
    else:
        den = rtot * rtot + xtot * xtot
        ed = edpp - vd
        eq = eqpp - vq
        idd = (ed * rtot + eq * xtot) / den
        iqq = (eq * rtot - ed * xtot) / den
    te = edpp * idd + eqpp * iqq
    dx[o + DELTA] = wb * (w - 1.0)
    dx[o + OMEGA] = (x[o + PM] - te - p[S_D] * (w - 1.0)) / (2.0 * p[S_H])
    dx[o + EQP] = (x[o + EFD] - x[o + EQP] - (p[S_XD] - p[S_XDP]) * idd) / p[S_TD0P]
    dx[o + EDP] = (-x[o + EDP] + (p[S_XQ] - p[S_XQP]) * iqq) / p[S_TQ0P]
    dx[o + EQPP] = (x[o + EQP] - eqpp - (p[S_XDP] - p[S_XPP]) * idd) / p[S_TD0PP]
    dx[o + EDPP] = (x[o + EDP] - edpp + (p[S_XQP] - p[S_XPP]) * iqq) / p[S_TQ0PP]
    vld = vd + p[S_RT] * idd - p[S_XT] * iqq
    vlq = vq + p[S_RT] * iqq + p[S_XT] * idd
    vt = math.sqrt(vld * vld + vlq * vlq)
    dx[o + EFD] = (p[S_KA] * (sp[SS_VREF] - vt) - x[o + EFD]) / p[S_TA]
    dx[o + PM] = (sp[SS_PREF] + du - (w - 1.0) / p[S_RG] - x[o + PM]) / p[S_TG]
    aux[ka] = w
    aux[ka + 1] = te
    aux[ka + 2] = vt
    sr = p[S_SR]
    return complex((idd * c - iqq * s) * sr, (idd * s + iqq * c) * sr)


@njit(cache=True)
def rhs(x, u, pdel, use_delay, spc,
        g_off, g_bus, g_par, g_sp,
        s_off, s_bus, s_par, s_sp,
        n_off, A, bus_row, bus_coef, Z,
        wb, dx, aux):
    """Full assembled residual ``dx = f(x, u, p_delayed)``; also fills ``aux`` channels."""
    ng = g_off.shape[0]
    ns = s_off.shape[0]
    nb = bus_row.shape[0]
    dx[:] = 0.0
    vbus = np.empty(nb, dtype=np.complex128)
    ne = A.shape[0]
    z = np.empty(ne, dtype=np.complex128)
    if spc:
        for k in range(ne):
            z[k] = complex(x[n_off + 2 * k], x[n_off + 2 * k + 1])
        for b in range(nb):
            vbus[b] = z[bus_row[b]]
    else:
        isrc = np.zeros(nb, dtype=np.complex128)
        for g in range(ng):
            o = g_off[g]
            th = x[o + TH]
            sr = g_par[g, G_SR]
            isrc[g_bus[g]] += complex(x[o + ITD], x[o + ITQ]) * complex(math.cos(th), math.sin(th)) * sr
        for m in range(ns):
            o = s_off[m]
            th = x[o + DELTA] - 0.5 * math.pi
            epp = complex(x[o + EDPP], x[o + EQPP]) * complex(math.cos(th), math.sin(th))
            zm = complex(s_par[m, S_RA] + s_par[m, S_RT], s_par[m, S_XPP] + s_par[m, S_XT])
            isrc[s_bus[m]] += epp * s_par[m, S_SR] / zm
        for b in range(nb):
            acc = 0j
            for k in range(nb):
                acc += Z[b, k] * isrc[k]
            vbus[b] = acc
    inj = np.zeros(nb, dtype=np.complex128)
    for g in range(ng):
        pd = pdel[g] if use_delay[g] else x[g_off[g] + PF]
        v = vbus[g_bus[g]]
        inj[g_bus[g]] += gfc_eval(x, g_off[g], v.real, v.imag, pd, u[g], g_par[g], g_sp[g], wb, dx, aux,
                                  N_GAUX * g)
    for m in range(ns):
        v = vbus[s_bus[m]]
        inj[s_bus[m]] += sg_eval(x, s_off[m], v.real, v.imag, spc, u[ng + m], s_par[m], s_sp[m], wb, dx, aux,
                                 N_GAUX * ng + N_SAUX * m)
    if spc:
        for k in range(ne):
            acc = 0j
            for j in range(ne):
                acc += A[k, j] * z[j]
            dx[n_off + 2 * k] = acc.real
            dx[n_off + 2 * k + 1] = acc.imag
        for b in range(nb):
            r = bus_row[b]
            val = bus_coef[b] * inj[b]
            dx[n_off + 2 * r] += val.real
            dx[n_off + 2 * r + 1] += val.imag


@njit(cache=True)
def _inputs(t, tm, n_in, d_idx, d_kind, d_mag, d_t0, d_t1, d_freq):
    """Input vector at stage time ``t``; switching is decided at the step midpoint ``tm``.

    Gating on the midpoint keeps every RK4 stage of a step on the same side of a
    disturbance edge, so edges that fall on step boundaries cost no accuracy.
    """
    u = np.zeros(n_in)
    for k in range(d_idx.shape[0]):
        if tm < d_t0[k]:
            continue
        kind = d_kind[k]
        if kind == 0:           # step
            u[d_idx[k]] += d_mag[k]
        elif kind == 1:         # pulse
            if tm < d_t1[k]:
                u[d_idx[k]] += d_mag[k]
        else:                   # sine
            if tm < d_t1[k]:
                u[d_idx[k]] += d_mag[k] * math.sin(2.0 * math.pi * d_freq[k] * (t - d_t0[k]))
    return u


@njit(cache=True)
def _read_delayed(buf, k_now, t, tau, h, y0):
    """Cubic Lagrange interpolation of the tapped history at ``t - tau``.

    ``buf[k % L]`` holds the value at ``k*h``; times before zero read the
    initial value ``y0``. Falls back to linear interpolation when the newest
    support point is not yet available.
    """
    L = buf.shape[0]
    ts = t - tau
    if ts <= 0.0:
        return y0
    pos = ts / h
    k0 = int(math.floor(pos))
    frac = pos - k0
    if k0 >= k_now:
        return buf[k_now % L]
    if k0 + 2 > k_now:
        a = buf[k0 % L]
        b = buf[(k0 + 1) % L]
        return a + frac * (b - a)
    ym = y0 if k0 - 1 < 0 else buf[(k0 - 1) % L]
    y_0 = buf[k0 % L]
    y1 = buf[(k0 + 1) % L]
    y2 = buf[(k0 + 2) % L]
    s = frac
    return (-s * (s - 1.0) * (s - 2.0) / 6.0 * ym + (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0 * y_0
            - (s + 1.0) * s * (s - 2.0) / 2.0 * y1 + (s + 1.0) * s * (s - 1.0) / 6.0 * y2)


@njit(cache=True)
def integrate(x0, n_in, n_steps, h, dec,
              tap_state, taus, use_delay, spc,
              g_off, g_bus, g_par, g_sp, s_off, s_bus, s_par, s_sp,
              n_off, A, bus_row, bus_coef, Z, wb,
              d_idx, d_kind, d_mag, d_t0, d_t1, d_freq):
    """Fixed-step RK4 with delay ring buffers on the tapped states.

    Returns (recorded states, recorded aux, number of records, diverged flag).
    """
    n = x0.shape[0]
    ng = g_off.shape[0]
    n_aux = aux_len(ng, s_off.shape[0])
    n_rec = n_steps // dec + 1
    X = np.zeros((n_rec, n))
    AUX = np.zeros((n_rec, n_aux))
    ntap = tap_state.shape[0]
    L = 4
    for j in range(ntap):
        need = int(math.ceil(taus[j] / h)) + 4
        if need > L:
            L = need
    bufs = np.zeros((ntap, L))
    y0 = np.zeros(ntap)
    for j in range(ntap):
        y0[j] = x0[tap_state[j]]
        bufs[j, :] = y0[j]
    x = x0.copy()
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    xt = np.empty(n)
    aux = np.zeros(n_aux)
    pd = np.zeros(max(ng, 1))
    diverged = False
    rec = 0
    for step in range(n_steps + 1):
        t = step * h
        for j in range(ntap):
            bufs[j, step % L] = x[tap_state[j]]
        if step % dec == 0:
            u = _inputs(t, t + 0.5 * h, n_in, d_idx, d_kind, d_mag, d_t0, d_t1, d_freq)
            for j in range(ntap):
                pd[j] = _read_delayed(bufs[j], step, t, taus[j], h, y0[j])
            rhs(x, u, pd, use_delay, spc, g_off, g_bus, g_par, g_sp, s_off, s_bus, s_par, s_sp,
                n_off, A, bus_row, bus_coef, Z, wb, k1, aux)
            X[rec, :] = x
            AUX[rec, :] = aux
            rec += 1
        if step == n_steps:
            break
        # stage 1
        u = _inputs(t, t + 0.5 * h, n_in, d_idx, d_kind, d_mag, d_t0, d_t1, d_freq)
        for j in range(ntap):
            pd[j] = _read_delayed(bufs[j], step, t, taus[j], h, y0[j])
        rhs(x, u, pd, use_delay, spc, g_off, g_bus, g_par, g_sp, s_off, s_bus, s_par, s_sp,
            n_off, A, bus_row, bus_coef, Z, wb, k1, aux)
        # stage 2
        th = t + 0.5 * h
        u = _inputs(th, t + 0.5 * h, n_in, d_idx, d_kind, d_mag, d_t0, d_t1, d_freq)
        for j in range(ntap):
            pd[j] = _read_delayed(bufs[j], step, th, taus[j], h, y0[j])
        for i in range(n):
            xt[i] = x[i] + 0.5 * h * k1[i]
        rhs(xt, u, pd, use_delay, spc, g_off, g_bus, g_par, g_sp, s_off, s_bus, s_par, s_sp,
            n_off, A, bus_row, bus_coef, Z, wb, k2, aux)
        # stage 3
        for i in range(n):
            xt[i] = x[i] + 0.5 * h * k2[i]
        rhs(xt, u, pd, use_delay, spc, g_off, g_bus, g_par, g_sp, s_off, s_bus, s_par, s_sp,
            n_off, A, bus_row, bus_coef, Z, wb, k3, aux)
        # stage 4
        t1 = t + h
        u = _inputs(t1, t + 0.5 * h, n_in, d_idx, d_kind, d_mag, d_t0, d_t1, d_freq)
        for j in range(ntap):
            pd[j] = _read_delayed(bufs[j], step, t1, taus[j], h, y0[j])
        for i in range(n):
            xt[i] = x[i] + h * k3[i]
        rhs(xt, u, pd, use_delay, spc, g_off, g_bus, g_par, g_sp, s_off, s_bus, s_par, s_sp,
            n_off, A, bus_row, bus_coef, Z, wb, k4, aux)
        bad = False
        for i in range(n):
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if not (abs(x[i]) <= 1e6):
                bad = True
        if bad:
            diverged = True
            break
    return X[:rec], AUX[:rec], rec, diverged


@njit(cache=True)
def aux_len(ng, ns):
    return N_GAUX * ng + N_SAUX * ns
