"""Newton-Raphson power flow in polar coordinates.

Loads are constant power; capacitor banks and line charging are constant
susceptances in the bus admittance matrix.
"""
from dataclasses import dataclass, field
import json

import numpy as np

from .network import expand, ybus, series_admittance, tie_flow


class PowerFlowError(RuntimeError):
    pass


@dataclass
class PowerFlowSolution:
    bus_ids: list
    v: np.ndarray               # magnitude, pu
    theta: np.ndarray           # rad
    branch_flows: list          # dicts: name, from, to, p_from, q_from, p_to, q_to
    machine_s: dict             # machine id -> complex S injected at its terminal (system pu)
    mismatch: float
    iterations: int
    tie_flow: float
    losses: float
    net: object = field(repr=False, default=None)

    @property
    def vc(self):
        return self.v * np.exp(1j * self.theta)

    def voltage(self, bus_id):
        i = self.net.index[bus_id]
        return self.vc[i]

    def report(self):
        return {
            "buses": [{"id": str(b), "v_pu": float(v), "theta_rad": float(t)}
                      for b, v, t in zip(self.bus_ids, self.v, self.theta)],
            "branches": self.branch_flows,
            "machines": {k: {"p_pu": s.real, "q_pu": s.imag} for k, s in self.machine_s.items()},
            "tie_flow_pu": self.tie_flow,
            "losses_pu": self.losses,
            "mismatch": self.mismatch,
            "iterations": self.iterations,
        }

    def to_json(self):
        return json.dumps(self.report(), indent=2, sort_keys=True)


def _injections(Y, vc):
    return vc * np.conj(Y @ vc)


def run_power_flow(spec, tol=1e-8, max_iter=30):
    net = expand(spec)
    Y = ybus(net)
    n = net.n_bus
    s_spec = np.zeros(n, dtype=complex)
    for b, s in zip(net.load_bus, net.load_pq):
        s_spec[b] -= s
    types = ["PQ"] * n
    v = np.ones(n)
    theta = np.zeros(n)
    for b in spec.buses:
        i = net.index[b.id]
        types[i] = b.type
        if b.type in ("PV", "SLACK"):
            v[i] = b.v
        if b.type == "SLACK":
            theta[i] = b.angle
    for m in spec.machines:
        i = net.index[m.bus]
        if types[i] == "PV":
            if m.p is None:
                raise PowerFlowError(f"machine {m.id} on PV bus needs a dispatch 'p'")
            s_spec[i] += m.p
    pv = [i for i in range(n) if types[i] == "PV"]
    pq = [i for i in range(n) if types[i] == "PQ"]
    ang = sorted(pv + pq)
    it = 0
    polished = False
    while True:
        vc = v * np.exp(1j * theta)
        mis = _injections(Y, vc) - s_spec
        F = np.concatenate([mis.real[ang], mis.imag[pq]])
        norm = float(np.max(np.abs(F))) if F.size else 0.0
        if norm <= tol:
            # one extra step drives the mismatch to roundoff
            if polished or norm < 1e-13:
                break
            polished = True
        if it >= max_iter:
            raise PowerFlowError(f"power flow did not converge in {max_iter} iterations (mismatch {norm:.3e})")
        J = _jacobian(Y, vc, ang, pq)
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise PowerFlowError("power-flow Jacobian is singular") from exc
        if not np.all(np.isfinite(dx)):
            raise PowerFlowError("power-flow Jacobian is singular")
        theta[ang] += dx[:len(ang)]
        v[pq] += dx[len(ang):]
        it += 1
    vc = v * np.exp(1j * theta)
    s_inj = _injections(Y, vc)
    flows = []
    for el in net.series:
        y = series_admittance(el)
        t = el.ratio
        vf, vt = vc[el.f], vc[el.t]
        i_f = (vf / t - vt) * y / t
        i_t = (vt - vf / t) * y
        s_f = vf * np.conj(i_f)
        s_t = vt * np.conj(i_t)
        flows.append({"name": el.name, "from": str(net.bus_ids[el.f]), "to": str(net.bus_ids[el.t]),
                      "p_from": float(s_f.real), "q_from": float(s_f.imag),
                      "p_to": float(s_t.real), "q_to": float(s_t.imag)})
    machine_s = {}
    for m in spec.machines:
        i = net.index[m.bus]
        machine_s[m.id] = complex(s_inj[i])
    load_p = sum(s.real for s in net.load_pq)
    gen_p = float(np.sum(s_inj.real[[i for i in range(n) if types[i] in ("PV", "SLACK")]]))
    return PowerFlowSolution(list(net.bus_ids), v.copy(), theta.copy(), flows, machine_s, norm, it,
                             float(tie_flow(net, vc)), gen_p - load_p, net)


def _jacobian(Y, vc, ang, pq):
    """Jacobian of [P(ang); Q(pq)] w.r.t. [theta(ang); |V|(pq)]."""
    I = Y @ vc
    vm = np.abs(vc)
    dS_dth = 1j * np.diag(vc) @ np.conj(np.diag(I) - Y @ np.diag(vc))
    dS_dv = np.diag(vc) @ np.conj(Y @ np.diag(vc / vm)) + np.diag(vc / vm) @ np.conj(np.diag(I))
    J11 = dS_dth.real[np.ix_(ang, ang)]
    J12 = dS_dv.real[np.ix_(ang, pq)]
    J21 = dS_dth.imag[np.ix_(pq, ang)]
    J22 = dS_dv.imag[np.ix_(pq, pq)]
    return np.block([[J11, J12], [J21, J22]])
