"""Compose machine and network models into one executable residual with delay taps."""
from dataclasses import dataclass, field, replace
import math

import numpy as np

from ..netmodel.network import expand, ybus, load_admittances, dynamic_network
from ..netmodel.powerflow import run_power_flow
from ..netmodel.system import ConfigError
from . import kernels as K


@dataclass
class StateIndexMap:
    """Ordered, uniquely named states with machine and area tags."""
    names: list
    machine: list
    area: list

    def __post_init__(self):
        self._idx = {n: i for i, n in enumerate(self.names)}
        if len(self._idx) != len(self.names):
            raise ValueError("state names must be unique")

    def __len__(self):
        return len(self.names)

    def index(self, name):
        return self._idx[name]

    def __contains__(self, name):
        return name in self._idx

    def select(self, machine=None, prefix=None):
        return [i for i, n in enumerate(self.names)
                if (machine is None or self.machine[i] == machine) and (prefix is None or n.startswith(prefix))]


@dataclass(frozen=True)
class DelayTap:
    name: str
    state: int
    delay: float
    machine: str


def _gfc_row(m, omega_b, s_base):
    p = m.params
    row = np.zeros(K.N_GPAR)
    row[K.G_XF], row[K.G_RF], row[K.G_BF] = p.x_f, p.r_f, p.b_f
    row[K.G_XT], row[K.G_RT], row[K.G_CDC] = p.x_t, p.r_t, p.c_dc
    row[K.G_MP], row[K.G_WSTAR], row[K.G_WF] = p.m_p, p.omega_star, p.omega_f
    row[K.G_KPC], row[K.G_KIC], row[K.G_KPV], row[K.G_KIV] = p.k_pc, p.k_ic, p.k_pv, p.k_iv
    row[K.G_KPO], row[K.G_KIO], row[K.G_KPDC], row[K.G_KIDC] = p.k_po, p.k_io, p.k_pdc, p.k_idc
    row[K.G_FF] = p.ff_current
    row[K.G_SR] = m.mva / s_base
    return row


def _sg_row(m, s_base):
    p = m.params
    row = np.zeros(K.N_SPAR)
    row[K.S_XD], row[K.S_XQ], row[K.S_XDP], row[K.S_XQP] = p.xd, p.xq, p.xdp, p.xqp
    # stator uses a single subtransient reactance (xdpp); xqpp only enters the rotor circuit balance
    row[K.S_XPP], row[K.S_RA] = p.xdpp, p.ra
    row[K.S_TD0P], row[K.S_TQ0P], row[K.S_TD0PP], row[K.S_TQ0PP] = p.td0p, p.tq0p, p.td0pp, p.tq0pp
    row[K.S_H], row[K.S_D], row[K.S_XT], row[K.S_RT] = p.h, p.d, p.x_t, p.r_t
    row[K.S_KA], row[K.S_TA], row[K.S_RG], row[K.S_TG] = p.ka, p.ta, p.rg, p.tg
    row[K.S_SR] = m.mva / s_base
    return row


@dataclass
class AssembledModel:
    """Executable ``dx/dt = f(x, u, x_delayed)`` for one system in one framework."""
    spec: object
    framework: str
    states: StateIndexMap
    taps: list
    inputs: list
    outputs: list
    output_states: list
    net: object = field(repr=False)
    dnet: object = field(repr=False)
    pf: object = field(repr=False)
    arrays: dict = field(repr=False)
    g_sp: np.ndarray = field(repr=False)
    s_sp: np.ndarray = field(repr=False)
    machine_ids: list = field(default_factory=list)

    @property
    def n(self):
        return len(self.states)

    @property
    def gfc_ids(self):
        return [m.id for m in self.spec.gfcs]

    @property
    def sg_ids(self):
        return [m.id for m in self.spec.sgs]

    @property
    def n_aux(self):
        return K.N_GAUX * len(self.gfc_ids) + K.N_SAUX * len(self.sg_ids)

    @property
    def aux_names(self):
        names = []
        for gid in self.gfc_ids:
            names += [f"{gid}.omega_c", f"{gid}.p_meas", f"{gid}.v_grid"]
        for sid in self.sg_ids:
            names += [f"{sid}.omega", f"{sid}.t_elec", f"{sid}.v_term"]
        return names

    def bind(self, op):
        """Copy carrying the setpoints of operating point ``op``."""
        return replace(self, g_sp=np.array(op.g_sp, dtype=float), s_sp=np.array(op.s_sp, dtype=float))

    def kernel_args(self):
        a = self.arrays
        return (a["g_off"], a["g_bus"], a["g_par"], self.g_sp, a["s_off"], a["s_bus"], a["s_par"], self.s_sp,
                a["n_off"], a["A"], a["bus_row"], a["bus_coef"], a["Z"])

    def _eval(self, x, u, x_delayed):
        x = np.ascontiguousarray(x, dtype=float)
        ng = len(self.gfc_ids)
        u = np.zeros(len(self.inputs)) if u is None else np.asarray(u, dtype=float)
        use = self.arrays["use_delay"].copy()
        if x_delayed is None:
            pdel = np.zeros(max(ng, 1))
            use[:] = False
        else:
            pdel = np.zeros(max(ng, 1))
            pdel[:len(self.taps)] = np.asarray(x_delayed, dtype=float)
        dx = np.empty(self.n)
        aux = np.empty(self.n_aux)
        K.rhs(x, u, pdel, use, self.framework == "SPC", *self.kernel_args(), self.spec.omega_b, dx, aux)
        return dx, aux

    def residual(self, x, u=None, x_delayed=None, t=0.0):
        """State derivative; ``x_delayed`` holds the delayed value of each tap (None: no delay)."""
        return self._eval(x, u, x_delayed)[0]

    __call__ = residual

    def auxiliary(self, x, u=None, x_delayed=None):
        return dict(zip(self.aux_names, self._eval(x, u, x_delayed)[1]))

    def tap_values(self, x):
        return np.array([x[t.state] for t in self.taps])

    def output_matrix(self):
        C = np.zeros((len(self.outputs), self.n))
        for r, i in enumerate(self.output_states):
            C[r, i] = 1.0
        return C

    def input_names(self):
        return list(self.inputs)


def assemble(spec, pf=None, with_delay=True, rotation=True):
    """Build the executable model of ``spec`` in ``spec.framework``.

    ``pf`` fixes the constant-impedance equivalents of the loads (solved here if
    omitted). ``with_delay=False`` drops the droop delay taps entirely.
    """
    fw = spec.framework.upper()
    if fw not in ("SPC", "QPC"):
        raise ConfigError("framework must be SPC or QPC")
    if not spec.machines:
        raise ConfigError("system has no machines")
    slack = next(b for b in spec.buses if b.type == "SLACK")
    if slack.id not in {m.bus for m in spec.machines}:
        raise ConfigError("the slack bus must host a machine for dynamic studies")
    if pf is None:
        pf = run_power_flow(spec)
    wb = spec.omega_b
    net = expand(spec)
    load_y = load_admittances(net, pf.v)
    grid = net.grid_buses()
    local = {b: k for k, b in enumerate(grid)}

    def hv_bus(m):
        tr = next(t for t in spec.transformers if m.bus in (t.from_bus, t.to_bus))
        other = tr.to_bus if tr.from_bus == m.bus else tr.from_bus
        return local[net.index[other]]

    names, owner, area = [], [], []
    g_off, g_bus, g_rows, s_off, s_bus, s_rows = [], [], [], [], [], []
    n_sg_states = 10 if fw == "SPC" else 8
    gfcs, sgs = spec.gfcs, spec.sgs
    for m in gfcs:
        g_off.append(len(names))
        g_bus.append(hv_bus(m))
        g_rows.append(_gfc_row(m, wb, spec.s_base))
        a = spec.bus(m.bus).area
        for s in K.GFC_STATES:
            names.append(f"{m.id}.{s}")
            owner.append(m.id)
            area.append(a)
    for m in sgs:
        s_off.append(len(names))
        s_bus.append(hv_bus(m))
        s_rows.append(_sg_row(m, spec.s_base))
        a = spec.bus(m.bus).area
        for s in K.SG_STATES[:n_sg_states]:
            names.append(f"{m.id}.{s}")
            owner.append(m.id)
            area.append(a)
    n_off = len(names)
    nb = len(grid)
    bus_row = np.zeros(nb, dtype=np.int64)
    bus_coef = np.zeros(nb)
    dnet = None
    if fw == "SPC":
        dnet = dynamic_network(net, load_y, wb, rotation=rotation)
        for b in grid:
            bus_row[local[b]] = dnet.bus_row[b]
            bus_coef[local[b]] = dnet.bus_coef[b]
        for lab in dnet.labels:
            for ax in ("D", "Q"):
                names.append(f"net.{lab}.{ax}")
                owner.append("")
                area.append(0)
        A = np.ascontiguousarray(dnet.A)
        Z = np.zeros((0, 0), dtype=complex)
    else:
        Y = ybus(net, load_y, exclude_machine_xfmr=True)
        Yg = Y[np.ix_(grid, grid)].copy()
        for m, row in zip(sgs, s_rows):
            Yg[hv_bus(m), hv_bus(m)] += row[K.S_SR] / complex(row[K.S_RA] + row[K.S_RT], row[K.S_XPP] + row[K.S_XT])
        try:
            Z = np.linalg.inv(Yg)
        except np.linalg.LinAlgError as exc:
            raise ConfigError("QPC admittance matrix is singular (islanded network?)") from exc
        A = np.zeros((0, 0), dtype=complex)
    states = StateIndexMap(names, owner, area)

    taps = []
    use_delay = np.zeros(max(len(gfcs), 1), dtype=np.bool_)
    if with_delay:
        for g, m in enumerate(gfcs):
            i = g_off[g] + K.PF
            taps.append(DelayTap(names[i], i, float(m.params.tau_p), m.id))
            use_delay[g] = True
    inputs = [f"{m.id}.dP_ref" for m in gfcs] + [f"{m.id}.dP_ref" for m in sgs]
    outputs, out_states = [], []
    for g, m in enumerate(gfcs):
        for s in ("vdc", "it_d", "it_q"):
            outputs.append(f"{m.id}.{s}")
            out_states.append(g_off[g] + K.GFC_STATES.index(s))
    for k, m in enumerate(sgs):
        outputs.append(f"{m.id}.omega")
        out_states.append(s_off[k] + K.OMEGA)

    g_sp = np.zeros((len(gfcs), 3))
    for g, m in enumerate(gfcs):
        g_sp[g] = [m.p or 0.0, 1.0, m.params.v_dc]
    s_sp = np.zeros((len(sgs), 2))
    s_sp[:, 0] = 1.0

    def arr(v, dtype, shape=None):
        a = np.array(v, dtype=dtype)
        return a.reshape(shape) if shape is not None and a.size == 0 else a

    arrays = {
        "g_off": arr(g_off, np.int64), "g_bus": arr(g_bus, np.int64),
        "g_par": arr(g_rows, float, (0, K.N_GPAR)),
        "s_off": arr(s_off, np.int64), "s_bus": arr(s_bus, np.int64),
        "s_par": arr(s_rows, float, (0, K.N_SPAR)),
        "n_off": n_off, "A": A, "bus_row": bus_row, "bus_coef": bus_coef, "Z": np.ascontiguousarray(Z),
        "use_delay": use_delay, "local_bus": local,
    }
    return AssembledModel(spec, fw, states, taps, inputs, outputs, out_states, net, dnet, pf, arrays,
                          g_sp.reshape(-1, 3), s_sp.reshape(-1, 2), [m.id for m in spec.machines])


def gfc_residual(x_gfc, v_grid_DQ, x_delayed, params, p_star, v_star, omega_b=2 * math.pi * 60.0, du=0.0,
                 mva=100.0, s_base=100.0):
    """Single-GFC evaluation: returns (state derivatives, injected current in D-Q, omega_c).

    ``x_delayed`` is the delayed filtered power (None: use the undelayed filter state).
    """
    from ..netmodel.system import Machine
    x = np.ascontiguousarray(x_gfc, dtype=float)
    row = _gfc_row(Machine("gfc", 0, "GFC", mva, params=params), omega_b, s_base)
    sp = np.array([p_star, v_star, params.v_dc])
    pdel = x[K.PF] if x_delayed is None else float(x_delayed)
    dx = np.zeros(len(K.GFC_STATES))
    aux = np.zeros(K.N_GAUX)
    v = complex(v_grid_DQ)
    i = K.gfc_eval(x, 0, v.real, v.imag, pdel, du, row, sp, omega_b, dx, aux, 0)
    return dx, i, aux[0]


def sg_residual(x_sg, v_grid_DQ, params, v_ref, p_ref, framework="SPC", omega_b=2 * math.pi * 60.0, du=0.0,
                mva=100.0, s_base=100.0):
    """Single-SG evaluation: returns (state derivatives, injected current in D-Q)."""
    from ..netmodel.system import Machine
    spc = framework.upper() == "SPC"
    n = 10 if spc else 8
    x = np.zeros(10)
    x[:n] = np.asarray(x_sg, dtype=float)[:n]
    row = _sg_row(Machine("sg", 0, "SG", mva, params=params), s_base)
    dx = np.zeros(10)
    aux = np.zeros(K.N_SAUX)
    v = complex(v_grid_DQ)
    i = K.sg_eval(x, 0, v.real, v.imag, spc, du, row, np.array([v_ref, p_ref]), omega_b, dx, aux, 0)
    return dx[:n], i
