"""Expanded electrical network: pi-section expansion, bus admittance matrix, dynamic network matrices."""
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SeriesElement:
    name: str
    f: int          # bus index
    t: int
    r: float
    x: float
    ratio: float = 1.0
    kind: str = "line"          # line | xfmr | machine_xfmr
    parent: str = ""
    tie_end: bool = False       # first section of a tie branch (flow measured at its from end)


@dataclass
class ExpandedNetwork:
    """Bus/branch view after splitting long lines into pi sections (system per unit)."""
    bus_ids: list
    area: list
    shunt_b: np.ndarray
    series: list
    load_bus: list
    load_pq: list
    load_dynamic: list
    machine_bus: list           # indices of machine terminal (LV) buses
    index: dict = field(default_factory=dict)

    @property
    def n_bus(self):
        return len(self.bus_ids)

    def grid_buses(self):
        """Indices of buses that remain in the dynamic network (machine terminals are absorbed)."""
        mb = set(self.machine_bus)
        return [i for i in range(self.n_bus) if i not in mb]


def expand(spec):
    bus_ids = [b.id for b in spec.buses]
    area = [b.area for b in spec.buses]
    index = {bid: i for i, bid in enumerate(bus_ids)}
    shunt = [0.0] * len(bus_ids)
    series = []
    net = spec.network
    for br in spec.branches:
        n = br.sections
        if n is None:
            long = br.length_km is not None and br.length_km >= net["long_line_km"]
            n = int(net["long_line_sections"]) if long else 1
        nodes = [index[br.from_bus]]
        for k in range(1, n):
            label = f"{br.id}:{k}"
            index[label] = len(bus_ids)
            bus_ids.append(label)
            a_f, a_t = spec.bus(br.from_bus).area, spec.bus(br.to_bus).area
            area.append(a_f if k <= n / 2 else a_t)
            shunt.append(0.0)
            nodes.append(index[label])
        nodes.append(index[br.to_bus])
        for k in range(n):
            name = br.id if n == 1 else f"{br.id}/s{k + 1}"
            series.append(SeriesElement(name, nodes[k], nodes[k + 1], br.r / n, br.x / n, 1.0, "line",
                                        br.id, br.tie and k == 0))
            shunt[nodes[k]] += br.b / n / 2
            shunt[nodes[k + 1]] += br.b / n / 2
    machine_buses = {m.bus for m in spec.machines}
    for tr in spec.transformers:
        kind = "machine_xfmr" if (tr.from_bus in machine_buses or tr.to_bus in machine_buses) else "xfmr"
        series.append(SeriesElement(tr.id, index[tr.from_bus], index[tr.to_bus], tr.r, tr.x, tr.ratio, kind, tr.id))
    load_bus, load_pq, load_dyn = [], [], []
    for ld in spec.loads:
        shunt[index[ld.bus]] += ld.qc
        load_bus.append(index[ld.bus])
        load_pq.append(complex(ld.p, ld.q))
        load_dyn.append(ld.model == "dynamic")
    mb_idx = [index[m.bus] for m in spec.machines]
    mbset = set(mb_idx)
    for i in range(len(bus_ids)):
        if i not in mbset and shunt[i] == 0.0:
            shunt[i] = float(net["min_shunt_b"])
    return ExpandedNetwork(bus_ids, area, np.array(shunt), series, load_bus, load_pq, load_dyn, mb_idx, index)


def series_admittance(el):
    return 1.0 / complex(el.r, el.x)


def ybus(net, load_admittance=None, extra_shunt=None, exclude_machine_xfmr=False):
    """Complex bus admittance matrix.

    ``load_admittance`` (per load) and ``extra_shunt`` (per bus) are added on
    the diagonal; with ``exclude_machine_xfmr`` the step-up transformers are left out.
    """
    n = net.n_bus
    Y = np.zeros((n, n), dtype=complex)
    for el in net.series:
        if exclude_machine_xfmr and el.kind == "machine_xfmr":
            continue
        y = series_admittance(el)
        t = el.ratio
        Y[el.f, el.f] += y / t ** 2
        Y[el.t, el.t] += y
        Y[el.f, el.t] -= y / t
        Y[el.t, el.f] -= y / t
    Y[np.diag_indices(n)] += 1j * net.shunt_b
    if load_admittance is not None:
        for b, y in zip(net.load_bus, load_admittance):
            Y[b, b] += y
    if extra_shunt is not None:
        Y[np.diag_indices(n)] += extra_shunt
    return Y


def load_admittances(net, v_mag):
    """Constant-impedance equivalent of each load at the solved bus voltage magnitude."""
    return [np.conj(s) / v_mag[b] ** 2 for b, s in zip(net.load_bus, net.load_pq)]


def realify(M):
    """Real 2n x 2n matrix acting on interleaved (re, im) pairs for a complex matrix M."""
    M = np.asarray(M, dtype=complex)
    n, m = M.shape
    R = np.zeros((2 * n, 2 * m))
    R[0::2, 0::2] = M.real
    R[0::2, 1::2] = -M.imag
    R[1::2, 0::2] = M.imag
    R[1::2, 1::2] = M.real
    return R


@dataclass
class DynamicNetwork:
    """Linear SPC network ``dz/dt = A z + sum_k coef_k * I_k e_{row_k}`` in complex form.

    Elements are RL branch currents, bus capacitor voltages and dynamic RL
    load currents, all in the synchronously rotating D-Q frame.
    """
    labels: list
    kinds: list                 # "branch" | "shunt" | "load"
    A: np.ndarray               # complex n x n
    bus_row: dict               # expanded bus index -> element row holding its voltage
    bus_coef: dict              # expanded bus index -> omega_b / B

    @property
    def n(self):
        return len(self.labels)


def _bus_label(bid):
    return str(bid)


def dynamic_network(net, load_y, omega_b, rotation=True):
    """Assemble the SPC network matrices (machine step-up transformers excluded)."""
    grid = net.grid_buses()
    labels, kinds = [], []
    rows = {}
    branches = [el for el in net.series if el.kind != "machine_xfmr"]
    for el in branches:
        if el.ratio != 1.0:
            raise ValueError(f"unit mismatch: dynamic network needs unity-ratio transformer {el.name}")
        if el.x <= 0:
            raise ValueError(f"branch {el.name} needs x > 0 in SPC")
        labels.append(f"i[{el.name}]")
        kinds.append("branch")
    for b in grid:
        rows[b] = len(labels)
        labels.append(f"v[{_bus_label(net.bus_ids[b])}]")
        kinds.append("shunt")
    dyn_loads = []
    static_y = np.zeros(net.n_bus, dtype=complex)
    for k, (b, y) in enumerate(zip(net.load_bus, load_y)):
        z = 1.0 / y if y != 0 else 0.0
        if net.load_dynamic[k] and y != 0 and z.imag > 0:
            dyn_loads.append((k, b, z))
            labels.append(f"iload[{_bus_label(net.bus_ids[b])}]")
            kinds.append("load")
        else:
            static_y[b] += y
    n = len(labels)
    A = np.zeros((n, n), dtype=complex)
    rot = 1j if rotation else 0.0
    for k, el in enumerate(branches):
        L = el.x / omega_b
        A[k, rows[el.f]] += 1.0 / L
        A[k, rows[el.t]] -= 1.0 / L
        A[k, k] -= (el.r + rot * el.x) / L
        # KCL: current leaves f, enters t
        A[rows[el.f], k] -= omega_b / net.shunt_b[el.f]
        A[rows[el.t], k] += omega_b / net.shunt_b[el.t]
    for b in grid:
        r = rows[b]
        C = net.shunt_b[b] / omega_b
        A[r, r] -= (rot * net.shunt_b[b] + static_y[b]) / C
    off = len(branches) + len(grid)
    for j, (k, b, z) in enumerate(dyn_loads):
        r = off + j
        L = z.imag / omega_b
        A[r, rows[b]] += 1.0 / L
        A[r, r] -= (z.real + rot * z.imag) / L
        A[rows[b], r] -= omega_b / net.shunt_b[b]
    coef = {b: omega_b / net.shunt_b[b] for b in grid}
    return DynamicNetwork(labels, kinds, A, rows, coef)


def network_residual(x_net, injections, dnet, framework="SPC", zbus=None):
    """Network equations.

    SPC: returns ``dz/dt`` (complex per element) for element states ``x_net`` and
    bus current injections ``injections`` (dict bus index -> complex current).
    QPC: returns bus voltages ``zbus @ I`` (``x_net`` unused).
    """
    if framework.upper() == "QPC":
        I = np.zeros(zbus.shape[0], dtype=complex)
        for b, i in injections.items():
            I[b] += i
        return zbus @ I
    z = np.asarray(x_net, dtype=complex)
    dz = dnet.A @ z
    for b, i in injections.items():
        dz[dnet.bus_row[b]] += dnet.bus_coef[b] * i
    return dz


def tie_flow(net, v):
    """Active power (pu) leaving the from-end of every tie-flagged section."""
    p = 0.0
    for el in net.series:
        if el.tie_end:
            i = (v[el.f] - v[el.t]) * series_admittance(el)
            p += (v[el.f] * np.conj(i)).real
    return p


__all__ = ["SeriesElement", "ExpandedNetwork", "expand", "ybus", "load_admittances", "realify",
           "DynamicNetwork", "dynamic_network", "network_residual", "tie_flow"]
