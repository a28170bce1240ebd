"""Declarative system description and JSON config ingestion."""
from dataclasses import dataclass, field, asdict, fields, replace
import json
import math
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Schema violation or physically inconsistent system description."""


FRAMEWORKS = ("SPC", "QPC")


@dataclass(frozen=True)
class GfcParams:
    """Grid-forming converter parameters, per unit on the converter rating.

    Gains are in per unit with integrator gains per second. The defaults put
    the case-4 SPC model close to the edge of a ~42 Hz oscillation at zero delay.
    """
    x_f: float = 0.08
    r_f: float = 0.003
    b_f: float = 0.074
    x_t: float = 0.15
    r_t: float = 0.0
    c_dc: float = 2.0
    v_dc: float = 1.0
    m_p: float = 0.03
    omega_star: float = 1.0
    p_star: float | None = None        # filled from the power flow when None
    v_star: float | None = None        # filled from the power flow when None
    omega_f: float = 2 * math.pi * 60.0
    tau_p: float = 0.002
    k_pc: float = 2.0
    k_ic: float = 1.19
    k_pv: float = 0.5
    k_iv: float = 4000.0
    k_po: float = 0.05
    k_io: float = 2 * math.pi * 4.0
    k_pdc: float = 2.0
    k_idc: float = 50.0
    ff_current: float = 0.0            # share of transformer current fed forward into the filter-current reference
    i_max: float = 1.5                 # converter current limit checked at initialization

    def validate(self):
        for name in ("x_f", "r_f", "b_f", "x_t", "c_dc", "v_dc", "omega_f"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"GFC parameter {name} must be > 0")
        if self.r_t < 0:
            raise ConfigError("GFC parameter r_t must be >= 0")
        if not self.m_p > 0:
            raise ConfigError("GFC droop gain m_p must be > 0")
        if not self.tau_p >= 0:
            raise ConfigError("GFC delay tau_p must be >= 0")
        for name in ("k_pc", "k_ic", "k_pv", "k_iv", "k_po", "k_io", "k_pdc", "k_idc", "i_max"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"GFC gain {name} must be >= 0")


@dataclass(frozen=True)
class SgParams:
    """Sixth-order synchronous machine with static exciter and governor (machine base)."""
    xd: float = 1.8
    xq: float = 1.7
    xl: float = 0.2
    xdp: float = 0.3
    xqp: float = 0.55
    xdpp: float = 0.25
    xqpp: float = 0.25
    ra: float = 0.0025
    td0p: float = 8.0
    tq0p: float = 0.4
    td0pp: float = 0.03
    tq0pp: float = 0.05
    h: float = 6.5
    d: float = 0.0
    x_t: float = 0.15
    r_t: float = 0.0
    ka: float = 200.0
    ta: float = 0.02
    rg: float = 0.05
    tg: float = 0.5

    def validate(self):
        if not (self.xd >= self.xdp >= self.xdpp > 0):
            raise ConfigError("SG reactances must satisfy xd >= xdp >= xdpp > 0")
        if not (self.xq >= self.xqp >= self.xqpp > 0):
            raise ConfigError("SG reactances must satisfy xq >= xqp >= xqpp > 0")
        for name in ("td0p", "tq0p", "td0pp", "tq0pp", "h", "ta", "tg", "rg"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"SG parameter {name} must be > 0")
        if min(self.ra, self.r_t, self.d) < 0:
            raise ConfigError("SG resistances and damping must be >= 0")


@dataclass(frozen=True)
class Bus:
    id: int
    kv: float
    type: str = "PQ"
    v: float = 1.0
    angle: float = 0.0
    area: int = 1


@dataclass(frozen=True)
class Branch:
    id: str
    from_bus: int
    to_bus: int
    r: float
    x: float
    b: float = 0.0
    sections: int | None = None
    length_km: float | None = None
    tie: bool = False


@dataclass(frozen=True)
class Transformer:
    id: str
    from_bus: int
    to_bus: int
    r: float
    x: float
    ratio: float = 1.0


@dataclass(frozen=True)
class Load:
    bus: int
    p: float
    q: float
    qc: float = 0.0
    model: str = "dynamic"


@dataclass(frozen=True)
class Machine:
    id: str
    bus: int
    kind: str
    mva: float
    p: float | None = None
    params: object = None


DEFAULT_NETWORK = {
    "long_line_km": 100.0,
    "long_line_sections": 2,
    "min_shunt_b": 1e-3,
    "pade_order": 2,
}


@dataclass(frozen=True)
class SystemSpec:
    buses: tuple
    branches: tuple
    transformers: tuple
    loads: tuple
    machines: tuple
    framework: str = "SPC"
    name: str = "system"
    case: int | None = None
    s_base: float = 100.0
    f_base: float = 60.0
    network: dict = field(default_factory=lambda: dict(DEFAULT_NETWORK))
    gfc_defaults: GfcParams = field(default_factory=GfcParams)
    sg_defaults: SgParams = field(default_factory=SgParams)
    notes: str = ""

    @property
    def omega_b(self):
        return 2 * math.pi * self.f_base

    @property
    def gfcs(self):
        return [m for m in self.machines if m.kind == "GFC"]

    @property
    def sgs(self):
        return [m for m in self.machines if m.kind == "SG"]

    def bus(self, bus_id):
        for b in self.buses:
            if b.id == bus_id:
                return b
        raise KeyError(bus_id)

    def area_of(self, machine_id):
        m = next(m for m in self.machines if m.id == machine_id)
        return self.bus(m.bus).area

    def with_framework(self, framework):
        framework = framework.upper()
        if framework not in FRAMEWORKS:
            raise ConfigError(f"framework must be one of {FRAMEWORKS}")
        return replace(self, framework=framework)

    def with_gfc(self, **changes):
        """Apply parameter changes to every GFC (and the GFC defaults)."""
        ms = tuple(replace(m, params=replace(m.params, **changes)) if m.kind == "GFC" else m
                   for m in self.machines)
        return replace(self, machines=ms, gfc_defaults=replace(self.gfc_defaults, **changes))

    def with_tau(self, tau_p):
        return self.with_gfc(tau_p=float(tau_p))


def _require(doc, key, where="document"):
    if key not in doc:
        raise ConfigError(f"schema violation: {where} missing required key '{key}'")
    return doc[key]


def _num(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"schema violation: '{name}' must be a number, got {value!r}")
    return float(value)


def _params(cls, base, overrides, where):
    overrides = dict(overrides or {})
    names = {f.name for f in fields(cls)}
    unknown = set(overrides) - names
    if unknown:
        raise ConfigError(f"schema violation: unknown {cls.__name__} field(s) {sorted(unknown)} in {where}")
    for k, v in overrides.items():
        if v is not None:
            _num(v, f"{where}.{k}")
    return replace(base, **overrides)


def parse_system(document):
    """Build and validate a :class:`SystemSpec` from a JSON string, path, or dict."""
    if isinstance(document, (str, Path)) and not str(document).lstrip().startswith("{"):
        with open(document) as fh:
            doc = json.load(fh)
    elif isinstance(document, str):
        doc = json.loads(document)
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ConfigError("schema violation: top level must be an object")

    defaults = doc.get("defaults", {}) or {}
    net = dict(DEFAULT_NETWORK)
    net.update(defaults.get("network", {}) or {})
    gfc_def = _params(GfcParams, GfcParams(), defaults.get("gfc"), "defaults.gfc")
    sg_def = _params(SgParams, SgParams(), defaults.get("sg"), "defaults.sg")
    base = doc.get("base", {}) or {}
    s_base = _num(base.get("s_base", 100.0), "base.s_base")
    f_base = _num(base.get("f_base", 60.0), "base.f_base")

    buses = []
    for i, b in enumerate(_require(doc, "buses")):
        where = f"buses[{i}]"
        btype = str(b.get("type", "PQ")).upper()
        if btype not in ("SLACK", "PV", "PQ"):
            raise ConfigError(f"schema violation: {where}.type must be slack/PV/PQ")
        buses.append(Bus(id=int(_require(b, "id", where)), kv=_num(b.get("kv", 230.0), where + ".kv"),
                         type=btype, v=_num(b.get("v", 1.0), where + ".v"),
                         angle=_num(b.get("angle", 0.0), where + ".angle"), area=int(b.get("area", 1))))
    branches = []
    for i, br in enumerate(_require(doc, "branches")):
        where = f"branches[{i}]"
        f, t = int(_require(br, "from", where)), int(_require(br, "to", where))
        sec = br.get("sections")
        branches.append(Branch(id=str(br.get("id", f"{f}-{t}")), from_bus=f, to_bus=t,
                               r=_num(_require(br, "r", where), where + ".r"),
                               x=_num(_require(br, "x", where), where + ".x"),
                               b=_num(br.get("b", 0.0), where + ".b"),
                               sections=None if sec is None else int(sec),
                               length_km=None if br.get("length_km") is None
                               else _num(br["length_km"], where + ".length_km"),
                               tie=bool(br.get("tie", False))))
    transformers = []
    for i, tr in enumerate(_require(doc, "transformers")):
        where = f"transformers[{i}]"
        f, t = int(_require(tr, "from", where)), int(_require(tr, "to", where))
        scale = s_base / _num(tr["base_mva"], where + ".base_mva") if "base_mva" in tr else 1.0
        transformers.append(Transformer(id=str(tr.get("id", f"T{f}-{t}")), from_bus=f, to_bus=t,
                                        r=_num(tr.get("r", 0.0), where + ".r") * scale,
                                        x=_num(_require(tr, "x", where), where + ".x") * scale,
                                        ratio=_num(tr.get("ratio", 1.0), where + ".ratio")))
    loads = []
    for i, ld in enumerate(_require(doc, "loads")):
        where = f"loads[{i}]"
        model = str(ld.get("model", "dynamic")).lower()
        if model not in ("static", "dynamic"):
            raise ConfigError(f"schema violation: {where}.model must be static/dynamic")
        loads.append(Load(bus=int(_require(ld, "bus", where)), p=_num(_require(ld, "p", where), where + ".p"),
                          q=_num(ld.get("q", 0.0), where + ".q"), qc=_num(ld.get("qc", 0.0), where + ".qc"),
                          model=model))
    machines = []
    for i, m in enumerate(_require(doc, "machines")):
        where = f"machines[{i}]"
        kind = str(_require(m, "kind", where)).upper()
        if kind not in ("SG", "GFC"):
            raise ConfigError(f"schema violation: {where}.kind must be SG or GFC")
        params = _params(GfcParams if kind == "GFC" else SgParams,
                         gfc_def if kind == "GFC" else sg_def, m.get("params"), where + ".params")
        machines.append(Machine(id=str(_require(m, "id", where)), bus=int(_require(m, "bus", where)), kind=kind,
                                mva=_num(_require(m, "mva", where), where + ".mva"),
                                p=None if m.get("p") is None else _num(m["p"], where + ".p"), params=params))

    framework = str(_require(doc, "framework")).upper()
    if framework not in FRAMEWORKS:
        raise ConfigError(f"schema violation: framework must be one of {FRAMEWORKS}")
    spec = SystemSpec(buses=tuple(buses), branches=tuple(branches), transformers=tuple(transformers),
                      loads=tuple(loads), machines=tuple(machines), framework=framework,
                      name=str(doc.get("name", "system")), case=doc.get("case"), s_base=s_base, f_base=f_base,
                      network=net, gfc_defaults=gfc_def, sg_defaults=sg_def, notes=str(doc.get("notes", "")))
    spec = _absorb_machine_transformers(spec)
    validate(spec)
    return spec


def _absorb_machine_transformers(spec):
    """Copy each machine's step-up transformer impedance into its parameter block (machine base)."""
    ms = []
    for m in spec.machines:
        trs = [t for t in spec.transformers if m.bus in (t.from_bus, t.to_bus)]
        if len(trs) == 1:
            t = trs[0]
            k = m.mva / spec.s_base
            ms.append(replace(m, params=replace(m.params, x_t=t.x * k, r_t=t.r * k)))
        else:
            ms.append(m)
    return replace(spec, machines=tuple(ms))


def validate(spec):
    ids = [b.id for b in spec.buses]
    if len(set(ids)) != len(ids):
        raise ConfigError("duplicate bus id")
    idset = set(ids)
    slack = [b for b in spec.buses if b.type == "SLACK"]
    if len(slack) != 1:
        raise ConfigError(f"no angle reference: exactly one slack bus required, found {len(slack)}")
    for el in list(spec.branches) + list(spec.transformers):
        if el.from_bus not in idset or el.to_bus not in idset:
            raise ConfigError(f"element {el.id} references unknown bus")
        if el.r < 0 or el.x < 0 or getattr(el, "b", 0.0) < 0:
            raise ConfigError(f"negative impedance in element {el.id}")
        if el.x == 0 and el.r == 0:
            raise ConfigError(f"zero impedance in element {el.id}")
    for b in spec.branches:
        if b.sections is not None and b.sections < 1:
            raise ConfigError(f"branch {b.id}: sections must be >= 1")
    for ld in spec.loads:
        if ld.bus not in idset:
            raise ConfigError("load references unknown bus")
        if ld.p < 0 or ld.qc < 0:
            raise ConfigError(f"invalid load at bus {ld.bus}")
    seen = set()
    for m in spec.machines:
        if m.bus in seen:
            raise ConfigError(f"duplicate machine at bus {m.bus}")
        seen.add(m.bus)
        if m.bus not in idset:
            raise ConfigError(f"machine {m.id} references unknown bus")
        if not m.mva > 0:
            raise ConfigError(f"machine {m.id}: rating must be > 0")
        if spec.bus(m.bus).type == "PQ":
            raise ConfigError(f"machine {m.id} sits on a PQ bus")
        m.params.validate()
        trs = [t for t in spec.transformers if m.bus in (t.from_bus, t.to_bus)]
        if len(trs) != 1 or any(br for br in spec.branches if m.bus in (br.from_bus, br.to_bus)):
            raise ConfigError(f"machine {m.id}: terminal bus must connect to the grid through exactly one transformer")
        if trs[0].ratio != 1.0:
            raise ConfigError(f"machine {m.id}: unit mismatch, step-up transformer ratio must be 1.0 pu")
    for b in spec.buses:
        if b.type == "PV" and b.id not in seen:
            raise ConfigError(f"bus {b.id} is PV but hosts no machine")
    _check_connected(spec)


def _check_connected(spec):
    adj = {b.id: set() for b in spec.buses}
    for el in list(spec.branches) + list(spec.transformers):
        adj[el.from_bus].add(el.to_bus)
        adj[el.to_bus].add(el.from_bus)
    start = spec.buses[0].id
    stack, seen = [start], {start}
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    if len(seen) != len(adj):
        raise ConfigError(f"disconnected graph: buses {sorted(set(adj) - seen)} unreachable")


def _clean(d):
    return {k: v for k, v in d.items() if v is not None}


def to_document(spec):
    """Serialize back to the config schema with every default filled in."""
    gdef, sdef = asdict(spec.gfc_defaults), asdict(spec.sg_defaults)
    doc = {
        "name": spec.name,
        "case": spec.case,
        "framework": spec.framework,
        "base": {"s_base": spec.s_base, "f_base": spec.f_base},
        "notes": spec.notes,
        "defaults": {"network": dict(spec.network), "gfc": _clean(gdef), "sg": _clean(sdef)},
        "buses": [{"id": b.id, "kv": b.kv, "type": b.type, "v": b.v, "angle": b.angle, "area": b.area}
                  for b in spec.buses],
        "branches": [_clean({"id": b.id, "from": b.from_bus, "to": b.to_bus, "r": b.r, "x": b.x, "b": b.b,
                             "sections": b.sections, "length_km": b.length_km, "tie": b.tie})
                     for b in spec.branches],
        "transformers": [{"id": t.id, "from": t.from_bus, "to": t.to_bus, "r": t.r, "x": t.x, "ratio": t.ratio}
                         for t in spec.transformers],
        "loads": [{"bus": l.bus, "p": l.p, "q": l.q, "qc": l.qc, "model": l.model}
                  for l in spec.loads],
        "machines": [_clean({"id": m.id, "bus": m.bus, "kind": m.kind, "mva": m.mva, "p": m.p,
                             "params": _clean(asdict(m.params))}) for m in spec.machines],
    }
    return doc


def dumps(spec):
    return json.dumps(to_document(spec), indent=2, sort_keys=True)


def parameter_hash(spec):
    """Deterministic short hash of the full resolved parameter set."""
    import hashlib
    return hashlib.sha256(dumps(spec).encode()).hexdigest()[:16]


def data_path(name):
    return Path(__file__).resolve().parent.parent / "data" / name


def load_case(n_or_name, framework=None):
    """Load a bundled case (``1``..``4`` or a file name in the data directory)."""
    name = f"case{n_or_name}.json" if isinstance(n_or_name, int) else str(n_or_name)
    spec = parse_system(data_path(name))
    return spec if framework is None else spec.with_framework(framework)


def machine_area_map(spec):
    return {m.id: spec.bus(m.bus).area for m in spec.machines}


__all__ = ["ConfigError", "GfcParams", "SgParams", "Bus", "Branch", "Transformer", "Load", "Machine",
           "SystemSpec", "parse_system", "to_document", "dumps", "validate", "load_case", "parameter_hash",
           "machine_area_map"]
