"""Nonlinear time-domain simulation: fixed-step RK4 with ring-buffer delays."""
from dataclasses import dataclass, field, asdict
import math
from pathlib import Path

import numpy as np

from .dynamics import kernels as K
from .netmodel.system import ConfigError
from .output import write_csv, write_json

KINDS = {"step": 0, "pulse": 1, "sine": 2}
DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class Disturbance:
    """Additive modulation of one input: ``step`` from t0, ``pulse`` on [t0, t1), ``sine`` on [t0, t1)."""
    input: str
    kind: str = "pulse"
    magnitude: float = 0.02
    t0: float = 0.1
    t1: float = 0.2
    freq_hz: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown disturbance kind {self.kind!r}")
        if self.t0 < 0 or (self.kind != "step" and self.t1 < self.t0):
            raise ConfigError("disturbance window must satisfy 0 <= t0 <= t1")


@dataclass
class Scenario:
    duration: float = 5.0
    step: float = 50e-6
    decimation: int = 10
    disturbances: tuple = ()
    name: str = "scenario"

    def __post_init__(self):
        if self.duration <= 0 or self.step <= 0:
            raise ConfigError("duration and step must be positive")
        if int(self.decimation) < 1:
            raise ConfigError("decimation must be >= 1")
        self.decimation = int(self.decimation)
        self.disturbances = tuple(self.disturbances)

    def to_dict(self):
        d = asdict(self)
        d["disturbances"] = [asdict(x) for x in self.disturbances]
        return d


def pulse_scenario(input_name, magnitude=0.02, t0=0.1, width=0.1, duration=5.0, **kw):
    return Scenario(duration=duration, disturbances=(Disturbance(input_name, "pulse", magnitude, t0, t0 + width),),
                    name=f"pulse:{input_name}", **kw)


@dataclass
class TimeSeries:
    t: np.ndarray
    channels: dict
    units: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    diverged: bool = False

    def __post_init__(self):
        n = len(self.t)
        for k, v in self.channels.items():
            if len(v) != n:
                raise ValueError(f"channel {k} has length {len(v)}, expected {n}")

    def __getitem__(self, name):
        return self.channels[name]

    def __contains__(self, name):
        return name in self.channels

    @property
    def dt(self):
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    def write(self, path, names=None):
        """timeseries.csv plus a ``.meta.json`` sidecar next to it."""
        path = Path(path)
        names = list(self.channels) if names is None else list(names)
        header = ["time_s"] + [f"{n} [{self.units.get(n, 'pu')}]" for n in names]
        cols = [self.t] + [self.channels[n] for n in names]
        write_csv(path, header, zip(*cols))
        meta = dict(self.meta, diverged=self.diverged, channels=names,
                    units={n: self.units.get(n, "pu") for n in names})
        write_json(path.with_suffix(".meta.json"), meta)
        return path


class DelayBuffer:
    """Pure transport delay of a sampled signal, served by the same ring buffer as the simulator."""

    def __init__(self, tau, h, y0=0.0):
        if tau < 0 or h <= 0:
            raise ValueError("need tau >= 0 and h > 0")
        self.tau, self.h, self.y0 = float(tau), float(h), float(y0)
        self.buf = np.full(int(math.ceil(tau / h)) + 4, self.y0)
        self.k = -1

    def push(self, value):
        self.k += 1
        self.buf[self.k % self.buf.size] = value

    def read(self, t=None):
        """Delayed value at time ``t`` (defaults to the time of the latest sample)."""
        t = self.k * self.h if t is None else t
        if self.tau == 0:
            return self.buf[self.k % self.buf.size]
        return K._read_delayed(self.buf, self.k, t, self.tau, self.h, self.y0)


def _disturbance_arrays(model, scn):
    idx, kind, mag, t0, t1, fr = [], [], [], [], [], []
    for d in scn.disturbances:
        if d.input not in model.inputs:
            raise ConfigError(f"unknown input {d.input!r}; available: {model.inputs}")
        idx.append(model.inputs.index(d.input))
        kind.append(KINDS[d.kind])
        mag.append(d.magnitude)
        t0.append(d.t0)
        t1.append(math.inf if d.kind == "step" else d.t1)
        fr.append(d.freq_hz)
    return (np.array(idx, dtype=np.int64), np.array(kind, dtype=np.int64), np.array(mag, dtype=float),
            np.array(t0, dtype=float), np.array(t1, dtype=float), np.array(fr, dtype=float))


def simulate(model, op, scn=None, x0=None):
    """Integrate ``model`` from the equilibrium ``op`` under scenario ``scn``.

    Every state and auxiliary quantity is recorded every ``scn.decimation`` steps.
    """
    scn = Scenario() if scn is None else scn
    taus = np.array([t.delay for t in model.taps], dtype=float)
    for tau in taus:
        if tau > 0 and scn.step > tau / 4 + 1e-15:
            raise ConfigError(f"step {scn.step:g} s exceeds a quarter of the delay {tau:g} s")
    tap_state = np.array([t.state for t in model.taps], dtype=np.int64)
    # a zero delay reads the live state so that the result matches the delay-free model exactly
    use = model.arrays["use_delay"].copy()
    for j, tau in enumerate(taus):
        if tau == 0:
            use[j] = False
    x0 = np.array(op.x0 if x0 is None else x0, dtype=float)
    n_steps = int(round(scn.duration / scn.step))
    X, AUX, rec, diverged = K.integrate(
        x0, len(model.inputs), n_steps, scn.step, scn.decimation,
        tap_state, taus, use, model.framework == "SPC",
        *model.kernel_args(), model.spec.omega_b, *_disturbance_arrays(model, scn))
    t = np.arange(rec) * scn.step * scn.decimation
    channels, units = {}, {}
    for i, name in enumerate(model.states.names):
        channels[name] = X[:, i]
        units[name] = "rad" if name.endswith(".theta") or name.endswith(".delta") else "pu"
    for i, name in enumerate(model.aux_names):
        channels[name] = AUX[:, i]
        units[name] = "pu"
    from .netmodel.system import parameter_hash
    meta = {"scenario": scn.to_dict(), "framework": model.framework,
            "tau_p_s": float(taus.max()) if taus.size else 0.0,
            "parameter_hash": parameter_hash(model.spec), "integrator": "RK4",
            "f_base": model.spec.f_base,
            "machine_base": {m.id: m.mva / model.spec.s_base for m in model.spec.machines}}
    return TimeSeries(t, channels, units, meta, bool(diverged))


def derive_channel(series, kind, machine):
    """Post-processed channel: ``frequency`` in Hz, ``power`` in pu, or ``voltage-mag`` in pu."""
    f_base = series.meta.get("f_base", 60.0)
    if kind == "frequency":
        for src in (f"{machine}.omega_c", f"{machine}.omega"):
            if src in series:
                return series[src] * f_base
        raise KeyError(f"no frequency source channel for {machine}")
    if kind == "power":
        # recorded on machine base; report on system base
        ratio = series.meta.get("machine_base", {}).get(machine, 1.0)
        for src in (f"{machine}.p_meas", f"{machine}.t_elec"):
            if src in series:
                return series[src] * ratio
        raise KeyError(f"no power source channel for {machine}")
    if kind == "voltage-mag":
        for d, q in ((f"{machine}.vc_d", f"{machine}.vc_q"), (f"v[{machine}].D", f"v[{machine}].Q"),
                     (f"net.v[{machine}].D", f"net.v[{machine}].Q")):
            if d in series and q in series:
                return np.hypot(series[d], series[q])
        if f"{machine}.v_term" in series:
            return series[f"{machine}.v_term"].copy()
        raise KeyError(f"no voltage source channels for {machine}")
    raise ValueError(f"unknown channel kind {kind!r}")
