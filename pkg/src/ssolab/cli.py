"""Command-line front end: pf, modes, sv, sweep, sim, prony, classify."""
import argparse
import cmath
import json
import math
import re
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from .netmodel.system import ConfigError, parse_system, data_path, parameter_hash
from .output import RunManifest, write_csv, write_json, read_csv, fmt
from .svg import Plot

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_MODEL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def parse_seconds(text):
    """'2ms', '2 ms', '0.002', '0.002s' -> seconds."""
    m = re.fullmatch(r"\s*([-+0-9.eE]+)\s*(ms|s)?\s*", str(text))
    if not m:
        raise UsageError(f"cannot parse delay {text!r}")
    v = float(m.group(1))
    return v * 1e-3 if m.group(2) == "ms" else v


def parse_tau_list(text):
    """'0,1,2,3,5,10ms' -> seconds; a trailing unit applies to every entry without its own unit."""
    text = text.strip()
    unit = "ms" if text.endswith("ms") else ""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    out = []
    for p in parts:
        out.append(parse_seconds(p if re.search(r"[a-z]$", p) else p + unit))
    if not out:
        raise UsageError("empty delay list")
    return out


def parse_pair(text, what):
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{what} must be two comma-separated numbers, got {text!r}")
    return a, b


def load_spec(ref):
    """A file path, or a bundled case name such as ``case4`` / ``4``."""
    p = Path(ref)
    if not p.exists():
        name = ref if ref.endswith(".json") else (f"case{ref}.json" if ref.isdigit() else f"{ref}.json")
        bundled = data_path(name)
        if bundled.exists():
            p = bundled
        else:
            raise FileNotFoundError(f"spec file not found: {ref}")
    return parse_system(p), str(ref)


def _configured(args, spec, framework=None):
    fw = (framework or args.framework or spec.framework).upper()
    spec = spec.with_framework(fw)
    if args.tau_p is not None:
        spec = spec.with_tau(args.tau_p)
    return spec


def _tau_of(spec):
    return max((m.params.tau_p for m in spec.gfcs), default=0.0)


def _out(args):
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _finish(args, manifest):
    write_json(Path(args.out_dir) / f"manifest_{manifest.command}.json", manifest.to_dict())


# ---------------------------------------------------------------- commands

def cmd_pf(args):
    from .netmodel.powerflow import run_power_flow
    spec, ref = load_spec(args.spec)
    pf = run_power_flow(spec)
    out = _out(args)
    man = RunManifest("pf", ref, parameter_hash(spec), spec.framework, _tau_of(spec))
    rep = dict(pf.report(), manifest_hash=man.parameter_hash)
    man.add(write_json(out / "pf.json", rep))
    _finish(args, man)
    print(f"power flow converged in {pf.iterations} iterations; tie flow {fmt(pf.tie_flow)} pu, "
          f"losses {fmt(pf.losses)} pu")
    return EXIT_OK


def _mode_records(lin, modes, threshold=0.2):
    from .smallsignal import dominant_states, mode_shape, classify_grouping
    areas = {k: v["area"] for k, v in lin.machines.items()}
    records, compass = [], []
    for k, m in enumerate(modes):
        dom = dominant_states(lin, m) if m.right is not None else []
        rec = {"mode_id": k, "f_hz": m.f_hz, "zeta_pct": 100 * m.zeta, "sigma_per_s": m.sigma,
               "dominant_states": [s for s, _ in dom], "participation": [p for _, p in dom]}
        if m.right is not None and lin.machines:
            shape = mode_shape(lin, m)
            g = classify_grouping(shape, areas, threshold)
            rec["grouping"] = {"label": g.label, "group_a": g.group_a, "group_b": g.group_b}
            for mid in sorted(shape):
                compass.append((k, m.f_hz, mid, areas[mid], abs(shape[mid]), math.degrees(cmath.phase(shape[mid]))))
        else:
            rec["grouping"] = {"label": "local/other", "group_a": [], "group_b": []}
        records.append(rec)
    return records, compass


def cmd_modes(args):
    from .smallsignal import build_linear, eig_modes, SSO_ZETA_MAX
    spec, ref = load_spec(args.spec)
    spec = _configured(args, spec)
    band = parse_pair(args.band, "--band")
    lin = build_linear(spec, None, args.pade)[0]
    allm = eig_modes(lin)
    zmax = SSO_ZETA_MAX if args.zeta_max is None else args.zeta_max
    sel = [m for m in allm if m.omega > 0 and band[0] <= m.f_hz <= band[1] and m.zeta < zmax]
    records, compass = _mode_records(lin, sel, args.threshold)
    out = _out(args)
    man = RunManifest("modes", ref, parameter_hash(spec), spec.framework, _tau_of(spec),
                      {"pade_order": args.pade, "band_hz": list(band), "zeta_max": zmax,
                       "threshold": args.threshold})
    doc = {"manifest_hash": man.parameter_hash, "framework": spec.framework, "tau_p_s": _tau_of(spec),
           "n_states": lin.n, "max_real_part": max((m.sigma for m in allm), default=0.0), "modes": records}
    man.add(write_json(out / "modes.json", doc))
    man.add(write_csv(out / "compass.csv", ["mode_id", "f_hz", "machine", "area", "magnitude", "angle_deg"],
                      compass))
    _finish(args, man)
    print(f"{spec.framework}: {lin.n} states, {len(records)} mode(s) in {band[0]:g}-{band[1]:g} Hz with zeta < {zmax:g}")
    for r in records:
        print(f"  {r['f_hz']:.3f} Hz  zeta {r['zeta_pct']:+.3f}%  {r['grouping']['label']}")
    return EXIT_OK


def cmd_sv(args):
    from .smallsignal import build_linear, sigma_max_response, peak_prominences_db
    spec0, ref = load_spec(args.spec)
    if args.fmin >= args.fmax and args.points > 1:
        raise UsageError("--fmin must be below --fmax")
    if args.points < 1 or args.fmin < 0:
        raise UsageError("--points must be >= 1 and --fmin >= 0")
    f = np.logspace(math.log10(max(args.fmin, 1e-6)), math.log10(args.fmax), args.points) if args.points > 1 \
        else np.array([args.fmin])
    fws = ["SPC", "QPC"] if (args.framework or "both").lower() == "both" else [args.framework.upper()]
    out = _out(args)
    man = RunManifest("sv", ref, "", "+".join(fws), None, {"fmin": args.fmin, "fmax": args.fmax,
                                                           "points": args.points, "pade_order": args.pade})
    plot = Plot("Largest singular value of the input-output response", "frequency (Hz)", "sigma_max (dB)",
                logx=args.points > 1)
    hashes = []
    for fw in fws:
        spec = _configured(args, spec0, fw)
        lin = build_linear(spec, None, args.pade)[0]
        s = sigma_max_response(lin, f)
        db = 20 * np.log10(np.maximum(s, 1e-300))
        man.add(write_csv(out / f"sv_{fw.lower()}.csv", ["freq_hz", "sigma_max_db"], zip(f, db)))
        plot.line(f, db, fw)
        hashes.append(parameter_hash(spec))
        man.tau_p_s = _tau_of(spec)
        peaks = [p for p in peak_prominences_db(f, s) if p[1] >= 3.0 and 5 <= p[0] <= 55]
        print(f"{fw}: " + (", ".join(f"peak {a:.2f} Hz ({b:.1f} dB)" for a, b in peaks) or "no SSO-band peak"))
    man.parameter_hash = "+".join(hashes)
    plot.note = f"parameter hash {man.parameter_hash}"
    man.add(plot.save(out / "sv.svg"))
    _finish(args, man)
    return EXIT_OK


def cmd_sweep(args):
    from .smallsignal import delay_sweep
    spec, ref = load_spec(args.spec)
    spec = _configured(args, spec)
    taus = parse_tau_list(args.tau)
    rows = delay_sweep(spec, taus, args.pade, jobs=args.jobs)
    out = _out(args)
    man = RunManifest("sweep", ref, parameter_hash(spec), spec.framework, None,
                      {"tau_s": taus, "pade_order": args.pade})
    man.add(write_csv(out / "loci.csv", ["tau_ms", "f_hz", "zeta_pct", "mode_id", "flagged"],
                      [(1e3 * r.tau, r.f_hz, 100 * r.zeta, r.mode_id, int(r.flagged)) for r in rows]))
    plot = Plot("SSO mode loci versus delay", "real part (1/s)", "frequency (Hz)",
                note=f"parameter hash {man.parameter_hash}")
    by_mode = defaultdict(list)
    for r in rows:
        by_mode[r.mode_id].append(r)
    for mid in sorted(by_mode):
        rs = by_mode[mid]
        plot.scatter([r.sigma for r in rs], [r.f_hz for r in rs], f"mode {mid}")
    man.add(plot.save(out / "loci.svg"))
    _finish(args, man)
    for r in rows:
        print(f"tau {1e3 * r.tau:6.2f} ms  mode {r.mode_id}  {r.f_hz:8.3f} Hz  zeta {100 * r.zeta:+.3f}%"
              + ("  [tracking jump]" if r.flagged else ""))
    if any(r.flagged for r in rows):
        print("warning: mode tracking lost at flagged rows", file=sys.stderr)
    if not rows:
        print("no SSO-band mode at the first delay point")
    return EXIT_OK


def _scenario(args, model, op):
    from .timedomain import Scenario, Disturbance
    if args.scenario:
        doc = json.loads(Path(args.scenario).read_text())
        dist = tuple(Disturbance(**d) for d in doc.pop("disturbances", []))
        return Scenario(disturbances=dist, **doc)
    if args.no_disturbance:
        return Scenario(duration=args.duration, name="undisturbed")
    gid = model.gfc_ids[0] if model.gfc_ids else model.sg_ids[0]
    p_star = op.setpoints[gid].get("p_star", op.setpoints[gid].get("p_ref", 1.0))
    # 2% pulse on the first machine's power reference
    return Scenario(duration=args.duration,
                    disturbances=(Disturbance(f"{gid}.dP_ref", "pulse", 0.02 * p_star, 0.1, 0.15),),
                    name=f"pulse:{gid}")


def cmd_sim(args):
    from .smallsignal import build_linear
    from .timedomain import simulate, derive_channel
    spec, ref = load_spec(args.spec)
    spec = _configured(args, spec)
    _, model, op = build_linear(spec, None, args.pade)
    scn = _scenario(args, model, op)
    ts = simulate(model, op, scn)
    channels, units = {}, {}
    for m in spec.machines:
        for kind, unit in (("frequency", "Hz"), ("power", "pu"), ("voltage-mag", "pu")):
            try:
                channels[f"{m.id}.{kind}"] = derive_channel(ts, kind, m.id)
                units[f"{m.id}.{kind}"] = unit
            except KeyError:
                pass
    if args.all_states:
        channels.update(ts.channels)
        units.update(ts.units)
    from .timedomain import TimeSeries
    out_ts = TimeSeries(ts.t, channels, units, dict(ts.meta), ts.diverged)
    out = _out(args)
    man = RunManifest("sim", ref, parameter_hash(spec), spec.framework, _tau_of(spec), scn.to_dict())
    path = out_ts.write(out / "timeseries.csv")
    man.add(path)
    man.add(path.with_suffix(".meta.json"))
    plot = Plot("Converter frequency", "time (s)", "frequency (Hz)", note=f"parameter hash {man.parameter_hash}")
    for m in spec.gfcs or spec.sgs:
        plot.line(ts.t, channels[f"{m.id}.frequency"], m.id)
    man.add(plot.save(out / "freq.svg"))
    _finish(args, man)
    print(f"simulated {ts.t[-1]:.3f} s, {len(ts.t)} samples" + ("  [DIVERGED]" if ts.diverged else ""))
    return EXIT_NUMERIC if ts.diverged else EXIT_OK


def _read_series(path, channel):
    header, rows = read_csv(path)
    names = [h.split(" [")[0] for h in header]
    if channel not in names:
        raise UsageError(f"channel {channel!r} not in {path}; available: {', '.join(names[1:])}")
    data = np.array([[float(v) for v in r] for r in rows])
    return data[:, 0], data[:, names.index(channel)]


def cmd_prony(args):
    from .modalid import prony_fit, dominant_mode, PronyError
    t, y = _read_series(args.csv, args.channel)
    meta_path = Path(args.csv).with_suffix(".meta.json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    if args.window:
        window = parse_pair(args.window, "--window")
    else:
        ends = [d.get("t1", d.get("t0", 0.0)) for d in meta.get("scenario", {}).get("disturbances", [])
                if d.get("kind") != "step"]
        window = (min(max(ends) + 0.1, t[-1]) if ends else t[0], t[-1])
    est = prony_fit(t, y, window, args.order)
    band = parse_pair(args.band, "--band")
    doc = dict(est.to_dict(), channel=args.channel, source=Path(args.csv).name,
               manifest_hash=meta.get("parameter_hash", ""))
    try:
        d = dominant_mode(est, band)
        doc["dominant"] = {"f_hz": d.f_hz, "zeta_pct": 100 * d.zeta, "sigma_per_s": d.sigma}
        msg = f"dominant mode {d.f_hz:.4f} Hz, zeta {100 * d.zeta:+.4f}%"
    except PronyError:
        doc["dominant"] = None
        msg = f"no mode identified in {band[0]:g}-{band[1]:g} Hz"
    out = _out(args)
    man = RunManifest("prony", str(args.csv), meta.get("parameter_hash", ""), meta.get("framework", ""),
                      meta.get("tau_p_s"), {"channel": args.channel, "window": list(window), "order": args.order})
    man.add(write_json(out / "prony.json", doc))
    _finish(args, man)
    print(msg)
    return EXIT_OK


def read_compass(path):
    """compass.csv -> {mode_id: ({machine: complex shape}, {machine: area}, f_hz)}."""
    header, rows = read_csv(path)
    need = ["mode_id", "f_hz", "machine", "area", "magnitude", "angle_deg"]
    if header[:6] != need:
        raise UsageError(f"{path} is not a compass file (expected columns {need})")
    out = {}
    for r in rows:
        k = int(r[0])
        shapes, areas, _ = out.setdefault(k, ({}, {}, float(r[1])))
        shapes[r[2]] = cmath.rect(float(r[4]), math.radians(float(r[5])))
        areas[r[2]] = int(float(r[3]))
    return out


def cmd_classify(args):
    from .smallsignal import classify_grouping
    data = read_compass(args.compass)
    res = []
    for k in sorted(data):
        shapes, areas, f = data[k]
        g = classify_grouping(shapes, areas, args.threshold)
        res.append({"mode_id": k, "f_hz": f, "label": g.label, "group_a": g.group_a, "group_b": g.group_b})
        print(f"mode {k} ({f:.3f} Hz): {g.label}  {g.group_a} vs {g.group_b}")
    out = _out(args)
    man = RunManifest("classify", str(args.compass), "", "", None, {"threshold": args.threshold})
    man.add(write_json(out / "grouping.json", {"modes": res}))
    _finish(args, man)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--framework", type=str.lower, choices=["spc", "qpc", "both"], default=None)
    common.add_argument("--tau-p", type=parse_seconds, default=None, help="power-measurement delay, e.g. 2ms")
    common.add_argument("--pade", type=int, default=2, choices=[1, 2, 3])
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--out-dir", default="out")

    p = argparse.ArgumentParser(prog="ssolab", description="Subsynchronous-oscillation analysis of converter-rich grids")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("pf", parents=[common], help="power flow report")
    s.add_argument("spec")
    s.set_defaults(func=cmd_pf)

    s = sub.add_parser("modes", parents=[common], help="eigenanalysis, participation and grouping")
    s.add_argument("spec")
    s.add_argument("--band", default="5,55", help="reporting band in Hz")
    s.add_argument("--zeta-max", type=float, default=None)
    s.add_argument("--threshold", type=float, default=0.2, help="relative shape magnitude for grouping")
    s.set_defaults(func=cmd_modes)

    s = sub.add_parser("sv", parents=[common], help="largest singular value of the MIMO response")
    s.add_argument("spec")
    s.add_argument("--fmin", type=float, default=1.0)
    s.add_argument("--fmax", type=float, default=100.0)
    s.add_argument("--points", type=int, default=2000)
    s.set_defaults(func=cmd_sv)

    s = sub.add_parser("sweep", parents=[common], help="SSO loci versus delay")
    s.add_argument("spec")
    s.add_argument("--tau", default="0,1,2,3,5,10ms")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("sim", parents=[common], help="nonlinear time-domain simulation")
    s.add_argument("spec")
    s.add_argument("--scenario", default=None, help="scenario JSON file")
    s.add_argument("--duration", type=float, default=2.0)
    s.add_argument("--no-disturbance", action="store_true")
    s.add_argument("--all-states", action="store_true", help="also write every state and internal signal")
    s.set_defaults(func=cmd_sim)

    s = sub.add_parser("prony", parents=[common], help="Prony ringdown analysis of a timeseries CSV")
    s.add_argument("csv")
    s.add_argument("--channel", required=True)
    s.add_argument("--window", default=None, help="t0,t1 in seconds")
    s.add_argument("--order", type=int, default=8)
    s.add_argument("--band", default="5,55")
    s.set_defaults(func=cmd_prony)

    s = sub.add_parser("classify", parents=[common], help="group labels from a compass.csv")
    s.add_argument("compass")
    s.add_argument("--threshold", type=float, default=0.2)
    s.set_defaults(func=cmd_classify)
    return p


def main(argv=None):
    from .netmodel.powerflow import PowerFlowError
    from .netmodel.initialize import InfeasibleOperatingPoint
    from .smallsignal import EquilibriumError
    from .modalid import PronyError
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    if args.framework == "both" and args.command not in ("sv",):
        print("error: --framework both is only valid for sv", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ConfigError, ValueError) as e:
        if isinstance(e, (PronyError, np.linalg.LinAlgError)):
            print(f"numerical failure: {e}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (PowerFlowError, InfeasibleOperatingPoint, np.linalg.LinAlgError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except EquilibriumError as e:
        print(f"model-consistency failure: {e}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
