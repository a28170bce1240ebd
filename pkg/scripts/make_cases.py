"""Regenerate the bundled two-area case files in src/ssolab/data/.

Network, transformer, load and machine data follow the textbook two-area
four-machine benchmark (lines: r=0.0001, x=0.001, b=0.00175 pu/km on
100 MVA / 230 kV; 900 MVA units behind 0.15 pu step-up transformers).
Dispatch is the textbook base case (G1, G2, G4 at 700 MW, G3 slack).
"""
import json
import math
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "ssolab" / "data"

R_KM, X_KM, B_KM = 1e-4, 1e-3, 1.75e-3

LINES = [("5-6", 5, 6, 25), ("6-7", 6, 7, 10),
         ("7-8a", 7, 8, 110), ("7-8b", 7, 8, 110),
         ("8-9a", 8, 9, 110), ("8-9b", 8, 9, 110),
         ("9-10", 9, 10, 10), ("11-10", 11, 10, 25)]

SLOTS = {1: dict(v=1.03, area=1, p=7.0, h=6.5),
         2: dict(v=1.01, area=1, p=7.0, h=6.5),
         3: dict(v=1.03, area=2, p=None, h=6.175, angle=math.radians(-6.8)),
         4: dict(v=1.01, area=2, p=7.0, h=6.175)}

CASES = {
    1: dict(gfc=(1, 4), note="50% IBR: GFCs replace G1 and G4"),
    2: dict(gfc=(1, 2), note="50% IBR: GFCs replace G1 and G2"),
    3: dict(gfc=(1, 2, 3), note="75% IBR: GFCs replace G1, G2 and G3"),
    4: dict(gfc=(1, 2, 3, 4), note="100% IBR: GFCs replace all four units"),
}


def build(case):
    gfc_slots = CASES[case]["gfc"]
    buses = []
    for k in range(1, 5):
        s = SLOTS[k]
        b = {"id": k, "kv": 20.0, "type": "SLACK" if k == 3 else "PV", "v": s["v"], "area": s["area"]}
        if k == 3:
            b["angle"] = s["angle"]
        buses.append(b)
    for k in range(5, 12):
        buses.append({"id": k, "kv": 230.0, "type": "PQ", "area": 1 if k <= 8 else 2})
    branches = []
    for name, f, t, km in LINES:
        br = {"id": name, "from": f, "to": t, "r": R_KM * km, "x": X_KM * km, "b": B_KM * km, "length_km": km}
        if name.startswith("7-8"):
            br["tie"] = True
        branches.append(br)
    transformers = [{"id": f"T{k}", "from": k, "to": hv, "r": 0.0, "x": 0.15, "base_mva": 900.0, "ratio": 1.0}
                    for k, hv in ((1, 5), (2, 6), (3, 11), (4, 10))]
    loads = [{"bus": 7, "p": 9.67, "q": 1.0, "qc": 2.0, "model": "dynamic"},
             {"bus": 9, "p": 17.67, "q": 1.0, "qc": 3.5, "model": "dynamic"}]
    machines = []
    for k in range(1, 5):
        s = SLOTS[k]
        m = {"bus": k, "mva": 900.0}
        if s["p"] is not None:
            m["p"] = s["p"]
        if k in gfc_slots:
            m.update(id=f"GFC{k}", kind="GFC")
        else:
            m.update(id=f"G{k}", kind="SG", params={"h": s["h"]})
        machines.append(m)
    return {
        "name": f"case{case}",
        "case": case,
        "framework": "SPC",
        "notes": CASES[case]["note"] + ". Dispatch split among units is the textbook base case "
                 "(assumption: only the ~400 MW tie flow is fixed by the study).",
        "base": {"s_base": 100.0, "f_base": 60.0},
        "defaults": {"network": {"long_line_km": 100.0, "long_line_sections": 2}},
        "buses": buses, "branches": branches, "transformers": transformers,
        "loads": loads, "machines": machines,
    }


def synthetic_ringdown():
    """40 Hz cosine decaying at 0.5 1/s (zeta = 0.199%), sampled at 1 kHz for 1 s."""
    import math
    from ssolab.output import csv_text
    rows = []
    for k in range(1001):
        t = k / 1000
        rows.append((t, math.exp(-0.5 * t) * math.cos(2 * math.pi * 40 * t)))
    return csv_text(["time_s", "y [pu]"], rows)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for case in CASES:
        (OUT / f"case{case}.json").write_text(json.dumps(build(case), indent=2) + "\n")
    (OUT / "synthetic_40hz.csv").write_text(synthetic_ringdown())


if __name__ == "__main__":
    main()
