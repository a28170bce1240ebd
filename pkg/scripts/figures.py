"""Produce the standard study outputs through the command line interface.

Writes power flow, modes, singular-value plots, delay loci and a pulse
simulation with its Prony fit for one case into ``--out-dir``.

    python scripts/figures.py [--case case4] [--out-dir figures]
"""
import argparse
from pathlib import Path

from ssolab.cli import main as cli


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--case", default="case4")
    ap.add_argument("--out-dir", type=Path, default=Path("figures"))
    args = ap.parse_args(argv)
    out = str(args.out_dir)
    runs = [
        ["pf", args.case],
        ["modes", args.case, "--tau-p", "2ms"],
        ["sv", args.case, "--framework", "both", "--fmin", "1", "--fmax", "100", "--points", "1000"],
        ["sweep", args.case, "--tau", "0,1,2,3,5,10ms"],
        ["sim", args.case, "--duration", "1.5"],
    ]
    for argv_ in runs:
        print("ssolab", " ".join(argv_))
        code = cli([*argv_, "--out-dir", out])
        if code:
            raise SystemExit(code)
    cli(["prony", str(args.out_dir / "timeseries.csv"), "--channel", "GFC1.frequency", "--out-dir", out])
    print("outputs in", out)


if __name__ == "__main__":
    main()
