"""Tabulate the least-damped SSO mode against the communication delay.

    python scripts/delay_sweep.py [--cases 2 3 4] [--tau-ms 0 1 2 3 5 10]
"""
import argparse

from ssolab.netmodel.system import load_case
from ssolab.smallsignal import delay_sweep
from ssolab.studies import tracked_least_damped


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--tau-ms", type=float, nargs="+", default=[0, 1, 2, 3, 5, 10])
    ap.add_argument("--pade-order", type=int, default=2)
    args = ap.parse_args(argv)
    taus = [t * 1e-3 for t in args.tau_ms]
    print("tau [ms] " + "".join(f"| case {n}: f [Hz]  zeta [%] " for n in args.cases))
    cols = [tracked_least_damped(delay_sweep(load_case(n), taus, args.pade_order)) for n in args.cases]
    for k, tau in enumerate(args.tau_ms):
        cells = []
        for rows in cols:
            r = rows[k] if k < len(rows) else None
            cells.append(f"| {r.f_hz:14.2f} {100 * r.zeta:+9.2f} " if r else f"| {'lost':>24s} ")
        print(f"{tau:8.1f} " + "".join(cells))


if __name__ == "__main__":
    main()
