"""Compare Prony estimates of simulated ringdowns with the linearised SSO modes.

    python scripts/prony_consistency.py [--case 4] [--pade-order 3]
"""
import argparse

from ssolab.netmodel.powerflow import run_power_flow
from ssolab.netmodel.system import load_case
from ssolab.studies import ringdown_check


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--case", type=int, default=4)
    ap.add_argument("--tau-ms", type=float, nargs="+", default=[0, 1, 2, 3, 5, 10])
    ap.add_argument("--pade-order", type=int, default=3)
    args = ap.parse_args(argv)
    spec = load_case(args.case)
    pf = run_power_flow(spec)
    print(f"{'tau [ms]':>8s} {'Prony f':>9s} {'zeta %':>8s} {'eig f':>9s} {'zeta %':>8s} {'df %':>7s} {'dzeta pp':>9s}")
    for tau in args.tau_ms:
        c = ringdown_check(spec, tau * 1e-3, args.pade_order, pf)
        print(f"{tau:8.1f} {c.f_prony:9.3f} {100 * c.zeta_prony:+8.3f} {c.f_eig:9.3f} {100 * c.zeta_eig:+8.3f} "
              f"{100 * c.df_rel:7.3f} {c.dzeta_pp:9.3f}")


if __name__ == "__main__":
    main()
