"""Run the SPC/QPC adequacy comparison over the GFC parameter grid.

For each set prints the SPC SSO pairs, the prominent sigma_max peaks in
both frameworks, and the rightmost eigenvalue outside the SSO band, which
must stay in the left half plane for the set to be a fair comparison.

    python scripts/parameter_grid.py [--case 4] [--tau-ms 2]
"""
import argparse

from ssolab.netmodel.system import load_case
from ssolab.smallsignal import SSO_BAND, build_linear, eig_modes
from ssolab.studies import PARAMETER_GRID, adequacy_check


def worst_outside_band(spec, tau):
    modes = eig_modes(build_linear(spec, tau)[0])
    rest = [m for m in modes if not SSO_BAND[0] <= m.f_hz <= SSO_BAND[1]]
    return max(m.sigma for m in rest)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--case", type=int, default=4)
    ap.add_argument("--tau-ms", type=float, default=2.0)
    args = ap.parse_args(argv)
    tau = args.tau_ms * 1e-3
    base = load_case(args.case)
    print(f"case {args.case}, tau {args.tau_ms} ms")
    print(f"{'set':20s} {'SPC SSO pairs (Hz, zeta %)':34s} {'SPC peaks':>9s} {'QPC':>5s} {'max Re out':>11s} holds")
    for name, changes in PARAMETER_GRID.items():
        spec = base.with_gfc(**changes)
        chk = adequacy_check(spec, tau)
        pairs = ", ".join(f"{m.f_hz:.2f}/{100 * m.zeta:+.2f}" for m in chk.spc_modes)
        print(f"{name:20s} {pairs:34s} {len(chk.spc_peaks):9d} {len(chk.qpc_modes) + len(chk.qpc_peaks):5d} "
              f"{worst_outside_band(spec, tau):11.2e} {chk.holds}")


if __name__ == "__main__":
    main()
