"""Delay sweeps with nearest-neighbour tracking of the SSO modes."""
from dataclasses import dataclass

from .linear import linearize
from .modes import eig_modes, sso_modes, SSO_BAND, SSO_ZETA_MAX

MAX_JUMP_HZ = 5.0


@dataclass
class LocusPoint:
    tau: float
    mode_id: int
    f_hz: float
    zeta: float
    sigma: float
    flagged: bool = False


def build_linear(spec, tau=None, pade_order=2, pf=None):
    """Power flow → equilibrium → linear model for ``spec`` (optionally with all delays set to ``tau``)."""
    from ..dynamics.assemble import assemble
    from ..netmodel.initialize import initialize_states
    from ..netmodel.powerflow import run_power_flow
    if tau is not None:
        spec = spec.with_tau(tau)
    if pf is None:
        pf = run_power_flow(spec)
    model = assemble(spec, pf)
    op = initialize_states(spec, pf, model=model)
    model = model.bind(op)
    return linearize(model, op, pade_order), model, op


def _distance(a, b):
    # 1 Hz counts the same as one percentage point of damping
    return ((a.f_hz - b.f_hz) ** 2 + (100 * (a.zeta - b.zeta)) ** 2) ** 0.5


def track(mode_sets, taus):
    """Follow every mode of the first set through the later ones by nearest neighbour in (f, ζ)."""
    rows = []
    if not mode_sets:
        return rows
    current = list(mode_sets[0])
    for k, m in enumerate(current):
        rows.append(LocusPoint(taus[0], k, m.f_hz, m.zeta, m.sigma))
    for tau, cands in zip(taus[1:], mode_sets[1:]):
        cands = list(cands)
        taken = set()
        nxt = []
        for k, prev in enumerate(current):
            pool = [(c, j) for j, c in enumerate(cands) if j not in taken]
            if prev is None or not pool:
                nxt.append(None)
                continue
            best, j = min(pool, key=lambda t: _distance(prev, t[0]))
            taken.add(j)
            flag = abs(best.f_hz - prev.f_hz) > MAX_JUMP_HZ
            rows.append(LocusPoint(tau, k, best.f_hz, best.zeta, best.sigma, flag))
            nxt.append(best)
        current = nxt
    return rows


def _modes_at(args):
    spec, tau, pade_order, pf = args
    return eig_modes(build_linear(spec, tau, pade_order, pf)[0])


def delay_sweep(spec, tau_list, pade_order=2, band=SSO_BAND, zeta_max=SSO_ZETA_MAX, pf=None, jobs=1):
    """Tracked SSO-band (f, ζ) for each delay in ``tau_list`` (seconds).

    Each delay point is independent; ``jobs > 1`` evaluates them in a process pool.
    """
    taus = [float(t) for t in tau_list]
    if not taus or min(taus) < 0:
        raise ValueError("tau list must be non-empty and >= 0")
    from ..netmodel.powerflow import run_power_flow
    if pf is None:
        pf = run_power_flow(spec)
    work = [(spec, tau, pade_order, pf) for tau in taus]
    if jobs > 1 and len(taus) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            all_modes = list(ex.map(_modes_at, work))
    else:
        all_modes = [_modes_at(w) for w in work]
    # later points may leave the reporting window; track over all oscillatory modes
    sets = [sso_modes(all_modes[0], band, zeta_max)] + [[m for m in ms if m.omega > 0] for ms in all_modes[1:]]
    return track(sets, taus)


def least_damped(rows):
    """Mode id whose first locus point has the lowest damping."""
    first = [r for r in rows if r.tau == rows[0].tau]
    return min(first, key=lambda r: r.zeta).mode_id if first else None
