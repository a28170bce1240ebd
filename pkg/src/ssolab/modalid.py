"""Ringdown identification: linear-prediction Prony and a matrix-pencil cross-check."""
from dataclasses import dataclass, field
import math

import numpy as np

from .smallsignal.modes import SSO_BAND


class PronyError(ValueError):
    pass


@dataclass(frozen=True)
class ModeEstimate:
    f_hz: float
    sigma: float
    zeta: float
    amplitude: float
    phase: float


@dataclass
class PronyEstimate:
    modes: list
    residual: float
    order: int
    window: tuple
    method: str = "prony"
    rank: int = 0

    def __post_init__(self):
        self.modes = sorted(self.modes, key=lambda m: -m.amplitude)

    def to_dict(self):
        return {"method": self.method, "order": self.order, "rank": self.rank, "window_s": list(self.window),
                "residual": self.residual,
                "modes": [{"f_hz": m.f_hz, "sigma_per_s": m.sigma, "zeta_pct": 100 * m.zeta,
                           "amplitude": m.amplitude, "phase_rad": m.phase} for m in self.modes]}


def _zeta(sigma, f_hz):
    mag = math.hypot(sigma, 2 * math.pi * f_hz)
    return 1.0 if mag == 0 else -sigma / mag


def _window(t, y, window):
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise PronyError("time and signal must be 1-D arrays of equal length")
    if window is None:
        window = (t[0], t[-1])
    t0, t1 = window
    if t0 < t[0] - 1e-12 or t1 > t[-1] + 1e-12 or t1 <= t0:
        raise PronyError(f"window {window} lies outside the series [{t[0]}, {t[-1]}]")
    sel = (t >= t0 - 1e-12) & (t <= t1 + 1e-12)
    ts, ys = t[sel], y[sel]
    dt = np.diff(ts)
    if ts.size > 2 and np.ptp(dt) > 1e-6 * dt.mean():
        raise PronyError("samples must be uniformly spaced")
    return ts, ys, (float(t0), float(t1))


def _modes_from_roots(z, ts, y0, dt):
    """Least-squares complex amplitudes for roots ``z`` plus a constant; fold conjugate pairs."""
    keep = np.abs(z) > 1e-8
    z = z[keep]
    n = np.arange(ts.size)
    V = np.exp(np.outer(n, np.log(z.astype(complex))))
    V = np.hstack([V, np.ones((ts.size, 1))])
    c = np.linalg.lstsq(V, y0.astype(complex), rcond=None)[0]
    fit = (V @ c).real
    s = np.log(z.astype(complex)) / dt
    nyq = 0.5 / dt
    modes = []
    for sk, ck in zip(s, c[:-1]):
        f = sk.imag / (2 * math.pi)
        if f < -1e-9 or f >= nyq * (1 - 1e-9):
            continue
        oscill = f > 1e-9
        amp = 2 * abs(ck) if oscill else abs(ck.real)
        modes.append(ModeEstimate(float(max(f, 0.0)), float(sk.real), _zeta(sk.real, max(f, 0.0)),
                                  float(amp), float(np.angle(ck))))
    return modes, fit


def prony_fit(t, y, window=None, order=8, rcond=1e-10):
    """Linear-prediction Prony fit of ``order`` poles to ``y`` sampled at ``t`` within ``window``.

    The mean is handled by a constant term in the prediction equations, so any
    offset is absorbed exactly rather than biasing the poles.
    """
    if order < 1:
        raise PronyError("order must be >= 1")
    ts, ys, win = _window(t, y, window)
    if ts.size < 4 * order:
        raise PronyError(f"window holds {ts.size} samples; need at least {4 * order} for order {order}")
    dt = float(ts[1] - ts[0])
    y0 = ys - ys.mean()
    scale = np.max(np.abs(y0))
    if scale <= 1e-12 * max(1.0, np.max(np.abs(ys))):
        return PronyEstimate([], 0.0, order, win, rank=0)
    y0 = y0 / scale
    N = y0.size
    H = np.column_stack([y0[order - 1 - k:N - 1 - k] for k in range(order)] + [np.ones(N - order)])
    rhs = y0[order:]
    U, sv, Vt = np.linalg.svd(H, full_matrices=False)
    rank = int(np.sum(sv > rcond * sv[0]))
    if rank < 2:
        raise PronyError("linear-prediction system is rank deficient; lower the order")
    coef = Vt[:rank].T @ ((U[:, :rank].T @ rhs) / sv[:rank])
    a = coef[:order]
    z = np.roots(np.concatenate([[1.0], -a]))
    modes, fit = _modes_from_roots(z, ts, y0, dt)
    modes = [ModeEstimate(m.f_hz, m.sigma, m.zeta, m.amplitude * scale, m.phase) for m in modes]
    res = float(np.sqrt(np.mean((y0 - fit) ** 2)) / max(np.sqrt(np.mean(y0 ** 2)), 1e-300))
    return PronyEstimate(modes, res, order, win, "prony", rank)


def matrix_pencil(t, y, window=None, order=8, pencil=None, rcond=1e-10):
    """Matrix-pencil estimate with SVD rank truncation to at most ``order`` poles."""
    ts, ys, win = _window(t, y, window)
    N = ts.size
    if N < 4 * order:
        raise PronyError(f"window holds {N} samples; need at least {4 * order} for order {order}")
    dt = float(ts[1] - ts[0])
    y0 = ys - ys.mean()
    scale = np.max(np.abs(y0))
    if scale <= 1e-12 * max(1.0, np.max(np.abs(ys))):
        return PronyEstimate([], 0.0, order, win, "matrix-pencil", 0)
    y0 = y0 / scale
    L = pencil or N // 3
    Y = np.array([y0[i:i + L + 1] for i in range(N - L)])
    U, sv, Vt = np.linalg.svd(Y, full_matrices=False)
    # one extra pole absorbs a residual offset
    r = min(order + 1, int(np.sum(sv > rcond * sv[0])))
    V = Vt[:r].T
    V1, V2 = V[:-1], V[1:]
    z = np.linalg.eigvals(np.linalg.pinv(V1) @ V2)
    modes, fit = _modes_from_roots(z, ts, y0, dt)
    modes = [ModeEstimate(m.f_hz, m.sigma, m.zeta, m.amplitude * scale, m.phase) for m in modes]
    res = float(np.sqrt(np.mean((y0 - fit) ** 2)) / max(np.sqrt(np.mean(y0 ** 2)), 1e-300))
    return PronyEstimate(modes, res, order, win, "matrix-pencil", r)


def dominant_mode(est, band=SSO_BAND):
    """Largest-amplitude oscillatory estimate inside ``band`` (Hz)."""
    inband = [m for m in est.modes if band[0] <= m.f_hz <= band[1]]
    if not inband:
        raise PronyError(f"no identified mode within {band[0]}-{band[1]} Hz")
    return inband[0]


def envelope_growth(t, y, window=None, band=None):
    """Slope (1/s) of the log peak envelope; positive means growing oscillation.

    With ``band`` (Hz) the signal is first passed through a zero-phase band-pass
    filter so slow trends and out-of-band modes do not distort the peaks.
    """
    from scipy.signal import butter, find_peaks, sosfiltfilt
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if band is not None:
        fs = 1.0 / (t[1] - t[0])
        sos = butter(4, [band[0], band[1]], btype="bandpass", fs=fs, output="sos")
        y = sosfiltfilt(sos, y - y.mean())
    ts, ys, _ = _window(t, y, window)
    y0 = np.abs(ys - ys.mean())
    idx, _ = find_peaks(y0)
    if idx.size < 4:
        raise PronyError("too few oscillation peaks to fit an envelope")
    return float(np.polyfit(ts[idx], np.log(np.maximum(y0[idx], 1e-300)), 1)[0])
