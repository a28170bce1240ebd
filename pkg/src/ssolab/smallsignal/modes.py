"""Eigenanalysis, participation factors, mode shapes and MIMO frequency response."""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np
import scipy.linalg

SSO_BAND = (5.0, 55.0)
# an eigenpair counts as an oscillatory SSO mode only below this damping ratio
SSO_ZETA_MAX = 0.3


@dataclass
class Mode:
    index: int
    eigenvalue: complex
    right: np.ndarray = field(default=None, repr=False)
    left: np.ndarray = field(default=None, repr=False)
    defective: bool = False

    @property
    def sigma(self):
        return self.eigenvalue.real

    @property
    def omega(self):
        return self.eigenvalue.imag

    @property
    def f_hz(self):
        return self.eigenvalue.imag / (2 * math.pi)

    @property
    def zeta(self):
        mag = abs(self.eigenvalue)
        return 1.0 if mag == 0 else -self.eigenvalue.real / mag

    @property
    def participation(self):
        """Complex participation column p_k = right_k * left_k (sums to 1)."""
        if self.right is None:
            raise ValueError("mode has no eigenvectors")
        return self.right * self.left

    def in_band(self, band=SSO_BAND, zeta_max=SSO_ZETA_MAX):
        return self.omega > 0 and band[0] <= self.f_hz <= band[1] and self.zeta < zeta_max


def _eig(A):
    w, V = scipy.linalg.eig(A)
    try:
        cond = np.linalg.cond(V)
    except np.linalg.LinAlgError:
        cond = np.inf
    if not np.isfinite(cond) or cond > 1e14:
        return w, V, None
    return w, V, np.linalg.inv(V)


def eig_modes(lin):
    """All modes (conjugates folded onto the ω ≥ 0 member), sorted by frequency then damping."""
    A = lin.A if isinstance(lin, np.ndarray) else lin.A
    if A.size and not np.all(np.isfinite(A)):
        raise ValueError("A has non-finite entries")
    w, V, W = _eig(A)
    if W is None:
        warnings.warn("eigenvector matrix is (nearly) defective; reporting eigenvalues only")
    modes = []
    for i, lam in enumerate(w):
        if lam.imag < 0:
            continue
        if W is None:
            modes.append(Mode(i, complex(lam), defective=True))
        else:
            modes.append(Mode(i, complex(lam), V[:, i], W[i, :]))
    modes.sort(key=lambda m: (round(m.f_hz, 9), -m.zeta))
    return modes


def full_spectrum(modes):
    out = []
    for m in modes:
        out.append(m.eigenvalue)
        if m.eigenvalue.imag > 0:
            out.append(m.eigenvalue.conjugate())
    return np.array(out)


def sso_modes(lin_or_modes, band=SSO_BAND, zeta_max=SSO_ZETA_MAX):
    modes = lin_or_modes if isinstance(lin_or_modes, list) else eig_modes(lin_or_modes)
    return [m for m in modes if m.in_band(band, zeta_max)]


def participation(lin, normalize=True):
    """Participation matrix P[k, i] of state k in mode i.

    With ``normalize`` the magnitudes are scaled so each mode's largest entry is 1;
    otherwise the complex biorthonormal products are returned (columns sum to 1).
    """
    A = lin if isinstance(lin, np.ndarray) else lin.A
    w, V, W = _eig(A)
    if W is None:
        raise np.linalg.LinAlgError("participation factors need a non-defective matrix")
    P = V * W.T
    if not normalize:
        return P
    M = np.abs(P)
    return M / M.max(axis=0, keepdims=True)


def dominant_states(lin, mode, threshold=0.2, limit=12):
    p = np.abs(mode.participation)
    p = p / p.max()
    order = np.argsort(-p, kind="stable")
    return [(lin.states[k], float(p[k])) for k in order[:limit] if p[k] >= threshold]


def default_observable(machine_id, kind):
    return f"{machine_id}.it_d" if kind == "GFC" else f"{machine_id}.omega"


def mode_shape(lin, mode, observables=None):
    """Per-machine right-eigenvector component of one observable state, scaled so the largest is 1∠0."""
    if mode.right is None:
        raise ValueError("mode has no eigenvectors")
    if observables is None:
        observables = {mid: default_observable(mid, info["kind"]) for mid, info in lin.machines.items()}
    index = {s: i for i, s in enumerate(lin.states)}
    comp = {}
    for mid, label in observables.items():
        if label not in index:
            raise KeyError(f"observable state {label} missing for machine {mid}")
        comp[mid] = complex(mode.right[index[label]])
    return normalize_shape(comp)


def normalize_shape(comp):
    ref = max(comp.values(), key=abs)
    if ref == 0:
        return dict(comp)
    return {k: v / ref for k, v in comp.items()}


def sigma_max_response(lin, f_grid):
    """Largest singular value of G(j 2π f) at each frequency (inf where the solve is singular)."""
    f = np.asarray(f_grid, dtype=float)
    if f.size and (np.any(f < 0) or np.any(np.diff(f) <= 0)):
        raise ValueError("frequency grid must be non-negative and ascending")
    n = lin.A.shape[0]
    out = np.empty(f.size)
    eye = np.eye(n)
    for k, fk in enumerate(f):
        if n == 0:
            G = lin.D.astype(complex)
        else:
            M = 2j * math.pi * fk * eye - lin.A
            try:
                X = np.linalg.solve(M, lin.B)
            except np.linalg.LinAlgError:
                out[k] = np.inf
                continue
            G = lin.C @ X + lin.D
        s = np.linalg.svd(G, compute_uv=False)
        out[k] = s[0] if s.size else 0.0
    return out


def peak_prominences_db(f_grid, sigma):
    """Local maxima of a σ_max curve with their prominence in dB."""
    from scipy.signal import find_peaks, peak_prominences
    db = 20 * np.log10(np.maximum(np.asarray(sigma), 1e-300))
    idx, _ = find_peaks(db)
    prom = peak_prominences(db, idx)[0] if idx.size else np.array([])
    return [(float(f_grid[i]), float(p)) for i, p in zip(idx, prom)]
