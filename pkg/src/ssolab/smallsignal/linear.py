"""Finite-difference linearization with rational (Padé) delay blocks."""
from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy import signal


class EquilibriumError(RuntimeError):
    """The supplied operating point is not an equilibrium of the model."""


@dataclass
class DelayBlock:
    """State-space realization ``x' = A x + B u, y = C x + D u`` of a scalar delay approximation."""
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    tau: float
    order: int

    @property
    def n(self):
        return self.A.shape[0]

    def response(self, omega):
        s = 1j * np.asarray(omega, dtype=float)
        if self.n == 0:
            return np.full(s.shape, self.D[0, 0], dtype=complex)
        out = np.empty(s.shape, dtype=complex)
        eye = np.eye(self.n)
        for k, sk in np.ndenumerate(s):
            out[k] = (self.C @ np.linalg.solve(sk * eye - self.A, self.B))[0, 0] + self.D[0, 0]
        return out


def pade_coefficients(tau, order):
    """Numerator and denominator (highest power first) of the diagonal Padé approximant of exp(-s*tau)."""
    c = [factorial(2 * order - k) * factorial(order) / (factorial(2 * order) * factorial(k) * factorial(order - k))
         for k in range(order + 1)]
    num = [c[k] * (-tau) ** k for k in range(order, -1, -1)]
    den = [c[k] * tau ** k for k in range(order, -1, -1)]
    return np.array(num), np.array(den)


def pade_delay(tau, order=2):
    if tau < 0:
        raise ValueError("delay must be >= 0")
    if order not in (1, 2, 3):
        raise ValueError("Padé order must be 1, 2 or 3")
    if tau == 0:
        return DelayBlock(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), np.ones((1, 1)), 0.0, order)
    num, den = pade_coefficients(tau, order)
    A, B, C, D = signal.tf2ss(num / den[0], den / den[0])
    return DelayBlock(A, B, C, D, float(tau), order)


@dataclass
class LinearModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    states: list
    inputs: list
    outputs: list
    tau_p: float = 0.0
    pade_order: int = 2
    n_base: int = 0
    framework: str = ""
    machines: dict = field(default_factory=dict)     # id -> {"kind", "area"}
    x0: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        n = self.A.shape[0]
        if self.A.shape != (n, n) or self.B.shape[0] != n or self.C.shape[1] != n:
            raise ValueError("inconsistent state-space dimensions")
        if self.D.shape != (self.C.shape[0], self.B.shape[1]):
            raise ValueError("inconsistent D dimensions")
        if len(set(self.states)) != len(self.states):
            raise ValueError("state labels must be unique")
        if not np.all(np.isfinite(self.A)):
            raise ValueError("A has non-finite entries")

    @property
    def n(self):
        return self.A.shape[0]


def _step(x):
    return max(1e-6, 1e-6 * abs(x))


def linearize(model, op=None, pade_order=2, x0=None, u0=None, check_equilibrium=True, tol=1e-6):
    """Linear model of ``model`` about ``op`` (or ``x0``) by central differences.

    Every delay tap is replaced by a Padé block of ``pade_order`` in series
    with the tapped state; its states are appended after the model states.
    """
    if op is not None:
        x0 = op.x0 if x0 is None else x0
        u0 = op.u0 if u0 is None else u0
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    m_in = len(model.inputs)
    u0 = np.zeros(m_in) if u0 is None else np.asarray(u0, dtype=float)
    taps = list(model.taps)
    xd0 = np.array([x0[t.state] for t in taps])

    def f(x, u, xd):
        return model.residual(x, u, xd if taps else None)

    f0 = f(x0, u0, xd0)
    if check_equilibrium and np.max(np.abs(f0), initial=0.0) > tol:
        raise EquilibriumError(f"equilibrium residual {np.max(np.abs(f0)):.3e} exceeds {tol:g}")
    A0 = np.empty((n, n))
    for i in range(n):
        h = _step(x0[i])
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += h
        xm[i] -= h
        A0[:, i] = (f(xp, u0, xd0) - f(xm, u0, xd0)) / (2 * h)
    B0 = np.empty((n, m_in))
    for j in range(m_in):
        h = _step(u0[j])
        up = u0.copy()
        um = u0.copy()
        up[j] += h
        um[j] -= h
        B0[:, j] = (f(x0, up, xd0) - f(x0, um, xd0)) / (2 * h)
    E = np.empty((n, len(taps)))
    for j in range(len(taps)):
        h = _step(xd0[j])
        a = xd0.copy()
        b = xd0.copy()
        a[j] += h
        b[j] -= h
        E[:, j] = (f(x0, u0, a) - f(x0, u0, b)) / (2 * h)
    if not (np.all(np.isfinite(A0)) and np.all(np.isfinite(B0)) and np.all(np.isfinite(E))):
        raise EquilibriumError("non-finite Jacobian entry")

    blocks = [pade_delay(t.delay, pade_order) for t in taps]
    q = sum(b.n for b in blocks)
    A = np.zeros((n + q, n + q))
    A[:n, :n] = A0
    labels = list(model.states.names) if hasattr(model, "states") else [f"x{i}" for i in range(n)]
    o = n
    for j, (t, blk) in enumerate(zip(taps, blocks)):
        A[:n, t.state] += E[:, j] * blk.D[0, 0]
        if blk.n:
            A[:n, o:o + blk.n] += np.outer(E[:, j], blk.C[0])
            A[o:o + blk.n, t.state] += blk.B[:, 0]
            A[o:o + blk.n, o:o + blk.n] = blk.A
            labels += [f"{t.machine}.pade{k}" for k in range(blk.n)]
            o += blk.n
    B = np.zeros((n + q, m_in))
    B[:n] = B0
    C0 = model.output_matrix() if hasattr(model, "output_matrix") else np.zeros((0, n))
    C = np.zeros((C0.shape[0], n + q))
    C[:, :n] = C0
    D = np.zeros((C.shape[0], m_in))
    machines = {}
    spec = getattr(model, "spec", None)
    if spec is not None:
        for mach in spec.machines:
            machines[mach.id] = {"kind": mach.kind, "area": spec.bus(mach.bus).area}
    tau = max((t.delay for t in taps), default=0.0)
    return LinearModel(A, B, C, D, labels, list(model.inputs), list(getattr(model, "outputs", [])),
                       tau, pade_order, n, getattr(model, "framework", ""), machines, x0.copy())


class CallableModel:
    """Adapter exposing a plain ``f(x, u)`` through the interface :func:`linearize` expects."""

    def __init__(self, f, n_states, n_inputs=0, C=None, labels=None):
        self._f = f
        self.taps = []
        self.inputs = [f"u{j}" for j in range(n_inputs)]
        self._C = np.zeros((0, n_states)) if C is None else np.atleast_2d(np.asarray(C, dtype=float))
        self.outputs = [f"y{j}" for j in range(self._C.shape[0])]
        names = labels or [f"x{i}" for i in range(n_states)]
        self.states = type("Labels", (), {"names": names})()

    def residual(self, x, u=None, x_delayed=None, t=0.0):
        return np.atleast_1d(np.asarray(self._f(x, u), dtype=float))

    def output_matrix(self):
        return self._C
