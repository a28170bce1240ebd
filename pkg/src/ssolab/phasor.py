"""Reference-frame utilities: Park transform, space phasors, frame rotation, per-unit bases.

Convention: peak-invariant (2/3-scaled) Park matrix, so a balanced set with
1 pu peak maps to a space phasor of magnitude 1. The baseband phasor is
``x_d + j x_q = xbar * exp(-j rho)``.
"""
from dataclasses import dataclass
import math

import numpy as np

TWO_PI_3 = 2.0 * np.pi / 3.0


@dataclass(frozen=True)
class SpacePhasor:
    d: float
    q: float

    @property
    def complex(self):
        return complex(self.d, self.q)

    def __abs__(self):
        return math.hypot(self.d, self.q)

    @classmethod
    def from_complex(cls, z):
        return cls(float(np.real(z)), float(np.imag(z)))


@dataclass(frozen=True)
class FrameAngle:
    """Unwrapped frame angle ``rho`` (rad) and its rate ``omega`` (rad/s)."""
    rho: float
    omega: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.rho) and math.isfinite(self.omega)):
            raise ValueError("frame angle and speed must be finite")

    def advance(self, dt):
        return FrameAngle(self.rho + self.omega * dt, self.omega)


@dataclass(frozen=True)
class PerUnitBase:
    s_base: float = 100.0   # MVA
    v_base: float = 230.0   # kV (line-line)
    f_base: float = 60.0    # Hz

    def __post_init__(self):
        if min(self.s_base, self.v_base, self.f_base) <= 0:
            raise ValueError("per-unit bases must be strictly positive")

    @property
    def z_base(self):
        return self.v_base ** 2 / self.s_base

    @property
    def omega_base(self):
        return 2.0 * np.pi * self.f_base

    def rebase(self, s_from, s_to=None):
        """Factor converting an impedance from an ``s_from`` MVA base to this (or ``s_to``) base."""
        return (self.s_base if s_to is None else s_to) / s_from


def _angle(rho):
    if isinstance(rho, FrameAngle):
        return rho.rho
    return float(rho)


def park_matrix(rho):
    """3x3 peak-invariant Park matrix; row 3 is the zero-sequence row."""
    r = _angle(rho)
    ph = np.array([r, r - TWO_PI_3, r + TWO_PI_3])
    return (2.0 / 3.0) * np.vstack([np.cos(ph), -np.sin(ph), np.full(3, 0.5)])


def inverse_park_matrix(rho):
    r = _angle(rho)
    ph = np.array([r, r - TWO_PI_3, r + TWO_PI_3])
    return np.column_stack([np.cos(ph), -np.sin(ph), np.ones(3)])


def to_space_phasor(abc, rho):
    dq0 = park_matrix(rho) @ np.asarray(abc, dtype=float)
    return SpacePhasor(float(dq0[0]), float(dq0[1]))


def from_space_phasor(p, rho, zero=0.0):
    """Inverse of :func:`to_space_phasor` for a zero-sequence component ``zero``."""
    return inverse_park_matrix(rho) @ np.array([p.d, p.q, zero])


def frame_rotate(p, dtheta):
    """Express ``p`` in a frame advanced by ``dtheta``: ``p * exp(-j dtheta)``."""
    z = complex(p.d, p.q) * complex(math.cos(dtheta), -math.sin(dtheta))
    return SpacePhasor(z.real, z.imag)


def rotate(z, dtheta):
    """Array version of :func:`frame_rotate` on complex numbers."""
    return np.asarray(z) * np.exp(-1j * np.asarray(dtheta))
