from .linear import (CallableModel, DelayBlock, EquilibriumError, LinearModel, linearize, pade_coefficients,
                     pade_delay)
from .modes import (SSO_BAND, SSO_ZETA_MAX, Mode, dominant_states, eig_modes, full_spectrum, mode_shape,
                    normalize_shape, participation, peak_prominences_db, sigma_max_response, sso_modes)
from .grouping import LABELS, GroupingLabel, classify_grouping
from .sweep import LocusPoint, build_linear, delay_sweep, least_damped, track

__all__ = ["CallableModel", "DelayBlock", "EquilibriumError", "LinearModel", "linearize", "pade_coefficients",
           "pade_delay", "SSO_BAND", "SSO_ZETA_MAX", "Mode", "dominant_states", "eig_modes", "full_spectrum",
           "mode_shape", "normalize_shape", "participation", "peak_prominences_db", "sigma_max_response",
           "sso_modes", "LABELS", "GroupingLabel", "classify_grouping", "LocusPoint", "build_linear",
           "delay_sweep", "least_damped", "track"]
