"""Closed-form GOE relaxation curves in scaled time tau = lambda * t.

The survival amplitude of a GOE state is the Fourier transform of the
semicircle, ``f(tau) = J1(2 tau) / tau``; every universal curve below is
built from ``f``, its derivative, and ``f(2 tau)``.
"""

from __future__ import annotations

import enum

import numpy as np

from .core import TimeSeries
from .special import besselj_scaled

BESSEL_ROOTS = (1.91585, 3.50779, 5.08673)


class FormulaId(str, enum.Enum):
    AMPLITUDE = "amplitude"
    DERIVATIVE = "derivative"
    Q_MEAN = "Q"
    Q_VARIANCE = "dQ2"
    P_MEAN = "P"
    P_SQUARE = "P2"
    NPC_FULL = "NPC"
    NPC_SIMPLIFIED = "NPC_simplified"
    SHORT_EXP = "NPC_short"
    POWER_LAW = "power_law"


def f_analytic(tau):
    """J1(2 tau)/tau; equals 1 at tau = 0."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be non-negative")
    out = besselj_scaled(1, 2.0 * tau)
    return out if np.ndim(out) else float(out)


def fprime_analytic(tau):
    """d f / d tau = -2 J2(2 tau)/tau; equals 0 at tau = 0."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be non-negative")
    out = -2.0 * tau * besselj_scaled(2, 2.0 * tau)
    return out if np.ndim(out) else float(out)


def survival_analytic(tau):
    return f_analytic(tau) ** 2


def power_law_envelope(tau):
    """Large-tau envelope of |f|^2 through its local maxima: 1/(pi tau^3)."""
    tau = np.asarray(tau, dtype=float)
    return 1.0 / (np.pi * tau**3)


def short_time_npc(tau):
    """Rough short-time form exp(2 tau^2) of the number of principal components."""
    return np.exp(2.0 * np.asarray(tau, dtype=float) ** 2)


def weisskopf_time(dim: int, lam: float = 1.0) -> float:
    """Time scale N/lambda on which the discreteness of the spectrum shows."""
    return dim / lam


def offdiag_variances(f_t, f_2t):
    """N * mean square of the real and imaginary parts of f_{a a0}, a != a0.

    Accepts complex diagonal amplitudes; for a real ``f`` this reduces to
    (1/2 + f(2t)/2 - f^2, 1/2 - f(2t)/2).
    """
    f_t = np.asarray(f_t)
    g = np.real(f_2t)
    real_part = 0.5 + 0.5 * g - np.real(f_t) ** 2
    imag_part = 0.5 - 0.5 * g - np.imag(f_t) ** 2
    return real_part, imag_part


def npc_from_amplitudes(f_t, f_2t, dim: int):
    """Number of principal components from the diagonal amplitude at t and 2t.

    Off-diagonal amplitudes are taken as Gaussian with the variances of
    ``offdiag_variances``; their fourth moment gives the 1/N bracket.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    a, b = offdiag_variances(f_t, f_2t)
    f2 = np.abs(np.asarray(f_t)) ** 2
    return 1.0 / (f2**2 + (3.0 * a**2 + 3.0 * b**2 + 2.0 * a * b) / dim)


def npc_analytic(tau, dim: int):
    """Full closed form with the GOE amplitude f(tau), f(2 tau)."""
    tau = np.asarray(tau, dtype=float)
    return npc_from_amplitudes(f_analytic(tau), f_analytic(2.0 * tau), dim)


def npc_simplified(survival, dim: int):
    """[|f|^4 + 2/N]^-1 from a survival probability |f|^2."""
    s = np.asarray(survival, dtype=float)
    return 1.0 / (s**2 + 2.0 / dim)


def npc_simplified_analytic(tau, dim: int):
    return npc_simplified(survival_analytic(tau), dim)


def npc_limit(tau):
    """N -> infinity limit |f|^-4 (infinite at the Bessel roots)."""
    with np.errstate(divide="ignore"):
        return 1.0 / survival_analytic(tau) ** 2


def universal_channels(tau_grid, q0: float, dim: int, mean_q2: float) -> TimeSeries:
    """Analytic moment curves and NPC for an initial Q-eigenstate with value q0.

    ``mean_q2`` is Tr Q^2 / N of a traceless observable.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    tau = np.asarray(tau_grid, dtype=float)
    f = f_analytic(tau)
    fp = fprime_analytic(tau)
    s = f * f
    ts = TimeSeries(tau)
    ts.add("survival", s)
    ts.add("Q", q0 * s)
    ts.add("dQ2", q0**2 * (s - s * s) + (1.0 - s) * mean_q2)
    ts.add("P", q0 * 2.0 * f * fp)
    ts.add("P2", q0**2 * (s + fp**2) + (2.0 - s - fp**2) * mean_q2)
    ts.add("NPC", npc_analytic(tau, dim))
    ts.add("NPC_simplified", npc_simplified(s, dim))
    return ts


def curve(formula: FormulaId, tau, dim: int = 2, q0: float = 0.0, mean_q2: float = 1.0) -> np.ndarray:
    """Single reference curve by identifier."""
    formula = FormulaId(formula)
    tau = np.asarray(tau, dtype=float)
    if formula is FormulaId.AMPLITUDE:
        return f_analytic(tau)
    if formula is FormulaId.DERIVATIVE:
        return fprime_analytic(tau)
    if formula is FormulaId.SHORT_EXP:
        return short_time_npc(tau)
    if formula is FormulaId.POWER_LAW:
        return power_law_envelope(tau)
    if formula is FormulaId.NPC_FULL:
        return npc_analytic(tau, dim)
    if formula is FormulaId.NPC_SIMPLIFIED:
        return npc_simplified_analytic(tau, dim)
    ts = universal_channels(tau, q0, dim, mean_q2)
    return ts[formula.value]
