"""Harmonic oscillator reference: coherent and coordinate-squeezed states.

Units have hbar = m = 1, so Q = (c + c^dag)/sqrt(2 omega) and
P = i sqrt(omega/2) (c^dag - c). The Hamiltonian is omega (c^dag c + 1/2).
Numerical channels are exact moments of the truncated Fock vector: the
ladder operators act on an embedding one level larger, so nothing is lost
at the cut and every computed state obeys dQ dP >= 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln

from . import constants as C
from .core import NumericalError, TimeSeries


@dataclass(frozen=True)
class CoherentParams:
    alpha: complex
    omega: float = 1.0
    n_max: Optional[int] = None

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.n_max is not None and int(self.n_max) < 0:
            raise ValueError("n_max must be non-negative")

    @property
    def cutoff(self) -> int:
        if self.n_max is not None:
            return int(self.n_max)
        return default_cutoff(self.alpha)


@dataclass(frozen=True)
class SqueezedParams:
    a_position: float
    omega: float = 1.0
    n_max: int = 200
    snap_to_node: bool = True

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if int(self.n_max) < 1:
            raise ValueError("n_max must be >= 1")


def default_cutoff(alpha) -> int:
    n2 = abs(alpha) ** 2
    return int(math.ceil(n2 + 10.0 * math.sqrt(n2 + 1.0)))


def _log_poisson(n2: float, n: np.ndarray) -> np.ndarray:
    # log |a_n|^2 = -|alpha|^2 + n log|alpha|^2 - log n!
    if n2 == 0.0:
        return np.where(n == 0, 0.0, -np.inf)
    return -n2 + n * np.log(n2) - gammaln(n + 1.0)


def coherent_amplitudes(alpha, n_max: int) -> np.ndarray:
    """a_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!) for n = 0..n_max, in log space."""
    alpha = complex(alpha)
    n = np.arange(int(n_max) + 1, dtype=float)
    mod = np.exp(0.5 * _log_poisson(abs(alpha) ** 2, n))
    return mod * np.exp(1j * np.angle(alpha) * n)


def truncation_leakage(alpha, n_max: int) -> float:
    """Poisson tail sum_{n > n_max} |a_n|^2, summed term by term."""
    n2 = abs(complex(alpha)) ** 2
    if n2 == 0.0:
        return 0.0
    start = int(n_max) + 1
    n = np.arange(start, start + 4 * int(n2 + 50) + 200, dtype=float)
    return float(np.sum(np.exp(_log_poisson(n2, n))))


def _moments(psi: np.ndarray, omega: float):
    """<Q>, <P>, <Q^2>, <P^2>, sym. <QP+PQ>/2 for rows of Fock amplitudes."""
    psi = np.atleast_2d(psi)
    T, n = psi.shape
    ext = np.zeros((T, n + 1), dtype=complex)
    ext[:, :n] = psi
    k = np.sqrt(np.arange(1, n + 1, dtype=float))
    lower = np.zeros_like(ext)  # c psi
    lower[:, :n] = ext[:, 1:] * k
    raise_ = np.zeros_like(ext)  # c^dag psi
    raise_[:, 1:] = ext[:, :n] * k
    qv = (lower + raise_) / np.sqrt(2.0 * omega)
    pv = 1j * np.sqrt(omega / 2.0) * (raise_ - lower)
    q = np.real(np.sum(ext.conj() * qv, axis=1))
    p = np.real(np.sum(ext.conj() * pv, axis=1))
    q2 = np.sum(np.abs(qv) ** 2, axis=1)
    p2 = np.sum(np.abs(pv) ** 2, axis=1)
    qp = np.real(np.sum(qv.conj() * pv, axis=1))
    return q, p, q2, p2, qp


def _fock_series(psi0: np.ndarray, omega: float, t_grid) -> TimeSeries:
    t = np.asarray(t_grid, dtype=float)
    n = np.arange(psi0.shape[0], dtype=float)
    phase = np.exp(-1j * omega * np.outer(t, n + 0.5))
    psi = phase * psi0
    norm0 = np.sum(np.abs(psi0) ** 2)
    norms = np.sum(np.abs(psi) ** 2, axis=1)
    if np.max(np.abs(norms - norm0)) > 1e-12:
        raise NumericalError("Fock-space norm drifted during evolution")
    q, p, q2, p2, qp = _moments(psi / np.sqrt(norm0), omega)
    overlap = psi @ psi0.conj() / norm0
    ts = TimeSeries(t, grid_name="t")
    ts.add("survival", np.abs(overlap) ** 2)
    ts.add("Q", q)
    ts.add("P", p)
    ts.add("dQ2", q2 - q**2)
    ts.add("dP2", p2 - p**2)
    ts.add("cov_QP", qp - q * p)
    ts.add("norm", norms / norm0)
    return ts


def coherent_dynamics(p: CoherentParams, t_grid) -> TimeSeries:
    """Closed-form coherent-state channels."""
    t = np.asarray(t_grid, dtype=float)
    z = complex(p.alpha) * np.exp(-1j * p.omega * t)
    w = p.omega
    ts = TimeSeries(t, grid_name="t")
    ts.add("survival", np.exp(-4.0 * abs(p.alpha) ** 2 * np.sin(0.5 * w * t) ** 2))
    ts.add("Q", np.sqrt(2.0 / w) * z.real)
    ts.add("P", np.sqrt(2.0 * w) * z.imag)
    ts.add("dQ2", np.full(t.shape, 0.5 / w))
    ts.add("dP2", np.full(t.shape, 0.5 * w))
    ts.add("cov_QP", np.zeros(t.shape))
    ts.add("norm", np.ones(t.shape))
    ts.meta.update(alpha=[complex(p.alpha).real, complex(p.alpha).imag], omega=w)
    return ts


def coherent_numeric(p: CoherentParams, t_grid, tol=None) -> TimeSeries:
    """Same channels from the truncated Fock expansion evolved with E_n = omega (n + 1/2)."""
    tol = C.resolve_tolerances(tol)
    n_max = p.cutoff
    leak = truncation_leakage(p.alpha, n_max)
    if leak > tol["coherent_leakage"]:
        raise ValueError(
            f"truncation leakage {leak:.3e} above {tol['coherent_leakage']:.1e}; "
            f"raise n_max (>= {default_cutoff(p.alpha)} suggested)"
        )
    ts = _fock_series(coherent_amplitudes(p.alpha, n_max), p.omega, t_grid)
    ts.meta.update(n_max=n_max, leakage=leak, omega=p.omega)
    return ts


def position_matrix(n_max: int, omega: float = 1.0) -> np.ndarray:
    """Q in the Fock basis truncated to n = 0..n_max (tridiagonal)."""
    off = np.sqrt(np.arange(1, n_max + 1) / (2.0 * omega))
    return np.diag(off, 1) + np.diag(off, -1)


def position_nodes(n_max: int, omega: float = 1.0) -> np.ndarray:
    """Eigenvalues of the truncated Q; these are the roots of H_{n_max+1} scaled by 1/sqrt(omega)."""
    from scipy.linalg import eigh_tridiagonal

    off = np.sqrt(np.arange(1, n_max + 1) / (2.0 * omega))
    return eigh_tridiagonal(np.zeros(n_max + 1), off, eigvals_only=True)


def hermite_functions(x: float, n_max: int) -> np.ndarray:
    """Normalized phi_n(x), n = 0..n_max, by the three-term recurrence."""
    out = np.empty(n_max + 1)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def squeezed_amplitudes(p: SqueezedParams):
    """Truncated coordinate eigenstate and the position it is centred on.

    Coefficients are phi_n(sqrt(omega) a), cut at n_max and normalized. With
    ``snap_to_node`` the position is first moved to the nearest eigenvalue of
    the truncated Q; there the boundary term of the Hermite recurrence
    vanishes and the vector is an exact eigenvector of the truncated Q.
    """
    a = float(p.a_position)
    n_max = int(p.n_max)
    nodes = position_nodes(n_max, p.omega)
    if abs(a) > nodes[-1]:
        raise ValueError(
            f"position {a} outside the range +-{nodes[-1]:.3f} resolvable with n_max={n_max}"
        )
    if p.snap_to_node:
        a = float(nodes[np.argmin(np.abs(nodes - a))])
    coeff = hermite_functions(np.sqrt(p.omega) * a, n_max)
    s = np.linalg.norm(coeff)
    if not np.isfinite(s) or s == 0:
        raise NumericalError("Hermite expansion underflowed; position too far out")
    return coeff / s, a


def squeezed_dynamics(p: SqueezedParams, t_grid) -> TimeSeries:
    """Regularized coordinate eigenstate: classical Q(t), collapsing survival, rotating ellipse."""
    psi0, a_eff = squeezed_amplitudes(p)
    ts = _fock_series(psi0.astype(complex), p.omega, t_grid)
    ts.meta.update(a_position=float(p.a_position), a_effective=a_eff, n_max=int(p.n_max), omega=p.omega)
    return ts
