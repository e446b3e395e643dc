"""Exact diagonalization and phase-only time evolution.

A state is evolved by rotating into the eigenbasis, multiplying each
component by exp(-i E_n t), and rotating back. The one-off O(N^3)
decomposition makes every later time point an O(N^2) operation with no
time-step error.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
from scipy import sparse

from . import constants as C
from .core import (
    DimensionError,
    HermitianOperator,
    NumericalError,
    PropagatorColumn,
    Spectrum,
    TimeSeries,
    WavePacket,
)


def diagonalize(H: HermitianOperator, check: bool = True, tol=None) -> Spectrum:
    tol = C.resolve_tolerances(tol)
    asym = H.max_asymmetry()
    if asym > tol["symmetry_rtol"]:
        raise ValueError(f"operator {H.name or '?'} is not Hermitian (relative asymmetry {asym:.3e})")
    m = H.dense()
    try:
        energies, vectors = scipy.linalg.eigh(m, driver="evd", check_finite=True)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(
            f"eigendecomposition failed for {H.name or 'operator'} "
            f"(dim={H.dim}, dtype={m.dtype}, max|H|={np.max(np.abs(m)):.3e}): {exc}"
        ) from exc
    spec = Spectrum(energies, vectors)
    if check:
        orth = spec.orthogonality_error()
        if orth > tol["orthogonality_atol"]:
            raise NumericalError(f"eigenvectors not orthonormal: max error {orth:.3e} (dim={H.dim})")
        scale = max(spectral_width(H), 1.0)
        resid = np.max(np.abs(m @ vectors - vectors * energies))
        if resid > tol["eigen_residual_atol"] * scale:
            raise NumericalError(f"eigen residual {resid:.3e} exceeds tolerance (dim={H.dim})")
    return spec


def _check_dims(spec: Spectrum, n: int) -> None:
    if spec.dim != n:
        raise DimensionError(f"dimension mismatch: spectrum {spec.dim}, state {n}")


def evolve(spec: Spectrum, psi0: WavePacket, t: float) -> WavePacket:
    """exp(-iHt) psi0, computed in the eigenbasis."""
    _check_dims(spec, psi0.dim)
    v = spec.vectors
    coeff = to_eigen(v, psi0.amplitudes)
    coeff = coeff * np.exp(-1j * spec.energies * t)
    return WavePacket(psi0.basis_label, v @ coeff)


def to_basis(coeff: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """coeff @ vectors.T, as two real products when the eigenvectors are real."""
    if np.iscomplexobj(vectors):
        return coeff @ vectors.T
    # strided .real/.imag views would bypass BLAS
    re = np.ascontiguousarray(coeff.real)
    im = np.ascontiguousarray(coeff.imag)
    return (re @ vectors.T) + 1j * (im @ vectors.T)


def to_eigen(vectors: np.ndarray, amps: np.ndarray) -> np.ndarray:
    """vectors^H @ amps without promoting a real eigenvector matrix to complex."""
    if np.iscomplexobj(vectors) or not np.iscomplexobj(amps):
        return vectors.conj().T @ amps
    return vectors.T @ amps.real + 1j * (vectors.T @ amps.imag)


def evolve_many(spec: Spectrum, psi0, times) -> np.ndarray:
    """Evolved amplitudes as a (len(times), N) array, one row per time."""
    amps = psi0.amplitudes if isinstance(psi0, WavePacket) else np.asarray(psi0, dtype=complex)
    _check_dims(spec, amps.shape[0])
    v = spec.vectors
    coeff = to_eigen(v, amps)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    phased = np.exp(-1j * np.outer(times, spec.energies)) * coeff
    return to_basis(phased, v)


def propagator_columns(spec: Spectrum, a0: int, times) -> np.ndarray:
    """f_{a a0}(t) for all a and every t; shape (len(times), N)."""
    if not 0 <= a0 < spec.dim:
        raise IndexError(f"source index {a0} outside [0, {spec.dim})")
    return evolve_many(spec, WavePacket.basis_state(spec.dim, a0), times)


def propagator_column(spec: Spectrum, a0: int, t: float) -> PropagatorColumn:
    entries = propagator_columns(spec, a0, [t])[0]
    return PropagatorColumn(float(t), int(a0), entries)


def survival_amplitudes(spec: Spectrum, times) -> np.ndarray:
    """Diagonal propagator elements f_{aa}(t) for every a; shape (len(times), N)."""
    weights = np.abs(spec.vectors) ** 2
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return to_basis(np.exp(-1j * np.outer(times, spec.energies)), weights)


def trace_form_factor(spec: Spectrum, tau_grid, lam: float = 1.0) -> TimeSeries:
    """F(t) = Tr exp(-iHt) / N on t = tau / lam."""
    tau = np.asarray(tau_grid, dtype=float)
    if tau.size == 0:
        raise ValueError("empty time grid")
    t = tau / lam
    energies = spec.energies
    F = np.exp(-1j * np.outer(t, energies)).mean(axis=1)
    F[t == 0] = 1.0
    ts = TimeSeries(tau)
    ts.add("Re_F", F.real)
    ts.add("Im_F", F.imag)
    ts.add("F2", np.abs(F) ** 2)
    return ts


def _trace_moments(H: HermitianOperator):
    m = H.matrix
    n = H.dim
    if sparse.issparse(m):
        tr2 = float(np.sum(np.abs(m.data) ** 2))
    else:
        tr2 = float(np.sum(np.abs(m) ** 2))
    tr1 = float(np.real(H.diagonal().sum()))
    return tr1 / n, tr2 / n


def spectral_width(H: HermitianOperator) -> float:
    """sqrt(Tr H^2/N - (Tr H/N)^2) from the matrix entries."""
    mean, mean_sq = _trace_moments(H)
    return float(np.sqrt(max(mean_sq - mean**2, 0.0)))


def _basis_vector(n: int, a: int) -> np.ndarray:
    if not 0 <= a < n:
        raise IndexError(f"basis index {a} outside [0, {n})")
    e = np.zeros(n)
    e[a] = 1.0
    return e


def state_width(H: HermitianOperator, a: int) -> float:
    """Energy spread sqrt(<a|H^2|a> - <a|H|a>^2) of a basis state."""
    h = np.asarray(H.matvec(_basis_vector(H.dim, a))).ravel()
    var = float(np.sum(np.abs(h) ** 2) - np.real(h[a]) ** 2)
    return float(np.sqrt(max(var, 0.0)))


def state_widths(H: HermitianOperator) -> np.ndarray:
    m = H.matrix
    if sparse.issparse(m):
        row_sq = np.asarray(abs(m).power(2).sum(axis=1)).ravel()
    else:
        row_sq = np.sum(np.abs(m) ** 2, axis=1)
    d = np.real(H.diagonal())
    return np.sqrt(np.clip(row_sq - d**2, 0.0, None))


def diagonal_variance(H: HermitianOperator) -> float:
    d = np.real(H.diagonal())
    return float(np.mean(d**2) - np.mean(d) ** 2)


def short_time_expansion(H: HermitianOperator, Q: HermitianOperator, a: int, order: int = 2, explicit: bool = False):
    """Taylor coefficients (c0, c1, c2) of Q_a(t) = <a|Q(t)|a> around t = 0.

    c1 = <a|i[H,Q]|a> and c2 = -<a|[H,[H,Q]]|a>/2. The default path uses two
    matrix-vector products; ``explicit=True`` forms the nested commutators.
    """
    if H.dim != Q.dim:
        raise DimensionError(f"H has dim {H.dim}, Q has dim {Q.dim}")
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    n = H.dim
    e = _basis_vector(n, a)
    if explicit:
        h, q = H.dense(), Q.dense()
        c1_op = 1j * (h @ q - q @ h)
        c2_op = h @ (h @ q - q @ h) - (h @ q - q @ h) @ h
        c0 = np.real(q[a, a])
        c1 = np.real(c1_op[a, a])
        c2 = -0.5 * np.real(c2_op[a, a])
    else:
        h = np.asarray(H.matvec(e)).ravel()
        q = np.asarray(Q.matvec(e)).ravel()
        hq = np.asarray(H.matvec(q)).ravel()
        qh = np.asarray(Q.matvec(h)).ravel()
        c0 = np.real(q[a])
        # <a|HQ|a> - <a|QH|a>, both from the vectors above
        c1 = np.real(1j * (np.vdot(h, q) - np.vdot(q, h)))
        c2 = np.real(np.vdot(h, qh) - np.vdot(h, hq))
    coeffs = (float(c0), float(c1), float(c2))
    return coeffs[: order + 1]


def transition_short_time(H: HermitianOperator, a: int, b: int) -> float:
    """Leading t^2 coefficient of |f_{ab}(t)|^2 for a != b, namely H_ab^2."""
    if a == b:
        raise ValueError("use the survival amplitude for a == b")
    row = np.asarray(H.matvec(_basis_vector(H.dim, b))).ravel()
    return float(np.abs(row[a]) ** 2)
