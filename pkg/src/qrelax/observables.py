"""Time-dependent diagnostics of an evolving basis state.

Amplitude arrays follow one convention throughout: shape ``(T, N)`` with one
row per time point, entry ``[i, a] = <a|psi(t_i)>``, in the basis where the
observable Q is diagonal. A single row of shape ``(N,)`` is also accepted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .core import DimensionError, HermitianOperator, PropagatorColumn, Spectrum, TimeSeries
from .spectral import propagator_columns, to_basis, to_eigen


@dataclass(frozen=True)
class ObservableSpectrum:
    values: np.ndarray
    basis_label: str = "computational"

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def mean_square(self) -> float:
        return float(np.mean(self.values**2))

    def centered(self) -> "ObservableSpectrum":
        return ObservableSpectrum(self.values - self.values.mean(), self.basis_label)


def _rows(amps) -> np.ndarray:
    if isinstance(amps, PropagatorColumn):
        amps = amps.entries
    elif isinstance(amps, (list, tuple)) and amps and isinstance(amps[0], PropagatorColumn):
        amps = np.stack([c.entries for c in amps])
    return np.atleast_2d(np.asarray(amps))


def _q(q) -> np.ndarray:
    return q.values if isinstance(q, ObservableSpectrum) else np.asarray(q, dtype=float)


def _squeeze(x, like):
    return x[0] if np.ndim(like) == 1 or isinstance(like, PropagatorColumn) else x


def survival_probability(amps, a0: int) -> np.ndarray:
    rows = _rows(amps)
    return np.abs(rows[:, a0]) ** 2


def expectation_q(q, amps) -> np.ndarray:
    """sum_a Q_a |psi_a|^2 for each row."""
    qv = _q(q)
    rows = _rows(amps)
    if rows.shape[1] != qv.shape[0]:
        raise DimensionError(f"observable has {qv.shape[0]} values, state has {rows.shape[1]}")
    return _squeeze((np.abs(rows) ** 2) @ qv, amps)


def uncertainty_q(q, amps) -> np.ndarray:
    qv = _q(q)
    rows = _rows(amps)
    if rows.shape[1] != qv.shape[0]:
        raise DimensionError(f"observable has {qv.shape[0]} values, state has {rows.shape[1]}")
    p = np.abs(rows) ** 2
    mean = p @ qv
    var = p @ (qv**2) - mean**2
    return _squeeze(np.clip(var, 0.0, None), amps)


def momentum_operator(H: HermitianOperator, Q, lam: float = 1.0) -> HermitianOperator:
    """P = i[H, Q] / lam, the time derivative of Q in units of tau = lam t.

    For real symmetric H and Q the matrix is purely imaginary and
    antisymmetric, hence Hermitian.
    """
    h = H.dense()
    q = np.diag(_q(Q)) if not isinstance(Q, HermitianOperator) else Q.dense()
    if h.shape != q.shape:
        raise DimensionError(f"H has shape {h.shape}, Q has shape {q.shape}")
    comm = h @ q - q @ h
    return HermitianOperator(1j * comm / lam, name="momentum")


def momentum_moments(spec: Spectrum, H: HermitianOperator, q, psi0, times, lam: float = 1.0):
    """<P>(t) and <P^2>(t) for diagonal Q, without forming P explicitly.

    H psi(t) comes from the eigenbasis; P psi = i(H Q psi - Q H psi) / lam.
    """
    qv = _q(q)
    amps0 = psi0.amplitudes if hasattr(psi0, "amplitudes") else np.asarray(psi0, dtype=complex)
    v = spec.vectors
    coeff = to_eigen(v, amps0)
    phased = np.exp(-1j * np.outer(np.atleast_1d(times), spec.energies)) * coeff
    psi = to_basis(phased, v)
    h_psi = to_basis(phased * spec.energies, v)
    q_psi = psi * qv
    p_mean = -2.0 * np.imag(np.sum(np.conj(h_psi) * q_psi, axis=1)) / lam
    hq_psi = np.asarray(H.matrix @ q_psi.T).T
    p_psi = 1j * (hq_psi - h_psi * qv) / lam
    p2 = np.sum(np.abs(p_psi) ** 2, axis=1)
    return p_mean, p2


def npc(amps) -> np.ndarray:
    """Number of principal components (sum_a |psi_a|^4)^-1 per row."""
    rows = _rows(amps)
    return _squeeze(1.0 / np.sum(np.abs(rows) ** 4, axis=1), amps)


def static_npc(spec: Spectrum, direction, basis: str = "eigen") -> float:
    """Time-independent participation number.

    ``basis="eigen"``: components of ``direction`` (a basis index or a state
    vector in the computational basis) along the eigenvectors.
    ``basis="computational"``: components of eigenvector ``direction``
    (an index) or of the given vector, in the computational basis.
    """
    if np.ndim(direction) == 0:
        k = int(direction)
        if not 0 <= k < spec.dim:
            raise IndexError(f"index {k} outside [0, {spec.dim})")
        comps = spec.vectors[k, :] if basis == "eigen" else spec.vectors[:, k]
    else:
        vec = np.asarray(direction, dtype=complex)
        n = np.linalg.norm(vec)
        if n == 0:
            raise ValueError("zero vector has no participation number")
        vec = vec / n
        comps = spec.vectors.conj().T @ vec if basis == "eigen" else vec
    return float(1.0 / np.sum(np.abs(comps) ** 4))


def amplitude_decomposition(column, a0: Optional[int] = None):
    """(|f|^2, sum_{a!=a0} (Re f_a)^2, sum_{a!=a0} (Im f_a)^2); sums to one."""
    if isinstance(column, PropagatorColumn):
        a0, entries = column.source_index, column.entries
    else:
        entries = np.asarray(column)
    rows = np.atleast_2d(entries)
    diag = np.abs(rows[:, a0]) ** 2
    mask = np.ones(rows.shape[1], dtype=bool)
    mask[a0] = False
    off = rows[:, mask]
    re2 = np.sum(off.real**2, axis=1)
    im2 = np.sum(off.imag**2, axis=1)
    if rows.shape[0] == 1 and np.ndim(entries) == 1:
        return float(diag[0]), float(re2[0]), float(im2[0])
    return diag, re2, im2


def offdiag_widths(column, a0: Optional[int] = None):
    """N * mean of (Re f_a)^2 and (Im f_a)^2 over a != a0, with standard errors.

    Returns ``(re_mean, re_se, im_mean, im_se)``.
    """
    if isinstance(column, PropagatorColumn):
        a0, entries = column.source_index, column.entries
    else:
        entries = np.asarray(column)
    n = entries.shape[0]
    off = np.delete(entries, a0)
    re2 = n * off.real**2
    im2 = n * off.imag**2
    m = off.size
    return (
        float(re2.mean()),
        float(re2.std(ddof=1) / np.sqrt(m)),
        float(im2.mean()),
        float(im2.std(ddof=1) / np.sqrt(m)),
    )


@dataclass
class AmplitudeHistogram:
    edges: np.ndarray
    density: np.ndarray
    scaled_x: np.ndarray
    scaled_density: np.ndarray
    gaussian: np.ndarray
    peak: float
    width: float
    excess_kurtosis: float
    ks_statistic: float

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def _peak_curvature(centers, density):
    """Peak location and log-density curvature from a parabola through the top bins."""
    i = int(np.argmax(density))
    top = density[i]
    sel = density >= top * np.exp(-0.5)
    # keep the contiguous run around the peak
    lo = i
    while lo > 0 and sel[lo - 1]:
        lo -= 1
    hi = i
    while hi < len(density) - 1 and sel[hi + 1]:
        hi += 1
    lo, hi = max(0, min(lo, i - 1)), min(len(density) - 1, max(hi, i + 1))
    x = centers[lo : hi + 1]
    y = np.log(np.clip(density[lo : hi + 1], 1e-300, None))
    if x.size < 3:
        return centers[i], float("nan"), top
    c2, c1, c0 = np.polyfit(x, y, 2)
    if c2 >= 0:
        return centers[i], float("nan"), top
    x_peak = -c1 / (2 * c2)
    return float(x_peak), float(np.sqrt(-1.0 / (2 * c2))), float(np.exp(c0 - c1**2 / (4 * c2)))


def _bin_count(x, bins, max_bins: int):
    """Freedman-Diaconis count clipped to [10, max_bins]; heavy tails give a tiny IQR."""
    if not isinstance(bins, str) or bins != "fd":
        return bins
    iqr = np.subtract(*np.percentile(x, [75, 25]))
    span = np.ptp(x)
    if iqr <= 0:
        return max_bins
    width = 2.0 * iqr / x.size ** (1.0 / 3.0)
    return int(np.clip(np.ceil(span / width), 10, max_bins))


def amplitude_histogram(
    column, a0: Optional[int] = None, part: str = "imag", bins="fd", min_samples: int = 100, max_bins: int = 200
) -> AmplitudeHistogram:
    """Density histogram of the real or imaginary parts of f_{a a0}, a != a0.

    Also returns the same curve on axes shifted to the fitted peak and scaled
    so that the log-density curvature at the peak is -1 (a unit Gaussian then
    maps onto ``gaussian``).
    """
    if isinstance(column, PropagatorColumn):
        a0, entries = column.source_index, column.entries
    else:
        entries = np.asarray(column)
    off = np.delete(entries, a0)
    if off.size < min_samples:
        raise ValueError(f"need at least {min_samples} off-diagonal entries, got {off.size}")
    if part not in ("real", "imag"):
        raise ValueError("part must be 'real' or 'imag'")
    x = off.real if part == "real" else off.imag
    spread = np.std(x)
    if spread == 0:
        edges = np.array([-0.5, 0.5]) if x[0] == 0 else np.array([x[0] - 0.5, x[0] + 0.5])
        density = np.array([1.0])
        return AmplitudeHistogram(edges, density, np.zeros(1), np.ones(1), np.ones(1), float(x[0]), 0.0, float("nan"), float("nan"))
    density, edges = np.histogram(x, bins=_bin_count(x, bins, max_bins), density=True)
    centers = 0.5 * (edges[1:] + edges[:-1])
    peak, width, height = _peak_curvature(centers, density)
    if not np.isfinite(width) or width <= 0:
        width = spread
        height = density.max()
    scaled_x = (centers - peak) / width
    scaled_density = density / height
    z = (x - x.mean()) / spread
    ks = stats.kstest(z, "norm").statistic
    return AmplitudeHistogram(
        edges=edges,
        density=density,
        scaled_x=scaled_x,
        scaled_density=scaled_density,
        gaussian=np.exp(-0.5 * scaled_x**2),
        peak=peak,
        width=width,
        excess_kurtosis=float(stats.kurtosis(x, fisher=True)),
        ks_statistic=float(ks),
    )


@dataclass
class StrengthFunction:
    edges: np.ndarray
    mass: np.ndarray
    q_sorted: np.ndarray
    weights_sorted: np.ndarray
    smoothed_offdiag: Optional[np.ndarray]

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def total(self) -> float:
        return float(self.mass.sum())


def strength_function(q, column, a0: Optional[int] = None, bins=50, smooth_window: Optional[int] = 25) -> StrengthFunction:
    """Weights |f_{a a0}|^2 binned by Q_a.

    ``smooth_window`` sets a moving average (in number of states, ordered by
    Q) over the off-diagonal weights; ``None`` disables it.
    """
    if isinstance(column, PropagatorColumn):
        a0, entries = column.source_index, column.entries
    else:
        entries = np.asarray(column)
    qv = _q(q)
    if qv.shape != entries.shape:
        raise DimensionError("observable and column have different dimensions")
    w = np.abs(entries) ** 2
    if np.ndim(bins) == 0:
        span = qv.max() - qv.min()
        pad = 1e-9 * max(span, 1.0)
        edges = np.linspace(qv.min() - pad, qv.max() + pad, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
    mass, _ = np.histogram(qv, bins=edges, weights=w)
    order = np.argsort(qv, kind="stable")
    q_sorted = qv[order]
    w_sorted = w[order]
    smoothed = None
    if smooth_window:
        off = w.copy()
        off[a0] = np.nan
        off = off[order]
        valid = ~np.isnan(off)
        k = np.ones(int(smooth_window))
        num = np.convolve(np.where(valid, off, 0.0), k, mode="same")
        den = np.convolve(valid.astype(float), k, mode="same")
        smoothed = num / np.maximum(den, 1.0)
    return StrengthFunction(edges, mass, q_sorted, w_sorted, smoothed)


def first_crossing(grid, values, level: float) -> float:
    """First grid point where ``values`` drops below ``level`` (linear interpolation)."""
    values = np.asarray(values, dtype=float)
    below = np.nonzero(values < level)[0]
    if below.size == 0:
        return float("nan")
    i = below[0]
    if i == 0:
        return float(grid[0])
    x0, x1 = grid[i - 1], grid[i]
    y0, y1 = values[i - 1], values[i]
    return float(x0 + (level - y0) * (x1 - x0) / (y1 - y0))


def relaxation_record(
    spec: Spectrum,
    H: HermitianOperator,
    q,
    a0: int,
    tau_grid,
    lam: float,
    debug: bool = False,
) -> TimeSeries:
    """Evolve basis state ``a0`` and collect every channel on tau = lam t.

    Channels: survival, Q, dQ2, P, P2, NPC, Re_f, Im_f, sum_re2, sum_im2;
    with ``debug`` also P_fd (finite difference of Q).
    """
    qv = _q(q)
    tau = np.asarray(tau_grid, dtype=float)
    times = tau / lam
    amps = propagator_columns(spec, a0, times)
    f = amps[:, a0]
    ts = TimeSeries(tau)
    ts.add("survival", np.abs(f) ** 2)
    ts.add("Q", expectation_q(qv, amps))
    ts.add("dQ2", uncertainty_q(qv, amps))
    p_mean, p2 = momentum_moments(spec, H, qv, amps[0], times, lam)
    ts.add("P", p_mean)
    ts.add("P2", p2)
    ts.add("NPC", npc(amps))
    ts.add("Re_f", f.real)
    ts.add("Im_f", f.imag)
    _, re2, im2 = amplitude_decomposition(amps, a0)
    ts.add("sum_re2", re2)
    ts.add("sum_im2", im2)
    if debug:
        ts.add("P_fd", np.gradient(ts["Q"], tau))
    ts.meta.update(initial_index=int(a0), initial_q=float(qv[a0]))
    return ts
