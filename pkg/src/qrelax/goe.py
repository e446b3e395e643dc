"""GOE sampling with a semicircle of radius 2*lambda.

Random numbers come from numpy's ``Philox`` bit generator (Philox4x64-10,
counter-based), so a given seed produces the same stream on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import constants as C
from .core import HermitianOperator


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFF_FFFF_FFFF_FFFF))


@dataclass(frozen=True)
class GoeParams:
    dim: int
    lam: float = 1.0
    seed: int = C.DEFAULT_SEED

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError(f"GOE dimension must be >= 1, got {self.dim}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")


def sample_goe(params: GoeParams) -> HermitianOperator:
    """Symmetric matrix with off-diagonal variance lam^2/N and diagonal 2 lam^2/N.

    The unit-scale matrix is built first and multiplied by ``lam`` last, so
    samples with different ``lam`` and equal seeds differ by exactly that factor.
    """
    n = int(params.dim)
    g = make_rng(params.seed).standard_normal((n, n))
    base = (g + g.T) / np.sqrt(2.0 * n)
    return HermitianOperator(params.lam * base, name="goe")


def semicircle_density(energy, lam: float = 1.0):
    """Wigner semicircle of radius 2*lam, normalized to one."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    e = np.asarray(energy, dtype=float)
    inside = np.clip(4.0 * lam**2 - e**2, 0.0, None)
    out = np.sqrt(inside) / (2.0 * np.pi * lam**2)
    return out if out.ndim else float(out)


def semicircle_cdf(energy, lam: float = 1.0):
    x = np.clip(np.asarray(energy, dtype=float) / (2.0 * lam), -1.0, 1.0)
    return 0.5 + (x * np.sqrt(1.0 - x**2) + np.arcsin(x)) / np.pi


def uniform_observable(dim: int, q: float = 1.0) -> np.ndarray:
    """Equally spaced values on [-sqrt(3) q, sqrt(3) q], shifted to zero trace.

    Mean square is q^2 (N+1)/(N-1); the shift only removes round-off because
    the grid is already symmetric.
    """
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    values = np.linspace(-np.sqrt(3.0) * q, np.sqrt(3.0) * q, dim)
    return values - values.mean()


@dataclass(frozen=True)
class BandedParams:
    """Diagonal-dominant banded matrix: sorted uniform diagonal on [-spread, spread]
    plus Gaussian couplings of width ``coupling`` within ``bandwidth`` of the diagonal."""

    dim: int = 1000
    bandwidth: int = 250
    coupling: float = 0.06
    spread: float = 1.0
    seed: int = C.DEFAULT_SEED

    def __post_init__(self):
        if int(self.dim) < 2 or not 0 < int(self.bandwidth) < int(self.dim):
            raise ValueError("need dim >= 2 and 0 < bandwidth < dim")


def sample_banded(params: BandedParams) -> HermitianOperator:
    n, rng = int(params.dim), make_rng(params.seed)
    m = np.diag(np.sort(rng.uniform(-params.spread, params.spread, n)))
    for k in range(1, int(params.bandwidth) + 1):
        v = params.coupling * rng.standard_normal(n - k)
        idx = np.arange(n - k)
        m[idx, idx + k] = v
        m[idx + k, idx] = v
    return HermitianOperator(m, name="banded")
