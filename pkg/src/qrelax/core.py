"""Plain data containers passed between the compute modules."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import sparse

from . import constants as C


class DimensionError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


class IngestionError(ValueError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class HermitianOperator:
    """Hermitian matrix (dense or scipy-sparse) with optional basis labels.

    Real symmetric matrices are the common case (Hamiltonians, observables);
    complex Hermitian matrices appear for the momentum operator ``i[H, Q]``.
    """

    matrix: object
    labels: Optional[Sequence] = None
    name: str = ""

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"operator must be square, got shape {m.shape}")
        if self.labels is not None and len(self.labels) != m.shape[0]:
            raise DimensionError("labels do not match operator dimension")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.matrix)

    def dense(self) -> np.ndarray:
        if self.is_sparse:
            return self.matrix.toarray()
        return np.asarray(self.matrix)

    def diagonal(self) -> np.ndarray:
        return np.asarray(self.matrix.diagonal())

    def max_asymmetry(self) -> float:
        """max |M - M^H| / max |M| (0 for the zero matrix)."""
        m = self.matrix
        if self.is_sparse:
            d = abs(m - m.conj().T)
            num = d.max() if d.nnz else 0.0
            den = abs(m).max() if m.nnz else 0.0
        else:
            num = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
            den = np.max(np.abs(m)) if m.size else 0.0
        return float(num / den) if den > 0 else 0.0

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues and the orthogonal matrix of eigenvectors (columns)."""

    energies: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    def orthogonality_error(self) -> float:
        v = self.vectors
        return float(np.max(np.abs(v.conj().T @ v - np.eye(self.dim))))


@dataclass(frozen=True)
class WavePacket:
    basis_label: str
    amplitudes: np.ndarray

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    @classmethod
    def basis_state(cls, dim: int, index: int, basis_label: str = "computational"):
        if not 0 <= index < dim:
            raise IndexError(f"basis index {index} outside [0, {dim})")
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(basis_label, amps)

    @classmethod
    def normalized(cls, amplitudes, basis_label: str = "computational"):
        amps = np.asarray(amplitudes, dtype=complex)
        n = np.linalg.norm(amps)
        if n == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(basis_label, amps / n)


@dataclass(frozen=True)
class PropagatorColumn:
    """Entries f_{a a0}(t) = <a| exp(-iHt) |a0> for every a at one time t."""

    t: float
    source_index: int
    entries: np.ndarray

    @property
    def survival_amplitude(self) -> complex:
        return complex(self.entries[self.source_index])


@dataclass
class TimeSeries:
    """Monotone grid with named real channels of equal length."""

    grid: np.ndarray
    channels: dict = field(default_factory=dict)
    grid_name: str = "tau"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        if self.grid.ndim != 1 or self.grid.size == 0:
            raise ValueError("time grid must be a non-empty 1-d array")
        if self.grid.size > 1 and np.any(np.diff(self.grid) <= 0):
            raise ValueError("time grid must be strictly increasing")
        for name, values in list(self.channels.items()):
            self.add(name, values)

    def add(self, name: str, values) -> None:
        values = np.asarray(values, dtype=float)
        if values.shape != self.grid.shape:
            raise DimensionError(
                f"channel {name!r} has shape {values.shape}, grid has {self.grid.shape}"
            )
        self.channels[name] = values

    def __getitem__(self, name: str) -> np.ndarray:
        if name == self.grid_name:
            return self.grid
        return self.channels[name]

    def __contains__(self, name: str) -> bool:
        return name == self.grid_name or name in self.channels

    @property
    def names(self) -> list:
        return list(self.channels)

    def __len__(self) -> int:
        return self.grid.size


def time_grid(tau_max: float = C.DEFAULT_TAU_MAX, tau_steps: int = C.DEFAULT_TAU_STEPS) -> np.ndarray:
    """Uniform grid on [0, tau_max] with ``tau_steps`` points."""
    if tau_steps < 2:
        raise ValueError("tau_steps must be >= 2")
    if not tau_max > 0:
        raise ValueError("tau_max must be positive")
    return np.linspace(0.0, float(tau_max), int(tau_steps))
