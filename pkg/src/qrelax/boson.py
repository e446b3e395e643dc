"""Spinless bosons on equidistant levels with a random two-body interaction.

H = H0 + v V with H0 = sum_k k n_k. The interaction is written through
normalized pair operators, V = sum_{pq} W_pq A_p^dag A_q, where
A_p^dag = c_k^dag c_l^dag (k < l) or (c_k^dag)^2 / sqrt(2) (k = l), and W is
a GOE matrix over pairs (off-diagonal variance 1, diagonal variance 2). The
many-body matrix is assembled by passing through every (n-2)-boson state:
A_p^dag |j> lands on a single n-boson state with a known sqrt factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Optional

import numpy as np
from scipy import sparse

from . import constants as C
from .core import DimensionError, HermitianOperator, Spectrum, TimeSeries
from .goe import make_rng
from .observables import relaxation_record
from .spectral import diagonalize, spectral_width, state_width, trace_form_factor


@dataclass(frozen=True)
class BosonModelParams:
    n_bosons: int = 6
    n_levels: int = 11
    v: float = 1.0
    seed: int = C.DEFAULT_SEED
    max_dim: int = C.MAX_BOSON_DIM

    def __post_init__(self):
        if int(self.n_bosons) < 1 or int(self.n_levels) < 1:
            raise ValueError("n_bosons and n_levels must be >= 1")

    @property
    def dim(self) -> int:
        return boson_dimension(self.n_bosons, self.n_levels)


def boson_dimension(n_bosons: int, n_levels: int) -> int:
    return comb(n_bosons + n_levels - 1, n_bosons)


@dataclass(frozen=True)
class OccupationBasis:
    """Occupation vectors as rows, most particles in low levels first."""

    states: np.ndarray
    _keys: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_keys", _encode(self.states, self.n_bosons))

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    @property
    def n_levels(self) -> int:
        return self.states.shape[1]

    @property
    def n_bosons(self) -> int:
        return int(self.states[0].sum())

    def __len__(self) -> int:
        return self.dim

    def energies(self) -> np.ndarray:
        """Non-interacting energies sum_k k n_k."""
        return self.states @ np.arange(self.n_levels, dtype=float)

    def index_of(self, occupation) -> int:
        key = _encode(np.atleast_2d(np.asarray(occupation)), self.n_bosons)
        return int(self.lookup(key)[0])

    def lookup(self, keys) -> np.ndarray:
        # keys are in strictly decreasing order with the basis index
        rev = self._keys[::-1]
        pos = np.searchsorted(rev, keys)
        if np.any(pos >= rev.size) or np.any(rev[np.minimum(pos, rev.size - 1)] != keys):
            raise KeyError("occupation vector not in basis")
        return self.dim - 1 - pos


def _encode(states: np.ndarray, n_bosons: int) -> np.ndarray:
    # level 0 is the most significant digit, so descending lex order = descending key
    base = n_bosons + 1
    L = states.shape[1]
    weights = base ** np.arange(L - 1, -1, -1, dtype=np.int64)
    return states.astype(np.int64) @ weights


def _enumerate(n_bosons: int, n_levels: int) -> np.ndarray:
    out = np.zeros((boson_dimension(n_bosons, n_levels), n_levels), dtype=np.int64)
    row = 0
    occ = [0] * n_levels

    def fill(level, left):
        nonlocal row
        if level == n_levels - 1:
            occ[level] = left
            out[row] = occ
            row += 1
            return
        for n in range(left, -1, -1):
            occ[level] = n
            fill(level + 1, left - n)

    fill(0, n_bosons)
    return out


def enumerate_basis(p: BosonModelParams) -> OccupationBasis:
    dim = p.dim
    if dim > p.max_dim:
        raise DimensionError(f"many-body dimension {dim} exceeds cap {p.max_dim}")
    return OccupationBasis(_enumerate(int(p.n_bosons), int(p.n_levels)))


def pair_list(n_levels: int):
    return [(k, l) for k in range(n_levels) for l in range(k, n_levels)]


def sample_pair_interaction(p: BosonModelParams) -> np.ndarray:
    """GOE over pair states: off-diagonal variance 1, diagonal variance 2."""
    n_pairs = len(pair_list(p.n_levels))
    g = make_rng(p.seed).standard_normal((n_pairs, n_pairs))
    return (g + g.T) / np.sqrt(2.0)


def two_body_operator(basis: OccupationBasis, w: np.ndarray) -> sparse.csr_matrix:
    n, L = basis.n_bosons, basis.n_levels
    dim = basis.dim
    pairs = pair_list(L)
    if w.shape != (len(pairs), len(pairs)):
        raise DimensionError(f"pair interaction has shape {w.shape}, expected {(len(pairs),) * 2}")
    if n < 2:
        return sparse.csr_matrix((dim, dim))
    core = _enumerate(n - 2, L)
    base = n + 1
    digit = base ** np.arange(L - 1, -1, -1, dtype=np.int64)
    core_keys = core @ digit
    target = np.empty((core.shape[0], len(pairs)), dtype=np.int64)
    amp = np.empty((core.shape[0], len(pairs)))
    for c, (k, l) in enumerate(pairs):
        if k == l:
            amp[:, c] = np.sqrt((core[:, k] + 1) * (core[:, k] + 2) / 2.0)
            target[:, c] = core_keys + 2 * digit[k]
        else:
            amp[:, c] = np.sqrt((core[:, k] + 1) * (core[:, l] + 1.0))
            target[:, c] = core_keys + digit[k] + digit[l]
    idx = basis.lookup(target.ravel()).reshape(target.shape)
    P = len(pairs)
    rows = np.repeat(idx[:, :, None], P, axis=2).ravel()
    cols = np.repeat(idx[:, None, :], P, axis=1).ravel()
    vals = (amp[:, :, None] * amp[:, None, :] * w[None]).ravel()
    # coo -> csr sums the contributions of different intermediate states
    return sparse.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()


def build_hamiltonian(p: BosonModelParams, basis: OccupationBasis) -> HermitianOperator:
    if basis.n_levels != p.n_levels or basis.n_bosons != p.n_bosons or basis.dim != p.dim:
        raise DimensionError("basis does not belong to these model parameters")
    h0 = sparse.diags(basis.energies(), format="csr")
    if p.v == 0:
        return HermitianOperator(h0, name="boson")
    V = two_body_operator(basis, sample_pair_interaction(p))
    H = (h0 + p.v * V).tocsr()
    # exact symmetry: both triangles come from the same float products, average away round-off
    H = ((H + H.T) * 0.5).tocsr()
    H.sum_duplicates()
    return HermitianOperator(H, name="boson")


@dataclass
class BosonSystem:
    params: BosonModelParams
    basis: OccupationBasis
    H: HermitianOperator
    spec: Optional[Spectrum] = None

    @property
    def lam(self) -> float:
        return spectral_width(self.H)

    def observable(self) -> np.ndarray:
        """Centred non-interacting energy, diagonal in the occupation basis."""
        e = self.basis.energies()
        return e - e.mean()

    def ensure_spectrum(self) -> Spectrum:
        if self.spec is None:
            self.spec = diagonalize(self.H)
        return self.spec


def prepare_system(p: BosonModelParams, diagonalize_now: bool = True) -> BosonSystem:
    basis = enumerate_basis(p)
    system = BosonSystem(p, basis, build_hamiltonian(p, basis))
    if diagonalize_now:
        system.ensure_spectrum()
    return system


def run_boson_relaxation(p: BosonModelParams, initial_index: int, tau_grid, system: Optional[BosonSystem] = None) -> TimeSeries:
    """Relaxation of a non-interacting eigenstate; tau uses the global width.

    Extra channels: F2 = |Tr exp(-iHt)/N|^2 on the same grid, and tau_a, the
    same times in units of the state's own width.
    """
    if system is None:
        system = prepare_system(p)
    elif system.params != p:
        raise ValueError("system was built for different parameters")
    dim = system.basis.dim
    if not 0 <= int(initial_index) < dim:
        raise IndexError(f"initial index {initial_index} outside [0, {dim})")
    spec = system.ensure_spectrum()
    lam = system.lam
    lam_a = state_width(system.H, int(initial_index))
    rec = relaxation_record(spec, system.H, system.observable(), int(initial_index), tau_grid, lam)
    F = trace_form_factor(spec, tau_grid, lam)
    rec.add("F2", F["F2"])
    rec.add("tau_a", rec.grid * lam_a / lam)
    rec.meta.update(
        lam=lam,
        lam_a=lam_a,
        dim=dim,
        v=float(p.v),
        occupation=[int(x) for x in system.basis.states[int(initial_index)]],
    )
    return rec
