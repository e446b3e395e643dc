import numpy as np
import pytest

from qrelax.core import HermitianOperator, PropagatorColumn, WavePacket
from qrelax.observables import (
    ObservableSpectrum,
    amplitude_decomposition,
    amplitude_histogram,
    expectation_q,
    first_crossing,
    momentum_moments,
    momentum_operator,
    npc,
    offdiag_widths,
    relaxation_record,
    static_npc,
    strength_function,
    survival_probability,
    uncertainty_q,
)
from qrelax.spectral import diagonalize, evolve_many, propagator_columns


def test_expectation_and_uncertainty_simple():
    q = np.array([-1.0, 0.0, 2.0])
    amps = np.array([[1, 0, 0], [np.sqrt(0.5), 0, np.sqrt(0.5)]], dtype=complex)
    np.testing.assert_allclose(expectation_q(q, amps), [-1.0, 0.5])
    np.testing.assert_allclose(uncertainty_q(q, amps), [0.0, 2.25])
    np.testing.assert_allclose(survival_probability(amps, 0), [1.0, 0.5])


def test_observable_spectrum():
    o = ObservableSpectrum(np.array([1.0, 2.0, 3.0]))
    assert o.dim == 3
    assert o.centered().values.sum() == 0.0
    assert o.mean_square == pytest.approx(14 / 3)


def test_npc_limits():
    n = 64
    assert npc(np.eye(n)[3]) == pytest.approx(1.0)
    assert npc(np.full(n, 1 / np.sqrt(n))) == pytest.approx(n)


def test_momentum_moments_match_operator(small_goe):
    H, spec, lam, q = small_goe
    a0 = 37
    times = np.linspace(0, 3, 13) / lam
    amps = propagator_columns(spec, a0, times)
    p_mean, p2 = momentum_moments(spec, H, q, amps[0], times, lam)
    P = momentum_operator(H, q, lam).dense()
    ref_mean = np.real(np.einsum("ti,ij,tj->t", amps.conj(), P, amps))
    ref_p2 = np.real(np.einsum("ti,ij,tj->t", amps.conj(), P @ P, amps))
    np.testing.assert_allclose(p_mean, ref_mean, atol=1e-10)
    np.testing.assert_allclose(p2, ref_p2, rtol=1e-9)


def test_momentum_is_time_derivative(small_goe):
    H, spec, lam, q = small_goe
    tau = np.linspace(0, 4, 4001)
    rec = relaxation_record(spec, H, q, 80, tau, lam, debug=True)
    inner = slice(5, -5)
    np.testing.assert_allclose(rec["P"][inner], rec["P_fd"][inner], atol=1e-5)


def test_decomposition_sums_to_one(small_goe):
    H, spec, lam, q = small_goe
    amps = propagator_columns(spec, 10, np.linspace(0, 10, 21))
    d, re2, im2 = amplitude_decomposition(amps, 10)
    np.testing.assert_allclose(d + re2 + im2, 1.0, atol=1e-12)
    col = PropagatorColumn(1.0, 10, amps[4])
    parts = amplitude_decomposition(col)
    assert sum(parts) == pytest.approx(1.0, abs=1e-12)


def test_offdiag_widths_consistency(small_goe):
    H, spec, lam, q = small_goe
    col = propagator_columns(spec, 5, [1.0 / lam])[0]
    re, re_se, im, im_se = offdiag_widths(col, 5)
    n = col.size
    _, re2, im2 = amplitude_decomposition(col, 5)
    assert re == pytest.approx(n * re2 / (n - 1))
    assert im == pytest.approx(n * im2 / (n - 1))
    assert re_se > 0 and im_se > 0


def test_static_npc_bases(small_goe):
    H, spec, lam, q = small_goe
    n = spec.dim
    # a basis state expanded in eigenvectors and eigenvector k in basis states
    assert static_npc(spec, 3, basis="eigen") == pytest.approx(1 / np.sum(spec.vectors[3] ** 4))
    assert static_npc(spec, 3, basis="computational") == pytest.approx(1 / np.sum(spec.vectors[:, 3] ** 4))
    v = spec.vectors[:, 7]
    assert static_npc(spec, v, basis="eigen") == pytest.approx(1.0)
    with pytest.raises(ValueError):
        static_npc(spec, np.zeros(n))


def test_histogram_gaussian_input():
    rng = np.random.default_rng(0)
    col = rng.standard_normal(20001) * 0.3 + 1j * rng.standard_normal(20001) * 0.3
    h = amplitude_histogram(col, 0, part="real")
    assert abs(h.excess_kurtosis) < 0.1
    assert h.ks_statistic < 0.02
    assert h.width == pytest.approx(0.3, rel=0.1)
    assert np.trapezoid(h.density, h.centers) == pytest.approx(1.0, abs=0.02)
    with pytest.raises(ValueError):
        amplitude_histogram(col[:50], 0)


def test_histogram_heavy_tails_detected():
    rng = np.random.default_rng(1)
    x = rng.standard_t(4, 20000)
    h = amplitude_histogram(x + 0j, 0, part="real")
    assert h.excess_kurtosis > 1.0


def test_strength_function_mass(small_goe):
    H, spec, lam, q = small_goe
    col = PropagatorColumn(2.0, 50, propagator_columns(spec, 50, [2.0 / lam])[0])
    sf = strength_function(q, col, bins=40)
    assert sf.total == pytest.approx(1.0, abs=1e-12)
    assert sf.smoothed_offdiag.shape == (spec.dim,)
    assert np.all(np.diff(sf.q_sorted) >= 0)
    assert sf.weights_sorted.sum() == pytest.approx(1.0, abs=1e-12)


def test_first_crossing():
    grid = np.linspace(0, 1, 11)
    vals = 1 - grid
    assert first_crossing(grid, vals, 0.45) == pytest.approx(0.55)
    assert np.isnan(first_crossing(grid, vals, -1.0))


def test_relaxation_record_channels(small_goe):
    H, spec, lam, q = small_goe
    tau = np.linspace(0, 5, 51)
    rec = relaxation_record(spec, H, q, 12, tau, lam)
    for name in ("survival", "Q", "dQ2", "P", "P2", "NPC", "Re_f", "Im_f", "sum_re2", "sum_im2"):
        assert rec[name].shape == tau.shape
    assert rec["survival"][0] == pytest.approx(1.0)
    assert rec["Q"][0] == pytest.approx(q[12])
    assert rec["NPC"][0] == pytest.approx(1.0)
    assert rec.meta["initial_index"] == 12


def test_norm_preserved(small_goe):
    H, spec, lam, q = small_goe
    psi = WavePacket.normalized(np.random.default_rng(4).standard_normal(spec.dim) + 0j)
    rows = evolve_many(spec, psi, np.linspace(0, 50, 11))
    np.testing.assert_allclose(np.sum(np.abs(rows) ** 2, axis=1), 1.0, atol=1e-12)
