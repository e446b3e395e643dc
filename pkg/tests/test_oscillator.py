import numpy as np
import pytest

from qrelax.oscillator import (
    CoherentParams,
    SqueezedParams,
    coherent_amplitudes,
    coherent_dynamics,
    coherent_numeric,
    default_cutoff,
    hermite_functions,
    position_matrix,
    position_nodes,
    squeezed_amplitudes,
    squeezed_dynamics,
    truncation_leakage,
)

T = np.linspace(0, 4 * np.pi, 801)
CHANNELS = ("survival", "Q", "P", "dQ2", "dP2", "cov_QP")


def test_closed_form_initial_values():
    ts = coherent_dynamics(CoherentParams(1.3, 2.0), np.array([0.0]))
    assert ts["Q"][0] == pytest.approx(np.sqrt(2 / 2.0) * 1.3)
    assert ts["P"][0] == 0.0
    assert ts["survival"][0] == 1.0


def test_survival_full_period_and_half_period():
    ts = coherent_dynamics(CoherentParams(1.0, 1.0), np.array([np.pi, 2 * np.pi]))
    assert ts["survival"][0] == pytest.approx(np.exp(-4.0), rel=1e-14)
    assert ts["survival"][1] == pytest.approx(1.0, abs=1e-14)


def test_half_period_overlap_oracle():
    # sum_n conj(a_n(t)) a_n(0) with n_max = 40 at omega t = pi
    a = coherent_amplitudes(1.0, 40)
    n = np.arange(41)
    overlap = np.sum(np.conj(a * np.exp(-1j * np.pi * (n + 0.5))) * a)
    assert abs(overlap) ** 2 == pytest.approx(1.8316e-2, abs=1e-6)


@pytest.mark.parametrize("alpha,omega", [(1.0, 1.0), (0.7 - 1.1j, 1.0), (2.0, 0.5), (1.5j, 3.0)])
def test_numeric_matches_closed_form(alpha, omega):
    p = CoherentParams(alpha, omega, max(40, default_cutoff(alpha)))
    num = coherent_numeric(p, T / omega)
    ref = coherent_dynamics(p, T / omega)
    for name in CHANNELS:
        np.testing.assert_allclose(num[name], ref[name], atol=1e-8, err_msg=name)


def test_minimum_uncertainty_at_unit_frequency():
    num = coherent_numeric(CoherentParams(1.0, 1.0, 40), T)
    np.testing.assert_allclose(num["dQ2"], 0.5, atol=1e-8)
    np.testing.assert_allclose(num["dP2"], 0.5, atol=1e-8)


def test_periodicity_and_norm():
    p = CoherentParams(1.2 + 0.4j, 1.7, 60)
    period = 2 * np.pi / p.omega
    t = np.linspace(0, 3, 31)
    a = coherent_numeric(p, t)
    b = coherent_numeric(p, t + period)
    np.testing.assert_allclose(a["survival"], b["survival"], atol=1e-10)
    np.testing.assert_allclose(a["norm"], 1.0, atol=1e-12)


def test_leakage_guard():
    assert truncation_leakage(1.0, 40) < 1e-40
    assert truncation_leakage(0.0, 0) == 0.0
    with pytest.raises(ValueError):
        coherent_numeric(CoherentParams(3.0, 1.0, 10), T)
    # default cutoff always satisfies the bound
    for alpha in (0.1, 1.0, 3.0, 6.0):
        assert truncation_leakage(alpha, default_cutoff(alpha)) < 1e-12


def test_log_space_amplitudes_large_n():
    a = coherent_amplitudes(15.0, 400)
    assert np.all(np.isfinite(a))
    assert np.sum(np.abs(a) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_hermite_functions_orthonormal():
    # Gauss-Hermite style check on a fine grid
    x = np.linspace(-12, 12, 24001)
    phi = np.array([hermite_functions(xi, 12) for xi in x])
    gram = np.trapezoid(phi[:, :, None] * phi[:, None, :], x, axis=0)
    np.testing.assert_allclose(gram, np.eye(13), atol=1e-9)


def test_nodes_are_position_eigenvalues():
    nodes = position_nodes(30, 2.0)
    np.testing.assert_allclose(nodes, np.linalg.eigvalsh(position_matrix(30, 2.0)), atol=1e-12)


def test_squeezed_initial_position():
    p = SqueezedParams(0.7, 1.0, 200)
    psi, a_eff = squeezed_amplitudes(p)
    Q = position_matrix(200)
    np.testing.assert_allclose(Q @ psi, a_eff * psi, atol=1e-10)
    spacing = np.max(np.diff(position_nodes(200)))
    assert abs(a_eff - 0.7) <= spacing
    ts = squeezed_dynamics(p, np.array([0.0]))
    assert ts["Q"][0] == pytest.approx(a_eff, abs=1e-10)


def test_unsnapped_offset_shrinks():
    off = [abs(squeezed_dynamics(SqueezedParams(0.7, 1.0, n, snap_to_node=False), np.array([0.0]))["Q"][0] - 0.7) for n in (50, 800)]
    assert off[1] < off[0]


@pytest.mark.parametrize("omega", [1.0, 2.5])
def test_squeezed_classical_trajectory(omega):
    p = SqueezedParams(0.7, omega, 200)
    ts = squeezed_dynamics(p, T / omega)
    a = ts.meta["a_effective"]
    np.testing.assert_allclose(ts["Q"], a * np.cos(T), atol=1e-6)
    np.testing.assert_allclose(ts["P"], -omega * a * np.sin(T), atol=1e-6)


def test_squeezed_survival_collapses_with_cutoff():
    vals = [squeezed_dynamics(SqueezedParams(0.7, 1.0, n), np.array([np.pi / 2]))["survival"][0] for n in (50, 100, 200, 400, 800)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_squeezed_ellipse_rotates():
    ts = squeezed_dynamics(SqueezedParams(0.3, 1.0, 200), np.linspace(0, np.pi / 2, 5))
    assert ts["dQ2"][0] < ts["dQ2"][-1]
    assert ts["dP2"][0] > ts["dP2"][-1]
    assert np.any(np.abs(ts["cov_QP"][1:-1]) > 1.0)


@pytest.mark.parametrize("state", ["coherent", "squeezed"])
def test_uncertainty_bound(state):
    t = np.linspace(0, 7, 71)
    if state == "coherent":
        ts = coherent_numeric(CoherentParams(1.0 + 0.5j, 1.3, 40), t)
    else:
        ts = squeezed_dynamics(SqueezedParams(-0.4, 1.3, 150), t)
    assert np.all(np.sqrt(ts["dQ2"] * ts["dP2"]) >= 0.5 - 1e-10)


def test_position_outside_range():
    with pytest.raises(ValueError):
        squeezed_amplitudes(SqueezedParams(50.0, 1.0, 20))


def test_bad_params():
    with pytest.raises(ValueError):
        CoherentParams(1.0, 0.0)
    with pytest.raises(ValueError):
        SqueezedParams(0.0, 1.0, 0)
