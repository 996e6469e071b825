import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from odba_chain.bethe import ground_state_log_bae, homogeneous_energy
from odba_chain.chain import ModelParams, hamiltonian_direct
from odba_chain.operators import lanczos_extremal
from odba_chain.rmatrix import phi
from odba_chain.spectrum import ground_energy
from odba_chain.thermo import (
    a_n,
    a_n_fourier,
    density_thermo,
    density_with_hole,
    ground_state_energy_thermo,
    periodic_ground_energy,
    rho_g_fourier,
    theta_n,
    theta_n_branch,
    thermo_row,
    twisted_boundary_energy_J1,
)


def trapezoid_coefficient(f, omega, n=4096):
    # periodic trapezoid rule is spectrally accurate for analytic integrands
    x = -np.pi + 2 * np.pi * np.arange(n) / n
    return np.sum(f(x) * np.exp(1j * omega * x)) * (2 * np.pi / n)


def density_fixed_point(params, n=2048, iters=400):
    """Damped iteration of rho = f - K*rho on a uniform grid (independent of the series)."""
    N, eta, b = params.N, params.eta, params.b
    x = -np.pi + 2 * np.pi * np.arange(n) / n
    h = 2 * np.pi / n
    f = 1 / (4 * np.pi * N) + 0.5 * (a_n(x + 2 * b, 1, eta) + a_n(x - 2 * b, 1, eta)) + a_n(x + np.pi, 2, eta) / (2 * N)
    K = a_n(np.subtract.outer(x, x), 2, eta) * h
    rho = f.copy()
    for _ in range(iters):
        rho = 0.5 * (rho + f - K @ rho)
    return x, rho


@pytest.mark.parametrize("n,eta", [(1, 1.0), (2, 1.0), (1, 2.0), (3, 0.5)])
def test_kernel_fourier(n, eta):
    for w in range(0, 8):
        got = trapezoid_coefficient(lambda x: a_n(x, n, eta), w)
        assert abs(got - a_n_fourier(w, n, eta)) < 1e-10


def test_theta_derivative_is_kernel():
    x = np.linspace(-9, 9, 301)
    h = 1e-6
    d = (theta_n(x + h, 2, 1.3) - theta_n(x - h, 2, 1.3)) / (2 * h)
    assert np.allclose(d, 2 * np.pi * a_n(x, 2, 1.3), atol=1e-7)


def test_theta_forms_agree_off_branch_points():
    x = np.linspace(-7, 7, 400)
    x = x[np.abs(np.mod(x, 2 * np.pi) - np.pi) > 1e-3]
    assert np.allclose(theta_n(x, 1, 0.8), theta_n_branch(x, 1, 0.8), atol=1e-12)


def test_theta_odd_and_zero():
    x = np.linspace(0, 3, 20)
    assert theta_n(0.0, 1, 1.0) == 0
    assert np.allclose(theta_n(-x, 2, 1.0), -theta_n(x, 2, 1.0))


def test_kernel_order_checked():
    with pytest.raises(ValueError):
        a_n(0.0, 0, 1.0)


def test_density_against_fixed_point():
    p = ModelParams(16, 1.0, 0.3)
    x, rho = density_fixed_point(p)
    assert np.abs(density_with_hole(x, p) - rho).max() < 1e-10
    assert np.sum(rho) * (2 * np.pi / len(x)) == pytest.approx(0.5 + 1 / p.sites, abs=1e-12)


def test_density_thermo_limit():
    p = ModelParams(4096, 1.0, 0.3)
    x = np.linspace(-2.5, 2.5, 9)
    # away from the hole the finite-N density approaches the bulk one
    assert np.abs(density_with_hole(x, p) - density_thermo(x, p)).max() < 1e-3
    assert rho_g_fourier(0, p).real == pytest.approx(0.5)


def test_truncation_bound_monotone():
    p = ModelParams(512, 2.0, 0.3)
    exact = ground_state_energy_thermo(p, 1e-14).value
    prev = None
    for tol in (1e-6, 5e-7, 2.5e-7, 1.25e-7):
        r = ground_state_energy_thermo(p, tol)
        assert r.tail_bound <= tol
        assert abs(r.value - exact) <= r.tail_bound
        if prev is not None:
            assert r.truncation_order >= prev.truncation_order
        prev = r


def test_truncation_error_below_bound():
    p = ModelParams(64, 1.0, 0.75)
    loose = ground_state_energy_thermo(p, 1e-4)
    exact = ground_state_energy_thermo(p, 1e-15)
    assert abs(loose.value - exact.value) <= loose.tail_bound


def test_boundary_energy_is_difference():
    p = ModelParams(128, 2.0, 0.3)
    row = thermo_row(p)
    assert abs(row["E_b"] - (row["E_g"] - row["E_g_periodic"])) <= 1e-12 * abs(row["E_g"])
    b = twisted_boundary_energy_J1(p)
    assert b.value == pytest.approx(row["E_b"], abs=1e-10)


def test_series_against_lanczos():
    p = ModelParams(16, 2.0, 0.3)
    per_site = lambda e: e / p.sites  # noqa: E731
    assert per_site(ground_state_energy_thermo(p).value) == pytest.approx(per_site(ground_energy(p)), abs=1e-3)
    e_per = lanczos_extremal(hamiltonian_direct(p, sparse=True, boundary="periodic"))
    assert per_site(periodic_ground_energy(p).value) == pytest.approx(per_site(e_per), abs=1e-3)


def test_series_against_log_bae():
    p = ModelParams(512, 2.0, 0.3)
    e_h = homogeneous_energy(ground_state_log_bae(p))
    assert abs(ground_state_energy_thermo(p).value - e_h) / p.sites < 1e-3


@settings(max_examples=30, deadline=None)
@given(st.floats(0.3, 3.0), st.floats(0.0, 1.5))
def test_boundary_series_finite(eta, b):
    p = ModelParams(4, eta, b)
    val = twisted_boundary_energy_J1(p).value
    scale = 2 * np.sinh(eta) * abs(phi(2j * b, eta)) * (1 + 4 / np.expm1(eta))
    assert np.isfinite(val) and abs(val) <= scale + 1e-9


def test_tolerance_must_be_positive():
    with pytest.raises(ValueError):
        periodic_ground_energy(ModelParams(4, 1.0, 0.3), tol=0)
