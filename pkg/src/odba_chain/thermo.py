"""Kernel functions and thermodynamic-limit series for the J = +1 ground state."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ModelParams
from .rmatrix import phi

MAX_OMEGA = 10_000


def a_n(x, n: int, eta: float):
    """a_n(x) = sinh(n eta) / (2 pi (cosh(n eta) - cos x)); 2pi-periodic, unit integral."""
    if n < 1:
        raise ValueError("kernel order must be >= 1")
    return np.sinh(n * eta) / (2 * np.pi * (np.cosh(n * eta) - np.cos(x)))


def theta_n(x, n: int, eta: float):
    """Continuous phase 2 arctan(tan(x/2) / tanh(n eta / 2)) unwrapped across branches.

    Written as ``x + 2 arctan(...)`` with a denominator that stays positive,
    so no floor correction is needed; ``d theta_n / dx = 2 pi a_n(x)``.
    """
    if n < 1:
        raise ValueError("kernel order must be >= 1")
    p = 1.0 / np.tanh(n * eta / 2)
    x = np.asarray(x, dtype=float)
    return x + 2 * np.arctan((p - 1) * np.sin(x) / ((1 + p) + (1 - p) * np.cos(x)))


def theta_n_branch(x, n: int, eta: float):
    """Same phase via the arctan-plus-Gauss-bracket form (invalid at odd multiples of pi)."""
    x = np.asarray(x, dtype=float)
    return 2 * np.arctan(np.tan(x / 2) / np.tanh(n * eta / 2)) + 2 * np.pi * np.floor(x / (2 * np.pi) + 0.5)


def a_n_fourier(omega: int, n: int, eta: float) -> float:
    """Closed-form Fourier coefficient of a_n on [-pi, pi]: exp(-n eta |omega|)."""
    return float(np.exp(-n * eta * abs(omega)))


@dataclass(frozen=True)
class SeriesResult:
    value: float
    truncation_order: int
    tail_bound: float


def rho_g_fourier(omega: int, params: ModelParams) -> complex:
    """Fourier coefficient of the ground-state root density with one hole at -pi."""
    N, eta, b = params.N, params.eta, params.b
    w = int(omega)
    sign = -1.0 if w % 2 else 1.0  # e^{i pi omega}
    damp = 1 + np.exp(-2 * eta * abs(w))
    val = -sign / (2 * N * damp) + np.cos(2 * b * w) / (2 * np.cosh(eta * w))
    if w == 0:
        val += 1 / (2 * N * damp)
    return complex(val)


def density_with_hole(x, params: ModelParams, omega_max: int = 60):
    """rho + rho^h = dZ/du for the finite-N ground state, summed over |omega| <= omega_max.

    The hole at -pi is a delta of weight 1/(2N) whose coefficients do not
    decay; adding it back to rho-tilde_g leaves a rapidly convergent series.
    """
    N, eta = params.N, params.eta
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for w in range(-omega_max, omega_max + 1):
        sign = -1.0 if w % 2 else 1.0
        coef = rho_g_fourier(w, params).real + sign / (2 * N)
        total = total + coef * np.cos(w * x)
    return total / (2 * np.pi)


def density_thermo(x, params: ModelParams, omega_max: int = 60):
    """N -> infinity root density sum_w cos(2 b w) / (2 cosh(eta w)) e^{-i w x} / (2 pi)."""
    eta, b = params.eta, params.b
    x = np.asarray(x, dtype=float)
    w = np.arange(1, omega_max + 1)
    coef = np.cos(2 * b * w) / (2 * np.cosh(eta * w))
    return (0.5 + 2 * np.cos(np.multiply.outer(x, w)) @ coef) / (2 * np.pi)


def _truncation(eta: float, tol: float, scale: float) -> tuple[int, float]:
    """Smallest Omega whose two-sided geometric tail, times ``scale``, is below ``tol``.

    Terms are bounded by 2 e^{-eta |w|} for |w| > Omega, so the tail is at
    most ``4 e^{-eta (Omega+1)} / (1 - e^{-eta})``.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    q = np.exp(-eta)
    for omega in range(1, MAX_OMEGA + 1):
        bound = scale * 4 * q ** (omega + 1) / (1 - q)
        if bound <= tol:
            return omega, bound
    raise ValueError(f"tolerance {tol} needs more than {MAX_OMEGA} Fourier modes")


def _bulk_sum(eta: float, b: float, omega: int) -> float:
    w = np.arange(-omega, omega + 1)
    return float(np.sum(np.exp(-eta * np.abs(w)) * np.cos(2 * b * w) ** 2 / np.cosh(eta * w)))


def _boundary_sum(eta: float, b: float, omega: int) -> float:
    w = np.arange(-omega, omega + 1)
    sign = np.where(w % 2, -1.0, 1.0)
    return float(np.sum(sign * np.cos(2 * b * w) / np.cosh(eta * w)))


def _coefficients(params: ModelParams):
    eta, b, N = params.eta, params.b, params.N
    ph = float(np.real(phi(2j * b, eta)))
    bulk = -4 * N * np.sinh(eta) * ph
    const = -N * np.cosh(eta) * (np.cos(2 * b) ** 2 - np.cosh(2 * eta)) / np.sinh(eta) ** 2
    boundary = 2 * np.sinh(eta) * ph
    return bulk, const, boundary


def periodic_ground_energy(params: ModelParams, tol: float = 1e-12) -> SeriesResult:
    """Bulk (periodic-boundary) ground energy series."""
    bulk, const, _ = _coefficients(params)
    # the bulk series decays as 2 e^{-2 eta |w|}; e^{-eta |w|} still bounds it
    omega, bound = _truncation(params.eta, tol, abs(bulk))
    return SeriesResult(bulk * _bulk_sum(params.eta, params.b, omega) + const, omega, bound)


def twisted_boundary_energy_J1(params: ModelParams, tol: float = 1e-12) -> SeriesResult:
    """Alternating series 2 sinh(eta) phi(2bi) sum_w (-1)^w cos(2bw)/cosh(eta w)."""
    _, _, boundary = _coefficients(params)
    omega, bound = _truncation(params.eta, tol, abs(boundary))
    return SeriesResult(boundary * _boundary_sum(params.eta, params.b, omega), omega, bound)


def ground_state_energy_thermo(params: ModelParams, tol: float = 1e-12) -> SeriesResult:
    """Antiperiodic ground energy: bulk series, constant, and the boundary series.

    Both series share one truncation order chosen for the larger prefactor,
    so ``E_b = E^g - E^g_p`` holds exactly at that order.
    """
    bulk, const, boundary = _coefficients(params)
    omega, bound = _truncation(params.eta, tol, abs(bulk) + abs(boundary))
    value = (
        bulk * _bulk_sum(params.eta, params.b, omega)
        + const
        + boundary * _boundary_sum(params.eta, params.b, omega)
    )
    return SeriesResult(value, omega, bound)


def thermo_row(params: ModelParams, tol: float = 1e-12) -> dict:
    """One CSV row: (eta, b, N, E_g, E_g_periodic, E_b, omega_max, tail_bound)."""
    g = ground_state_energy_thermo(params, tol)
    omega = g.truncation_order
    bulk, const, boundary = _coefficients(params)
    e_p = bulk * _bulk_sum(params.eta, params.b, omega) + const
    e_b = boundary * _boundary_sum(params.eta, params.b, omega)
    return {
        "eta": params.eta,
        "b": params.b,
        "N": params.N,
        "E_g": g.value,
        "E_g_periodic": e_p,
        "E_b": e_b,
        "omega_max": omega,
        "tail_bound": g.tail_bound,
    }
