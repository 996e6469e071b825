"""J = -1 sector: u-form BAEs, 2N-string ground states, string energies and scaling fits."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .bethe import (
    BAEConvergenceError,
    BetheRoots,
    _a,
    _d,
    bae_residual,
    energy_from_roots,
    MAX_HALVINGS,
)
from .chain import ModelParams, hamiltonian_constant
from .rmatrix import phi

OVERFLOW_IM = 50.0
STRING_SEEDS = (-np.pi / 2, 0.0, np.pi / 2)
MAX_STRING_SITES = 20


def u_to_lambda(u, eta: float) -> np.ndarray:
    return 1j * np.asarray(u, dtype=np.complex128) - eta / 2


def lambda_to_u(lam, eta: float) -> np.ndarray:
    return -1j * (np.asarray(lam, dtype=np.complex128) + eta / 2)


def _log_sin(z):
    return np.log(np.sin(z).astype(np.complex128))


def bae_u_terms(u, params: ModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """LHS, main RHS and inhomogeneous term of the u-form BAEs at every root.

    The 2N-fold sine products are accumulated as sums of logarithms and
    exponentiated once per component.
    """
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (params.sites,):
        raise ValueError(f"expected {params.sites} roots")
    N, eta, b = params.N, params.eta, params.b
    if np.any(np.abs(u.imag) > OVERFLOW_IM * eta):
        raise OverflowError(f"|Im u| exceeds {OVERFLOW_IM} eta")
    d = np.subtract.outer(u, u)
    h = 0.5j * eta
    log_lhs = 1j * u + _log_sin(d + 1j * eta).sum(axis=1) - N * (_log_sin(u + b + h) + _log_sin(u - b + h))
    log_rhs = -1j * u + _log_sin(d - 1j * eta).sum(axis=1) - N * (_log_sin(u + b - h) + _log_sin(u - b - h))
    inhom = 2j * np.exp(-N * eta) * np.sin(u - u.sum())
    return np.exp(log_lhs), np.exp(log_rhs), inhom


def bae_u_residual(u, params: ModelParams) -> np.ndarray:
    """LHS - RHS - 2i e^{-N eta} sin(u_j - sum_l u_l) for each root."""
    lhs, rhs, inhom = bae_u_terms(u, params)
    return lhs - rhs - inhom


def lambda_residual_as_u(lam, params: ModelParams) -> np.ndarray:
    """Lambda-form residuals rescaled to the u-form: e^{eta/2} BAE_j / (a(l_j) d(l_j))."""
    lam = np.asarray(lam, dtype=np.complex128)
    return np.exp(params.eta / 2) * bae_residual(lam, params) / (_a(lam, params) * _d(lam, params))


def string_seed(x0: float, params: ModelParams) -> np.ndarray:
    """Perfect string x0 + ((2N+1)/2 - j) i eta, j = 1..2N, centred on Im u = 0."""
    L = params.sites
    j = np.arange(1, L + 1)
    return x0 + ((L + 1) / 2 - j) * 1j * params.eta


@dataclass
class StringConfiguration:
    """Refined roots u_j = x0 + ((2N+1)/2 - j) i eta + deviation_j, sorted by decreasing Im."""

    x0: float
    deviations: np.ndarray
    params: ModelParams
    residual: float
    seed: float
    spacing_error: float = float("nan")
    real_spread: float = float("nan")
    is_string: bool = False
    energy: float = float("nan")
    extra: dict = field(default_factory=dict)

    @property
    def roots(self) -> np.ndarray:
        return string_seed(self.x0, self.params) + self.deviations

    @property
    def max_deviation(self) -> float:
        return float(np.abs(self.deviations).max())

    def spacings(self) -> np.ndarray:
        return -np.diff(self.roots.imag)

    def to_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "x0": float(self.x0),
            "seed": float(self.seed),
            "roots": [[float(z.real), float(z.imag)] for z in self.roots],
            "deviations": [[float(z.real), float(z.imag)] for z in self.deviations],
            "residual": float(self.residual),
            "spacing_error": float(self.spacing_error),
            "real_spread": float(self.real_spread),
            "is_string": bool(self.is_string),
            "energy": float(self.energy),
        }


def _fold_real(x: np.ndarray, center: float) -> np.ndarray:
    """Bring real parts within pi/2 of ``center`` (u is defined modulo pi)."""
    return x - np.pi * np.round((x - center) / np.pi)


def classify_string(u: np.ndarray, params: ModelParams, seed: float, residual: float,
                    string_tol: float = 0.05) -> StringConfiguration:
    """Decompose refined roots into centre, ideal string and deviations."""
    u = np.asarray(u, dtype=np.complex128)
    u = u[np.argsort(-u.imag)]
    # real parts are defined modulo pi; take the circular mean
    x0 = float(np.angle(np.mean(np.exp(2j * u.real))) / 2)
    re = _fold_real(u.real, x0)
    u = re + 1j * u.imag
    x0 = float(np.mean(re))
    dev = u - string_seed(x0, params)
    spacing_error = float(np.abs(-np.diff(u.imag) - params.eta).max())
    real_spread = float(np.abs(re - x0).max())
    cfg = StringConfiguration(
        x0=x0,
        deviations=dev,
        params=params,
        residual=residual,
        seed=seed,
        spacing_error=spacing_error,
        real_spread=real_spread,
        is_string=spacing_error <= string_tol and real_spread <= string_tol,
    )
    return cfg


def _string_offsets(params: ModelParams) -> np.ndarray:
    L = params.sites
    return (L + 1) / 2 - np.arange(1, L + 1)


def _deviation_system(delta: np.ndarray, x0: float, params: ModelParams):
    """Row-scaled u-form BAEs and their analytic Jacobian in the deviation variables.

    Differences u_j - u_l +- i eta are formed as (integer) i eta + (delta_j -
    delta_l), so the near-vanishing arguments between neighbouring string
    members keep full relative precision.
    """
    N, eta, b = params.N, params.eta, params.b
    c = _string_offsets(params)
    u = x0 + 1j * eta * c + delta
    C = np.subtract.outer(c, c)
    D = np.subtract.outer(delta, delta)
    arg_p = (C + 1) * 1j * eta + D
    arg_m = (C - 1) * 1j * eta + D
    h = 0.5j * eta
    log_lhs = 1j * u + _log_sin(arg_p).sum(axis=1) - N * (_log_sin(u + b + h) + _log_sin(u - b + h))
    log_rhs = -1j * u + _log_sin(arg_m).sum(axis=1) - N * (_log_sin(u + b - h) + _log_sin(u - b - h))
    lhs, rhs = np.exp(log_lhs), np.exp(log_rhs)
    S = u.sum()
    pre = 2j * np.exp(-N * eta)
    inh = pre * np.sin(u - S)
    scale = np.maximum.reduce([np.abs(lhs), np.abs(rhs), np.abs(inh)])
    G = (lhs - rhs - inh) / scale

    cot = lambda z: np.cos(z) / np.sin(z)  # noqa: E731
    cp, cm = cot(arg_p), cot(arg_m)
    np.fill_diagonal(cp, 0.0)
    np.fill_diagonal(cm, 0.0)
    dl = -cp
    dr = -cm
    np.fill_diagonal(dl, 1j + cp.sum(axis=1) - N * (cot(u + b + h) + cot(u - b + h)))
    np.fill_diagonal(dr, -1j + cm.sum(axis=1) - N * (cot(u + b - h) + cot(u - b - h)))
    dinh = -np.outer(pre * np.cos(u - S), np.ones(u.size))
    dinh[np.diag_indices(u.size)] = 0.0
    Jm = (lhs[:, None] * dl - rhs[:, None] * dr - dinh) / scale[:, None]
    return G, Jm


def _string_seed_deviation(params: ModelParams, stretch: float) -> np.ndarray:
    """Deviations that widen the end gaps by ``stretch`` eta, decaying inward.

    An exact string is a singular point of the equations, so the seed is
    always a slightly deformed string.
    """
    L, eta = params.sites, params.eta
    k = np.minimum(np.arange(1, L), np.arange(L - 1, 0, -1))  # gap distance from the nearer end
    gaps = eta * (1 + stretch * np.exp(-2.6 * (k - 1)))
    im = np.concatenate([[0.0], -np.cumsum(gaps)])
    im -= im.mean()
    return 1j * (im - eta * _string_offsets(params))


def refine_string(x0: float, params: ModelParams, delta0=None, stretch: float = 0.09,
                  tol: float = 1e-10, max_iter: int = 200):
    """Damped Newton in the deviation variables; returns (delta, relative residual, iterations)."""
    delta = _string_seed_deviation(params, stretch) if delta0 is None else np.asarray(delta0, dtype=np.complex128)
    G, Jm = _deviation_system(delta, x0, params)
    for it in range(max_iter + 1):
        r = float(np.abs(G).max())
        if r <= tol:
            return delta, r, it
        if it == max_iter or not np.all(np.isfinite(Jm)):
            break
        try:
            step = np.linalg.solve(Jm, -G)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(Jm, -G, rcond=None)[0]
        n0, t = np.linalg.norm(G), 1.0
        for _ in range(MAX_HALVINGS):
            trial = delta + t * step
            with np.errstate(all="ignore"):
                G_t, J_t = _deviation_system(trial, x0, params)
            if np.all(np.isfinite(G_t)) and np.linalg.norm(G_t) < n0:
                break
            t *= 0.5
        else:
            raise BAEConvergenceError(f"no descent after {MAX_HALVINGS} halvings (residual {r:.3e})")
        delta, G, Jm = trial, G_t, J_t
    raise BAEConvergenceError(f"string refinement stalled at residual {r:.3e}")


def solve_string_state(x0_seed: float, params: ModelParams, tol: float = 1e-10,
                       stretch: float = 0.09, max_iter: int = 200) -> StringConfiguration:
    """Newton-refine a 2N-string seeded at centre ``x0_seed``.

    The u-form BAEs are solved for the deviations from the ideal string
    with the row-scaled residual driven below ``tol``.  The result is
    classified as a string when the Im spacings are within 0.05 of eta and
    the real parts within 0.05 of their mean.
    """
    if params.sites > MAX_STRING_SITES:
        raise ValueError(f"string solver limited to {MAX_STRING_SITES} sites")
    with np.errstate(all="ignore"):
        delta, r, it = refine_string(x0_seed, params, stretch=stretch, tol=tol, max_iter=max_iter)
    u = x0_seed + 1j * params.eta * _string_offsets(params) + delta
    cfg = classify_string(u, params, x0_seed, r)
    cfg.energy = energy_from_roots(u_to_lambda(u, params.eta), params)
    cfg.extra["iterations"] = it
    return cfg


def scan_string_states(params: ModelParams, seeds: Sequence[float] = STRING_SEEDS,
                       tol: float = 1e-10) -> list[StringConfiguration]:
    """Refine each seed; failures are recorded in ``extra`` rather than raised."""
    out = []
    for s in seeds:
        try:
            out.append(solve_string_state(s, params, tol))
        except (BAEConvergenceError, ValueError, OverflowError) as exc:
            cfg = StringConfiguration(float(s), np.full(params.sites, np.nan + 0j), params, float("nan"), float(s))
            cfg.extra["error"] = str(exc)
            out.append(cfg)
    return out


def roots_as_bethe(cfg: StringConfiguration) -> BetheRoots:
    return BetheRoots(u_to_lambda(cfg.roots, cfg.params.eta), cfg.params, cfg.residual, relative=True)


# ---------------------------------------------------------------------------
# closed-form energies


def _s_phi(params: ModelParams) -> float:
    return float(np.real(np.sinh(params.eta) * phi(2 * params.a, params.eta)))


def string_energy(x0: float, params: ModelParams) -> float:
    """Energy of an ideal 2N-string centred at ``x0`` (J = -1)."""
    N, eta, b = params.N, params.eta, params.b
    sp = _s_phi(params)
    L = 2 * N * eta
    terms = np.sinh(L) / (np.cos(2 * x0 + 2 * b) - np.cosh(L)) + np.sinh(L) / (np.cos(2 * x0 - 2 * b) - np.cosh(L))
    return float(-2 * sp * terms - 2 * sp + hamiltonian_constant(params.with_(J=1)))


def string_energy_thermo(params: ModelParams) -> float:
    """Large-2N string energy 4 sinh(eta) phi(2a) tanh(2N eta) - 2 sinh(eta) phi(2a) + const."""
    sp = _s_phi(params)
    return float(4 * sp * np.tanh(2 * params.N * params.eta) - 2 * sp + hamiltonian_constant(params.with_(J=1)))


def ferro_periodic_energy(params: ModelParams) -> float:
    """All-up energy of the periodic chain at J = -1: -2N cosh(eta) + N cosh(eta) sinh^2(2a)/sinh^2(eta)."""
    N, eta, a = params.N, params.eta, params.a
    return float(np.real(-2 * N * np.cosh(eta) + N * np.cosh(eta) * np.sinh(2 * a) ** 2 / np.sinh(eta) ** 2))


def twisted_boundary_J_minus(params: ModelParams, N: int | None = None) -> float:
    """E_t = 4 sinh(eta) phi(2a) tanh(2N eta) - 2 sinh(eta) phi(2a); the limit 2 sinh(eta) phi(2a) when N is None."""
    sp = _s_phi(params)
    if N is None:
        return 2 * sp
    return float(4 * sp * np.tanh(2 * N * params.eta) - 2 * sp)


# ---------------------------------------------------------------------------
# finite-size scaling


@dataclass(frozen=True)
class ScalingFit:
    prefactor: float
    rate: float
    residual: float


def fit_exponential(sizes: Sequence[int], deltas: Sequence[float]) -> ScalingFit:
    """Least squares of log(delta) against 2N: delta ~ C e^{alpha 2N}."""
    x = np.asarray(sizes, dtype=float)
    y = np.asarray(deltas, dtype=float)
    if x.size != y.size:
        raise ValueError("sizes and deltas differ in length")
    if x.size < 4:
        raise ValueError("at least 4 sizes are needed")
    if np.any(~(y > 0)):
        raise ValueError("energy differences must be positive")
    alpha, logc = np.polyfit(x, np.log(y), 1)
    rms = float(np.sqrt(np.mean((logc + alpha * x - np.log(y)) ** 2)))
    return ScalingFit(float(np.exp(logc)), float(alpha), rms)


def string_scaling_row(params: ModelParams, with_roots: bool = True) -> dict:
    """One row (2N, eta, b, E_string_closed, E_lanczos, delta_E, max_deviation)."""
    from .spectrum import ground_energy

    p = params.with_(J=-1)
    e_s = string_energy_thermo(p)
    e_ed = ground_energy(p)
    max_dev = float("nan")
    if with_roots and p.sites <= MAX_STRING_SITES:
        states = [c for c in scan_string_states(p) if c.is_string]
        if states:
            max_dev = min(c.max_deviation for c in states)
    return {
        "2N": p.sites,
        "eta": p.eta,
        "b": p.b,
        "E_string_closed": e_s,
        "E_lanczos": e_ed,
        "delta_E": e_s - e_ed,
        "max_deviation": max_dev,
    }
