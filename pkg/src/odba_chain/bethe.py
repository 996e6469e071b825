"""Bethe ansatz equations: inhomogeneous T-Q roots, log-form homogeneous roots, energies."""

from __future__ import annotations

import json
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, curve_fit

from .chain import ModelParams, hamiltonian_constant
from .rmatrix import phi
from .thermo import a_n, theta_n

# roots (lambda_1..lambda_4), energy, level index n; 2N = 4, eta = 1, a = i
TABLE1_PARAMS = ModelParams(sites=4, eta=1.0, b=1.0, J=1)
TABLE1 = (
    ((-1.0873 - 1.5708j, -0.5000 - 0.4634j, -0.5000 + 0.4634j, 0.0873 - 1.5708j), -5.8897, 1),
    ((-1.7292 - 1.5708j, -0.5000 - 1.2559j, -0.5000 + 1.2559j, 0.7292 - 1.5708j), -5.8897, 1),
    ((-1.4553 + 1.0461j, -0.5000 - 1.1872j, -0.5000 + 0.8274j, 0.4553 + 1.0461j), -3.9899, 2),
    ((-1.4553 - 1.0461j, -0.5000 - 0.8274j, -0.5000 + 1.1872j, 0.4553 - 1.0461j), -3.9899, 2),
    ((-1.7487 + 1.3618j, -0.5000 + 0.7332j, -0.5000 + 1.4005j, 0.7487 + 1.3618j), -3.9899, 2),
    ((-1.7487 - 1.3618j, -0.5000 - 1.4005j, -0.5000 - 0.7332j, 0.7487 - 1.3618j), -3.9899, 2),
    ((-1.6037 + 1.2858j, -0.5000 - 0.4949j, -0.5000 + 1.1518j, 0.6037 + 1.2858j), -3.0796, 3),
    ((-1.6037 - 1.2858j, -0.5000 - 1.1518j, -0.5000 + 0.4949j, 0.6037 - 1.2858j), -3.0796, 3),
    ((-1.7809 + 0.6635j, -0.9098 + 0.3143j, -0.0902 + 0.3143j, 0.7809 + 0.6635j), 3.9899, 4),
    ((-1.7809 - 0.6635j, -0.9098 - 0.3143j, -0.0902 - 0.3143j, 0.7809 - 0.6635j), 3.9899, 4),
    ((-2.0629 - 1.2897j, -0.9988 - 1.1945j, -0.0012 - 1.1945j, 1.0629 - 1.2897j), 3.9899, 4),
    ((-2.0629 + 1.2897j, -0.9988 + 1.1945j, -0.0012 + 1.1945j, 1.0629 + 1.2897j), 3.9899, 4),
    ((-1.4107 + 0.0000j, -1.2598 - 0.0000j, 0.2598 + 0.0000j, 0.4107 - 0.0000j), 4.2251, 5),
    ((-2.0830 - 1.5708j, -1.0046 - 1.5708j, 0.0046 - 1.5708j, 1.0830 - 1.5708j), 4.2251, 5),
    ((-2.0016 - 0.9831j, -1.0025 - 0.8073j, 0.0025 - 0.8073j, 1.0016 - 0.9831j), 4.7442, 6),
    ((-2.0016 + 0.9831j, -1.0025 + 0.8073j, 0.0025 + 0.8073j, 1.0016 + 0.9831j), 4.7442, 6),
)

POLE_DISTANCE = 1e-10
FD_STEP = 1e-7
MAX_HALVINGS = 30
SINGULAR_COND = 1e14


class BAEConvergenceError(RuntimeError):
    pass


class SingularJacobianError(BAEConvergenceError):
    def __init__(self, cond: float):
        super().__init__(f"Jacobian is singular (condition number {cond:.3e})")
        self.cond = cond


class PoleProximityError(ValueError):
    pass


def normalize_roots(lambdas) -> np.ndarray:
    """Shift each root by a multiple of i*pi into the window -pi/2 < Im <= pi/2."""
    lam = np.asarray(lambdas, dtype=np.complex128)
    im = lam.imag - np.pi * np.ceil(lam.imag / np.pi - 0.5)
    return lam.real + 1j * im


def canonical_roots(lambdas, digits: int = 6) -> tuple:
    """Order-independent key for a root set, modulo i*pi per root."""
    lam = normalize_roots(lambdas)
    # fold Im near -pi/2 onto +pi/2 so rounding noise does not split sets
    lam = np.where(np.abs(lam.imag + np.pi / 2) < 10.0**-digits, lam + 1j * np.pi, lam)
    return tuple(sorted((round(z.real, digits) + 0.0, round(z.imag, digits) + 0.0) for z in lam))


@dataclass
class BetheRoots:
    """2N roots of Q(u) for one eigenstate, with the BAE residual they attain."""

    lambdas: np.ndarray
    params: ModelParams
    residual: float = float("nan")
    iterations: int = 0
    converged: bool = True
    relative: bool = False

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=np.complex128)
        if self.lambdas.shape != (self.params.sites,):
            raise ValueError(f"expected {self.params.sites} roots, got {self.lambdas.shape}")

    def to_dict(self, energy: float | None = None) -> dict:
        if energy is None:
            energy = energy_from_roots(self)
        return {
            "lambda": [[float(z.real), float(z.imag)] for z in self.lambdas],
            "residual": float(self.residual),
            "energy": float(energy),
        }

    @classmethod
    def from_dict(cls, data: dict, params: ModelParams) -> BetheRoots:
        lam = np.array([complex(re, im) for re, im in data["lambda"]])
        return cls(lam, params, residual=data.get("residual", float("nan")))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# inhomogeneous T-Q relation


def q_func(u, lambdas, eta: float):
    """Q(u) = prod_j sinh(u - lambda_j) / sinh(eta)."""
    lam = np.asarray(lambdas, dtype=np.complex128)
    u = np.asarray(u, dtype=np.complex128)
    return np.prod(np.sinh(np.subtract.outer(u, lam)) / np.sinh(eta), axis=-1)


def c_func(u, lambdas, params: ModelParams):
    """Inhomogeneous coefficient c(u) = e^{u - 2N eta - sum lambda} - e^{-u - eta + sum lambda}."""
    s = np.sum(lambdas)
    eta, N = params.eta, params.N
    return np.exp(u - 2 * N * eta - s) - np.exp(-u - eta + s)


def _a(u, params: ModelParams):
    N, a, eta = params.N, params.a, params.eta
    return (np.sinh(u + a + eta) * np.sinh(u - a + eta)) ** N / np.sinh(eta) ** (2 * N)


def _d(u, params: ModelParams):
    N, a, eta = params.N, params.a, params.eta
    return (np.sinh(u + a) * np.sinh(u - a)) ** N / np.sinh(eta) ** (2 * N)


def bae_terms(lambdas, params: ModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three terms of each BAE, evaluated at every root."""
    lam = np.asarray(lambdas, dtype=np.complex128)
    eta = params.eta
    a, d = _a(lam, params), _d(lam, params)
    t1 = np.exp(lam) * a * q_func(lam - eta, lam, eta)
    t2 = np.exp(-lam - eta) * d * q_func(lam + eta, lam, eta)
    t3 = c_func(lam, lam, params) * a * d
    return t1, t2, t3


def bae_residual(roots: BetheRoots | Sequence[complex], params: ModelParams | None = None,
                 relative: bool = False) -> np.ndarray:
    """BAE_j = e^l a(l) Q(l - eta) - e^{-l-eta} d(l) Q(l + eta) - c(l) a(l) d(l) at l = lambda_j.

    All 2N roots are checked.  With ``relative`` each component is divided
    by the largest of its three terms, which keeps string-like root sets
    (where the terms are huge) on a comparable scale.
    """
    if isinstance(roots, BetheRoots):
        lam, params = roots.lambdas, roots.params
    else:
        lam = np.asarray(roots, dtype=np.complex128)
        if params is None:
            raise ValueError("params are required for a bare root list")
    t1, t2, t3 = bae_terms(lam, params)
    res = t1 - t2 - t3
    if relative:
        scale = np.maximum.reduce([np.abs(t1), np.abs(t2), np.abs(t3)])
        res = res / np.where(scale > 0, scale, 1.0)
    return res


def tq_eigenvalue(u, roots: BetheRoots):
    """Lambda(u) from the inhomogeneous T-Q relation."""
    lam, params = roots.lambdas, roots.params
    eta = params.eta
    u = np.asarray(u, dtype=np.complex128)
    Q = q_func(u, lam, eta)
    num = (
        np.exp(u) * _a(u, params) * q_func(u - eta, lam, eta)
        - np.exp(-u - eta) * _d(u, params) * q_func(u + eta, lam, eta)
        - c_func(u, lam, params) * _a(u, params) * _d(u, params)
    )
    return num / Q


def _jacobian(func: Callable[[np.ndarray], np.ndarray], lam: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of a holomorphic map C^n -> C^n."""
    n = lam.size
    J = np.empty((n, n), dtype=np.complex128)
    for k in range(n):
        e = np.zeros(n, dtype=np.complex128)
        e[k] = h
        J[:, k] = (func(lam + e) - func(lam - e)) / (2 * h)
    return J


def newton_polish(
    initial: BetheRoots | Sequence[complex],
    params: ModelParams | None = None,
    tol: float = 1e-12,
    max_iter: int = 100,
    relative: bool = False,
) -> BetheRoots:
    """Damped Newton on the BAEs with a finite-difference Jacobian.

    The equations are holomorphic in the roots, so Newton runs directly in
    complex arithmetic.  A step is halved (up to 30 times) until the scaled
    residual norm drops.  Returns a :class:`BetheRoots` with ``converged``
    set; a singular Jacobian raises :class:`SingularJacobianError`.
    """
    if isinstance(initial, BetheRoots):
        params = initial.params
        lam = initial.lambdas.copy()
    else:
        if params is None:
            raise ValueError("params are required for a bare root list")
        lam = np.asarray(initial, dtype=np.complex128).copy()
    if lam.shape != (params.sites,):
        raise ValueError(f"expected {params.sites} roots")

    def scales(x):
        if not relative:
            return np.ones(x.size)
        t = bae_terms(x, params)
        s = np.maximum.reduce([np.abs(v) for v in t])
        return np.where(s > 0, s, 1.0)

    F = bae_residual(lam, params)
    if not np.all(np.isfinite(F)):
        raise ValueError("initial residual is not finite")
    it = 0
    for it in range(max_iter + 1):
        sc = scales(lam)
        G = F / sc
        r = float(np.abs(G).max())
        if r <= tol:
            return BetheRoots(normalize_roots(lam), params, r, it, True, relative)
        if it == max_iter:
            break
        J = _jacobian(lambda x: bae_residual(x, params), lam) / sc[:, None]
        cond = np.linalg.cond(J)
        if not np.isfinite(cond) or cond > SINGULAR_COND:
            raise SingularJacobianError(float(cond))
        step = np.linalg.solve(J, -G)
        norm0 = np.linalg.norm(G)
        t = 1.0
        for _ in range(MAX_HALVINGS):
            trial = lam + t * step
            F_trial = bae_residual(trial, params)
            if np.all(np.isfinite(F_trial)) and np.linalg.norm(F_trial / sc) < norm0:
                break
            t *= 0.5
        else:
            raise BAEConvergenceError(f"no descent after {MAX_HALVINGS} halvings (residual {r:.3e})")
        lam, F = trial, F_trial
    return BetheRoots(normalize_roots(lam), params, r, it, False, relative)


def _check_poles(lam: np.ndarray, params: ModelParams) -> None:
    a, eta = params.a, params.eta
    for p in (a, -a, a - eta, -a - eta):
        d = lam - p
        d = d.real + 1j * (d.imag - np.pi * np.round(d.imag / np.pi))
        if np.any(np.abs(d) < POLE_DISTANCE):
            raise PoleProximityError(f"a root lies within {POLE_DISTANCE} of the pole {p}")


def energy_from_roots(roots: BetheRoots | Sequence[complex], params: ModelParams | None = None,
                      real: bool = True):
    """E = J sinh(eta) phi(2a) sum_j [coth(l-a) - coth(l-a+eta) + coth(l+a) - coth(l+a+eta)] + 2 J sinh(eta) phi(2a) - const.

    ``const`` is the identity part of H (:func:`hamiltonian_constant`).  ``real=False`` returns the raw
    complex value so the imaginary part can be inspected.
    """
    if isinstance(roots, BetheRoots):
        lam, params = roots.lambdas, roots.params
    else:
        lam = np.asarray(roots, dtype=np.complex128)
    _check_poles(lam, params)
    a, eta, J = params.a, params.eta, params.J
    coth = lambda x: 1 / np.tanh(x)  # noqa: E731
    s = np.sum(coth(lam - a) - coth(lam - a + eta) + coth(lam + a) - coth(lam + a + eta))
    pref = J * np.sinh(eta) * phi(2 * a, eta)
    # the identity part of H enters with the opposite sign once the
    # transfer-matrix bilinear is written through the roots
    E = pref * s + 2 * pref - hamiltonian_constant(params)
    return float(E.real) if real else complex(E)


def polish_table1(tol: float = 1e-12) -> list[tuple[BetheRoots, float, int]]:
    """Polish every printed Table-1 root set; returns (roots, printed energy, level)."""
    out = []
    for lam, E, n in TABLE1:
        out.append((newton_polish(lam, TABLE1_PARAMS, tol=tol), E, n))
    return out


def discover_root_sets(
    params: ModelParams,
    method: str = "tq",
    n_starts: int = 400,
    seed: int = 0,
    tol: float = 1e-11,
    real_window: tuple[float, float] = (-2.5, 1.5),
) -> list[BetheRoots]:
    """Find BAE root sets without reference to tabulated values.

    ``method="tq"`` inverts the T-Q relation for every exact eigenvector
    (one root set per state) and polishes the result.  ``method="random"``
    runs Newton from random seeds in the normalization window; most seeds
    fall into spurious solutions with a root at a zero of a(u) or d(u),
    which are discarded, so the yield is low.
    Results are sorted by energy.
    """
    if method == "tq":
        from .spectrum import transfer_eigenvalues

        sample = transfer_eigenvalues(tq_sample_points(params), params)
        out = []
        for k in range(sample.values.shape[0]):
            lam, _ = roots_from_samples(sample.values[k], params)
            out.append(newton_polish(lam, params, tol=tol))
        return sorted(out, key=energy_from_roots)
    if method != "random":
        raise ValueError("method must be 'tq' or 'random'")
    rng = np.random.default_rng(seed)
    found: dict[tuple, BetheRoots] = {}
    for _ in range(n_starts):
        seed_roots = rng.uniform(*real_window, params.sites) + 1j * rng.uniform(-np.pi / 2, np.pi / 2, params.sites)
        try:
            sol = newton_polish(seed_roots, params, tol=tol, max_iter=60)
        except (BAEConvergenceError, ValueError, FloatingPointError):
            continue
        if not sol.converged or _has_coincident_roots(sol.lambdas) or _near_singular_point(sol):
            continue
        found.setdefault(canonical_roots(sol.lambdas, 6), sol)
    return sorted(found.values(), key=energy_from_roots)


def _near_singular_point(roots: BetheRoots, tol: float = 1e-3) -> bool:
    """A root at a zero of a(u) or d(u) satisfies its BAE trivially; such sets are spurious."""
    a, eta = roots.params.a, roots.params.eta
    for p in (a, -a, a - eta, -a - eta):
        d = roots.lambdas - p
        d = d.real + 1j * (d.imag - np.pi * np.round(d.imag / np.pi))
        if np.any(np.abs(d) < tol):
            return True
    return False


def _has_coincident_roots(lam: np.ndarray, tol: float = 1e-6) -> bool:
    d = np.subtract.outer(lam, lam)
    d = d.real + 1j * (d.imag - np.pi * np.round(d.imag / np.pi))
    np.fill_diagonal(d, 1.0)
    return bool(np.any(np.abs(d) < tol))


def tq_sample_points(params: ModelParams, n_points: int | None = None) -> np.ndarray:
    """Points on the line Re u = 0.05 used by :func:`roots_from_samples`."""
    n_points = n_points or 2 * params.sites + 8
    return 0.05 + 1j * np.linspace(0, np.pi, n_points + 1)[:-1]


def roots_from_samples(values: Sequence[complex], params: ModelParams,
                       points: Sequence[complex] | None = None) -> tuple[np.ndarray, float]:
    """Recover the Q roots of one eigenstate from its transfer eigenvalue.

    The T-Q relation is linear in the coefficients of
    Q(u) = sum_k q_k e^{(2k - 2N) u}; samples of Lambda(u) give a
    homogeneous system whose null vector is Q.  The roots are
    lambda = log(w) / 2 for the zeros w of the polynomial in e^{2u}.
    Returns (roots, smallest/largest singular value).
    """
    L, eta = params.sites, params.eta
    pts = tq_sample_points(params) if points is None else np.asarray(points, dtype=np.complex128)
    values = np.asarray(values, dtype=np.complex128)
    if values.shape != pts.shape or pts.size < L + 2:
        raise ValueError("need one eigenvalue sample per point and at least 2N + 2 points")
    powers = 2 * np.arange(L + 1) - L
    rows = []
    for u, lam in zip(pts, values):
        a, d = _a(u, params), _d(u, params)
        row = (
            lam * np.exp(powers * u)
            - np.exp(u) * a * np.exp(powers * (u - eta))
            + np.exp(-u - eta) * d * np.exp(powers * (u + eta))
        ).astype(np.complex128)
        # c(u) a(u) d(u) in terms of the leading and trailing coefficients
        A = (2 * np.sinh(eta)) ** L * a * d
        row[-1] += A * np.exp(u - L * eta)
        row[0] -= A * np.exp(-u - eta)
        rows.append(row)
    _, S, Vh = np.linalg.svd(np.array(rows))
    q = Vh[-1].conj()
    w = np.roots(q[::-1]).astype(np.complex128)
    return normalize_roots(0.5 * np.log(w)), float(S[-1] / S[0])


# ---------------------------------------------------------------------------
# homogeneous T-Q relation and its logarithmic form (real u)


@dataclass(frozen=True)
class QuantumNumbers:
    I: tuple[float, ...]
    M: int

    def __post_init__(self):
        if len(self.I) != self.M:
            raise ValueError("need exactly M quantum numbers")
        twice = np.asarray(self.I, dtype=float) * 2
        if not np.allclose(twice, np.round(twice)):
            raise ValueError("quantum numbers must be integers or half-odd integers")
        parity = np.round(twice).astype(int) % 2
        want = 0 if self.M % 2 == 0 else 1
        if np.any(parity != want):
            kind = "integers" if want == 0 else "half-odd integers"
            raise ValueError(f"M = {self.M} needs {kind}")
        if len(set(np.round(twice).astype(int))) != self.M:
            raise ValueError("quantum numbers must be distinct")


def ground_state_quantum_numbers(N: int) -> QuantumNumbers:
    """I_j = -N/2 + j for j = 1..N."""
    return QuantumNumbers(tuple(float(-N / 2 + j) for j in range(1, N + 1)), N)


@dataclass
class LogBAESolution:
    u: np.ndarray
    quantum_numbers: QuantumNumbers
    params: ModelParams
    residual: float
    iterations: int
    hole_positions: np.ndarray = field(default_factory=lambda: np.empty(0))


def _log_bae_F(u, I, N, eta, b, s=1.0):
    d = np.subtract.outer(u, u)
    return u + N * (theta_n(u + 2 * b, 1, eta) + theta_n(u - 2 * b, 1, eta)) - 2 * np.pi * I \
        - s * theta_n(d, 2, eta).sum(axis=1)


def _log_bae_J(u, N, eta, b, s=1.0):
    d = np.subtract.outer(u, u)
    K = 2 * np.pi * s * a_n(d, 2, eta)
    np.fill_diagonal(K, 0.0)
    J = K.copy()
    np.fill_diagonal(J, 1 + 2 * np.pi * N * (a_n(u + 2 * b, 1, eta) + a_n(u - 2 * b, 1, eta)) - K.sum(axis=1))
    return J


def _newton_log(u, I, N, eta, b, s, tol, max_iter):
    F = _log_bae_F(u, I, N, eta, b, s)
    for it in range(max_iter):
        r = np.abs(F).max()
        if r <= tol:
            return u, r, it
        step = np.linalg.solve(_log_bae_J(u, N, eta, b, s), -F)
        t, n0 = 1.0, np.linalg.norm(F)
        for _ in range(MAX_HALVINGS):
            trial = u + t * step
            F_trial = _log_bae_F(trial, I, N, eta, b, s)
            if np.linalg.norm(F_trial) < n0:
                break
            t *= 0.5
        else:
            break
        u, F = trial, F_trial
    return u, np.abs(F).max(), max_iter


def solve_log_bae(
    qn: QuantumNumbers,
    params: ModelParams,
    tol: float = 1e-12,
    max_iter: int = 200,
    stages: int = 4,
) -> LogBAESolution:
    """Real roots of u_j + N[theta_1(u_j+2b) + theta_1(u_j-2b)] = 2 pi I_j + sum_k theta_2(u_j-u_k).

    The decoupled problem (no theta_2 term) is solved root by root, then
    the coupling is switched on in ``stages`` steps, each polished by a
    damped Newton iteration with the analytic Jacobian.
    """
    N, eta, b = params.N, params.eta, params.b
    M = qn.M
    if M > 2 * N:
        raise ValueError("M must not exceed 2N")
    I = np.asarray(qn.I, dtype=float)

    def free(x, target):
        return x + N * (theta_n(x + 2 * b, 1, eta) + theta_n(x - 2 * b, 1, eta)) - target

    lo, hi = -np.pi * (1 + 2 * N) - 10, np.pi * (1 + 2 * N) + 10
    u = np.array([brentq(free, lo, hi, args=(2 * np.pi * Ij,), xtol=1e-14) for Ij in I])
    total = 0
    for s in np.linspace(0, 1, stages + 1)[1:]:
        u, r, it = _newton_log(u, I, N, eta, b, s, tol if s == 1 else 1e-8, max_iter)
        total += it
    if r > tol:
        raise BAEConvergenceError(f"log BAEs did not converge (residual {r:.3e})")
    order = np.argsort(u)
    u = u[order]
    if np.any(np.diff(u) < 1e-10):
        raise BAEConvergenceError("colliding roots")
    qn_sorted = QuantumNumbers(tuple(I[order]), M)
    sol = LogBAESolution(u, qn_sorted, params, float(r), total)
    sol.hole_positions = hole_positions(sol)
    return sol


def counting_function(x, sol: LogBAESolution):
    """Z(x) = [x/N + theta_1(x+2b) + theta_1(x-2b) - sum_k theta_2(x-u_k)/N] / (4 pi)."""
    N, eta, b = sol.params.N, sol.params.eta, sol.params.b
    x = np.asarray(x, dtype=float)
    inter = theta_n(np.subtract.outer(x, sol.u), 2, eta).sum(axis=-1)
    return (x / N + theta_n(x + 2 * b, 1, eta) + theta_n(x - 2 * b, 1, eta) - inter / N) / (4 * np.pi)


def hole_positions(sol: LogBAESolution) -> np.ndarray:
    """Vacant quantum numbers in [-pi, pi) mapped back through the counting function."""
    N = sol.params.N
    z_lo, z_hi = counting_function(-np.pi, sol), counting_function(np.pi, sol)
    offset = 0.0 if sol.quantum_numbers.M % 2 == 0 else 0.5
    taken = {round(2 * i) for i in sol.quantum_numbers.I}
    k_lo = int(np.ceil(2 * N * z_lo - offset - 1e-9))
    k_hi = int(np.floor(2 * N * z_hi - offset + 1e-9))
    holes = []
    for k in range(k_lo, k_hi + 1):
        I = k + offset
        if round(2 * I) in taken:
            continue
        target = I / (2 * N)
        f = lambda x: counting_function(x, sol) - target  # noqa: E731
        if abs(f(-np.pi)) < 1e-12:
            holes.append(-np.pi)
        elif f(-np.pi) < 0 < f(np.pi):
            holes.append(brentq(f, -np.pi, np.pi, xtol=1e-14))
    return np.array(holes)


def homogeneous_energy(sol: LogBAESolution) -> float:
    """E_h = -sum_j 4 pi sinh(eta) phi(2a) [a_1(u_j+2b) + a_1(u_j-2b)] + 2 sinh(eta) phi(2a) - const (J = 1)."""
    p = sol.params.with_(J=1)
    eta, b = p.eta, p.b
    ph = float(np.real(phi(2 * p.a, eta)))
    s = np.sum(a_n(sol.u + 2 * b, 1, eta) + a_n(sol.u - 2 * b, 1, eta))
    return float(-4 * np.pi * np.sinh(eta) * ph * s + 2 * np.sinh(eta) * ph - hamiltonian_constant(p))


def ground_state_log_bae(params: ModelParams, tol: float = 1e-12) -> LogBAESolution:
    return solve_log_bae(ground_state_quantum_numbers(params.N), params, tol=tol)


# ---------------------------------------------------------------------------
# inhomogeneous-term contribution


@dataclass(frozen=True)
class PowerLawFit:
    prefactor: float
    exponent: float
    offset: float
    rms: float


def inhomogeneous_contribution(params: ModelParams, sites_list: Sequence[int]) -> list[dict]:
    """Rows (sites, E_h, E_g, E_inh) with E_inh = E_h - E_g and E_g from exact diagonalization."""
    from .spectrum import ground_energy

    rows = []
    for L in sites_list:
        p = params.with_(sites=int(L), J=1)
        e_h = homogeneous_energy(ground_state_log_bae(p))
        e_g = ground_energy(p)
        rows.append({"sites": int(L), "E_h": e_h, "E_g": e_g, "E_inh": e_h - e_g})
    return rows


def fit_power_law(sizes: Sequence[float], values: Sequence[float], offset: bool = True) -> PowerLawFit:
    """Least squares for ``C * n^alpha + d`` (``d = 0`` when ``offset`` is false)."""
    n = np.asarray(sizes, dtype=float)
    y = np.asarray(values, dtype=float)
    if n.size < 3 + offset:
        raise ValueError("too few points for the fit")
    # log-log line as the starting point
    pos = y > 0
    if pos.sum() >= 2:
        alpha0, logc0 = np.polyfit(np.log(n[pos]), np.log(y[pos]), 1)
    else:
        alpha0, logc0 = -1.0, 0.0
    if offset:
        f = lambda x, c, al, d: c * x**al + d  # noqa: E731
        p, _ = curve_fit(f, n, y, p0=[np.exp(logc0), alpha0, 0.0], maxfev=20000)
        c, al, d = p
    else:
        f = lambda x, c, al: c * x**al  # noqa: E731
        p, _ = curve_fit(f, n, y, p0=[np.exp(logc0), alpha0], maxfev=20000)
        (c, al), d = p, 0.0
    rms = float(np.sqrt(np.mean((c * n**al + d - y) ** 2)))
    return PowerLawFit(float(c), float(al), float(d), rms)
