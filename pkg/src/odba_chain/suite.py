"""Identity suite: R-matrix relations, YBE, transfer-matrix commutativity, H equivalence."""

from __future__ import annotations

import numpy as np

from .chain import ModelParams, hamiltonian_direct, hamiltonian_from_transfer, transfer, transfer_hat
from .rmatrix import (
    RFunc,
    r_matrix,
    verify_permutation_commutator,
    verify_permutation_conjugation,
    verify_r_identities,
    verify_ybe,
)

SUITE_TOL = 1e-11


def corrupted_r_matrix(u: complex, eta: complex, eps: float = 1e-3) -> np.ndarray:
    """R with one off-diagonal entry perturbed; a negative control for the suite."""
    R = r_matrix(u, eta)
    R[1, 2] += eps
    return R


def random_points(rng: np.random.Generator, n: int, radius: float = 1.0) -> np.ndarray:
    return rng.uniform(-radius, radius, n) + 1j * rng.uniform(-radius, radius, n)


def _rel(A: np.ndarray, B: np.ndarray, scale: float) -> float:
    return float(np.abs(A - B).max() / max(scale, 1.0))


def run_identity_suite(
    params: ModelParams,
    n_points: int = 200,
    seed: int = 0,
    tol: float = SUITE_TOL,
    r: RFunc = r_matrix,
) -> list[dict]:
    """Max residual of each identity over ``n_points`` seeded spectral points.

    Operator-level residuals are relative to the largest entry of the
    operators involved; the R-level ones are absolute.
    """
    if params.sites > 6:
        raise ValueError("operator-level checks limited to 6 sites")
    rng = np.random.default_rng(seed)
    eta = params.eta
    U = random_points(rng, n_points)
    V = random_points(rng, n_points)
    W = random_points(rng, n_points)
    worst: dict[str, float] = {}

    def record(name, value):
        worst[name] = max(worst.get(name, 0.0), float(value))

    for u, v, w in zip(U, V, W):
        for name, val in verify_r_identities(u, eta, r).items():
            record(name, val)
        record("ybe", verify_ybe(u, v, w, eta, r))
        record("permutation_conjugation", verify_permutation_conjugation(u, eta, r))
    record("permutation_commutator", verify_permutation_commutator())

    # transfer-matrix level: a smaller sample keeps the dense products cheap
    n_t = min(n_points, 50)
    for u, v in zip(U[:n_t], V[:n_t]):
        tu, tv = transfer(u, params), transfer(v, params)
        scale = np.abs(tu).max() * np.abs(tv).max()
        record("transfer_commute", _rel(tu @ tv, tv @ tu, scale))
        th = transfer_hat(-u - eta, params)
        record("transfer_hat", _rel(tu, -th, np.abs(tu).max()))

    if params.sites >= 4:
        H_t = hamiltonian_from_transfer(params, check=False)
        H_d = hamiltonian_direct(params)
        record("hamiltonian_equivalence", np.linalg.norm(H_t - H_d) / np.linalg.norm(H_d))

    checks = []
    for name in sorted(worst):
        limit = 1e-9 if name == "hamiltonian_equivalence" else tol
        checks.append({"check": name, "residual": worst[name], "tol": limit, "pass": worst[name] <= limit})
    return checks
