"""Six-vertex R-matrix, its derivative, and numerical checks of its identities."""

from __future__ import annotations

from collections.abc import Callable

import numpy as np

from .operators import PAULI, PERMUTATION, SIGMA_X, SIGMA_Y, SIGMA_Z, embed_local, embed_site

RFunc = Callable[[complex, complex], np.ndarray]


def _check_eta(eta: complex) -> complex:
    if abs(np.sinh(eta)) == 0:
        raise ValueError("sinh(eta) must be non-zero")
    return eta


def r_matrix(u: complex, eta: complex) -> np.ndarray:
    """R(u) on V (x) V, normalised by 1/sinh(eta) so that R(0) = P."""
    _check_eta(eta)
    s = np.sinh
    R = np.zeros((4, 4), dtype=np.complex128)
    R[0, 0] = R[3, 3] = s(u + eta)
    R[1, 1] = R[2, 2] = s(u)
    R[1, 2] = R[2, 1] = s(eta)
    return R / s(eta)


def r_matrix_prime(u: complex, eta: complex) -> np.ndarray:
    """dR/du; diagonal, since the off-diagonal entries do not depend on u."""
    _check_eta(eta)
    c = np.cosh
    return np.diag([c(u + eta), c(u), c(u), c(u + eta)]).astype(np.complex128) / np.sinh(eta)


def phi(u: complex, eta: complex) -> complex:
    """Unitarity scalar: R_12(u) R_21(-u) = phi(u) * id."""
    return -np.sinh(u + eta) * np.sinh(u - eta) / np.sinh(eta) ** 2


def swap_factors(M: np.ndarray) -> np.ndarray:
    """M_{21} from M_{12}: conjugation by the permutation."""
    return PERMUTATION @ M @ PERMUTATION


def partial_transpose(M: np.ndarray, which: int) -> np.ndarray:
    """Transpose in the first (``which=0``) or second (``which=1``) factor."""
    t = M.reshape(2, 2, 2, 2)
    if which == 0:
        t = t.transpose(2, 1, 0, 3)
    else:
        t = t.transpose(0, 3, 2, 1)
    return t.reshape(4, 4)


def verify_r_identities(u: complex, eta: complex, r: RFunc = r_matrix) -> dict[str, float]:
    """Max-norm residuals of the initial, unitarity, crossing and PT identities.

    Also reports the commutation with sigma^x (x) sigma^x and the
    quasi-periodicity R(u + i pi) = -sigma^z_1 R(u) sigma^z_1 (the
    off-diagonal sinh(eta) entries do not flip, so R(u + i pi) != -R(u)).  ``r`` may be replaced to test
    that a corrupted R-matrix is detected.
    """
    R = r(u, eta)
    sy0 = np.kron(SIGMA_Y, np.eye(2))
    xx = np.kron(SIGMA_X, SIGMA_X)
    z1 = np.kron(SIGMA_Z, np.eye(2))
    crossing = R + sy0 @ partial_transpose(r(-u - eta, eta), 0) @ sy0
    pt = max(
        np.abs(R - swap_factors(R)).max(),
        np.abs(R - R.T).max(),
    )
    return {
        "initial": float(np.abs(r(0.0, eta) - PERMUTATION).max()),
        "unitary": float(np.abs(R @ swap_factors(r(-u, eta)) - phi(u, eta) * np.eye(4)).max()),
        "crossing": float(np.abs(crossing).max()),
        "pt": float(pt),
        "sxsx": float(np.abs(R @ xx - xx @ R).max()),
        "quasi_periodic": float(np.abs(r(u + 1j * np.pi, eta) + z1 @ R @ z1).max()),
    }


def verify_ybe(u1: complex, u2: complex, u3: complex, eta: complex, r: RFunc = r_matrix) -> float:
    """Max-norm of R12 R13 R23 - R23 R13 R12 on V^(x)3."""
    R12 = embed_local(r(u1 - u2, eta), 1, 2, 3)
    R13 = embed_local(r(u1 - u3, eta), 1, 3, 3)
    R23 = embed_local(r(u2 - u3, eta), 2, 3, 3)
    return float(np.abs(R12 @ R13 @ R23 - R23 @ R13 @ R12).max())


def verify_permutation_conjugation(u: complex, eta: complex, r: RFunc = r_matrix) -> float:
    """Residual of R_{jk}(u) = P_{0j} R_{0k}(u) P_{0j} on three sites (0, j, k) = (1, 2, 3)."""
    P01 = embed_local(PERMUTATION, 1, 2, 3)
    lhs = embed_local(r(u, eta), 2, 3, 3)
    rhs = P01 @ embed_local(r(u, eta), 1, 3, 3) @ P01
    return float(np.abs(lhs - rhs).max())


def verify_permutation_commutator() -> float:
    """Residual of [P21, P20] = (i/2) sigma_2 . (sigma_1 x sigma_0) on sites (0, 1, 2)."""
    # sites 0, 1, 2 are tensor factors 1, 2, 3
    P21 = embed_local(PERMUTATION, 3, 2, 3)
    P20 = embed_local(PERMUTATION, 3, 1, 3)
    lhs = P21 @ P20 - P20 @ P21
    s = {site: {p: embed_site(m, site + 1, 3) for p, m in PAULI.items()} for site in range(3)}
    cross = 0
    for a, b, c, sign in (
        ("x", "y", "z", 1), ("y", "z", "x", 1), ("z", "x", "y", 1),
        ("x", "z", "y", -1), ("z", "y", "x", -1), ("y", "x", "z", -1),
    ):
        cross = cross + sign * s[2][a] @ s[1][b] @ s[0][c]
    return float(np.abs(lhs - 0.5j * cross).max())
