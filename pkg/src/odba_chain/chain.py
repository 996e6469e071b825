"""Twisted monodromy/transfer matrices and the two Hamiltonian constructions.

The chain has ``sites = 2N`` spins with staggered inhomogeneities
``theta_{2j-1} = -a``, ``theta_{2j} = a`` and ``a = i b``.  The auxiliary
space is twisted by ``sigma^x`` (antiperiodic boundary).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import DENSE_MAX_DIM, pauli_sum
from .rmatrix import phi, r_matrix, r_matrix_prime

DENSE_MAX_SITES = 12


class ConstructionError(RuntimeError):
    """The transfer-matrix Hamiltonian disagrees with the direct one."""


@dataclass(frozen=True)
class ModelParams:
    """Chain parameters: ``sites = 2N``, real ``eta``, ``a = i*b``, coupling sign ``J``.

    ``sites = 2`` is accepted for monodromy/transfer checks; the Hamiltonian
    needs at least four sites.
    """

    sites: int
    eta: float
    b: float
    J: int = 1

    def __post_init__(self):
        if self.sites < 2 or self.sites % 2:
            raise ValueError(f"sites must be an even integer >= 2, got {self.sites}")
        if not np.isfinite(self.eta) or self.eta <= 0:
            raise ValueError(f"eta must be real and positive, got {self.eta}")
        if not np.isfinite(self.b):
            raise ValueError("b must be finite")
        if self.J not in (1, -1):
            raise ValueError(f"J must be +1 or -1, got {self.J}")

    @classmethod
    def from_a(cls, sites: int, eta: float, a: complex, J: int = 1) -> ModelParams:
        """Build from the inhomogeneity ``a``; Hermiticity with real eta needs ``a`` imaginary."""
        a = complex(a)
        if abs(a.real) > 1e-14:
            raise ValueError("a must be purely imaginary when eta is real (Hermiticity)")
        return cls(sites, float(eta), a.imag, J)

    @property
    def N(self) -> int:
        return self.sites // 2

    @property
    def a(self) -> complex:
        return 1j * self.b

    @property
    def dim(self) -> int:
        return 2**self.sites

    def with_(self, **changes) -> ModelParams:
        fields = {"sites": self.sites, "eta": self.eta, "b": self.b, "J": self.J}
        fields.update(changes)
        return ModelParams(**fields)

    def as_dict(self) -> dict:
        return {"sites": self.sites, "eta": self.eta, "b": self.b, "J": self.J}


@dataclass(frozen=True)
class MonodromyMatrix:
    """Auxiliary-space blocks of the untwisted product R_{0,1} ... R_{0,2N}.

    The twisted monodromy is ``sigma^x_0`` times this, i.e. ``[[C, D], [A, B]]``,
    whose auxiliary trace is ``B + C``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def full(self) -> np.ndarray:
        """Twisted monodromy on V_0 (x) V_1 ... V_2N, auxiliary space first."""
        return np.block([[self.C, self.D], [self.A, self.B]])

    def trace(self) -> np.ndarray:
        return self.B + self.C


def _shift(site: int, a: complex, hat: bool) -> complex:
    odd = site % 2 == 1
    if hat:
        return -a if odd else a
    return a if odd else -a


def _aux_blocks(m: np.ndarray) -> list[list[np.ndarray]]:
    t = m.reshape(2, 2, 2, 2)
    return [[t[x, :, y, :] for y in range(2)] for x in range(2)]


def _check_dense(params: ModelParams) -> None:
    if params.sites > DENSE_MAX_SITES:
        raise ValueError(f"dense construction limited to {DENSE_MAX_SITES} sites")


def _monodromy_blocks(u: complex, params: ModelParams, hat: bool, derivative: bool):
    """Blocks of the product (and optionally its u-derivative) by site recursion."""
    eta, a = params.eta, params.a
    val = der = None
    for site in range(1, params.sites + 1):
        arg = u + _shift(site, a, hat)
        r = _aux_blocks(r_matrix(arg, eta))
        rp = _aux_blocks(r_matrix_prime(arg, eta)) if derivative else None
        if val is None:
            val, der = r, rp
            continue
        if hat:
            # reversed order: the new site multiplies from the left in aux space
            new_val = [[sum(np.kron(val[c][y], r[x][c]) for c in range(2)) for y in range(2)] for x in range(2)]
            if derivative:
                new_der = [[sum(np.kron(der[c][y], r[x][c]) + np.kron(val[c][y], rp[x][c]) for c in range(2))
                            for y in range(2)] for x in range(2)]
        else:
            new_val = [[sum(np.kron(val[x][c], r[c][y]) for c in range(2)) for y in range(2)] for x in range(2)]
            if derivative:
                new_der = [[sum(np.kron(der[x][c], r[c][y]) + np.kron(val[x][c], rp[c][y]) for c in range(2))
                            for y in range(2)] for x in range(2)]
        val = new_val
        if derivative:
            der = new_der
    return val, der


def monodromy(u: complex, params: ModelParams, hat: bool = False) -> MonodromyMatrix:
    """Monodromy matrix at ``u``; ``hat=True`` gives the reversed-order product."""
    _check_dense(params)
    val, _ = _monodromy_blocks(u, params, hat, derivative=False)
    return MonodromyMatrix(A=val[0][0], B=val[0][1], C=val[1][0], D=val[1][1])


def transfer(u: complex, params: ModelParams) -> np.ndarray:
    """t(u): auxiliary trace of the twisted monodromy."""
    return monodromy(u, params).trace()


def transfer_hat(u: complex, params: ModelParams) -> np.ndarray:
    return monodromy(u, params, hat=True).trace()


def transfer_derivative(u0: complex, params: ModelParams, hat: bool = False) -> np.ndarray:
    """Analytic dt/du at ``u0`` via the product rule over the 2N R-matrix factors."""
    _check_dense(params)
    _, der = _monodromy_blocks(u0, params, hat, derivative=True)
    return der[0][1] + der[1][0]


def transfer_apply(u: complex, params: ModelParams, v: np.ndarray, hat: bool = False) -> np.ndarray:
    """t(u) @ v without forming t(u); usable beyond the dense size limit."""
    L, eta, a = params.sites, params.eta, params.a
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != (2**L,):
        raise ValueError("vector has the wrong dimension")
    order = range(L, 0, -1) if not hat else range(1, L + 1)
    out = np.zeros_like(v)
    for aux in range(2):
        psi = np.zeros((2,) * (L + 1), dtype=np.complex128)
        psi[aux] = v.reshape((2,) * L)
        # rightmost factor acts first
        for site in order:
            r = r_matrix(u + _shift(site, a, hat), eta).reshape(2, 2, 2, 2)
            psi = np.moveaxis(np.tensordot(r, psi, axes=([2, 3], [0, site])), 1, site)
        # sigma^x twist: trace picks the flipped auxiliary component
        out += psi[1 - aux].reshape(-1)
    return out


def _antiperiodic_site(site: int, pauli: str, sites: int) -> tuple[int, str, int]:
    """Fold a site index beyond 2N back, conjugating by sigma^x (y, z flip sign)."""
    if site > sites:
        site -= sites
        return site, pauli, (-1 if pauli in "yz" else 1)
    return site, pauli, 1


_LEVI_CIVITA = (
    ("x", "y", "z", 1), ("y", "z", "x", 1), ("z", "x", "y", 1),
    ("x", "z", "y", -1), ("z", "y", "x", -1), ("y", "x", "z", -1),
)


def hamiltonian_terms(params: ModelParams, boundary: str = "antiperiodic"):
    """Pauli-string expansion ``[(coef, [(site, pauli), ...]), ...]`` of H."""
    if params.sites < 4:
        raise ValueError("the Hamiltonian needs at least 4 sites")
    if boundary not in ("antiperiodic", "periodic"):
        raise ValueError("boundary must be 'antiperiodic' or 'periodic'")
    L, eta, a, J = params.sites, params.eta, params.a, params.J
    c2a, s2a = np.cosh(2 * a), np.sinh(2 * a)
    ce, se = np.cosh(eta), np.sinh(eta)
    terms = []

    def add(coef, ops):
        folded = []
        for site, p in ops:
            if boundary == "antiperiodic":
                site, p, sign = _antiperiodic_site(site, p, L)
                coef = coef * sign
            else:
                site = (site - 1) % L + 1
            folded.append((site, p))
        terms.append((J * coef, folded))

    nnn = -(s2a**2) * ce / (2 * se**2)
    for j in range(1, L + 1):
        add(c2a, [(j, "x"), (j + 1, "x")])
        add(c2a, [(j, "y"), (j + 1, "y")])
        add(ce, [(j, "z"), (j + 1, "z")])
        for p in "xyz":
            add(nnn, [(j, p), (j + 2, p)])
        g = (-1) ** j * 1j * s2a / (2 * se)
        # sigma_{j+1} . (sigma_j x sigma_{j+2})
        for p1, p0, p2, sign in _LEVI_CIVITA:
            add(g * ce * sign, [(j + 1, p1), (j, p0), (j + 2, p2)])
        add(g * (c2a - ce), [(j + 1, "z"), (j, "x"), (j + 2, "y")])
        add(-g * (c2a - ce), [(j + 1, "z"), (j, "y"), (j + 2, "x")])
    return terms


def hamiltonian_direct(params: ModelParams, sparse: bool = False, boundary: str = "antiperiodic"):
    """H assembled term by term from NN, NNN and staggered chirality couplings."""
    if not sparse and params.dim > DENSE_MAX_DIM:
        raise ValueError("dense Hamiltonian limited to 12 sites; use sparse=True")
    H = pauli_sum(hamiltonian_terms(params, boundary), params.sites, sparse=True)
    return H if sparse else H.toarray()


def hamiltonian_constant(params: ModelParams) -> float:
    """Constant J N cosh(eta)[cosh^2(2a) - cosh(2 eta)] / sinh^2(eta) added to the transfer bilinear.

    It cancels the trace of the bilinear term, so H itself is traceless.
    """
    eta, a = params.eta, params.a
    c = params.J * params.N * np.cosh(eta) * (np.cosh(2 * a) ** 2 - np.cosh(2 * eta)) / np.sinh(eta) ** 2
    return float(np.real(c))


def transfer_prefactor(params: ModelParams) -> float:
    """J phi(2a)^(1-N) sinh(eta), multiplying the transfer-matrix bilinear."""
    val = params.J * phi(2 * params.a, params.eta) ** (1 - params.N) * np.sinh(params.eta)
    return float(np.real(val))


def hamiltonian_from_transfer(params: ModelParams, check: bool = True, rtol: float = 1e-9) -> np.ndarray:
    """H = const + J phi^(1-N)(2a) sinh(eta) [t^(-a) t'(a) + t^(a) t'(-a)].

    A single overall factor J multiplies both pieces.  With ``check`` the
    result is compared with :func:`hamiltonian_direct` and a
    :class:`ConstructionError` is raised beyond ``rtol``.
    """
    a = params.a
    bilinear = (
        transfer_hat(-a, params) @ transfer_derivative(a, params)
        + transfer_hat(a, params) @ transfer_derivative(-a, params)
    )
    H = hamiltonian_constant(params) * np.eye(params.dim) + transfer_prefactor(params) * bilinear
    if check:
        H_direct = hamiltonian_direct(params)
        rel = np.linalg.norm(H - H_direct) / np.linalg.norm(H_direct)
        if rel > rtol:
            raise ConstructionError(f"transfer Hamiltonian differs from direct one: {rel:.3e}")
    return H
