"""Exact diagonalization of H and of the commuting transfer-matrix family."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .chain import (
    ModelParams,
    hamiltonian_constant,
    hamiltonian_direct,
    transfer_apply,
    transfer_prefactor,
)
from .operators import hermitian_eigs, lanczos_extremal

DEGENERACY_TOL = 1e-8
# generic spectral points used to split degenerate H levels
GENERIC_POINTS = (0.3141 + 0.5772j, -0.2718 + 1.1414j)


@dataclass(frozen=True)
class SpectrumRecord:
    energies: np.ndarray
    multiplicities: np.ndarray
    params: ModelParams

    @property
    def total(self) -> int:
        return int(self.multiplicities.sum())

    def expanded(self) -> np.ndarray:
        return np.repeat(self.energies, self.multiplicities)


@dataclass(frozen=True)
class TransferEigenSample:
    """Transfer eigenvalues ``values[k, m] = Lambda_k(points[m])`` on a joint eigenbasis.

    ``energies[k]`` is the H eigenvalue of vector ``k`` and ``residuals[k]``
    the worst relative ``||t(u) v - Lambda v||`` over the sampled points.
    """

    points: np.ndarray
    values: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray = field(repr=False)
    residuals: np.ndarray

    def at(self, u: complex) -> np.ndarray:
        idx = np.flatnonzero(np.abs(self.points - u) < 1e-14)
        if idx.size == 0:
            raise KeyError(f"point {u} not sampled")
        return self.values[:, idx[0]]


def group_levels(values: Sequence[float], tol: float = DEGENERACY_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Group a sorted list into distinct levels and their multiplicities."""
    values = np.sort(np.asarray(values, dtype=float))
    levels, counts = [], []
    for v in values:
        if levels and abs(v - levels[-1]) <= tol:
            counts[-1] += 1
        else:
            levels.append(v)
            counts.append(1)
    return np.array(levels), np.array(counts)


def full_spectrum(params: ModelParams, tol: float = DEGENERACY_TOL) -> SpectrumRecord:
    if params.sites > 12:
        raise ValueError("full spectrum limited to 12 sites")
    w = hermitian_eigs(hamiltonian_direct(params))
    levels, counts = group_levels(w, tol)
    return SpectrumRecord(levels, counts, params)


def _joint_basis(params: ModelParams, states: str, n_ground: int):
    if states == "all":
        if params.sites > 12:
            raise ValueError("all-states sampling limited to 12 sites")
        w, V = hermitian_eigs(hamiltonian_direct(params), vectors=True)
    elif states == "ground":
        H = hamiltonian_direct(params, sparse=True)
        w, V = lanczos_extremal(H, k=n_ground, tol=1e-13, return_vectors=True)
        keep = np.abs(w - w[0]) <= 1e-7 * max(1.0, abs(w[0]))
        w, V = w[keep], V[:, keep]
    else:
        raise ValueError("states must be 'all' or 'ground'")
    rng = np.random.default_rng(12345)
    mix = rng.standard_normal() + 1j * rng.standard_normal()
    u1, u2 = GENERIC_POINTS
    out_w, out_v = [], []
    start = 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and abs(w[stop] - w[start]) <= 1e-7 * max(1.0, abs(w[start])):
            stop += 1
        # ARPACK vectors inside a degenerate block need not be orthogonal
        G = np.linalg.qr(V[:, start:stop])[0]
        if G.shape[1] == 1:
            out_v.append(G)
        else:
            # t restricted to the H eigenspace; a random combination of two
            # points lifts accidental coincidences of Lambda at one point
            TG = np.stack(
                [transfer_apply(u1, params, g) + mix * transfer_apply(u2, params, g) for g in G.T], axis=1
            )
            _, W = np.linalg.eig(G.conj().T @ TG)
            vecs = G @ W
            vecs /= np.linalg.norm(vecs, axis=0)
            out_v.append(vecs)
        out_w.extend([w[start]] * (stop - start))
        start = stop
    return np.array(out_w), np.hstack(out_v)


def transfer_eigenvalues(
    points: Sequence[complex],
    params: ModelParams,
    states: str = "all",
    n_ground: int = 4,
) -> TransferEigenSample:
    """Sample Lambda(u) for every joint eigenvector of H and t(u).

    ``states="ground"`` restricts to the (possibly degenerate) ground space
    found by Lanczos, which reaches beyond the dense limit.
    """
    pts = np.asarray(points, dtype=np.complex128)
    energies, vecs = _joint_basis(params, states, n_ground)
    values = np.empty((vecs.shape[1], len(pts)), dtype=np.complex128)
    resid = np.zeros(vecs.shape[1])
    for m, u in enumerate(pts):
        TV = np.stack([transfer_apply(u, params, v) for v in vecs.T], axis=1)
        lam = np.einsum("ik,ik->k", vecs.conj(), TV)
        values[:, m] = lam
        r = np.linalg.norm(TV - vecs * lam, axis=0) / np.maximum(1.0, np.abs(lam))
        resid = np.maximum(resid, r)
    return TransferEigenSample(pts, values, energies, vecs, resid)


def energy_stencil(params: ModelParams, h: float = 1e-5) -> list[complex]:
    """Spectral points needed by :func:`energy_from_lambda`."""
    a, eta = params.a, params.eta
    return [a - eta, -a - eta, a + h, a - h, -a + h, -a - h]


def energy_from_lambda(sample: TransferEigenSample, params: ModelParams, h: float = 1e-5) -> np.ndarray:
    """Energies from transfer eigenvalues, the scalar form of the transfer construction of H.

    Uses hat-Lambda(u) = -Lambda(-u - eta) and central differences of step
    ``h`` for Lambda'(+-a).
    """
    a, eta = params.a, params.eta
    try:
        lam_hat_m = -sample.at(a - eta)  # hat-Lambda(-a)
        lam_hat_p = -sample.at(-a - eta)  # hat-Lambda(a)
        d_plus = (sample.at(a + h) - sample.at(a - h)) / (2 * h)
        d_minus = (sample.at(-a + h) - sample.at(-a - h)) / (2 * h)
    except KeyError as exc:
        raise ValueError(f"sample lacks the derivative stencil: {exc}") from None
    E = hamiltonian_constant(params) + transfer_prefactor(params) * (lam_hat_m * d_plus + lam_hat_p * d_minus)
    return E


def a_vac(u: complex, params: ModelParams) -> complex:
    """a(u) = sinh^N(u+a+eta) sinh^N(u-a+eta) / sinh^2N(eta)."""
    N, a, eta = params.N, params.a, params.eta
    return (np.sinh(u + a + eta) * np.sinh(u - a + eta)) ** N / np.sinh(eta) ** (2 * N)


def d_vac(u: complex, params: ModelParams) -> complex:
    """d(u) = sinh^N(u+a) sinh^N(u-a) / sinh^2N(eta)."""
    N, a, eta = params.N, params.a, params.eta
    return (np.sinh(u + a) * np.sinh(u - a)) ** N / np.sinh(eta) ** (2 * N)


def functional_relation_residuals(params: ModelParams, sample: TransferEigenSample | None = None) -> np.ndarray:
    """|Lambda(th) Lambda(th - eta) + a(th) d(th - eta)| / scale for th = +-a, per eigenvector."""
    a, eta = params.a, params.eta
    if sample is None:
        sample = transfer_eigenvalues([a, a - eta, -a, -a - eta], params)
    out = np.zeros(sample.values.shape[0])
    for th in (a, -a):
        rhs = -a_vac(th, params) * d_vac(th - eta, params)
        lhs = sample.at(th) * sample.at(th - eta)
        out = np.maximum(out, np.abs(lhs - rhs) / max(1.0, abs(rhs)))
    return out


def ground_energy(params: ModelParams, tol: float = 1e-12, dense_max_sites: int = 10) -> float:
    """Ground energy: dense LAPACK up to ``dense_max_sites``, Lanczos beyond."""
    if params.sites <= min(dense_max_sites, 12):
        return float(hermitian_eigs(hamiltonian_direct(params))[0])
    return lanczos_extremal(hamiltonian_direct(params, sparse=True), "lowest", tol=tol)
