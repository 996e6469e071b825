"""Operator substrate for spin-1/2 chains.

Basis convention: site 1 is the most significant tensor factor and
``|0> = |up> = (1, 0)``.  Dense operators are plain ``numpy`` arrays, sparse
ones are ``scipy.sparse`` CSR matrices.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np
import scipy.sparse as sps
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

SIGMA_0 = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

PERMUTATION = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)

DENSE_MAX_DIM = 2**12
LANCZOS_MAX_DIM = 2**18
HERMITIAN_RTOL = 1e-12


class HermiticityError(ValueError):
    pass


class LanczosConvergenceError(RuntimeError):
    pass


def kron_all(ops: Iterable[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=np.complex128)
    for op in ops:
        out = np.kron(out, op)
    return out


def _check_local(op: np.ndarray) -> np.ndarray:
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (4, 4):
        raise ValueError(f"local operator must be 4x4, got {op.shape}")
    if not np.all(np.isfinite(op)):
        raise ValueError("local operator has non-finite entries")
    return op


def embed_site(op: np.ndarray, i: int, sites: int) -> np.ndarray:
    """Embed a single-site 2x2 operator at 1-based site ``i``."""
    if not 1 <= i <= sites:
        raise IndexError(f"site {i} out of range 1..{sites}")
    return kron_all(op if k == i else SIGMA_0 for k in range(1, sites + 1))


def embed_local(op: np.ndarray, i: int, j: int, sites: int) -> np.ndarray:
    """Embed a two-site operator acting on factors (i, j) of a ``sites``-fold product.

    ``op`` is a 4x4 matrix on ``V_i (x) V_j`` with ``V_i`` the first factor, so
    ``embed_local(P, i, j)`` is the permutation of sites i and j and
    ``embed_local(R, 2, 1)`` is ``R_{21}``.  Sites are 1-based.
    """
    op = _check_local(op)
    if not (1 <= i <= sites and 1 <= j <= sites):
        raise IndexError(f"sites ({i}, {j}) out of range 1..{sites}")
    if i == j:
        raise ValueError("embed_local needs two distinct sites")
    rest = sites - 2
    full = np.kron(op, np.eye(2**rest, dtype=np.complex128))
    # factor order of `full` is (i, j, remaining sites ascending)
    order = [i - 1, j - 1] + [k for k in range(sites) if k not in (i - 1, j - 1)]
    inverse = np.argsort(order)
    t = full.reshape((2,) * (2 * sites))
    t = t.transpose(list(inverse) + [sites + k for k in inverse])
    return t.reshape(2**sites, 2**sites)


def pauli_sum(
    terms: Sequence[tuple[complex, Sequence[tuple[int, str]]]],
    sites: int,
    sparse: bool = True,
):
    """Assemble ``sum_k c_k prod_m sigma^{p_m}_{s_m}`` from Pauli strings.

    Each term is ``(coefficient, [(site, 'x'|'y'|'z'), ...])`` with 1-based,
    pairwise distinct sites.  Terms sharing a spin-flip mask are accumulated
    into one diagonal of the bit-flip structure, which keeps the sparse
    assembly at ``O(#masks * 2^sites)``.
    """
    dim = 2**sites
    states = np.arange(dim, dtype=np.int64)
    acc: dict[int, np.ndarray] = {}
    for coef, ops in terms:
        mask = 0
        amp = np.full(dim, complex(coef), dtype=np.complex128)
        seen = set()
        for site, p in ops:
            if site in seen:
                raise ValueError(f"repeated site {site} in Pauli string")
            seen.add(site)
            shift = sites - site
            sign = 1 - 2 * ((states >> shift) & 1)
            if p == "x":
                mask |= 1 << shift
            elif p == "y":
                mask |= 1 << shift
                amp *= 1j * sign
            elif p == "z":
                amp *= sign
            else:
                raise ValueError(f"unknown Pauli label {p!r}")
        if mask in acc:
            acc[mask] += amp
        else:
            acc[mask] = amp
    rows, cols, vals = [], [], []
    for mask, amp in acc.items():
        keep = amp != 0
        rows.append(states[keep] ^ mask)
        cols.append(states[keep])
        vals.append(amp[keep])
    H = sps.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )
    return H if sparse else H.toarray()


def hermiticity_residual(H) -> float:
    """Entrywise ``max|H - H^dagger| / max|H|`` (0 for the zero operator)."""
    if sps.issparse(H):
        diff = H - H.conj().T
        num = abs(diff).max() if diff.nnz else 0.0
        den = abs(H).max() if H.nnz else 0.0
    else:
        H = np.asarray(H)
        num = np.abs(H - H.conj().T).max()
        den = np.abs(H).max()
    return float(num / den) if den else 0.0


def check_chain_dim(dim: int) -> int:
    sites = int(dim).bit_length() - 1
    if dim != 2**sites or sites < 2:
        raise ValueError(f"dimension {dim} is not 2^sites with sites >= 2")
    return sites


def hermitian_eigs(H, vectors: bool = False, max_dim: int = DENSE_MAX_DIM):
    """Full spectrum of a Hermitian chain operator, ascending.

    Returns the eigenvalues, or ``(eigenvalues, eigenvectors)`` with
    ``vectors=True``.  Sparse input is densified.
    """
    if sps.issparse(H):
        H = H.toarray()
    H = np.asarray(H, dtype=np.complex128)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("operator must be square")
    if H.shape[0] > max_dim:
        raise ValueError(f"dimension {H.shape[0]} exceeds dense limit {max_dim}")
    res = hermiticity_residual(H)
    if res > HERMITIAN_RTOL:
        raise HermiticityError(f"operator is not Hermitian (residual {res:.2e})")
    H = 0.5 * (H + H.conj().T)
    if vectors:
        w, V = np.linalg.eigh(H)
        return w, V
    return np.linalg.eigvalsh(H)


def lanczos_extremal(
    H,
    which: str = "lowest",
    tol: float = 1e-12,
    maxiter: int | None = None,
    seed: int = 0,
    k: int = 1,
    return_vectors: bool = False,
):
    """Extremal eigenvalue(s) of a sparse Hermitian operator by implicitly restarted Lanczos.

    The start vector is drawn from ``seed`` so results are reproducible.
    ``k > 1`` returns the ``k`` extremal values (sorted ascending); with
    ``return_vectors`` the matching eigenvectors are returned as columns.
    """
    if which not in ("lowest", "highest"):
        raise ValueError("which must be 'lowest' or 'highest'")
    dim = H.shape[0]
    if dim > LANCZOS_MAX_DIM:
        raise ValueError(f"dimension {dim} exceeds Lanczos limit {LANCZOS_MAX_DIM}")
    if sps.issparse(H) and hermiticity_residual(H) > HERMITIAN_RTOL:
        raise HermiticityError("operator is not Hermitian")
    if dim <= 64:
        # ARPACK needs k < dim - 1; tiny operators go through LAPACK
        w, V = hermitian_eigs(H.toarray() if sps.issparse(H) else H, vectors=True)
        idx = np.arange(k) if which == "lowest" else np.arange(dim - k, dim)
        return (w[idx], V[:, idx]) if return_vectors else (w[idx] if k > 1 else float(w[idx[0]]))
    if not isinstance(H, LinearOperator) and not sps.issparse(H):
        H = np.asarray(H)
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(dim)
    if np.iscomplexobj(H) or isinstance(H, LinearOperator):
        v0 = v0 + 1j * rng.standard_normal(dim)
    try:
        w, V = eigsh(
            H,
            k=k,
            which="SA" if which == "lowest" else "LA",
            tol=tol,
            maxiter=maxiter,
            v0=v0,
            ncv=max(2 * k + 1, 20),
        )
    except ArpackNoConvergence as exc:
        raise LanczosConvergenceError(
            f"Lanczos did not converge: {len(exc.eigenvalues)} of {k} values found"
        ) from exc
    order = np.argsort(w)
    w, V = w[order], V[:, order]
    if return_vectors:
        return w, V
    return w if k > 1 else float(w[0])


def commutator(A, B):
    return A @ B - B @ A


def max_abs(M) -> float:
    if sps.issparse(M):
        return float(abs(M).max()) if M.nnz else 0.0
    return float(np.max(np.abs(M)))
