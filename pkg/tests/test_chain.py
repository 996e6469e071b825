import numpy as np
import pytest

from odba_chain.chain import (
    ConstructionError,
    ModelParams,
    hamiltonian_constant,
    hamiltonian_direct,
    hamiltonian_from_transfer,
    monodromy,
    transfer,
    transfer_apply,
    transfer_derivative,
    transfer_hat,
)
from odba_chain.operators import PAULI, commutator, hermiticity_residual


def kron_term(ops, sites):
    out = np.eye(1)
    for k in range(1, sites + 1):
        out = np.kron(out, PAULI[ops[k]] if k in ops else np.eye(2))
    return out


def xxz_oracle(sites, eta, J=1):
    """Antiperiodic XXZ written out term by term (the b = 0 limit)."""
    H = np.zeros((2**sites, 2**sites), dtype=complex)
    for j in range(1, sites + 1):
        k = j % sites + 1
        sgn = -1 if j == sites else 1  # sigma^x twist flips y and z across the boundary
        H += kron_term({j: "x", k: "x"}, sites)
        H += sgn * kron_term({j: "y", k: "y"}, sites)
        H += sgn * np.cosh(eta) * kron_term({j: "z", k: "z"}, sites)
    return J * H


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(5, 1.0, 0.3)
    with pytest.raises(ValueError):
        ModelParams(4, -1.0, 0.3)
    with pytest.raises(ValueError):
        ModelParams(4, 1.0, 0.3, J=2)
    with pytest.raises(ValueError):
        ModelParams.from_a(4, 1.0, 0.2 + 0.3j)
    assert ModelParams.from_a(4, 1.0, 0.3j).b == pytest.approx(0.3)


def test_b_zero_reduces_to_xxz():
    p = ModelParams(6, 1.2, 0.0)
    # NNN coupling -sinh^2(2a) ... vanishes, constant keeps the identity part
    H = hamiltonian_direct(p)
    assert np.allclose(H, xxz_oracle(6, 1.2))


@pytest.mark.parametrize("sites", [4, 6])
def test_hermitian(sites):
    assert hermiticity_residual(hamiltonian_direct(ModelParams(sites, 1.0, 0.3))) < 1e-13


def test_j_sign_negates():
    p = ModelParams(4, 2.0, 0.75)
    assert np.allclose(hamiltonian_direct(p.with_(J=-1)), -hamiltonian_direct(p))


def test_transfer_commutes(rng):
    p = ModelParams(4, 1.0, 0.3)
    u, v = rng.normal(size=2) + 1j * rng.normal(size=2)
    tu, tv = transfer(u, p), transfer(v, p)
    assert np.abs(commutator(tu, tv)).max() < 1e-10 * np.abs(tu).max() * np.abs(tv).max()
    assert np.abs(commutator(tu, transfer_hat(u, p))).max() < 1e-10 * np.abs(tu).max() ** 2


def test_transfer_periodicity():
    p = ModelParams(4, 1.0, 0.3)
    u = 0.2 + 0.4j
    assert np.allclose(transfer(u + 1j * np.pi, p), -transfer(u, p))


def test_transfer_apply_matches_dense(rng):
    p = ModelParams(6, 1.0, 0.3)
    v = rng.normal(size=p.dim) + 1j * rng.normal(size=p.dim)
    u = 0.1 - 0.7j
    assert np.allclose(transfer_apply(u, p, v), transfer(u, p) @ v)
    assert np.allclose(transfer_apply(u, p, v, hat=True), transfer_hat(u, p) @ v)


def test_transfer_derivative_fd():
    p = ModelParams(4, 1.0, 0.3)
    u, h = 0.2 + 0.1j, 1e-6
    fd = (transfer(u + h, p) - transfer(u - h, p)) / (2 * h)
    assert np.allclose(transfer_derivative(u, p), fd, atol=1e-7)


def test_monodromy_twisted_trace():
    p = ModelParams(2, 1.0, 0.3)
    M = monodromy(0.3, p)
    full = M.full()
    tr = full[:4, :4] + full[4:, 4:]
    assert np.allclose(tr, transfer(0.3, p))


@pytest.mark.parametrize("eta,b,J", [(1.0, 0.3, 1), (2.0, 0.75, -1)])
def test_transfer_construction(eta, b, J):
    p = ModelParams(4, eta, b, J)
    H = hamiltonian_from_transfer(p)
    assert np.linalg.norm(H - hamiltonian_direct(p)) / np.linalg.norm(H) < 1e-10


def test_constant_cancels_bilinear_trace():
    p = ModelParams(4, 1.0, 0.3)
    H = hamiltonian_from_transfer(p)
    bilinear = H - hamiltonian_constant(p) * np.eye(p.dim)
    assert abs(np.trace(H)) < 1e-10
    assert np.trace(bilinear).real / p.dim == pytest.approx(-hamiltonian_constant(p), abs=1e-10)


def test_periodic_boundary_differs():
    p = ModelParams(4, 1.0, 0.3)
    assert not np.allclose(hamiltonian_direct(p, boundary="periodic"), hamiltonian_direct(p))
    with pytest.raises(ValueError):
        hamiltonian_direct(p, boundary="open")


def test_small_chain_rejected_for_hamiltonian():
    with pytest.raises(ValueError):
        hamiltonian_direct(ModelParams(2, 1.0, 0.3))


def test_construction_error_type():
    assert issubclass(ConstructionError, RuntimeError)
