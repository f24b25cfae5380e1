import numpy as np
import pytest
import scipy.sparse as sp

from disslat import model, twobody as tb
from disslat.errors import DimensionTooLarge, UnsupportedFamily
from disslat.presets import chiral_asymmetric_spec, ssh_spec


def test_basis_index_bijection():
    basis = tb.TwoBodyBasis(7)
    assert basis.dim == 21
    for p, (n1, n2) in enumerate(basis.pairs):
        assert basis.index(n1, n2) == p
        assert basis.index(n2, n1) == p
    with pytest.raises(ValueError):
        basis.index(3, 3)


def test_two_body_operator_against_projected_kron():
    """O^(2) equals P (O kron I + I kron O) P on the symmetrized pair basis."""
    rng = np.random.default_rng(5)
    N = 6
    O = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    basis = tb.TwoBodyBasis(N)
    # symmetric embedding of |n1 < n2| into the N^2 product space
    embed = np.zeros((N * N, basis.dim))
    for p, (n1, n2) in enumerate(basis.pairs):
        embed[n1 * N + n2, p] = 1.0 / np.sqrt(2.0)
        embed[n2 * N + n1, p] = 1.0 / np.sqrt(2.0)
    eye = np.eye(N)
    lifted = embed.T @ (np.kron(O, eye) + np.kron(eye, O)) @ embed
    got = tb.two_body_operator(O, basis).toarray()
    assert np.abs(got - lifted).max() < 1e-12


def test_liouvillian_preserves_trace():
    spec = ssh_spec(L=3, J0=0.7)
    sup, basis = tb.build_twobody_liouvillian(spec)
    left = np.eye(basis.dim, dtype=complex).reshape(-1)
    assert np.abs(left @ sup.matrix).max() < 1e-12


def test_dense_and_sparse_assemblies_agree():
    spec = ssh_spec(L=3, J0=0.7)
    dense_sup, _ = tb.build_twobody_liouvillian(spec, sparse=False)
    sparse_sup, _ = tb.build_twobody_liouvillian(spec, sparse=True)
    assert isinstance(dense_sup.matrix, np.ndarray)
    assert sp.issparse(sparse_sup.matrix)
    assert np.abs(sparse_sup.matrix.toarray() - dense_sup.matrix).max() == 0.0


def test_dense_memory_budget():
    spec = ssh_spec(L=6)
    with pytest.raises(DimensionTooLarge):
        tb.build_twobody_liouvillian(spec, sparse=False, dense_budget=1000)


def test_unsupported_family_rejected():
    with pytest.raises(UnsupportedFamily):
        tb.build_twobody_liouvillian(chiral_asymmetric_spec(L=4))


def test_steady_state_modes_agree():
    spec = ssh_spec(L=4, J0=0.5)
    dense_sup, basis = tb.build_twobody_liouvillian(spec, sparse=False)
    sparse_sup, _ = tb.build_twobody_liouvillian(spec, sparse=True)
    rho_dense = tb.twobody_steady_state(dense_sup, mode="DenseEig")
    rho_sparse = tb.twobody_steady_state(sparse_sup, mode="SparseNull")
    assert np.linalg.norm(rho_dense - rho_sparse) < 1e-7
    rho1 = tb.reduce_to_single_particle(rho_sparse, basis)
    assert abs(np.trace(rho1) - 2.0) < 1e-10
    assert np.abs(rho1 - rho1.conj().T).max() < 1e-10


def test_reduction_of_pure_pair_state():
    basis = tb.TwoBodyBasis(4)
    rho2 = np.zeros((basis.dim, basis.dim), dtype=complex)
    p = basis.index(0, 2)
    rho2[p, p] = 1.0
    rho1 = tb.reduce_to_single_particle(rho2, basis)
    expected = np.zeros((4, 4))
    expected[0, 0] = expected[2, 2] = 1.0
    assert np.abs(rho1 - expected).max() < 1e-14
