import numpy as np
import pytest

from disslat import model, spectra, superop as so
from disslat.errors import BoundaryMismatch
from disslat.model import Boundary
from disslat.presets import ssh_spec


def test_vec_roundtrip():
    spec = ssh_spec(L=3)
    imap = so.VecIndexMap(spec)
    rng = np.random.default_rng(0)
    rho = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    assert np.array_equal(imap.unvec(imap.vec(rho)), rho)
    flat = imap.index("a", "b", 2, 3)
    assert imap.unindex(flat) == ("a", 2, "b", 3)


def test_liouvillian_preserves_trace_and_hermiticity():
    spec = ssh_spec(L=4, J0=0.7)
    sup = so.build_liouvillian_real(spec)
    n = spec.n_sites
    # trace preservation: vec(I) is a left null vector
    left = np.eye(n, dtype=complex).reshape(-1)
    assert np.abs(left @ sup.matrix).max() < 1e-12
    # Hermiticity preservation: L vec(rho) stays the vec of a Hermitian matrix
    rng = np.random.default_rng(1)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = A + A.conj().T
    out = (sup.matrix @ rho.reshape(-1)).reshape(n, n)
    assert np.abs(out - out.conj().T).max() < 1e-12


def test_spectrum_in_closed_left_half_plane_and_conjugation():
    for boundary in Boundary:
        spec = ssh_spec(L=4, J0=0.6, boundary=boundary)
        vals = spectra.diagonalize(so.build_liouvillian_real(spec)).eigenvalues
        assert vals.real.max() < 1e-10
        assert spectra.multiset_distance(vals, vals.conj()) < 1e-8


def test_kblock_requires_pbc():
    with pytest.raises(BoundaryMismatch):
        so.build_kblock(ssh_spec(L=4, boundary=Boundary.OBC), 0.0)


def test_kblock_completeness_L4():
    """The union of the K-block spectra is the full PBC Liouvillian spectrum."""
    spec = ssh_spec(L=4, J0=0.8, boundary=Boundary.PBC)
    full = spectra.diagonalize(so.build_liouvillian_real(spec)).eigenvalues
    union = np.concatenate([
        np.linalg.eigvals(so.build_kblock(spec, K).matrix)
        for K in so.physical_k_values(spec.L)
    ])
    assert spectra.multiset_distance(full, union) < 1e-10


def test_kblock_sweep_grid_coincides_with_physical_K():
    spec = ssh_spec(L=5, boundary=Boundary.PBC)
    blocks = so.kblock_sweep(spec, n_K=5)
    got = sorted(b.K for b in blocks)
    assert np.allclose(got, sorted(so.physical_k_values(5)))


def test_kblock_dimensions_and_structure():
    spec = ssh_spec(L=6, boundary=Boundary.PBC)
    block = so.build_kblock(spec, 0.7)
    assert block.matrix.shape == (24, 24)
    assert len(block.blocks) == 6
    # the full matrix is block diagonal plus the uniform M0 coupling
    recon = np.zeros_like(block.matrix)
    for i, M in enumerate(block.blocks):
        recon[4 * i:4 * i + 4, 4 * i:4 * i + 4] = M
    recon += np.kron(np.ones((6, 6)), block.M0)
    assert np.abs(recon - block.matrix).max() < 1e-14


def test_matrix_text_roundtrip(tmp_path):
    spec = ssh_spec(L=3)
    sup = so.build_liouvillian_real(spec)
    path = tmp_path / "liouvillian.txt"
    so.write_matrix(sup, path)
    back, provenance = so.read_matrix(path)
    assert np.abs(back - sup.matrix).max() == 0.0
    assert provenance == sup.provenance
