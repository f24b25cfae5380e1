import numpy as np
import pytest

from disslat import spectra, superop as so
from disslat.errors import DegenerateSteadyState
from disslat.model import Boundary, Dissipator, LatticeSpec
from disslat.presets import ssh_spec


def test_steady_state_is_density_matrix():
    spec = ssh_spec(L=5, J0=0.5)
    sup = so.build_liouvillian_real(spec)
    result = spectra.diagonalize(sup, with_vectors=True)
    rho = spectra.steady_state(sup, result)
    assert abs(np.trace(rho) - 1.0) < 1e-12
    assert np.abs(rho - rho.conj().T).max() < 1e-12
    assert np.linalg.eigvalsh(rho).min() > -1e-10
    # stationarity
    assert np.abs(sup.matrix @ rho.reshape(-1)).max() < 1e-10


def test_direct_steady_state_matches_eigensolver():
    spec = ssh_spec(L=6, J0=1.7)
    sup = so.build_liouvillian_real(spec)
    rho_eig = spectra.steady_state(sup, spectra.diagonalize(
        sup, with_vectors=True))
    rho_dir = spectra.steady_state_direct(sup)
    assert np.linalg.norm(rho_eig - rho_dir) < 1e-9


def test_degenerate_steady_state_detected():
    # intracell hopping and intracell dissipation only: cells decouple
    # and every cell carries its own stationary state
    spec = LatticeSpec(L=3, hoppings={0: 1.0},
                       dissipators=(Dissipator("a", "b", 0, 1.0),),
                       boundary=Boundary.OBC)
    sup = so.build_liouvillian_real(spec)
    with pytest.raises(DegenerateSteadyState):
        spectra.steady_state(sup, spectra.diagonalize(sup, with_vectors=True))


def test_gap_is_positive_away_from_transition():
    spec = ssh_spec(L=6, J0=0.5)
    result = spectra.diagonalize(so.build_liouvillian_real(spec))
    assert result.gap > 0
    assert spectra.liouvillian_gap(result) == result.gap


def test_multiset_distance():
    a = np.array([1 + 1j, 2.0, 3 - 1j])
    assert spectra.multiset_distance(a, a[::-1]) == 0.0
    b = a + np.array([1e-3, 0, 0])
    assert abs(spectra.multiset_distance(a, b) - 1e-3) < 1e-12
    with pytest.raises(ValueError):
        spectra.multiset_distance(a, a[:2])


def test_winding_limits():
    pbc = ssh_spec(L=8, J0=0.4, boundary=Boundary.PBC)
    assert spectra.winding_W0(pbc, n_K=151).value == -1
    assert spectra.winding_W0(
        ssh_spec(L=8, J0=1.8, boundary=Boundary.PBC), n_K=151).value == 1


def test_winding_epsilon_and_grid_independence():
    spec = ssh_spec(L=6, J0=0.5, boundary=Boundary.PBC)
    base = spectra.winding_W0(spec, n_K=101)
    for n_K in (151, 257):
        assert spectra.winding_W0(spec, n_K=n_K).value == base.value
    for eps_scale in (0.3, 3.0):
        result = spectra.winding_W0(spec, n_K=101,
                                    epsilon=eps_scale *
                                    spectra.default_epsilon(spec))
        assert result.value == base.value


def test_winding_raw_is_near_integer():
    spec = ssh_spec(L=6, J0=2.0, boundary=Boundary.PBC)
    result = spectra.winding_W0(spec, n_K=151)
    assert result.residual < 1e-6
    assert result.reference_offset > 0
