import numpy as np
import pytest

from disslat import observables as obs


def test_average_position_extremes():
    n = 10
    left = np.zeros((n, n))
    left[0, 0] = 1.0
    right = np.zeros((n, n))
    right[-1, -1] = 1.0
    assert obs.average_position(left) == pytest.approx(1 - 5.5)
    assert obs.average_position(right) == pytest.approx(10 - 5.5)
    assert obs.normalized_average_position(left) == pytest.approx(-1.0)
    assert obs.normalized_average_position(right) == pytest.approx(1.0)


def test_system_center_defect_lattice():
    # odd ladder (edge defect): center lands on the middle site
    assert obs.system_center(9) == 5.0
    assert obs.system_center(10) == 5.5


def test_coherence_profile_of_exponential_state():
    # pure state with amplitude decay e^{-n/xi} across cells gives
    # C(d) proportional to e^{-d/xi}, recovering xi exactly
    L, xi = 8, 1.7
    n = 2 * L
    psi = np.exp(-np.arange(n) / (2.0 * xi))
    psi /= np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    result = obs.coherence_profile(rho, d_max=4)
    # open-boundary truncation of the cell sums shifts xi slightly
    assert result.xi_c == pytest.approx(xi, rel=1e-2)
    mags = np.abs(result.profile)
    ratios = mags[1:] / mags[:-1]
    assert np.allclose(ratios, ratios[0], rtol=2e-2)


def test_coherence_profile_flags():
    n = 8
    diag = np.eye(n) / n      # no coherence at all
    result = obs.coherence_profile(diag, d_max=2)
    assert result.xi_c == 0.0
    with pytest.raises(ValueError):
        obs.coherence_profile(diag, d_max=4)
    # coherence heavier at cell distance 1 than at 0: length undefined
    heavy = np.eye(n) / n
    for i in range(n - 2):
        heavy[i, i + 2] = heavy[i + 2, i] = 0.5
    assert obs.coherence_profile(heavy, d_max=2).xi_c is None


def test_coherence_profile_defect_lattice():
    n = 9   # L = 5 with the last b site removed
    rho = np.eye(n) / n
    result = obs.coherence_profile(rho, d_max=2)
    assert result.n_0 == 5.0
    assert abs(result.profile[0] - 1.0) < 1e-12
