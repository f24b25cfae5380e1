import numpy as np
import pytest

from disslat import oracle, spectra, superop as so
from disslat.errors import DegenerateParameters, UnsupportedFamily
from disslat.model import Boundary, Dissipator, LatticeSpec
from disslat.presets import chiral_asymmetric_spec, ssh_spec


def intracell_spec(L, J0, gamma0=1.2, gamma1=1.2, boundary=Boundary.PBC):
    return LatticeSpec(L=L, hoppings={0: J0},
                       dissipators=(Dissipator("a", "b", 0, gamma0),
                                    Dissipator("a", "b", 1, gamma1)),
                       boundary=boundary)


def test_cubic_roots_reconstruct_polynomial():
    rng = np.random.default_rng(3)
    for _ in range(25):
        b, c, d = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        roots = oracle.cubic_roots(b, c, d)
        assert len(roots) == 3
        for z in roots:
            assert abs(z ** 3 + b * z ** 2 + c * z + d) < 1e-10


def test_exact_spectrum_matches_kblock():
    spec = intracell_spec(L=6, J0=0.5)
    for K in so.physical_k_values(6):
        exact = oracle.exact_spectrum_J0(
            0.5, spec.gamma("a", "b"), 6, K).flatten()
        numeric = np.linalg.eigvals(so.build_kblock(spec, K).matrix)
        assert spectra.multiset_distance(exact, numeric) < 1e-11


def test_exact_spectrum_rejects_degenerate_parameters():
    with pytest.raises(DegenerateParameters):
        oracle.exact_spectrum_J0(0.0, {0: 1.0}, 6, 0.0)
    with pytest.raises(DegenerateParameters):
        oracle.exact_spectrum_J0(1.0, {0: 0.0}, 6, 0.0)


def test_gauge_identities():
    spec = LatticeSpec(L=6, hoppings={1: 0.8},
                       dissipators=(Dissipator("a", "b", 0, 1.2),
                                    Dissipator("a", "b", 1, 0.7)),
                       boundary=Boundary.PBC)
    for K in (0.3, 1.1, 2.9):
        report = oracle.gauge_check(spec, K, n=2, m=4)
        assert report["map_residual_Mn"] < 1e-12
        assert report["map_residual_M0"] < 1e-12


def test_winding_formula_known_cases():
    # a<-b dissipation with the intercell hopping: ordinary skin limits
    assert oracle.winding_formula(ssh_spec(L=6, J0=0.0)) == -1
    trivial = LatticeSpec(L=6, hoppings={0: 1.0},
                          dissipators=(Dissipator("a", "b", 0, 1.2),
                                       Dissipator("a", "b", 1, 1.2)),
                          boundary=Boundary.PBC)
    assert oracle.winding_formula(trivial) == 1
    # same-sublattice dissipation: sign set by the rate displacement alone
    asym = LatticeSpec(L=6, hoppings={1: 1.0},
                       dissipators=(Dissipator("a", "a", 1, 2.25),),
                       boundary=Boundary.PBC)
    assert oracle.winding_formula(asym) == 1


def test_winding_formula_guards_multiple_touch():
    spec = LatticeSpec(L=8, hoppings={0: 1.0},
                       dissipators=(Dissipator("a", "a", 2, 1.0),),
                       boundary=Boundary.PBC)
    with pytest.raises(UnsupportedFamily):
        oracle.winding_formula(spec)


def test_steady_branch_slope_against_finite_difference():
    spec = intracell_spec(L=6, J0=0.7)
    slope = oracle.steady_branch_slope(spec)
    fd = oracle._branch_slope_fd(spec)
    assert abs(slope - fd) < 1e-5 * max(abs(slope), 1.0)


def test_verification_report_passes():
    report = oracle.run_verification(L=6, n_random=5)
    assert report["pass"]
    for key in ("exact_spectrum_vs_kblock", "gauge_identities",
                "winding_formula_vs_numeric", "steady_branch_slope"):
        assert report[key]["pass"], key
