"""Skin-effect diagnostics: average position, coherence profile, coherence
length."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

C1_FLOOR = 1e-12


def system_center(n_sites):
    """Center n_0 of the site ladder; (1+2L)/2 for full lattices and L for
    the odd edge-defect lattice -- both equal (n_sites + 1)/2."""
    return 0.5 * (n_sites + 1)


def average_position(rho, n_0=None):
    """n_bar = sum_n (n - n_0) rho_nn with 1-based site index n."""
    rho = np.asarray(rho)
    n = rho.shape[0]
    if n_0 is None:
        n_0 = system_center(n)
    sites = np.arange(1, n + 1)
    return float(np.real((sites - n_0) @ rho.diagonal()))


def normalized_average_position(rho):
    """n_bar scaled by its extreme value (L - 0.5 on a full lattice)."""
    rho = np.asarray(rho)
    n = rho.shape[0]
    n_0 = system_center(n)
    return average_position(rho, n_0) / (n - n_0)


@dataclass
class CoherenceResult:
    profile: np.ndarray            # C(d), complex, d = 0..d_max
    xi_c: Optional[float]          # None when undefined (|C(1)| >= |C(0)|)
    n_bar: float
    n_0: float


def _cell_block_sum(rho, d, L, has_defect):
    """sum_l sum_{alpha,alpha'} <alpha,l| rho |alpha',l+d>, truncated at the
    open boundary; the edge-defect lattice simply lacks the (b,L) row/col."""
    total = 0.0 + 0.0j
    n = rho.shape[0]
    for l in range(1, L - d + 1):
        for da in (0, 1):
            i = 2 * (l - 1) + da
            if i >= n:
                continue
            for db in (0, 1):
                j = 2 * (l + d - 1) + db
                if j >= n:
                    continue
                total += rho[i, j]
    return total


def coherence_profile(rho, d_max):
    """Distance-resolved coherence C(d) and the two-point length xi_c.

    xi_c = 1 / ln(|C(0)|/|C(1)|); flagged None when |C(1)| >= |C(0)| and
    clamped to 0 when C(1) is below the floor tolerance.
    """
    rho = np.asarray(rho, dtype=complex)
    n = rho.shape[0]
    L = (n + 1) // 2
    has_defect = n % 2 == 1
    if d_max >= L:
        raise ValueError(f"d_max must be < L = {L}")
    profile = np.array(
        [_cell_block_sum(rho, d, L, has_defect) for d in range(d_max + 1)]
    )
    if d_max < 1:
        xi_c = None
    else:
        c0, c1 = abs(profile[0]), abs(profile[1])
        if c1 < C1_FLOOR:
            xi_c = 0.0
        elif c1 >= c0:
            xi_c = None
        else:
            xi_c = 1.0 / np.log(c0 / c1)
    n_0 = system_center(n)
    return CoherenceResult(
        profile=profile,
        xi_c=xi_c,
        n_bar=average_position(rho, n_0),
        n_0=n_0,
    )
