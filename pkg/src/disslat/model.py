"""Lattice specification, single-particle Hamiltonian and band topology.

Site ordering convention used everywhere downstream: the sublattice-a site of
unit cell l sits at n = 2l-1 and the sublattice-b site at n = 2l (1-based n,
l = 1..L).  Internally arrays are 0-based, so (a,l) -> 2(l-1) and
(b,l) -> 2(l-1)+1.
"""

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import GapClosed, InvalidSpec, SiteOutOfRange


class Boundary(str, Enum):
    PBC = "PBC"
    OBC = "OBC"
    OBC_EDGE_DEFECT = "OBC_EdgeDefect"


@dataclass(frozen=True)
class Dissipator:
    """One family of jump operators sqrt(gamma)|alpha,l+s><alpha_prime,l|."""

    alpha: str
    alpha_prime: str
    s: int
    gamma: float

    def is_chiral(self):
        return self.alpha != self.alpha_prime


@dataclass(frozen=True)
class LatticeSpec:
    """Complete physical description of a dissipative two-band chain."""

    L: int
    hoppings: dict = field(default_factory=dict)       # s -> complex J_s
    dissipators: tuple = ()                            # tuple of Dissipator
    boundary: Boundary = Boundary.PBC

    def __post_init__(self):
        object.__setattr__(self, "hoppings", dict(self.hoppings))
        diss = tuple(
            d if isinstance(d, Dissipator) else Dissipator(*d)
            for d in self.dissipators
        )
        object.__setattr__(self, "dissipators", diss)
        try:
            object.__setattr__(self, "boundary", Boundary(self.boundary))
        except ValueError:
            raise InvalidSpec(f"unknown boundary {self.boundary!r}") from None
        validate(self)

    def with_hopping(self, s, value):
        hop = dict(self.hoppings)
        hop[int(s)] = value
        return replace(self, hoppings=hop)

    def gamma(self, alpha, alpha_prime):
        """Rates {s: gamma} for the given sublattice pair."""
        out = {}
        for d in self.dissipators:
            if d.alpha == alpha and d.alpha_prime == alpha_prime:
                out[d.s] = out.get(d.s, 0.0) + d.gamma
        return out

    @property
    def n_sites(self):
        if self.boundary is Boundary.OBC_EDGE_DEFECT:
            return 2 * self.L - 1
        return 2 * self.L


def validate(spec):
    if spec.L < 2:
        raise InvalidSpec(f"need L >= 2, got L={spec.L}")
    for s in spec.hoppings:
        if abs(int(s)) >= spec.L:
            raise InvalidSpec(f"hopping range |s|={abs(s)} must be < L={spec.L}")
    if not any(abs(J) > 0 for J in spec.hoppings.values()):
        raise InvalidSpec("at least one hopping amplitude must be nonzero")
    if not spec.dissipators:
        raise InvalidSpec("at least one dissipator is required")
    for d in spec.dissipators:
        if d.alpha not in ("a", "b") or d.alpha_prime not in ("a", "b"):
            raise InvalidSpec(f"bad sublattice labels in {d}")
        if abs(d.s) >= spec.L:
            raise InvalidSpec(f"dissipator range |s|={abs(d.s)} must be < L={spec.L}")
        if d.gamma < 0:
            raise InvalidSpec(f"negative rate gamma={d.gamma}")
    if not any(d.gamma > 0 for d in spec.dissipators):
        raise InvalidSpec("at least one dissipator rate must be nonzero")


def site_index(spec, alpha, l):
    """0-based index of site (alpha, l); l is 1-based."""
    if not 1 <= l <= spec.L or alpha not in ("a", "b"):
        raise SiteOutOfRange(f"site ({alpha},{l}) outside lattice L={spec.L}")
    if (
        spec.boundary is Boundary.OBC_EDGE_DEFECT
        and alpha == "b"
        and l == spec.L
    ):
        raise SiteOutOfRange("site (b,L) removed by the edge defect")
    return 2 * (l - 1) + (0 if alpha == "a" else 1)


def _resolve_cell(spec, l):
    """Map a (possibly out-of-range) cell index to 1..L, or None if dropped."""
    if spec.boundary is Boundary.PBC:
        return (l - 1) % spec.L + 1
    if 1 <= l <= spec.L:
        return l
    return None


def _place(spec, H, alpha_to, l_to, alpha_from, l_from, amplitude):
    """Add amplitude |alpha_to,l_to><alpha_from,l_from| + h.c., with boundary
    truncation; silently drops terms touching the removed defect site."""
    lt = _resolve_cell(spec, l_to)
    lf = _resolve_cell(spec, l_from)
    if lt is None or lf is None:
        return
    try:
        i = site_index(spec, alpha_to, lt)
        j = site_index(spec, alpha_from, lf)
    except SiteOutOfRange:
        return
    H[i, j] += amplitude
    H[j, i] += np.conj(amplitude)


def build_hamiltonian(spec):
    """Dense single-particle Hamiltonian in the fixed site ordering."""
    validate(spec)
    H = np.zeros((spec.n_sites, spec.n_sites), dtype=complex)
    for s, J in spec.hoppings.items():
        if J == 0:
            continue
        for l in range(1, spec.L + 1):
            _place(spec, H, "a", l + s, "b", l, J)
    return H


def build_jump_operators(spec):
    """All jump operators sqrt(gamma)|alpha,l+s><alpha',l| as dense matrices.

    Under OBC the out-of-range terms are dropped; the edge defect additionally
    drops every operator touching (b, L).
    """
    validate(spec)
    n = spec.n_sites
    ops = []
    for d in spec.dissipators:
        if d.gamma == 0:
            continue
        amp = np.sqrt(d.gamma)
        for l in range(1, spec.L + 1):
            lt = _resolve_cell(spec, l + d.s)
            if lt is None:
                continue
            try:
                i = site_index(spec, d.alpha, lt)
                j = site_index(spec, d.alpha_prime, l)
            except SiteOutOfRange:
                continue
            D = np.zeros((n, n), dtype=complex)
            D[i, j] = amp
            ops.append(D)
    return ops


def sigma_z(spec):
    """Sublattice parity: +1 on a sites, -1 on b sites."""
    diag = np.empty(spec.n_sites)
    diag[0::2] = 1.0
    diag[1::2] = -1.0
    return np.diag(diag)


def classify_symmetry(spec):
    """Chirality of the Hamiltonian (always holds for this model family)
    and of the dissipator set (alpha != alpha' for every jump)."""
    validate(spec)
    return {
        "hamiltonian_chiral": True,
        "dissipators_chiral": all(d.is_chiral() for d in spec.dissipators),
    }


def bloch_h(spec):
    """Off-diagonal Bloch component h(k) = sum_s J_s exp(i s k)."""
    items = [(s, J) for s, J in spec.hoppings.items() if J != 0]

    def h(k):
        k = np.asarray(k, dtype=float)
        return sum(J * np.exp(1j * s * k) for s, J in items)

    return h


def bloch_hamiltonian(spec):
    """2x2 Bloch matrix [[0, h*],[h, 0]] as a function of k."""
    h = bloch_h(spec)

    def H(k):
        hk = complex(h(k))
        return np.array([[0.0, np.conj(hk)], [hk, 0.0]])

    return H


@dataclass(frozen=True)
class WindingResult:
    value: int
    raw: float
    residual: float
    method: str
    reference_offset: float = 0.0


def winding_WH(spec, n_k=256, gap_tol=None):
    """Band winding number of h(k) over the Brillouin zone.

    Phase-unwraps arg h on a uniform k grid (closed loop) and rounds the
    accumulated phase / 2pi.  Raises GapClosed at the topological transition.
    """
    validate(spec)
    if n_k < 64:
        raise ValueError(f"n_k must be >= 64, got {n_k}")
    if gap_tol is None:
        gap_tol = 1e-8 * max(abs(J) for J in spec.hoppings.values())
    k = np.linspace(0.0, 2.0 * np.pi, n_k + 1)
    hk = bloch_h(spec)(k)
    if np.min(np.abs(hk)) <= gap_tol:
        raise GapClosed(
            f"min |h(k)| = {np.min(np.abs(hk)):.3e} <= gap_tol = {gap_tol:.3e}"
        )
    phase = np.unwrap(np.angle(hk))
    raw = (phase[-1] - phase[0]) / (2.0 * np.pi)
    value = int(round(raw))
    return WindingResult(value=value, raw=raw, residual=abs(raw - value),
                         method="PhaseUnwrap")
