"""Vectorization and Liouvillian assembly (real space and K-blocks).

Vectorization convention: a density matrix rho on n sites is flattened
row-major, vec(rho)[n_ket * dim + n_bra] = rho[n_ket, n_bra].  In this
convention

    vec(A rho B) = (A kron B^T) vec(rho),

so the Lindblad generator reads

    L = -i (H kron I - I kron H^T)
        + sum_p [ D_p kron conj(D_p)
                  - 1/2 (D_p^dag D_p) kron I
                  - 1/2 I kron (D_p^dag D_p)^T ].

Within a fixed cell pair (l, l') the four flattened sublattice combinations
appear in the order (aa, ab, ba, bb), matching the site ordering of
:mod:`disslat.model`.
"""

from dataclasses import dataclass

import numpy as np

from . import model
from .errors import BoundaryMismatch
from .model import Boundary, LatticeSpec, site_index


@dataclass(frozen=True)
class VecIndexMap:
    """Bijection between (alpha, alpha', l, l') and flat vector indices."""

    spec: LatticeSpec

    @property
    def n_sites(self):
        return self.spec.n_sites

    @property
    def dim(self):
        return self.n_sites ** 2

    def index(self, alpha, alpha_prime, l, l_prime):
        n = site_index(self.spec, alpha, l)
        n_prime = site_index(self.spec, alpha_prime, l_prime)
        return n * self.n_sites + n_prime

    def unindex(self, flat):
        if not 0 <= flat < self.dim:
            raise IndexError(f"flat index {flat} outside [0, {self.dim})")
        n, n_prime = divmod(flat, self.n_sites)
        return self._site_label(n) + self._site_label(n_prime)

    def _site_label(self, n):
        l, r = divmod(n, 2)
        alpha = "a" if r == 0 else "b"
        return (alpha, l + 1)

    def vec(self, rho):
        return np.asarray(rho, dtype=complex).reshape(-1)

    def unvec(self, v):
        n = self.n_sites
        return np.asarray(v, dtype=complex).reshape(n, n)


@dataclass(frozen=True)
class Superoperator:
    dim: int
    matrix: np.ndarray
    index_map: VecIndexMap
    provenance: str


def vec(rho):
    return np.asarray(rho, dtype=complex).reshape(-1)


def unvec(v):
    n = int(round(np.sqrt(v.size)))
    return np.asarray(v, dtype=complex).reshape(n, n)


def lindblad_matrix(H, jump_ops):
    """Dense Lindblad generator from a Hamiltonian and a list of jumps."""
    n = H.shape[0]
    eye = np.eye(n, dtype=complex)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for D in jump_ops:
        DdD = D.conj().T @ D
        L += np.kron(D, D.conj())
        L -= 0.5 * np.kron(DdD, eye)
        L -= 0.5 * np.kron(eye, DdD.T)
    return L


def build_liouvillian_real(spec):
    """Full real-space Liouvillian for a single particle."""
    H = model.build_hamiltonian(spec)
    jumps = model.build_jump_operators(spec)
    L = lindblad_matrix(H, jumps)
    return Superoperator(
        dim=L.shape[0],
        matrix=L,
        index_map=VecIndexMap(spec),
        provenance=f"RealSpace({spec.boundary.value})",
    )


@dataclass(frozen=True)
class KBlock:
    """One momentum-difference block of the PBC Liouvillian.

    The 4L x 4L matrix is diag[M_1, ..., M_L] + N_L kron M_0, where N_L is
    the all-ones matrix and the n-th cell carries k_n = 2 pi n / L and
    k_n' = K + k_n.  Basis order within a cell: (aa, ab, ba, bb).
    """

    K: float
    L: int
    blocks: tuple          # M_1 ... M_L, each 4x4
    M0: np.ndarray
    matrix: np.ndarray
    coefficients: dict


def _kblock_coefficients(spec, K):
    L = spec.L
    g_aa = spec.gamma("a", "a")
    g_ab = spec.gamma("a", "b")
    g_ba = spec.gamma("b", "a")
    g_bb = spec.gamma("b", "b")

    def a_coeff(g):
        return sum(gam * np.exp(1j * K * s) for s, gam in g.items()) / L

    A11, A14 = a_coeff(g_aa), a_coeff(g_ab)
    A41, A44 = a_coeff(g_ba), a_coeff(g_bb)
    B1 = sum(g_aa.values()) + sum(g_ba.values())
    B4 = sum(g_ab.values()) + sum(g_bb.values())
    return {"A11": A11, "A14": A14, "A41": A41, "A44": A44,
            "B1": B1, "B4": B4}


def kblock_cell_matrix(spec, K, n):
    """The 4x4 matrix M_n at k_n = 2 pi n / L, k_n' = K + k_n."""
    L = spec.L
    k_n = 2.0 * np.pi * n / L
    k_np = K + k_n
    C = sum(J * np.exp(-1j * s * k_n) for s, J in spec.hoppings.items())
    D = sum(J * np.exp(-1j * s * k_np) for s, J in spec.hoppings.items())
    c = _kblock_coefficients(spec, K)
    B1, B4 = c["B1"], c["B4"]
    return np.array(
        [
            [-B1, 1j * np.conj(D), -1j * C, 0.0],
            [1j * D, -(B1 + B4) / 2.0, 0.0, -1j * C],
            [-1j * np.conj(C), 0.0, -(B1 + B4) / 2.0, 1j * np.conj(D)],
            [0.0, -1j * np.conj(C), 1j * D, -B4],
        ],
        dtype=complex,
    )


def kblock_m0(spec, K):
    c = _kblock_coefficients(spec, K)
    M0 = np.zeros((4, 4), dtype=complex)
    M0[0, 0] = c["A11"]
    M0[0, 3] = c["A14"]
    M0[3, 0] = c["A41"]
    M0[3, 3] = c["A44"]
    return M0


def build_kblock(spec, K):
    """Assemble the Liouvillian K-block; PBC only."""
    model.validate(spec)
    if spec.boundary is not Boundary.PBC:
        raise BoundaryMismatch(
            f"K-blocks require PBC, got {spec.boundary.value}"
        )
    L = spec.L
    blocks = tuple(kblock_cell_matrix(spec, K, n) for n in range(1, L + 1))
    M0 = kblock_m0(spec, K)
    mat = np.zeros((4 * L, 4 * L), dtype=complex)
    for i, Mn in enumerate(blocks):
        mat[4 * i : 4 * i + 4, 4 * i : 4 * i + 4] = Mn
    mat += np.kron(np.ones((L, L)), M0)
    return KBlock(
        K=float(K),
        L=L,
        blocks=blocks,
        M0=M0,
        matrix=mat,
        coefficients=_kblock_coefficients(spec, K),
    )


def kblock_superoperator(block):
    """Wrap a KBlock as a Superoperator for the spectral routines."""
    return Superoperator(
        dim=block.matrix.shape[0],
        matrix=block.matrix,
        index_map=None,
        provenance=f"KBlock(K={block.K:.6g}, L={block.L})",
    )


def kblock_sweep(spec, n_K):
    """K-blocks on the uniform grid K_j = 2 pi j / n_K, j = 0..n_K-1."""
    if n_K < 4:
        raise ValueError(f"n_K must be >= 4, got {n_K}")
    return [build_kblock(spec, 2.0 * np.pi * j / n_K) for j in range(n_K)]


def physical_k_values(L):
    """The K values at which K-blocks tile the PBC real-space spectrum."""
    return [2.0 * np.pi * m / L for m in range(L)]


def write_matrix(superop, path):
    """Text export: header with dim/provenance, then row-major re/im pairs."""
    with open(path, "w") as fh:
        fh.write(f"# dim {superop.dim}\n")
        fh.write(f"# provenance {superop.provenance}\n")
        for row in superop.matrix:
            fh.write(" ".join(f"{float(z.real)!r} {float(z.imag)!r}"
                              for z in row))
            fh.write("\n")


def read_matrix(path):
    """Inverse of :func:`write_matrix`; returns (matrix, provenance)."""
    with open(path) as fh:
        dim_line = fh.readline().split()
        dim = int(dim_line[2])
        provenance = fh.readline().split(maxsplit=2)[2].strip()
        data = np.loadtxt(fh)
    data = data.reshape(dim, 2 * dim)
    return data[:, 0::2] + 1j * data[:, 1::2], provenance
