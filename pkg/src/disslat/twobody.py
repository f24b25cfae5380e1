"""Two hard-core bosons: pair basis, projected operators, Liouvillian,
steady state and the single-particle reduced density matrix."""

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import model
from .errors import (
    ConvergenceFailure,
    DegenerateSteadyState,
    DimensionTooLarge,
    NonPositive,
    UnsupportedFamily,
)
from .superop import Superoperator

DENSE_BUDGET_BYTES = 2_000_000_000


@dataclass(frozen=True)
class TwoBodyBasis:
    """Pairs (n1, n2) with n1 < n2 in the global site order; double
    occupancy is excluded by construction."""

    n_sites: int

    @property
    def pairs(self):
        return list(combinations(range(self.n_sites), 2))

    @property
    def dim(self):
        return self.n_sites * (self.n_sites - 1) // 2

    def index(self, n1, n2):
        if n1 == n2:
            raise ValueError("doubly occupied state excluded")
        if n1 > n2:
            n1, n2 = n2, n1
        # pairs in lexicographic order of (n1, n2)
        N = self.n_sites
        return n1 * N - n1 * (n1 + 1) // 2 + (n2 - n1 - 1)


def _check_ssh_family(spec):
    ok_hop = set(spec.hoppings) <= {0, 1}
    ok_diss = all(
        d.alpha == "a" and d.alpha_prime == "b" and d.s in (0, 1)
        for d in spec.dissipators
    )
    if not (ok_hop and ok_diss):
        raise UnsupportedFamily(
            "two-body pipeline covers the nearest-neighbor model with "
            "a<-b dissipation only"
        )


def two_body_operator(op1, basis):
    """Lift a single-particle operator to the symmetric hard-core pair basis.

    O^(2) = P (O kron I + I kron O) P; matrix elements follow from acting
    with O on either occupied site, dropping double occupancy.
    """
    op1 = np.asarray(op1)
    N = basis.n_sites
    rows, cols, vals = [], [], []
    nz = [np.flatnonzero(op1[:, n]) for n in range(N)]
    for p, (n1, n2) in enumerate(basis.pairs):
        for keep, act in ((n2, n1), (n1, n2)):
            for m in nz[act]:
                if m == keep:
                    continue  # projected out: double occupancy
                rows.append(basis.index(int(m), keep))
                cols.append(p)
                vals.append(op1[m, act])
    return sp.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim),
                         dtype=complex)


def build_twobody_liouvillian(spec, sparse=True,
                              dense_budget=DENSE_BUDGET_BYTES):
    """Lindblad generator on the two-body pair basis.

    Sparse by default; dense assembly refuses to exceed the memory budget.
    """
    _check_ssh_family(spec)
    basis = TwoBodyBasis(spec.n_sites)
    d2 = basis.dim
    dim = d2 * d2
    if not sparse and dim * dim * 16 > dense_budget:
        raise DimensionTooLarge(
            f"dense two-body Liouvillian needs {dim * dim * 16 / 1e9:.1f} GB;"
            " use sparse mode"
        )
    H2 = two_body_operator(model.build_hamiltonian(spec), basis)
    eye = sp.identity(d2, dtype=complex, format="csr")
    L = -1j * (sp.kron(H2, eye) - sp.kron(eye, H2.T))
    for D1 in model.build_jump_operators(spec):
        D2 = two_body_operator(D1, basis)
        DdD = (D2.conj().T @ D2).tocsr()
        L = L + sp.kron(D2, D2.conj())
        L = L - 0.5 * sp.kron(DdD, eye)
        L = L - 0.5 * sp.kron(eye, DdD.T)
    L = L.tocsr()
    if not sparse:
        L = L.toarray()
    return Superoperator(
        dim=dim,
        matrix=L,
        index_map=None,
        provenance=f"TwoBody(L={spec.L}, {spec.boundary.value}, "
                   f"{'sparse' if sparse else 'dense'})",
    ), basis


def _certify(rho, positivity_tol=1e-8):
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho)
    w = np.linalg.eigvalsh(rho)
    if w.min() < -positivity_tol:
        raise NonPositive(f"min eigenvalue {w.min():.3e}")
    return rho


def twobody_steady_state(superoperator, mode="SparseNull", shift=-1e-3,
                         max_iter=200, tol=1e-9):
    """Two-body steady state, by dense diagonalization or by inverse power
    iteration on the sparse generator with a small negative shift."""
    mat = superoperator.matrix
    d2 = int(round(np.sqrt(superoperator.dim)))
    if mode == "DenseEig":
        dense = mat.toarray() if sp.issparse(mat) else mat
        vals, vecs = np.linalg.eig(dense)
        zero_tol = 1e-9 * np.abs(vals).max()
        steady = np.flatnonzero(np.abs(vals) < zero_tol)
        if len(steady) != 1:
            raise DegenerateSteadyState(
                f"{len(steady)} near-zero eigenvalues in "
                f"{superoperator.provenance}"
            )
        v = vecs[:, steady[0]]
    elif mode == "SparseNull":
        A = sp.csc_matrix(mat) if not sp.issparse(mat) else mat.tocsc()
        solver = spla.splu(A - shift * sp.identity(A.shape[0], format="csc"))
        rng = np.random.default_rng(11)
        v = rng.standard_normal(A.shape[0]) + 1j * rng.standard_normal(
            A.shape[0])
        v /= np.linalg.norm(v)
        scale = spla.norm(sp.csr_matrix(mat), ord=np.inf) if sp.issparse(
            mat) else np.linalg.norm(mat, ord=np.inf)
        for _ in range(max_iter):
            v = solver.solve(v)
            v /= np.linalg.norm(v)
            if np.linalg.norm(mat @ v) / scale < tol:
                break
        else:
            raise ConvergenceFailure(
                "inverse power iteration did not reach the residual target "
                f"on {superoperator.provenance}"
            )
    else:
        raise ValueError(f"unknown mode {mode!r}")
    rho2 = v.reshape(d2, d2)
    return _certify(rho2)


def reduce_to_single_particle(rho2, basis):
    """rho1[m, n] = Tr(rho2 c_n^dag c_m); trace equals the particle number."""
    N = basis.n_sites
    pairs = basis.pairs
    rho1 = np.zeros((N, N), dtype=complex)
    for p, (n1, n2) in enumerate(pairs):
        for m, spectator in ((n1, n2), (n2, n1)):
            # diagonal: number operator
            rho1[m, m] += rho2[p, p]
            for n in range(N):
                if n == m or n == spectator:
                    continue
                q = basis.index(n, spectator)
                rho1[m, n] += rho2[q, p]
    return rho1
