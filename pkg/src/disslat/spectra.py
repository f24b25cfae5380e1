"""Diagonalization, steady states, Liouvillian gap and spectral winding."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla

from . import superop as so
from .errors import (
    ConvergenceFailure,
    DegenerateSteadyState,
    MethodDisagreement,
    NonPositive,
    ReferenceOnSpectrum,
)
from .model import WindingResult

ZERO_TOL_FACTOR = 1e-9          # steady detection, relative to spectral radius
EIG_RESIDUAL_FACTOR = 1e-8      # eigenpair residual bound, relative to ||L||


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    right_eigenvectors: Optional[np.ndarray]
    steady_indices: np.ndarray
    gap: float
    zero_tol: float
    provenance: str = ""


def _steady_and_gap(eigenvalues, zero_tol):
    steady = np.flatnonzero(np.abs(eigenvalues) < zero_tol)
    rest = np.delete(eigenvalues, steady)
    gap = float(abs(np.max(rest.real))) if rest.size else 0.0
    return steady, gap


def diagonalize(superoperator, with_vectors=False):
    """Complete eigenvalue multiset (and optional right eigenvectors)."""
    mat = superoperator.matrix
    if not np.all(np.isfinite(mat)):
        raise ConvergenceFailure(
            f"non-finite entries in {superoperator.provenance}"
        )
    try:
        if with_vectors:
            vals, vecs = np.linalg.eig(mat)
        else:
            vals, vecs = np.linalg.eigvals(mat), None
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(
            f"eigensolver failed on {superoperator.provenance}: {exc}"
        ) from exc
    if vecs is not None:
        norm = np.linalg.norm(mat)
        resid = np.linalg.norm(mat @ vecs - vecs * vals, axis=0)
        if np.any(resid > EIG_RESIDUAL_FACTOR * max(norm, 1e-300)):
            raise ConvergenceFailure(
                f"eigenpair residual {resid.max():.3e} exceeds bound "
                f"on {superoperator.provenance}"
            )
    radius = float(np.max(np.abs(vals))) if vals.size else 0.0
    zero_tol = ZERO_TOL_FACTOR * max(radius, 1e-300)
    steady, gap = _steady_and_gap(vals, zero_tol)
    return SpectrumResult(
        eigenvalues=vals,
        right_eigenvectors=vecs,
        steady_indices=steady,
        gap=gap,
        zero_tol=zero_tol,
        provenance=superoperator.provenance,
    )


def liouvillian_gap(spectrum):
    """|Re| of the non-steady eigenvalue closest to the imaginary axis."""
    _, gap = _steady_and_gap(spectrum.eigenvalues, spectrum.zero_tol)
    return gap


def _certify_density_matrix(rho, positivity_tol=1e-8):
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho)
    if abs(tr) < 1e-300:
        raise NonPositive("steady eigenvector has zero trace")
    rho = rho / tr
    w = np.linalg.eigvalsh(rho)
    if w.min() < -positivity_tol:
        raise NonPositive(f"min eigenvalue {w.min():.3e} < -{positivity_tol}")
    return rho


def steady_state(superoperator, spectrum):
    """Unique steady state from a spectrum computed with eigenvectors."""
    if spectrum.right_eigenvectors is None:
        raise ValueError("steady_state needs a spectrum with eigenvectors")
    if len(spectrum.steady_indices) != 1:
        raise DegenerateSteadyState(
            f"{len(spectrum.steady_indices)} eigenvalues inside zero_tol "
            f"for {superoperator.provenance}"
        )
    v = spectrum.right_eigenvectors[:, spectrum.steady_indices[0]]
    rho = superoperator.index_map.unvec(v)
    return _certify_density_matrix(rho)


def steady_state_direct(superoperator, shift=None, max_iter=50, tol=1e-11):
    """Steady state by inverse power iteration on (L - shift I).

    Much cheaper than full diagonalization for large dense Liouvillians;
    cross-checked against :func:`steady_state` in the test suite.
    """
    mat = superoperator.matrix
    n = mat.shape[0]
    scale = max(np.linalg.norm(mat, ord=np.inf), 1e-300)
    if shift is None:
        shift = -1e-8 * scale
    lu = sla.lu_factor(mat - shift * np.eye(n))
    rng = np.random.default_rng(7)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        v = sla.lu_solve(lu, v)
        v /= np.linalg.norm(v)
        if np.linalg.norm(mat @ v) < tol * scale:
            break
    else:
        raise ConvergenceFailure(
            f"inverse iteration stalled at residual "
            f"{np.linalg.norm(mat @ v) / scale:.3e} "
            f"on {superoperator.provenance}"
        )
    rho = superoperator.index_map.unvec(v)
    return _certify_density_matrix(rho)


def _total_rate(spec):
    return sum(d.gamma for d in spec.dissipators)


def default_epsilon(spec):
    """Reference offset for the spectral winding, 1e-3 x sum of b-side rates
    (falls back to the a-side sum when no dissipator targets the b column)."""
    c = so._kblock_coefficients(spec, 0.0)
    base = c["B4"] if c["B4"] > 0 else c["B1"]
    return 1e-3 * base


def _winding_logdet(spec, n_K, epsilon):
    phases = np.empty(n_K)
    for j in range(n_K):
        K = 2.0 * np.pi * j / n_K
        block = so.build_kblock(spec, K)
        sign, logabs = np.linalg.slogdet(
            block.matrix + epsilon * np.eye(block.matrix.shape[0])
        )
        if sign == 0 or not np.isfinite(logabs):
            raise ReferenceOnSpectrum(
                f"det underflow at K={K:.6f} with epsilon={epsilon:.3e}"
            )
        phases[j] = np.angle(sign)
    # closed-loop phase accumulation with per-step wrapping to (-pi, pi]
    deltas = np.diff(np.concatenate([phases, phases[:1]]))
    deltas = (deltas + np.pi) % (2.0 * np.pi) - np.pi
    return float(deltas.sum() / (2.0 * np.pi))


def multiset_distance(a, b):
    """Max matched distance between two complex eigenvalue multisets."""
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise ValueError(f"multiset sizes differ: {a.size} vs {b.size}")
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def refine_clusters(eigenvalues, radius):
    """Replace each eigenvalue cluster by its arithmetic mean, repeated.

    The sum of a well-separated eigenvalue cluster is the trace of the
    associated spectral projector block, which is perturbed only at
    O(machine epsilon) even when the cluster itself is defective and the
    individual eigenvalues carry O(sqrt(epsilon)) errors.  Degenerate and
    exceptional points therefore compare cleanly after refinement.
    """
    vals = np.asarray(eigenvalues, dtype=complex)
    remaining = list(range(len(vals)))
    out = np.empty_like(vals)
    while remaining:
        seed = remaining[0]
        members = [i for i in remaining if abs(vals[i] - vals[seed]) < radius]
        mean = vals[members].mean()
        for i in members:
            out[i] = mean
        remaining = [i for i in remaining if i not in members]
    return out


def _wrapped_angle_diff(a, b):
    d = np.angle(a) - np.angle(b)
    return (d + np.pi) % (2.0 * np.pi) - np.pi


def _winding_branch(spec, n_K, epsilon):
    """Winding about -epsilon of the eigenvalue branch through 0.

    Branches are continued across the K grid by optimal assignment between
    adjacent grid points.  One K loop generally permutes the branches
    (spectral flow), so the branch through 0 is followed along its full
    permutation cycle until it closes; the accumulated phase of
    (lambda + epsilon) over the closed cycle divided by 2 pi is the winding.
    """
    from scipy.optimize import linear_sum_assignment

    trajectories = []  # list over K grid of branch-ordered eigenvalue arrays
    prev = None
    for j in range(n_K + 1):
        K = 2.0 * np.pi * j / n_K
        vals = np.linalg.eigvals(so.build_kblock(spec, K % (2 * np.pi)).matrix)
        if prev is None:
            matched = vals
        else:
            cost = np.abs(prev[:, None] - vals[None, :])
            _, cols = linear_sum_assignment(cost)
            matched = vals[cols]
        trajectories.append(matched)
        prev = matched
    traj = np.array(trajectories)            # shape (n_K+1, 4L)
    start_vals = traj[0]
    end_vals = traj[-1]                      # K = 2 pi, branch ordering
    # permutation: branch b at K=2pi coincides with branch perm[b] at K=0
    cost = np.abs(end_vals[:, None] - start_vals[None, :])
    _, perm = linear_sum_assignment(cost)

    rel = traj + epsilon
    per_loop = _wrapped_angle_diff(rel[1:], rel[:-1]).sum(axis=0)

    start = int(np.argmin(np.abs(start_vals)))
    total = 0.0
    b = start
    for _ in range(traj.shape[1]):
        total += per_loop[b]
        total += _wrapped_angle_diff(start_vals[perm[b]] + epsilon,
                                     end_vals[b] + epsilon)
        b = int(perm[b])
        if b == start:
            break
    else:
        raise ConvergenceFailure("branch permutation cycle did not close")
    return float(total / (2.0 * np.pi))


def winding_W0(spec, n_K=401, epsilon=None):
    """Liouvillian spectral winding about the reference point -epsilon.

    Computed by log-determinant phase accumulation and cross-checked by
    continuous branch tracking of the eigenvalue nearest zero; the two
    integers must agree.
    """
    if epsilon is None:
        epsilon = default_epsilon(spec)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    raw = _winding_logdet(spec, n_K, epsilon)
    value = int(round(raw))
    raw_branch = _winding_branch(spec, n_K, epsilon)
    value_branch = int(round(raw_branch))
    if value != value_branch:
        raise MethodDisagreement(
            f"LogDet gave {value} (raw {raw:.4f}) but BranchTracking gave "
            f"{value_branch} (raw {raw_branch:.4f})"
        )
    return WindingResult(
        value=value,
        raw=raw,
        residual=abs(raw - value),
        method="LogDet",
        reference_offset=float(epsilon),
    )
