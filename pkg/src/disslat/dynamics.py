"""Time integration of the master equation on the vectorized density matrix."""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import model, superop as so
from .errors import InvalidInitialState, SiteOutOfRange, StepInstability

TRACE_DRIFT_ABORT = 1e-6
POSITIVITY_MONITOR = 1e-8


@dataclass
class TrajectoryResult:
    times: np.ndarray
    populations: np.ndarray        # (n_times, n_sites), real
    mean_position: np.ndarray      # <n> = sum_n n rho_nn with 1-based n
    trace_drift: float
    final_rho: np.ndarray
    method: str
    metadata: dict = field(default_factory=dict)


def make_initial_state(spec, site):
    """Pure projector |alpha,l><alpha,l| on the site basis."""
    alpha, l = site
    idx = model.site_index(spec, alpha, l)  # raises SiteOutOfRange
    rho = np.zeros((spec.n_sites, spec.n_sites), dtype=complex)
    rho[idx, idx] = 1.0
    return rho


def center_initial_state(spec):
    """The |a, L/2> projector used for dynamics runs; floor(L/2) for odd L."""
    l = spec.L // 2
    return make_initial_state(spec, ("a", l)), {"initial_cell": l}


def _check_initial(rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidInitialState("initial state must be a square matrix")
    if np.abs(rho - rho.conj().T).max() > 1e-10:
        raise InvalidInitialState("initial state not Hermitian")
    if abs(np.trace(rho) - 1.0) > 1e-10:
        raise InvalidInitialState("initial state trace != 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -1e-10:
        raise InvalidInitialState("initial state not positive semidefinite")
    return rho


def evolve_matrix(L_mat, rho_init, t_final, dt=1e-3, method="RK4",
                  record_dt=0.1, metadata=None):
    """Integrate d vec(rho)/dt = L vec(rho) and record site populations.

    RK4 takes classical fourth-order steps of size dt; Exponential applies
    expm(L * record_dt) once per output stride (scaling and squaring).
    Trace drift beyond the abort threshold or a population below the
    positivity monitor raises StepInstability.
    """
    rho = _check_initial(rho_init)
    n = rho.shape[0]
    v = rho.reshape(-1)

    n_records = max(1, int(round(t_final / record_dt)))
    record_dt = t_final / n_records
    times = np.linspace(0.0, t_final, n_records + 1)

    if method == "Exponential":
        propagator = sla.expm(L_mat * record_dt)
        stepper = None
    elif method == "RK4":
        steps_per_record = max(1, int(round(record_dt / dt)))
        h = record_dt / steps_per_record

        def stepper(v):
            for _ in range(steps_per_record):
                k1 = L_mat @ v
                k2 = L_mat @ (v + 0.5 * h * k1)
                k3 = L_mat @ (v + 0.5 * h * k2)
                k4 = L_mat @ (v + h * k3)
                v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            return v
    else:
        raise ValueError(f"unknown method {method!r}")

    sites = np.arange(1, n + 1)
    populations = np.empty((n_records + 1, n))
    mean_position = np.empty(n_records + 1)
    max_drift = 0.0
    for i, t in enumerate(times):
        if i > 0:
            v = propagator @ v if stepper is None else stepper(v)
        rho_t = v.reshape(n, n)
        pops = rho_t.diagonal().real
        drift = abs(np.trace(rho_t) - 1.0)
        max_drift = max(max_drift, drift)
        if drift > TRACE_DRIFT_ABORT:
            raise StepInstability(
                f"trace drift {drift:.3e} at t={t:.4f}; reduce dt"
            )
        if pops.min() < -POSITIVITY_MONITOR:
            raise StepInstability(
                f"population {pops.min():.3e} at t={t:.4f}; reduce dt"
            )
        populations[i] = pops
        mean_position[i] = float(sites @ pops)
    return TrajectoryResult(
        times=times,
        populations=populations,
        mean_position=mean_position,
        trace_drift=max_drift,
        final_rho=v.reshape(n, n),
        method=method,
        metadata=dict(metadata or {}),
    )


def evolve(spec, rho_init, t_final, dt=1e-3, method="RK4", record_dt=0.1):
    """Master-equation trajectory for a lattice spec."""
    L_mat = so.build_liouvillian_real(spec).matrix
    return evolve_matrix(L_mat, rho_init, t_final, dt=dt, method=method,
                         record_dt=record_dt,
                         metadata={"boundary": spec.boundary.value,
                                   "L": spec.L})
