"""Exception types shared across the package."""


class DisslatError(Exception):
    """Base class for all package errors."""


class InvalidSpec(DisslatError):
    """Lattice specification violates a structural invariant."""


class GapClosed(DisslatError):
    """Band winding undefined: |h(k)| touches zero on the sampled grid."""


class BoundaryMismatch(DisslatError):
    """Operation requires a different boundary condition."""


class ConvergenceFailure(DisslatError):
    """Eigensolver or iterative solver failed to converge."""


class DegenerateSteadyState(DisslatError):
    """More than one eigenvalue inside the steady-state tolerance."""


class NonPositive(DisslatError):
    """Density-matrix positivity certification failed."""


class ReferenceOnSpectrum(DisslatError):
    """Winding reference point sits (numerically) on the spectrum."""


class MethodDisagreement(DisslatError):
    """Independent winding methods returned different integers."""


class DegenerateParameters(DisslatError):
    """Closed-form solution not valid for these parameters."""


class UnsupportedFamily(DisslatError):
    """Spec falls outside the analytically solved families."""


class StepInstability(DisslatError):
    """Time integration lost trace or positivity beyond tolerance."""


class InvalidInitialState(DisslatError):
    """Initial density matrix is not Hermitian / trace-1 / PSD."""


class SiteOutOfRange(DisslatError):
    """Requested site does not exist on the lattice."""


class DimensionTooLarge(DisslatError):
    """Dense assembly would exceed the configured memory budget."""


class UnknownPath(DisslatError):
    """Parameter path does not resolve against the lattice spec."""
