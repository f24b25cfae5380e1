"""Named parameter bundles for the standard figure-style runs."""

from dataclasses import dataclass, field

import numpy as np

from .model import Boundary, Dissipator, LatticeSpec


def ssh_spec(L=20, J0=0.5, J1=1.0, gamma0=1.2, gamma1=1.2,
             boundary=Boundary.OBC):
    """Nearest-neighbor two-band lattice with a<-b dissipation."""
    return LatticeSpec(
        L=L,
        hoppings={0: J0, 1: J1},
        dissipators=(Dissipator("a", "b", 0, gamma0),
                     Dissipator("a", "b", 1, gamma1)),
        boundary=boundary,
    )


def chiral_asymmetric_spec(L=20, J0=0.6, J1=1.0, gamma_aa=2.25,
                           gamma_bb=1.2, boundary=Boundary.OBC):
    """Diagonal (symmetry-breaking) dissipation: a<-a at range 1 and
    b<-b at range -1."""
    return LatticeSpec(
        L=L,
        hoppings={0: J0, 1: J1},
        dissipators=(Dissipator("a", "a", 1, gamma_aa),
                     Dissipator("b", "b", -1, gamma_bb)),
        boundary=boundary,
    )


def longer_range_spec(L=20, J0=0.5, J1_plus=1.0, J1_minus=0.5,
                      gamma0=1.2, gamma1=1.2, boundary=Boundary.OBC):
    """Three-harmonic hopping (s = -1, 0, 1) with a<-b dissipation."""
    return LatticeSpec(
        L=L,
        hoppings={0: J0, 1: J1_plus, -1: J1_minus},
        dissipators=(Dissipator("a", "b", 0, gamma0),
                     Dissipator("a", "b", 1, gamma1)),
        boundary=boundary,
    )


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    base_spec: LatticeSpec
    sweep_path: str = "hoppings.0"
    sweep_values: tuple = ()
    snapshots: tuple = ()        # values of sweep_path for spectra/steady runs
    extra: dict = field(default_factory=dict)


def _grid(lo, hi, n, log=False):
    vals = np.logspace(np.log10(lo), np.log10(hi), n) if log else \
        np.linspace(lo, hi, n)
    return tuple(float(v) for v in vals)


PRESETS = {
    "fig2": Preset(
        name="fig2",
        description="Winding transition, gap closing and boundary "
                    "localization versus the intracell hopping",
        base_spec=ssh_spec(L=20),
        sweep_values=_grid(0.2, 2.0, 41),
        snapshots=(0.5, 2.0),
        extra={"dynamics_t_final": 20.0, "gap_sizes": (8, 12, 16, 20)},
    ),
    "fig3": Preset(
        name="fig3",
        description="Steady-state position and coherence length over the "
                    "(hopping, competing rate) plane, with the edge-defect "
                    "comparison",
        base_spec=ssh_spec(L=20, J0=1.0, J1=2.0, gamma0=2.0, gamma1=1.0),
        sweep_values=_grid(0.2, 20.0, 9, log=True),
        snapshots=(),
        extra={
            "axis2_path": "dissipators[1].gamma",
            "axis2_values": _grid(0.1, 10.0 ** 1.5, 11, log=True),
            "defect_gamma1": _grid(0.1, 10.0 ** 1.5, 11, log=True),
        },
    ),
    "fig4": Preset(
        name="fig4",
        description="Symmetry-breaking diagonal dissipation: localization "
                    "direction decoupled from the band winding",
        base_spec=chiral_asymmetric_spec(L=20),
        sweep_values=_grid(0.2, 2.0, 21),
        snapshots=(0.6, 1.4),
    ),
    "figS1": Preset(
        name="figS1",
        description="Longer-range hopping: transition shifted away from "
                    "equal nearest-neighbor amplitudes",
        base_spec=longer_range_spec(L=20),
        sweep_values=_grid(0.2, 2.5, 24),
        snapshots=(0.5, 2.5),
    ),
    "figS2": Preset(
        name="figS2",
        description="Two hard-core bosons: reduced steady state and its "
                    "average position versus the intracell hopping",
        base_spec=ssh_spec(L=8),
        sweep_values=_grid(0.2, 2.0, 10),
        snapshots=(0.5, 2.0),
        extra={"twobody": True},
    ),
}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {sorted(PRESETS)}"
        )
