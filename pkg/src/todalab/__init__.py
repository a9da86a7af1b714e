"""Time-stepper benchmarks for the doubly-infinite Toda lattice."""

from todalab.lattice import (
    IndexWindow,
    LatticeStateAB,
    LatticeStatePQ,
    conserved_traces,
    flaschka,
    hamiltonian,
    inverse_flaschka,
    rhs_ab,
    rhs_pq,
    toda_potential,
)
from todalab.initial_data import InitialDataKind, exact_soliton, make_id
from todalab.integrators import (
    BlowUpError,
    MethodKind,
    StepperConfig,
    integrate,
)

__all__ = [
    "BlowUpError",
    "IndexWindow",
    "InitialDataKind",
    "LatticeStateAB",
    "LatticeStatePQ",
    "MethodKind",
    "StepperConfig",
    "conserved_traces",
    "exact_soliton",
    "flaschka",
    "hamiltonian",
    "integrate",
    "inverse_flaschka",
    "make_id",
    "rhs_ab",
    "rhs_pq",
    "toda_potential",
]
