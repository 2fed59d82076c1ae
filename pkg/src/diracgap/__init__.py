"""Eigenvalues in the spectral gap of Dirac-Coulomb operators.

The gap levels of the radial operator in each angular sector are computed
from a reduced quadratic form in the upper component alone: the lower
component is eliminated analytically, the reduced form is discretized with
hat functions on a graded radial mesh, and each level is the unique energy
where the k-th eigenvalue of the resulting tridiagonal pencil crosses zero.
The construction is variationally one-sided, so it cannot pollute the gap
with spurious eigenvalues; `verify.pollution_demo` shows what the naive
equal-basis discretization does instead.

An independent ODE shooting oracle (`shooting`) and a property-check suite
(`verify`) ship alongside the solver; the `dirac-gap` CLI fronts all of it.
"""

from ._backend import BACKEND
from .model import (
    Admissibility,
    GapWindow,
    PotentialSpec,
    Sector,
    SpaceDim,
    check_admissible,
    enumerate_sectors,
    evaluate_potential,
    gap_window,
    indicial_exponent,
    make_sector,
    sector_degeneracy,
    sup_potential,
)
from .mesh import RadialMesh, TrialBasis, build_mesh
from .forms import (
    AssembledForms,
    AssemblyError,
    assemble,
    build_quadrature,
    form_value,
    tridiag_dense,
)
from .solver import (
    BracketError,
    ConvergenceError,
    MinMaxLevel,
    SolverError,
    SpectrumReport,
    inertia_negcount,
    level_root,
    pencil_eig_k,
    recover_lower,
    spectrum,
)
from .shooting import (
    OracleLevel,
    ShootingConfig,
    decaying_start,
    fine_structure,
    levels_csv,
    oracle_levels,
    regular_start,
    wronskian,
)
from .verify import (
    PollutionReport,
    TrialFamily,
    hardy_check,
    pollution_demo,
    qshift_identity_check,
    sos_identity_check,
    suite,
    truncation_convergence,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Admissibility",
    "AssembledForms",
    "AssemblyError",
    "BracketError",
    "ConvergenceError",
    "GapWindow",
    "MinMaxLevel",
    "OracleLevel",
    "PollutionReport",
    "PotentialSpec",
    "RadialMesh",
    "Sector",
    "ShootingConfig",
    "SolverError",
    "SpaceDim",
    "SpectrumReport",
    "TrialBasis",
    "TrialFamily",
    "assemble",
    "build_mesh",
    "build_quadrature",
    "check_admissible",
    "decaying_start",
    "enumerate_sectors",
    "evaluate_potential",
    "fine_structure",
    "form_value",
    "gap_window",
    "hardy_check",
    "indicial_exponent",
    "inertia_negcount",
    "level_root",
    "levels_csv",
    "make_sector",
    "oracle_levels",
    "pencil_eig_k",
    "pollution_demo",
    "qshift_identity_check",
    "recover_lower",
    "sector_degeneracy",
    "sos_identity_check",
    "spectrum",
    "suite",
    "sup_potential",
    "tridiag_dense",
    "truncation_convergence",
    "wronskian",
]
