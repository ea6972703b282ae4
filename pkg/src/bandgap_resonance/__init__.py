"""Resonant interaction between entangled atoms near a photonic band edge."""

__version__ = "0.1.0"

from .band_structure import (
    BandStructure,
    CrystalSpec,
    band_edges,
    band_structure,
    dispersion,
    dispersion_em,
    dos,
    effective_mass,
)
from .electronic import (
    WireModel,
    electron_dispersion,
    electronic_force,
    electronic_pole_integral,
    kappa0,
    solve_electronic_pole,
)
from .errors import (
    BandgapResonanceError,
    ConvergenceError,
    DomainError,
    FarZoneWarning,
    SingularityError,
    UnsupportedGapError,
)
from .forces import (
    ForceResult,
    dipole_tensor,
    energy_shift_1d,
    energy_shift_3d,
    enhancement_ratio,
    evaluate,
    force_1d,
    force_3d,
    inferred_linewidth_1d,
    vacuum_energy_shift,
    vacuum_force,
)
from .quadrature import PVProblem, QuadResult, pv_quadrature
from .resolvent import AtomPairConfig, PoleSolution, pole_integral_1d, pole_integral_3d, solve_pole
from .special_functions import f_aux, intermediate_state_integrals, sine_cosine_integrals

__all__ = [
    "AtomPairConfig",
    "BandStructure",
    "BandgapResonanceError",
    "ConvergenceError",
    "CrystalSpec",
    "DomainError",
    "FarZoneWarning",
    "ForceResult",
    "PVProblem",
    "PoleSolution",
    "QuadResult",
    "SingularityError",
    "UnsupportedGapError",
    "WireModel",
    "band_edges",
    "band_structure",
    "dipole_tensor",
    "dispersion",
    "dispersion_em",
    "dos",
    "effective_mass",
    "electron_dispersion",
    "electronic_force",
    "electronic_pole_integral",
    "energy_shift_1d",
    "energy_shift_3d",
    "enhancement_ratio",
    "evaluate",
    "f_aux",
    "force_1d",
    "force_3d",
    "inferred_linewidth_1d",
    "intermediate_state_integrals",
    "kappa0",
    "pole_integral_1d",
    "pole_integral_3d",
    "pv_quadrature",
    "sine_cosine_integrals",
    "solve_electronic_pole",
    "solve_pole",
    "vacuum_energy_shift",
    "vacuum_force",
]
