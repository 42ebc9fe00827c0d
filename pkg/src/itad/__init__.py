"""Induction-transduction activation-deactivation (ITAD) dynamics.

Counting laws closed under thinning, density kernels, threshold fluxes,
field-equation solvers, mean-field orbits and a random-graph Monte Carlo.
"""
__version__ = "0.1.0"

from ._backend import BACKEND
from .counting import (Binomial, CountingLaw, Dirac, DomainError, NegativeBinomial, Poisson,
                       law_from_dict, thin)
from .field import FieldConfig, solve, solve_spatiotemporal, solve_temporal, solve_transport
from .fluxes import INF, FluxSpec, flux_q, flux_r, induction_p, mean_flux, mean_induction
from .kernels import (Central, CentralRational, Decentral, Kernel, Local, Subcentral,
                      SubcentralRational, calibrate, kernel_from_dict)
from .orbits import OrbitConfig, chaos_factor, chaotic_orbit, fixed_point_sweep, orbit

__all__ = [
    "BACKEND", "Binomial", "CountingLaw", "Dirac", "DomainError", "NegativeBinomial",
    "Poisson", "law_from_dict", "thin", "FieldConfig", "solve", "solve_spatiotemporal",
    "solve_temporal", "solve_transport", "INF", "FluxSpec", "flux_q", "flux_r", "induction_p",
    "mean_flux", "mean_induction", "Central", "CentralRational", "Decentral", "Kernel",
    "Local", "Subcentral", "SubcentralRational", "calibrate", "kernel_from_dict",
    "OrbitConfig", "chaos_factor", "chaotic_orbit", "fixed_point_sweep", "orbit",
]
