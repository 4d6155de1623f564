"""Work extraction (ergotropy) from the two-qubit gravitational cat model."""

from .ergotropy import (
    ErgotropyReport,
    PopulationSpectrum,
    ergotropy_double_sum,
    ergotropy_report,
    ergotropy_trace,
    oracle_min_energy,
    passive_state,
    population_spectrum,
)
from .errors import (
    ConfigError,
    DegenerateDraw,
    NegativeCoupling,
    NonConvergence,
    NotAState,
    NumericalError,
    Overflow,
)
from .model import (
    Convention,
    GeometryParams,
    GravCatSpectrum,
    ModelParams,
    ThermalSpec,
    analytic_spectrum,
    build_hamiltonian,
    closed_form_gibbs_elements,
    omega_from_geometry,
    partition_function,
    thermal_state,
)
from .qmat import SpectralDecomposition, expectation, hermitian_eig, kron2, random_unitary, spectral_function

__version__ = "0.1.0"
