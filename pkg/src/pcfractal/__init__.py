"""Spectral and noncommutative-geometric invariants of finitely ramified
self-similar sets, computed from a user-supplied harmonic structure."""

__version__ = "0.1.0"

from .definition import (
    PRESETS,
    load_definition,
    structure_from_definition,
    harmonic_from_definition,
    measure_from_definition,
)
from .structure import SelfSimilarStructure, LevelComplex, StructureError, build_level
from .harmonic import (
    HarmonicStructure,
    HarmonicError,
    EnergyForm,
    assemble_energy,
    verify_harmonic,
    harmonic_extension,
    extension_matrices,
    harmonic_function,
)
from .spectra import (
    MeasureWeights,
    SpectralExponent,
    SpectralData,
    SpectraError,
    solve_spectral_exponent,
    kl_weights,
    tent_integrals,
    mass_vector,
    eigensolve,
    counting_function,
    weyl_fit,
    green_diagonal,
    heat_kernel,
    heat_kernel_matrix,
    c1_estimate,
    heat_bound_check,
    potential_kernel,
    spectral_volume_estimate,
)
from .fredholm import (
    EdgeModule,
    CommutatorSpectrum,
    FredholmError,
    build_module,
    commutator,
    energy_measure,
    hs_green_bound,
    schatten_report,
    log_averaged_sums,
    energy_functional,
    invariance_check,
)
