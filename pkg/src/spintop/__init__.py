"""Collective-spin Lindblad dynamics on the operator-space lattice.

The package maps the driven-dissipative collective spin onto a non-Hermitian
hopping model over spherical-tensor coefficients, diagnoses local point-gap
topology with spectral-localizer probes, and runs the spectral, dynamical,
and mode-structure experiments behind those diagnostics.
"""

from .spincore import (
    SpinRepresentation,
    SpinOperators,
    SphericalTensorBasis,
    build_spin_operators,
    clebsch_gordan,
    build_tensor_basis,
    tensor_index,
    tensor_index_inverse,
    decompose,
    reconstruct,
)
from .liouville import (
    ModelParameters,
    LiouvillianMatrix,
    HoppingCoefficients,
    SpectralDecomposition,
    DegenerateSteadyStateError,
    apply_liouvillian,
    build_superoperator,
    build_superoperator_vectorized,
    extract_hoppings,
    spectrum,
    steady_state,
)
from .localizer import (
    PositionSuperoperator,
    LocalizerSample,
    SweepResult,
    position_superoperator,
    build_localizer,
    build_alt_localizer,
    signature,
    local_index,
    alt_localizer_index,
    sweep_position,
    sweep_spectral,
    sweep_kappa,
    kappa_stability_report,
    extract_islands,
    hatano_nelson,
    bloch_winding,
)
from .dynamics import (
    Trajectory,
    ModeWeightTable,
    coherent_spin_state,
    evolve,
    observable_trajectory,
    rank_weights,
    count_crossings,
    dominant_frequency_bin,
    universality_experiment,
)

__version__ = "0.1.0"
