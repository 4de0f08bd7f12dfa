"""Stroboscopic tomography for finite-dimensional open quantum systems."""

from stroboscopic.algebra import (
    IDENTITY2,
    PAULI,
    SIGMA1,
    SIGMA2,
    SIGMA3,
    Superoperator,
    hermitian_basis,
    matrix_exp,
    minimal_polynomial,
)
from stroboscopic.channels import KrausCollection, KrausFamilySpec, Model, kraus_at
from stroboscopic.config import Tolerances
from stroboscopic.generators import GkslComponents, gksl_generator, model_generator, spectrum_report
from stroboscopic.observability import (
    AlphaFunctions,
    ObservableSet,
    alpha_at,
    is_reconstructible,
    suggest_observables,
    validate_time_grid,
)
from stroboscopic.reconstruction import (
    MeasurementRecord,
    dephasing_closed_form,
    reconstruct_alpha,
    reconstruct_direct,
    simulate_measurements,
)

__version__ = "0.1.0"
