"""Complex saddle-point SFA model of two-color high-harmonic generation.

Solves the saddle-point equations of the strong-field approximation for a
linearly polarized fundamental, adds a weak second harmonic perturbatively and
extracts in-situ phases, emission times and their slope ratio gamma.
"""

__version__ = "0.1.0"

from .analysis import (
    GammaReport,
    PlateauMarkers,
    central_window,
    emission_times,
    gamma_ratio,
    intra_plateau_crossing,
    nominal_cutoff,
    tau0,
    universal_curve,
)
from .dipole import action, half_period_dipole, hessian_det, total_dipole
from .exceptions import SFAError
from .saddle import BranchTrajectory, SaddlePoint, classical_guess, residual, solve, trace_branch
from .twocolor import SigmaCoefficients, in_situ_phase, sigma, spectrogram
from .units import FieldParams, LaserConfig, derive_field_params, keldysh

__all__ = [
    "BranchTrajectory",
    "FieldParams",
    "GammaReport",
    "LaserConfig",
    "PlateauMarkers",
    "SFAError",
    "SaddlePoint",
    "SigmaCoefficients",
    "action",
    "central_window",
    "classical_guess",
    "derive_field_params",
    "emission_times",
    "gamma_ratio",
    "half_period_dipole",
    "hessian_det",
    "in_situ_phase",
    "intra_plateau_crossing",
    "keldysh",
    "nominal_cutoff",
    "residual",
    "sigma",
    "solve",
    "spectrogram",
    "tau0",
    "total_dipole",
    "trace_branch",
    "universal_curve",
]
