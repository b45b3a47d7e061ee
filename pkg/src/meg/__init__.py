"""Synthetic MEG current reconstruction on a cubed-sphere cortical shell."""

from .divergence import divergence_matrix, divergence_operator, field_from_fluxes
from .experiment import (
    CaseResult,
    ConvergenceComparison,
    ExperimentResult,
    LambdaTuning,
    MEGReport,
    MEGSetup,
    case_problem,
    compare_convergence,
    lambda_max,
    prepare_setup,
    run_case,
    run_experiment,
    tune_lambda,
)
from .forward import biot_savart_operator
from .grid import CubedSphereGrid, build_grid
from .model import Bump, add_noise, default_bumps, make_input_model
from .sensors import SensorArray, sample_sensors
from .wavelets import WaveletTransform, lift_forward, lift_inverse

__all__ = [
    # Geometry
    "CubedSphereGrid",
    "build_grid",
    "SensorArray",
    "sample_sensors",
    # Operators
    "biot_savart_operator",
    "divergence_matrix",
    "divergence_operator",
    "field_from_fluxes",
    "WaveletTransform",
    "lift_forward",
    "lift_inverse",
    # Input model
    "Bump",
    "default_bumps",
    "make_input_model",
    "add_noise",
    # Experiment
    "MEGSetup",
    "MEGReport",
    "CaseResult",
    "LambdaTuning",
    "ConvergenceComparison",
    "ExperimentResult",
    "prepare_setup",
    "case_problem",
    "lambda_max",
    "tune_lambda",
    "run_case",
    "compare_convergence",
    "run_experiment",
]
