"""l1-based adaptive identification from quantized observations."""

from .baseline import L2State, expected_level, l2_update
from .estimator import (AdaConfig, AdaState, NumericalFailure, Observation, StepDiagnostics,
                        compute_beta, compute_beta_bar, compute_v, compute_v_bar, predict,
                        psi_oracle, step1_update, step2_update, update)
from .geometry import BoxDomain, contains, project_weighted, support_bound
from .noise import GaussianNoise, LogisticNoise, NoiseModel, noise_from_dict
from .quantizer import QuantizerSpec, cell_bounds, cell_index, quantize

__all__ = [
    "AdaConfig", "AdaState", "BoxDomain", "GaussianNoise", "L2State", "LogisticNoise",
    "NoiseModel", "NumericalFailure", "Observation", "QuantizerSpec", "StepDiagnostics",
    "cell_bounds", "cell_index", "compute_beta", "compute_beta_bar", "compute_v",
    "compute_v_bar", "contains", "expected_level", "l2_update", "noise_from_dict", "predict",
    "project_weighted", "psi_oracle", "quantize", "step1_update", "step2_update",
    "support_bound", "update",
]
