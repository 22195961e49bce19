"""Imprecise Sobol' indices for parametric p-boxes via augmented sparse PCE."""

from .augmented import AugmentedInput, AugmentedSpace, generate_phantoms, sample_design
from .distributions import Family, ParametricPBox
from .imprecise import Order, SobolInterval, sobol_bounds, split_indices
from .optimizer import OptimizerConfig, maximize, minimize
from .pce import ExperimentalDesign, PceConfig, PceModel, degree_adaptive_fit, lars_select
from .sobol import sobol_indices

__version__ = "0.1.0"

__all__ = [
    "AugmentedInput",
    "AugmentedSpace",
    "ExperimentalDesign",
    "Family",
    "OptimizerConfig",
    "Order",
    "ParametricPBox",
    "PceConfig",
    "PceModel",
    "SobolInterval",
    "degree_adaptive_fit",
    "generate_phantoms",
    "lars_select",
    "maximize",
    "minimize",
    "sample_design",
    "sobol_bounds",
    "sobol_indices",
    "split_indices",
]
