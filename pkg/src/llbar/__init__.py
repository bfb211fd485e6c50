"""Pseudospectral solver and verification harness for the
Landau-Lifshitz-Baryakhtar and convective Cahn-Hilliard/Allen-Cahn
equations, with diagnostics turning the dissipativity, Lyapunov-decay,
continuous-dependence, smoothing and vanishing-damping estimates of the
underlying theory into executable checks."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .field import Field, bilaplacian, dealias, divergence, gradient, laplacian
from .grid import Boundary, ConfigurationError, Grid
from .model import (
    AffineQuadraticSource,
    ModelConfigError,
    ModelParams,
    anisotropy_field,
    convective_term,
    demag_field,
    effective_field,
    exchange_gl_field,
    rhs,
    source_term,
)
from .stepper import BlowUpError, StepperConfig, implicit_symbol, integrate, step

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "Grid",
    "Boundary",
    "ConfigurationError",
    "Field",
    "laplacian",
    "bilaplacian",
    "gradient",
    "divergence",
    "dealias",
    "ModelParams",
    "ModelConfigError",
    "AffineQuadraticSource",
    "exchange_gl_field",
    "anisotropy_field",
    "demag_field",
    "effective_field",
    "convective_term",
    "source_term",
    "rhs",
    "StepperConfig",
    "BlowUpError",
    "implicit_symbol",
    "step",
    "integrate",
]
