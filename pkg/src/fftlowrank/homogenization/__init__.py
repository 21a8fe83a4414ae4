"""Periodic scalar cell problem: grids, materials and preconditioned operators."""
from .grid import GridSpec, build_grid, frequency_norm_sq, frequency_vectors
from .materials import (ANISOTROPIC_SHIFT, KLSample, MaterialFieldGa, MaterialFieldGaNi,
                        MaterialSpec, kl_modes, kl_sample, material_field, material_ga,
                        material_gani)
from .operators import (NonZeroMeanError, OperatorContext, Preconditioner, SpectrumBounds,
                        apply_operator, build_context, build_rhs, div_hat,
                        effective_coefficient, energy_norm_sq, grad_hat, precond_build,
                        spectrum_bounds, zero_pad)

__all__ = [
    "ANISOTROPIC_SHIFT", "GridSpec", "KLSample", "MaterialFieldGa", "MaterialFieldGaNi",
    "MaterialSpec", "NonZeroMeanError", "OperatorContext", "Preconditioner", "SpectrumBounds",
    "apply_operator", "build_context", "build_grid", "build_rhs", "div_hat",
    "effective_coefficient", "energy_norm_sq", "frequency_norm_sq", "frequency_vectors",
    "grad_hat", "kl_modes", "kl_sample", "material_field", "material_ga", "material_gani",
    "precond_build", "spectrum_bounds", "zero_pad",
]
