"""
Composite Guided Diffusion

Inverse design of two-phase particle composites: FEM homogenization with
adjoint sensitivities, a velocity-predicting diffusion model and
loss-guided sampling toward a target bulk modulus.
"""

__version__ = "1.0.0"

__all__ = ["__version__"]
