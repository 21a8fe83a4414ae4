"""Low-rank accelerated Fourier-Galerkin homogenisation."""
__version__ = "0.1.0"
