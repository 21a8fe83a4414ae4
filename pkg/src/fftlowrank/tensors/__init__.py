"""Full, CP, Tucker and tensor-train representations of order-d arrays."""
from .base import DENSE_CAP, FormatMismatch, Tensor
from .cp import CpTensor
from .full import FullTensor
from .ops import (FORMATS, as_tensor, constant, decompose, fft_d, hadamard, inner,
                  linear_combine, norm, param_count, random_tensor, rank_one, reconstruct,
                  truncate, zeros_like)
from .policy import TruncationPolicy
from .tt import TtTensor
from .tucker import TuckerTensor

__all__ = [
    "DENSE_CAP", "FORMATS", "CpTensor", "FormatMismatch", "FullTensor", "Tensor",
    "TruncationPolicy", "TtTensor", "TuckerTensor", "as_tensor", "constant", "decompose",
    "fft_d", "hadamard", "inner", "linear_combine", "norm", "param_count", "random_tensor",
    "rank_one", "reconstruct", "truncate", "zeros_like",
]
