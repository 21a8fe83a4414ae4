from __future__ import annotations

import numpy as np

from ..linalg import fftn_centered
from .base import Tensor


class FullTensor(Tensor):
    format = "full"

    def __init__(self, data):
        self.data = np.asarray(data)

    @property
    def shape(self):
        return self.data.shape

    @property
    def ranks(self):
        return ()

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"FullTensor(shape={self.shape})"

    def full(self, cap=None):
        return self.data

    def entry(self, index):
        return self.data[tuple(index)]

    def scale(self, alpha):
        return FullTensor(alpha * self.data)

    def _concat(self, other):
        return FullTensor(self.data + other.data)

    def combine(self, alpha, other, beta):
        self.check_compatible(other)
        return FullTensor(alpha * self.data + beta * other.data)

    def conj(self):
        return FullTensor(np.conj(self.data))

    def hadamard(self, other):
        self.check_compatible(other)
        return FullTensor(self.data * other.data)

    def modewise(self, ops):
        a = self.data
        for j, op in enumerate(ops):
            if op is None:
                continue
            moved = np.moveaxis(a, j, 0)
            rest = moved.shape[1:]
            out = op(moved.reshape(moved.shape[0], -1))
            a = np.moveaxis(out.reshape((out.shape[0],) + rest), 0, j)
        return FullTensor(a)

    def fft(self, direction="forward"):
        return FullTensor(fftn_centered(self.data, direction))

    def mode_multiply(self, j, vec):
        shape = [1] * self.ndim
        shape[j] = -1
        return FullTensor(self.data * np.reshape(vec, shape))

    def truncate_with_bound(self, policy):
        return self, 0.0

    def inner(self, other):
        self.check_compatible(other)
        return complex(np.vdot(other.data, self.data))

    def norm(self):
        return float(np.linalg.norm(self.data))

    def param_count(self):
        return int(np.prod(self.shape))
