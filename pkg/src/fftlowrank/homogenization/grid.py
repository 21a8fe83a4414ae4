from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform odd grid of ``N`` points per axis on the cell (-1/2, 1/2)^d."""

    d: int
    N: int

    def __post_init__(self):
        if self.d not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.d}")
        if self.N < 1 or self.N % 2 == 0:
            raise ValueError(f"even N introduces Nyquist frequencies (N={self.N})")

    @property
    def shape(self):
        return (self.N,) * self.d

    @property
    def size(self):
        return self.N ** self.d

    @property
    def freqs(self):
        """Centered frequency set Z_N."""
        h = (self.N - 1) // 2
        return np.arange(-h, h + 1)

    @property
    def points(self):
        """Grid points x_k = k / N for k in Z_N."""
        return self.freqs / self.N

    @property
    def double_size(self):
        return 2 * self.N - 1

    def double(self):
        return GridSpec(self.d, self.double_size)

    @property
    def center(self):
        return ((self.N - 1) // 2,) * self.d


def build_grid(d, N):
    return GridSpec(int(d), int(N))


def frequency_vectors(grid):
    """The d copies of Z_N as float vectors (one per axis)."""
    return [grid.freqs.astype(float) for _ in range(grid.d)]


def frequency_norm_sq(grid):
    """Dense array of k.k on Z_N^d."""
    k2 = grid.freqs.astype(float) ** 2
    out = np.zeros(grid.shape)
    for a in range(grid.d):
        shape = [1] * grid.d
        shape[a] = -1
        out = out + k2.reshape(shape)
    return out
