from __future__ import annotations

import numpy as np

from ..linalg import fft1d

#: largest number of entries :meth:`Tensor.full` will materialise
DENSE_CAP = 2 ** 27


class FormatMismatch(ValueError):
    pass


def guard_dense(shape, cap=None):
    n = int(np.prod(shape, dtype=np.int64))
    cap = DENSE_CAP if cap is None else cap
    if n > cap:
        raise MemoryError(
            f"dense size {n} of shape {tuple(shape)} exceeds the cap {cap}")


def fft_columns(direction):
    """Mode operator applying the centered 1-D DFT to each column."""
    return lambda cols: fft1d(cols, direction, axis=0)


class Tensor:
    """Common interface of the four representations.

    Tensors are treated as immutable values; every operation returns a new
    object.  Mode operators passed to :meth:`modewise` act on an
    ``(N_j, m)`` array whose columns are the mode-``j`` vectors.
    """

    format = "abstract"

    @property
    def ndim(self):
        return len(self.shape)

    def check_compatible(self, other):
        if type(other) is not type(self):
            raise FormatMismatch(
                f"format mismatch: {self.format} vs {getattr(other, 'format', type(other))}")
        if tuple(other.shape) != tuple(self.shape):
            raise FormatMismatch(f"shape mismatch: {self.shape} vs {other.shape}")

    def combine(self, alpha, other, beta):
        """``alpha*self + beta*other`` with ranks added (no truncation)."""
        self.check_compatible(other)
        return self.scale(alpha)._concat(other.scale(beta))

    def __add__(self, other):
        return self.combine(1.0, other, 1.0)

    def __sub__(self, other):
        return self.combine(1.0, other, -1.0)

    def __mul__(self, alpha):
        return self.scale(alpha)

    __rmul__ = __mul__

    def __neg__(self):
        return self.scale(-1.0)

    def fft(self, direction="forward"):
        op = fft_columns(direction)
        return self.modewise([op] * self.ndim)

    def mode_multiply(self, j, vec):
        """Element-wise product with the rank-1 tensor ``1 x .. x vec x .. x 1``."""
        vec = np.asarray(vec)
        ops = [None] * self.ndim
        ops[j] = lambda cols: vec[:, None] * cols
        return self.modewise(ops)

    def norm(self):
        return float(np.sqrt(max(self.inner(self).real, 0.0)))

    def mean_coefficient(self):
        """Entry at the centre index (frequency zero in Fourier space)."""
        return self.entry(tuple((n - 1) // 2 for n in self.shape))

    def truncate(self, policy):
        return self.truncate_with_bound(policy)[0]

    def max_rank(self):
        r = self.ranks
        return int(max(r)) if len(r) else 1
