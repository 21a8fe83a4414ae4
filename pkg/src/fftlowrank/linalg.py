"""Dense linear algebra and 1-D FFT primitives.

All Fourier-space arrays in this package are stored in *centered* order:
index ``p`` along an axis of odd length ``N`` holds frequency
``k = p - (N - 1) // 2``.  The forward transform carries the ``1/N`` factor,
the inverse none, so that forward coefficients are the coefficients of the
interpolating trigonometric polynomial.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft
import scipy.linalg


class EvenGridError(ValueError):
    pass


@dataclass(frozen=True)
class SvdFactors:
    left: np.ndarray
    singular_values: np.ndarray
    right_adj: np.ndarray

    def reconstruct(self):
        return (self.left * self.singular_values) @ self.right_adj


@dataclass(frozen=True)
class QrFactors:
    q: np.ndarray
    r: np.ndarray


def _check_odd(n):
    if n % 2 == 0:
        raise EvenGridError(f"even grid size unsupported (N={n})")


def fft1d(v, direction="forward", axis=-1):
    """Centered DFT along one axis.

    ``forward`` computes ``v_hat[m] = sum_k v[k] exp(-2j*pi*m*k/N) / N`` and
    ``inverse`` computes ``v[k] = sum_m v_hat[m] exp(2j*pi*m*k/N)``, both with
    indices on ``{-(N-1)/2, ..., (N-1)/2}``.
    """
    v = np.asarray(v)
    n = v.shape[axis]
    _check_odd(n)
    natural = scipy.fft.ifftshift(v, axes=axis)
    if direction == "forward":
        out = scipy.fft.fft(natural, axis=axis, norm="forward")
    elif direction == "inverse":
        out = scipy.fft.ifft(natural, axis=axis, norm="forward")
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return scipy.fft.fftshift(out, axes=axis)


def fftn_centered(a, direction="forward", axes=None):
    """Centered d-dimensional DFT with the same scaling as :func:`fft1d`."""
    a = np.asarray(a)
    if axes is None:
        axes = tuple(range(a.ndim))
    for ax in axes:
        _check_odd(a.shape[ax])
    natural = scipy.fft.ifftshift(a, axes=axes)
    if direction == "forward":
        out = scipy.fft.fftn(natural, axes=axes, norm="forward")
    elif direction == "inverse":
        out = scipy.fft.ifftn(natural, axes=axes, norm="forward")
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return scipy.fft.fftshift(out, axes=axes)


def _check_finite(m):
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")


def svd_thin(m) -> SvdFactors:
    m = np.asarray(m)
    _check_finite(m)
    try:
        u, s, vh = scipy.linalg.svd(m, full_matrices=False, check_finite=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge on nearly rank-deficient input
        u, s, vh = scipy.linalg.svd(m, full_matrices=False, check_finite=False,
                                    lapack_driver="gesvd")
    return SvdFactors(u, s, vh)


def qr_thin(m) -> QrFactors:
    m = np.asarray(m)
    _check_finite(m)
    q, r = scipy.linalg.qr(m, mode="economic", check_finite=False)
    return QrFactors(q, r)


def truncation_index(singular_values, rank=None, tol=None):
    """Number of singular values to keep.

    Exactly one of ``rank`` (fixed-rank policy, clamped to the available
    length) and ``tol`` (smallest k with ``sqrt(sum(s[k:]**2)) <= tol``) must
    be given.
    """
    s = np.asarray(singular_values, dtype=float)
    if np.any(s < 0):
        raise ValueError("singular values must be non-negative")
    if np.any(np.diff(s) > 1e-12 * max(s[0] if s.size else 0.0, 1e-300)):
        raise ValueError("singular values must be non-increasing")
    if (rank is None) == (tol is None):
        raise ValueError("give exactly one of rank or tol")
    if rank is not None:
        if rank < 1:
            raise ValueError("rank must be >= 1")
        return int(min(rank, s.size))
    if tol < 0:
        raise ValueError("tolerance must be >= 0")
    # tail[k] = sqrt(sum_{i >= k} s_i^2), tail[len] = 0
    tail = np.sqrt(np.concatenate([np.cumsum((s ** 2)[::-1])[::-1], [0.0]]))
    return int(np.argmax(tail <= tol))
