"""Format-independent entry points for the tensor operation set."""
from __future__ import annotations

import numpy as np

from .cp import CpTensor, cp_from_matrix
from .full import FullTensor
from .policy import TruncationPolicy
from .tt import TtTensor, tt_from_full
from .tucker import TuckerTensor, tucker_from_full

FORMATS = ("full", "cp", "tucker", "tt")


def as_tensor(x):
    return x if hasattr(x, "format") else FullTensor(x)


def decompose(t, fmt, policy=None, return_bound=False):
    """Compress a dense array (or :class:`FullTensor`) into ``fmt``.

    CP is available for order-2 input only.  The returned bound is an upper
    estimate of the Frobenius reconstruction error (exact for CP).
    """
    x = t.data if isinstance(t, FullTensor) else np.asarray(t)
    if policy is None:
        policy = TruncationPolicy.tolerance(0.0)
    if fmt == "full":
        out, bound = FullTensor(x), 0.0
    elif fmt == "cp":
        if x.ndim != 2:
            raise NotImplementedError("CP construction for d>=3 not supported")
        out, bound = cp_from_matrix(x, policy)
    elif fmt == "tucker":
        out, bound = tucker_from_full(x, policy)
    elif fmt == "tt":
        out, bound = tt_from_full(x, policy)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return (out, bound) if return_bound else out


def reconstruct(v, cap=None):
    return np.asarray(v.full(cap))


def linear_combine(alpha, v, beta, w):
    return v.combine(alpha, w, beta)


def hadamard(v, w):
    return v.hadamard(w)


def fft_d(v, direction="forward"):
    return v.fft(direction)


def truncate(v, policy, return_bound=False):
    out, bound = v.truncate_with_bound(policy)
    return (out, bound) if return_bound else out


def inner(v, w):
    return v.inner(w)


def norm(v):
    return v.norm()


def param_count(v):
    return v.param_count()


def rank_one(vectors, fmt):
    """Rank-1 tensor ``v_1 x v_2 x ... x v_d`` in the requested format."""
    vectors = [np.asarray(v) for v in vectors]
    if fmt == "full":
        x = vectors[0]
        for v in vectors[1:]:
            x = np.multiply.outer(x, v)
        return FullTensor(x)
    if fmt == "cp":
        return CpTensor(np.ones(1), [v[None, :] for v in vectors])
    if fmt == "tucker":
        return TuckerTensor(np.ones((1,) * len(vectors)), [v[:, None] for v in vectors])
    if fmt == "tt":
        return TtTensor([v[None, :, None] for v in vectors])
    raise ValueError(f"unknown format {fmt!r}")


def constant(value, shape, fmt):
    vectors = [np.ones(n) for n in shape]
    vectors[0] = vectors[0] * value
    return rank_one(vectors, fmt)


def zeros_like(v):
    return v.scale(0.0)


def random_tensor(shape, ranks, fmt, rng, complex_=False):
    """Random tensor with the given representation ranks (for tests and demos)."""
    def draw(*s):
        a = rng.standard_normal(s)
        if complex_:
            a = a + 1j * rng.standard_normal(s)
        return a

    d = len(shape)
    if fmt == "full":
        return FullTensor(draw(*shape))
    if fmt == "cp":
        r = ranks if isinstance(ranks, int) else ranks[0]
        return CpTensor(rng.uniform(0.5, 1.5, r), [draw(r, n) for n in shape])
    if fmt == "tucker":
        rs = [ranks] * d if isinstance(ranks, int) else list(ranks)
        return TuckerTensor(draw(*rs), [draw(n, r) for n, r in zip(shape, rs)])
    if fmt == "tt":
        rs = [ranks] * (d - 1) if isinstance(ranks, int) else list(ranks)
        bonds = [1] + rs + [1]
        return TtTensor([draw(bonds[j], shape[j], bonds[j + 1]) for j in range(d)])
    raise ValueError(f"unknown format {fmt!r}")
