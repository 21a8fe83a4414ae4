from __future__ import annotations

import numpy as np

from ..linalg import qr_thin, svd_thin
from .base import Tensor, guard_dense


def mode_product(core, mat, j):
    """``out[.., a, ..] = sum_i mat[a, i] * core[.., i, ..]`` along axis ``j``."""
    return np.moveaxis(np.tensordot(mat, core, axes=(1, j)), 0, j)


def unfold(x, j):
    return np.moveaxis(x, j, 0).reshape(x.shape[j], -1)


def hosvd(x, policy):
    """Truncated HOSVD of a dense array.

    Returns ``(core, bases, bound)`` where ``bound`` is the root-sum-square of
    all discarded mode singular values, an upper bound of the error.
    """
    d = x.ndim
    bases = []
    discarded = 0.0
    for j in range(d):
        svd = svd_thin(unfold(x, j))
        k = policy.select(svd.singular_values, j, d)
        discarded += float(np.sum(svd.singular_values[k:] ** 2))
        bases.append(svd.left[:, :k])
    core = x
    for j, u in enumerate(bases):
        core = mode_product(core, np.conj(u).T, j)
    return core, bases, float(np.sqrt(discarded))


class TuckerTensor(Tensor):
    """Core tensor contracted with one factor matrix per mode.

    ``factors[j]`` has shape ``(N_j, r_j)``.  ``orthonormal`` records, per
    mode, whether the factor columns are known to be orthonormal; only then
    does :meth:`norm` use the cheap core-norm shortcut.
    """

    format = "tucker"

    def __init__(self, core, factors, orthonormal=False):
        self.core = np.asarray(core)
        self.factors = [np.asarray(f) for f in factors]
        if self.core.ndim != len(self.factors):
            raise ValueError("core order must equal the number of factors")
        if any(f.ndim != 2 or f.shape[1] != r for f, r in zip(self.factors, self.core.shape)):
            raise ValueError("factor j must have shape (N_j, r_j)")
        if isinstance(orthonormal, bool):
            orthonormal = (orthonormal,) * len(self.factors)
        self.orthonormal = tuple(bool(o) for o in orthonormal)

    @property
    def shape(self):
        return tuple(f.shape[0] for f in self.factors)

    @property
    def ranks(self):
        return tuple(self.core.shape)

    @property
    def dtype(self):
        return np.result_type(self.core, *self.factors)

    def __repr__(self):
        return f"TuckerTensor(shape={self.shape}, ranks={self.ranks})"

    def full(self, cap=None):
        guard_dense(self.shape, cap)
        x = self.core
        for j, f in enumerate(self.factors):
            x = mode_product(x, f, j)
        return x

    def entry(self, index):
        x = self.core
        for f, i in zip(self.factors, index):
            x = np.tensordot(f[i], x, axes=(0, 0))
        return x[()]

    def scale(self, alpha):
        return TuckerTensor(alpha * self.core, self.factors, self.orthonormal)

    def _concat(self, other):
        r, s = self.ranks, other.ranks
        core = np.zeros([a + b for a, b in zip(r, s)],
                        dtype=np.result_type(self.core, other.core))
        core[tuple(slice(0, a) for a in r)] = self.core
        core[tuple(slice(a, None) for a in r)] = other.core
        factors = [np.hstack([a, b]) for a, b in zip(self.factors, other.factors)]
        return TuckerTensor(core, factors)

    def conj(self):
        return TuckerTensor(np.conj(self.core), [np.conj(f) for f in self.factors],
                            self.orthonormal)

    def hadamard(self, other):
        self.check_compatible(other)
        # column l = i*s + k pairs with core index l of kron(core_v, core_w)
        factors = [(a[:, :, None] * b[:, None, :]).reshape(a.shape[0], -1)
                   for a, b in zip(self.factors, other.factors)]
        return TuckerTensor(np.kron(self.core, other.core), factors)

    def modewise(self, ops):
        factors, ortho = [], []
        for f, op, o in zip(self.factors, ops, self.orthonormal):
            factors.append(f if op is None else op(f))
            ortho.append(o if op is None else False)
        return TuckerTensor(self.core, factors, ortho)

    def inner(self, other):
        self.check_compatible(other)
        x = self.core
        for j, (a, b) in enumerate(zip(self.factors, other.factors)):
            x = mode_product(x, (a.T @ np.conj(b)).T, j)
        return complex(np.sum(x * np.conj(other.core)))

    def norm_route(self):
        """``(norm, used_core_shortcut)``."""
        if all(self.orthonormal):
            return float(np.linalg.norm(self.core)), True
        return Tensor.norm(self), False

    def norm(self):
        return self.norm_route()[0]

    def param_count(self):
        return int(sum(f.size for f in self.factors) + self.core.size)

    def drop_small(self, threshold):
        """Remove basis vectors whose contribution is relatively small."""
        core, factors = self.core, list(self.factors)
        spec_norms = [np.linalg.norm(f, 2) if f.size else 0.0 for f in factors]
        bound = 0.0
        for j in range(self.ndim):
            slice_norms = np.linalg.norm(unfold(core, j), axis=1)
            w = np.linalg.norm(factors[j], axis=0) * slice_norms
            if w.size <= 1 or w.max() == 0:
                continue
            keep = w >= threshold * w.max()
            others = np.prod([spec_norms[i] for i in range(self.ndim) if i != j])
            bound += float(w[~keep].sum() * others)
            core = np.compress(keep, core, axis=j)
            factors[j] = factors[j][:, keep]
        return TuckerTensor(core, factors), bound

    def truncate_with_bound(self, policy):
        v, bound = self, 0.0
        if policy.drop_threshold:
            v, bound = self.drop_small(policy.drop_threshold)
        core = v.core
        qs = []
        for j, f in enumerate(v.factors):
            if v.orthonormal[j]:
                qs.append(f)
                continue
            qr = qr_thin(f)
            qs.append(qr.q)
            core = mode_product(core, qr.r, j)
        core, bases, discarded = hosvd(core, policy)
        factors = [q @ u for q, u in zip(qs, bases)]
        return TuckerTensor(core, factors, True), bound + discarded


def tucker_from_full(x, policy):
    core, bases, bound = hosvd(np.asarray(x), policy)
    return TuckerTensor(core, bases, True), bound
