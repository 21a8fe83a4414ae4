from __future__ import annotations

import numpy as np

from ..linalg import qr_thin, svd_thin
from .base import Tensor, guard_dense


class CpTensor(Tensor):
    """Sum of ``r`` weighted rank-1 terms.

    ``factors[j]`` has shape ``(r, N_j)``; row ``i`` is the mode-``j`` vector
    of term ``i``.  Complex scalars from linear combinations are absorbed
    into the first factor so that ``weights`` stay real.  Only order-2
    tensors can be truncated (QR + SVD); higher orders have no stable
    best-approximation and are refused.
    """

    format = "cp"

    def __init__(self, weights, factors):
        self.weights = np.asarray(weights, dtype=float)
        self.factors = [np.asarray(f) for f in factors]
        r = self.weights.shape[0]
        if any(f.ndim != 2 or f.shape[0] != r for f in self.factors):
            raise ValueError("every CP factor must have shape (r, N_j)")

    @property
    def shape(self):
        return tuple(f.shape[1] for f in self.factors)

    @property
    def ranks(self):
        return (self.weights.shape[0],)

    @property
    def dtype(self):
        return np.result_type(*self.factors)

    def __repr__(self):
        return f"CpTensor(shape={self.shape}, rank={self.ranks[0]})"

    def full(self, cap=None):
        guard_dense(self.shape, cap)
        d = self.ndim
        letters = "abcdefghij"[:d]
        spec = ",".join("r" + c for c in letters)
        return np.einsum("r," + spec + "->" + letters, self.weights, *self.factors)

    def entry(self, index):
        prod = self.weights.astype(self.dtype)
        for f, i in zip(self.factors, index):
            prod = prod * f[:, i]
        return prod.sum()

    def scale(self, alpha):
        factors = list(self.factors)
        factors[0] = alpha * factors[0]
        return CpTensor(self.weights, factors)

    def _concat(self, other):
        return CpTensor(np.concatenate([self.weights, other.weights]),
                        [np.concatenate([a, b]) for a, b in zip(self.factors, other.factors)])

    def conj(self):
        return CpTensor(self.weights, [np.conj(f) for f in self.factors])

    def hadamard(self, other):
        self.check_compatible(other)
        r, s = self.ranks[0], other.ranks[0]
        weights = np.outer(self.weights, other.weights).ravel()
        factors = [(a[:, None, :] * b[None, :, :]).reshape(r * s, -1)
                   for a, b in zip(self.factors, other.factors)]
        return CpTensor(weights, factors)

    def modewise(self, ops):
        factors = [f if op is None else op(f.T).T for f, op in zip(self.factors, ops)]
        return CpTensor(self.weights, factors)

    def inner(self, other):
        self.check_compatible(other)
        gram = np.ones((self.ranks[0], other.ranks[0]), dtype=complex)
        for a, b in zip(self.factors, other.factors):
            gram = gram * (a @ np.conj(b).T)
        return complex(self.weights @ gram @ other.weights)

    def param_count(self):
        return int(sum(f.size for f in self.factors))

    def _term_weights(self):
        w = np.abs(self.weights).copy()
        for f in self.factors:
            w = w * np.linalg.norm(f, axis=1)
        return w

    def drop_small(self, threshold):
        w = self._term_weights()
        if w.size == 0 or w.max() == 0:
            return self, 0.0
        keep = w >= threshold * w.max()
        # dropped terms are not orthogonal to each other: bound by the sum
        dropped = float(w[~keep].sum())
        return CpTensor(self.weights[keep], [f[keep] for f in self.factors]), dropped

    def truncate_with_bound(self, policy):
        if self.ndim != 2:
            raise NotImplementedError("CP truncation for d>=3 not supported")
        v, bound = self, 0.0
        if policy.drop_threshold:
            v, bound = self.drop_small(policy.drop_threshold)
        b1 = v.factors[0].T * v.weights
        b2 = v.factors[1].T
        qr1, qr2 = qr_thin(b1), qr_thin(b2)
        svd = svd_thin(qr1.r @ qr2.r.T)
        k = policy.select(svd.singular_values, 0, 1)
        discarded = float(np.sqrt(np.sum(svd.singular_values[k:] ** 2)))
        f1 = (qr1.q @ svd.left[:, :k]).T
        f2 = svd.right_adj[:k] @ qr2.q.T
        out = CpTensor(svd.singular_values[:k], [f1, f2])
        return out, bound + discarded


def cp_from_matrix(m, policy):
    """Error-minimising CP (= truncated SVD) of an order-2 array."""
    m = np.asarray(m)
    if m.ndim != 2:
        raise NotImplementedError("CP construction for d>=3 not supported")
    svd = svd_thin(m)
    k = policy.select(svd.singular_values, 0, 1)
    discarded = float(np.sqrt(np.sum(svd.singular_values[k:] ** 2)))
    return CpTensor(svd.singular_values[:k], [svd.left[:, :k].T, svd.right_adj[:k]]), discarded
