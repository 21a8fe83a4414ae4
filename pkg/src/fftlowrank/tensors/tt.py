from __future__ import annotations

import numpy as np

from ..linalg import qr_thin, svd_thin
from .base import Tensor, guard_dense


class TtTensor(Tensor):
    """Tensor train: carriage ``j`` has shape ``(r_{j-1}, N_j, r_j)``, r_0 = r_d = 1."""

    format = "tt"

    def __init__(self, carriages):
        self.carriages = [np.asarray(c) for c in carriages]
        cs = self.carriages
        if any(c.ndim != 3 for c in cs):
            raise ValueError("TT carriages must be order-3 arrays")
        if cs[0].shape[0] != 1 or cs[-1].shape[2] != 1:
            raise ValueError("TT boundary ranks must be 1")
        for a, b in zip(cs[:-1], cs[1:]):
            if a.shape[2] != b.shape[0]:
                raise ValueError("TT bond ranks of neighbouring carriages differ")

    @property
    def shape(self):
        return tuple(c.shape[1] for c in self.carriages)

    @property
    def ranks(self):
        return tuple(c.shape[2] for c in self.carriages[:-1])

    @property
    def dtype(self):
        return np.result_type(*self.carriages)

    def __repr__(self):
        return f"TtTensor(shape={self.shape}, ranks={self.ranks})"

    def full(self, cap=None):
        guard_dense(self.shape, cap)
        x = self.carriages[0].reshape(self.shape[0], -1)
        for c in self.carriages[1:]:
            x = (x @ c.reshape(c.shape[0], -1)).reshape(-1, c.shape[2])
        return x.reshape(self.shape)

    def entry(self, index):
        m = np.ones((1, 1), dtype=self.dtype)
        for c, i in zip(self.carriages, index):
            m = m @ c[:, i, :]
        return m[0, 0]

    def scale(self, alpha):
        cs = list(self.carriages)
        cs[0] = alpha * cs[0]
        return TtTensor(cs)

    def _concat(self, other):
        d = self.ndim
        dtype = np.result_type(self.dtype, other.dtype)
        out = []
        for j, (a, b) in enumerate(zip(self.carriages, other.carriages)):
            if j == 0:
                out.append(np.concatenate([a, b], axis=2))
            elif j == d - 1:
                out.append(np.concatenate([a, b], axis=0))
            else:
                c = np.zeros((a.shape[0] + b.shape[0], a.shape[1], a.shape[2] + b.shape[2]),
                             dtype=dtype)
                c[:a.shape[0], :, :a.shape[2]] = a
                c[a.shape[0]:, :, a.shape[2]:] = b
                out.append(c)
        return TtTensor(out)

    def conj(self):
        return TtTensor([np.conj(c) for c in self.carriages])

    def hadamard(self, other):
        self.check_compatible(other)
        out = []
        for a, b in zip(self.carriages, other.carriages):
            # Kronecker product in the bond modes, shared physical mode
            c = np.einsum("anc,bnd->abncd", a, b)
            out.append(c.reshape(a.shape[0] * b.shape[0], a.shape[1], a.shape[2] * b.shape[2]))
        return TtTensor(out)

    def modewise(self, ops):
        out = []
        for c, op in zip(self.carriages, ops):
            if op is None:
                out.append(c)
                continue
            r0, n, r1 = c.shape
            cols = np.moveaxis(c, 1, 0).reshape(n, r0 * r1)
            res = op(cols)
            out.append(np.moveaxis(res.reshape(res.shape[0], r0, r1), 0, 1))
        return TtTensor(out)

    def inner(self, other):
        self.check_compatible(other)
        m = np.ones((1, 1), dtype=complex)
        for a, b in zip(self.carriages, other.carriages):
            m = np.einsum("ab,anc,bnd->cd", m, a, np.conj(b), optimize=True)
        return complex(m[0, 0])

    def param_count(self):
        return int(sum(c.size for c in self.carriages))

    def drop_small(self, threshold):
        cs = list(self.carriages)
        norms = [np.linalg.norm(c) for c in cs]
        bound = 0.0
        for j in range(len(cs) - 1):
            left = np.linalg.norm(cs[j], axis=(0, 1))
            right = np.linalg.norm(cs[j + 1], axis=(1, 2))
            w = left * right
            if w.size <= 1 or w.max() == 0:
                continue
            keep = w >= threshold * w.max()
            others = np.prod([norms[i] for i in range(len(cs)) if i not in (j, j + 1)])
            bound += float(w[~keep].sum() * others)
            cs[j] = cs[j][:, :, keep]
            cs[j + 1] = cs[j + 1][keep]
        return TtTensor(cs), bound

    def right_orthogonalised(self):
        cs = list(self.carriages)
        for j in range(len(cs) - 1, 0, -1):
            r0, n, r1 = cs[j].shape
            qr = qr_thin(cs[j].reshape(r0, n * r1).T)
            m = qr.q.shape[1]
            cs[j] = qr.q.T.reshape(m, n, r1)
            cs[j - 1] = np.einsum("anb,cb->anc", cs[j - 1], qr.r)
        return cs

    def truncate_with_bound(self, policy):
        v, bound = self, 0.0
        if policy.drop_threshold:
            v, bound = self.drop_small(policy.drop_threshold)
        cs = v.right_orthogonalised()
        d = len(cs)
        discarded = 0.0
        for j in range(d - 1):
            r0, n, r1 = cs[j].shape
            svd = svd_thin(cs[j].reshape(r0 * n, r1))
            k = policy.select(svd.singular_values, j, d - 1)
            discarded += float(np.sum(svd.singular_values[k:] ** 2))
            cs[j] = svd.left[:, :k].reshape(r0, n, k)
            carry = svd.singular_values[:k, None] * svd.right_adj[:k]
            nxt = cs[j + 1]
            cs[j + 1] = (carry @ nxt.reshape(nxt.shape[0], -1)).reshape(k, nxt.shape[1], nxt.shape[2])
        return TtTensor(cs), bound + float(np.sqrt(discarded))


def tt_from_full(x, policy):
    """TT-SVD: left-orthogonal carriages from sequential truncated SVDs."""
    x = np.asarray(x)
    shape = x.shape
    d = len(shape)
    cs = []
    r_prev = 1
    rest = x.reshape(shape[0], -1)
    discarded = 0.0
    for j in range(d - 1):
        rest = rest.reshape(r_prev * shape[j], -1)
        svd = svd_thin(rest)
        k = policy.select(svd.singular_values, j, d - 1)
        discarded += float(np.sum(svd.singular_values[k:] ** 2))
        cs.append(svd.left[:, :k].reshape(r_prev, shape[j], k))
        rest = svd.singular_values[:k, None] * svd.right_adj[:k]
        r_prev = k
    cs.append(rest.reshape(r_prev, shape[-1], 1))
    return TtTensor(cs), float(np.sqrt(discarded))
