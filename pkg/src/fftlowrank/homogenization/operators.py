"""Preconditioned Fourier-Galerkin operators for the scalar cell problem.

Unknowns are Fourier coefficients ``u_hat`` on Z_N (centered order).  Both
schemes apply

    P^-1 div_hat F [A] F^-1 grad_hat u_hat

where for ``ga`` the material multiply happens on the double grid between a
zero-padding injection and its adjoint.  Full tensors go through plain
numpy arrays; low-rank tensors go through format operations with a
truncation after the material multiply, after the divergence and after the
preconditioner.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from ..linalg import fftn_centered
from ..tensors import FullTensor, TruncationPolicy, decompose, rank_one
from .grid import GridSpec, frequency_norm_sq
from .materials import MaterialSpec, material_field

TWO_PI_I = 2j * np.pi
ZERO_MEAN_TOL = 1e-12
PRECOND_REL_TOL = 1e-8


class NonZeroMeanError(ValueError):
    pass


# -- building blocks -----------------------------------------------------------

def grad_hat(grid, u):
    """Fourier gradient: component alpha is ``2 pi i k_alpha * u_hat``."""
    k = grid.freqs.astype(float)
    return [u.mode_multiply(a, TWO_PI_I * k) for a in range(grid.d)]


def div_hat(grid, w, policy=None):
    """Fourier divergence ``sum_alpha -2 pi i k_alpha w_alpha``; ranks add."""
    k = grid.freqs.astype(float)
    out = None
    for a, comp in enumerate(w):
        term = comp.mode_multiply(a, -TWO_PI_I * k)
        out = term if out is None else out.combine(1.0, term, 1.0)
    if policy is not None:
        out = out.truncate(policy)
    return out


def _pad_op(n, m):
    off = (m - n) // 2

    def inject(cols):
        out = np.zeros((m,) + cols.shape[1:], dtype=cols.dtype)
        out[off:off + n] = cols
        return out

    return inject


def _crop_op(n, m):
    off = (m - n) // 2
    return lambda cols: cols[off:off + n]


def zero_pad(v, size, direction="inject"):
    """Embed coefficients on Z_n into Z_size (``inject``) or restrict back (``project``)."""
    n = v.shape[0]
    if direction == "inject":
        if size < n:
            raise ValueError("inject target must not be smaller than the source")
        op = _pad_op(n, size)
    elif direction == "project":
        if size > n:
            raise ValueError("project target must not be larger than the source")
        op = _crop_op(size, n)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return v.modewise([op] * v.ndim)


def pad_array(a, m, axes):
    n = a.shape[axes[0]]
    off = (m - n) // 2
    shape = list(a.shape)
    for ax in axes:
        shape[ax] = m
    out = np.zeros(shape, dtype=a.dtype)
    idx = [slice(None)] * a.ndim
    for ax in axes:
        idx[ax] = slice(off, off + n)
    out[tuple(idx)] = a
    return out


def crop_array(a, n, axes):
    m = a.shape[axes[0]]
    off = (m - n) // 2
    idx = [slice(None)] * a.ndim
    for ax in axes:
        idx[ax] = slice(off, off + n)
    return a[tuple(idx)]


@dataclass(frozen=True)
class Preconditioner:
    """Laplacian ``P[k] = k.k`` and its Moore-Penrose pseudo-inverse."""

    grid: GridSpec
    values: np.ndarray
    inverse: np.ndarray
    rel_tol: float = PRECOND_REL_TOL
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def inverse_in(self, fmt):
        """Low-rank approximant of ``P^-1`` (relative Frobenius error <= rel_tol)."""
        if fmt == "full":
            return FullTensor(self.inverse)
        if fmt not in self._cache:
            tol = self.rel_tol * np.linalg.norm(self.inverse)
            self._cache[fmt] = decompose(self.inverse, fmt, TruncationPolicy.tolerance(tol))
        return self._cache[fmt]


def precond_build(grid, formats=()):
    values = frequency_norm_sq(grid)
    inverse = np.zeros_like(values)
    nz = values > 0
    inverse[nz] = 1.0 / values[nz]
    pre = Preconditioner(grid, values, inverse)
    for fmt in formats:
        pre.inverse_in(fmt)
    return pre


@dataclass(frozen=True)
class SpectrumBounds:
    c_A: float
    C_A: float

    @property
    def lambda_min(self):
        return 4 * np.pi ** 2 * self.c_A

    @property
    def lambda_max(self):
        return 4 * np.pi ** 2 * self.C_A

    @property
    def omega(self):
        """Richardson step minimising the iteration-matrix norm."""
        return 2.0 / (self.lambda_min + self.lambda_max)

    @property
    def contraction(self):
        return (self.C_A - self.c_A) / (self.C_A + self.c_A)


@dataclass(frozen=True)
class OperatorContext:
    """Everything needed to apply the preconditioned system matrix."""

    scheme: str
    grid: GridSpec
    material: object
    precond: Preconditioner
    fmt: str = "full"
    policy: Optional[TruncationPolicy] = None
    load: np.ndarray = None

    def __post_init__(self):
        if self.scheme not in ("ga", "gani"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.load is None:
            e = np.zeros(self.grid.d)
            e[0] = 1.0
            object.__setattr__(self, "load", e)
        if self.fmt != "full" and self.policy is None:
            raise ValueError("low-rank contexts need a truncation policy")
        if self.fmt == "cp" and self.grid.d != 2:
            raise ValueError("CP format is only supported for d=2")

    @property
    def eval_grid(self):
        return self.material.eval_grid

    def with_policy(self, policy):
        return OperatorContext(self.scheme, self.grid, self.material, self.precond,
                               self.fmt, policy, self.load)

    def with_load(self, load):
        return OperatorContext(self.scheme, self.grid, self.material, self.precond,
                               self.fmt, self.policy, np.asarray(load, dtype=float))

    def truncate(self, v):
        if self.policy is None or v.format == "full":
            return v
        return v.truncate(self.policy)

    def truncate_with_bound(self, v):
        if self.policy is None or v.format == "full":
            return v, 0.0
        return v.truncate_with_bound(self.policy)

    # dense helpers for the full-tensor path
    @cached_property
    def ik(self):
        """Broadcastable ``2 pi i k_alpha`` arrays, stacked along a leading axis."""
        d = self.grid.d
        k = self.grid.freqs.astype(float)
        out = np.zeros((d,) + (1,) * d, dtype=complex)
        out = np.broadcast_to(out, (d,) + self.grid.shape).copy()
        for a in range(d):
            shape = [1] * d
            shape[a] = -1
            out[a] = TWO_PI_I * k.reshape(shape)
        return out

    @cached_property
    def material_array(self):
        return np.asarray(self.material.scalar.full()).real

    @cached_property
    def pinv_lowrank(self):
        return self.precond.inverse_in(self.fmt)


def build_context(grid, material, scheme="ga", fmt="full", policy=None, load=None,
                  material_rank=None):
    """Assemble an :class:`OperatorContext`.

    ``material`` is a :class:`MaterialSpec` or an already discretised field.
    """
    if isinstance(material, MaterialSpec):
        material = material_field(material, grid, scheme, fmt, material_rank)
    pre = precond_build(grid)
    return OperatorContext(scheme, grid, material, pre, fmt, policy,
                           None if load is None else np.asarray(load, dtype=float))


# -- dense (full tensor) path --------------------------------------------------

def _axes(d):
    return tuple(range(1, d + 1))


def _to_physical_full(ctx, fields_hat):
    """(d, N..) Fourier fields -> (d, M..) nodal values on the evaluation grid."""
    d = ctx.grid.d
    if ctx.scheme == "ga":
        fields_hat = pad_array(fields_hat, ctx.grid.double_size, _axes(d))
    return fftn_centered(fields_hat, "inverse", axes=_axes(d))


def _to_fourier_full(ctx, fields):
    d = ctx.grid.d
    out = fftn_centered(fields, "forward", axes=_axes(d))
    if ctx.scheme == "ga":
        out = crop_array(out, ctx.grid.N, _axes(d))
    return out


def _flux_full(ctx, strain):
    a = ctx.material_array
    flux = a * strain
    B = ctx.material.shift
    if B is not None:
        flux = flux + np.tensordot(B, strain, axes=(1, 0))
    return flux


def check_zero_mean(u, center):
    u = np.asarray(u)
    scale = np.linalg.norm(u)
    if abs(u[center]) > ZERO_MEAN_TOL * max(scale, 1e-300):
        raise NonZeroMeanError(
            f"input is not zero-mean: |u_hat[0]| = {abs(u[center]):.3e}, |u_hat| = {scale:.3e}")


def apply_full(ctx, u):
    """Preconditioned operator on a dense coefficient array."""
    grads = ctx.ik * u[None]
    flux = _to_fourier_full(ctx, _flux_full(ctx, _to_physical_full(ctx, grads)))
    div = -np.sum(ctx.ik * flux, axis=0)
    return ctx.precond.inverse * div


def rhs_full(ctx):
    d = ctx.grid.d
    shape = (d,) + ctx.eval_grid.shape
    strain = np.broadcast_to(ctx.load.reshape((d,) + (1,) * d), shape).astype(complex)
    flux = _to_fourier_full(ctx, _flux_full(ctx, strain))
    return ctx.precond.inverse * np.sum(ctx.ik * flux, axis=0)


def _strain_full(ctx, u, load):
    d = ctx.grid.d
    g = _to_physical_full(ctx, ctx.ik * u[None]).real
    return g + np.asarray(load).reshape((d,) + (1,) * d)


def _energy_full(ctx, strain):
    flux = _flux_full(ctx, strain)
    return float(np.sum(flux * strain) / ctx.eval_grid.size)


# -- low-rank path -------------------------------------------------------------

def _to_physical_lowrank(ctx, grads):
    if ctx.scheme == "ga":
        grads = [zero_pad(g, ctx.grid.double_size, "inject") for g in grads]
    return [g.fft("inverse") for g in grads]


def _to_fourier_lowrank(ctx, fields):
    out = [f.fft("forward") for f in fields]
    if ctx.scheme == "ga":
        out = [zero_pad(f, ctx.grid.N, "project") for f in out]
    return out


def _const(ctx, value):
    shape = ctx.eval_grid.shape
    return rank_one([np.full(n, value if j == 0 else 1.0) for j, n in enumerate(shape)],
                    ctx.material.fmt)


def _flux_lowrank(ctx, strain):
    a = ctx.material.scalar
    B = ctx.material.shift
    flux = []
    for alpha in range(ctx.grid.d):
        s = a.hadamard(strain[alpha])
        if B is not None:
            for beta in range(ctx.grid.d):
                if B[alpha, beta] != 0:
                    s = s.combine(1.0, strain[beta], B[alpha, beta])
        flux.append(s)
    return flux


def apply_lowrank(ctx, u, bounds=None):
    grads = grad_hat(ctx.grid, u)
    strain = _to_physical_lowrank(ctx, grads)
    flux = [ctx.truncate_with_bound(f) for f in _flux_lowrank(ctx, strain)]
    flux_hat = _to_fourier_lowrank(ctx, [f for f, _ in flux])
    div, b2 = ctx.truncate_with_bound(div_hat(ctx.grid, flux_hat))
    out, b3 = ctx.truncate_with_bound(ctx.pinv_lowrank.hadamard(div))
    if bounds is not None:
        bounds.extend([b for _, b in flux] + [b2, b3])
    return out


def rhs_lowrank(ctx):
    strain = [_const(ctx, e) for e in ctx.load]
    a = ctx.material.scalar
    flux = [a.scale(e) for e in ctx.load]
    B = ctx.material.shift
    if B is not None:
        be = B @ ctx.load
        flux = [f.combine(1.0, c, 1.0) for f, c in zip(flux, [_const(ctx, v) for v in be])]
    del strain
    flux_hat = _to_fourier_lowrank(ctx, flux)
    div = div_hat(ctx.grid, flux_hat)
    return ctx.truncate(ctx.pinv_lowrank.hadamard(div).scale(-1.0))


def _strain_lowrank(ctx, u, load):
    strain = _to_physical_lowrank(ctx, grad_hat(ctx.grid, u))
    return [g if e == 0 else g.combine(1.0, _const(ctx, 1.0), e)
            for g, e in zip(strain, load)]


def _real_bilinear(x, y):
    """``sum Re(x) Re(y)`` for tensors whose entries may carry round-off imaginary parts."""
    return 0.5 * (x.inner(y.conj()).real + x.inner(y).real)


def _energy_lowrank(ctx, strain):
    a = ctx.material.scalar
    total = 0.0
    for e in strain:
        total += _real_bilinear(a.hadamard(e), e)
    B = ctx.material.shift
    if B is not None:
        d = ctx.grid.d
        for alpha in range(d):
            for beta in range(d):
                if B[alpha, beta] != 0:
                    total += B[alpha, beta] * _real_bilinear(strain[alpha], strain[beta])
    return float(total / ctx.eval_grid.size)


# -- public operations ------------------------------------------------------------

def apply_operator(ctx, u, bounds=None):
    """Apply the preconditioned system matrix to ``u_hat``.

    Full tensors must be zero-mean.  Low-rank inputs skip that check: their
    k=0 coefficient is annihilated by the gradient and, after lossy
    truncation, is only zero up to the truncation error.
    """
    if u.format == "full":
        check_zero_mean(u.data, ctx.grid.center)
        return FullTensor(apply_full(ctx, u.data))
    return apply_lowrank(ctx, u, bounds)


def build_rhs(ctx):
    """``-P^-1 div_hat F (A E)``, truncated in low-rank mode."""
    if ctx.fmt == "full":
        return FullTensor(rhs_full(ctx))
    return rhs_lowrank(ctx)


def effective_coefficient(ctx, u, load=None):
    """Energy ``a(E + grad u, E + grad u)``; equals A_H E.E at the minimiser."""
    load = ctx.load if load is None else np.asarray(load, dtype=float)
    if u.format == "full":
        return _energy_full(ctx, _strain_full(ctx, u.data, load))
    return _energy_lowrank(ctx, _strain_lowrank(ctx, u, load))


def energy_norm_sq(ctx, du):
    """Squared energetic semi-norm ``a(grad du, grad du)``."""
    return effective_coefficient(ctx, du, np.zeros(ctx.grid.d))


def spectrum_bounds(ctx):
    lo, hi = ctx.material.bounds
    return SpectrumBounds(float(lo), float(hi))


def hermitian_defect(v):
    """Relative size of the imaginary part of the physical-space field of ``v``."""
    x = v.full()
    phys = fftn_centered(x, "inverse")
    return float(np.linalg.norm(phys.imag) / max(np.linalg.norm(phys), 1e-300))


def operator_norm_bound(ctx):
    """Euclidean bound on the preconditioned operator.

    On zero-mean coefficients ``|x| <= |x|_P <= k_max |x|`` and the operator
    norm in the P-weighted norm is at most ``4 pi^2 C_A``.
    """
    kmax = np.sqrt(ctx.grid.d) * (ctx.grid.N - 1) / 2
    return spectrum_bounds(ctx).lambda_max * max(kmax, 1.0) * (1 + ctx.precond.rel_tol)


def matvec_error_bound(ctx, bounds):
    """Bound on ``|C~x - Cx|`` from the per-stage truncation bounds of one matvec.

    ``bounds`` is the list filled by :func:`apply_lowrank`: d flux bounds in
    nodal space, then the divergence and preconditioner bounds.
    """
    d = ctx.grid.d
    flux, b_div, b_pre = bounds[:d], bounds[d], bounds[d + 1]
    # forward FFT with 1/M^d scaling, then |2 pi k_a / k.k| <= 2 pi
    scale = 2 * np.pi / np.sqrt(ctx.eval_grid.size)
    kmax = max(np.sqrt(d) * (ctx.grid.N - 1) / 2, 1.0)
    pmax = 1.0 + ctx.precond.rel_tol * np.linalg.norm(ctx.precond.inverse) * kmax
    return float(pmax * (scale * sum(flux) + b_div) + b_pre)
