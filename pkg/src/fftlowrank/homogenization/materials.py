"""Material coefficients and their two discretisations.

Every material in scope has the form ``A(x) = a(x) I + B`` with a scalar
field ``a`` and an optional constant symmetric matrix ``B``, so a field is
stored as one scalar tensor plus ``B`` rather than d*d component tensors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
import scipy.optimize

from ..linalg import fftn_centered
from ..tensors import FullTensor, TruncationPolicy, decompose, rank_one
from .grid import GridSpec

#: Constant anisotropic shifts with eigenvalues (1, 10) in 2D and (1, 5, 10) in 3D.
ANISOTROPIC_SHIFT = {
    2: np.array([[5.5, -4.5], [-4.5, 5.5]]),
    3: np.array([[4.25, -3.25, -1.25 * np.sqrt(2)],
                 [-3.25, 4.25, 1.25 * np.sqrt(2)],
                 [-1.25 * np.sqrt(2), 1.25 * np.sqrt(2), 7.5]]),
}

DEFAULT_KL_MODES = {2: 20, 3: 26}
#: rank used for low-rank approximations of non-separable coefficient fields
DEFAULT_MATERIAL_RANK = 10
#: largest oversampled quadrature grid (entries) for Ga coefficients
OVERSAMPLE_CAP = 2 ** 25

_KINDS = {
    "square": "square", "square-inclusion": "square",
    "stochastic": "stochastic", "stochastic-kl": "stochastic", "kl": "stochastic",
    "constant": "constant",
}


@dataclass(frozen=True)
class MaterialSpec:
    """Analytic description of a material.

    ``square``: ``a = 1 + contrast * prod_i 1[x_i < threshold]``.
    ``stochastic``: ``a = exp(C + D * sum_k c_k cos(2 pi k.x))`` over the
    ``n_modes`` lowest nonzero frequencies, scaled to span ``bounds``.
    ``constant``: ``a = value``.
    ``anisotropic`` adds the constant matrix :data:`ANISOTROPIC_SHIFT`.
    """

    kind: str = "square"
    contrast: float = 10.0
    threshold: float = 0.3
    value: float = 1.0
    seed: int = 0
    n_modes: Optional[int] = None
    bounds: Tuple[float, float] = (1.0, 10.0)
    anisotropic: bool = False

    def __post_init__(self):
        kind = _KINDS.get(str(self.kind).lower())
        if kind is None:
            raise ValueError(f"unknown material kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "square" and self.contrast <= -1:
            raise ValueError("contrast must exceed -1 for an elliptic material")
        if kind == "constant" and self.value <= 0:
            raise ValueError("constant material needs a positive value")
        lo, hi = self.bounds
        if not 0 < lo <= hi:
            raise ValueError("stochastic bounds must satisfy 0 < min <= max")

    def shift(self, d):
        return ANISOTROPIC_SHIFT[d] if self.anisotropic else None


@dataclass(frozen=True)
class _FieldBase:
    grid: GridSpec
    eval_grid: GridSpec
    scalar: object
    shift: Optional[np.ndarray]
    bounds: Tuple[float, float]
    kind: str

    @property
    def fmt(self):
        return self.scalar.format

    def component(self, alpha, beta):
        """Tensor of A[alpha, beta] on the evaluation grid."""
        b = 0.0 if self.shift is None else float(self.shift[alpha, beta])
        base = self.scalar if alpha == beta else self.scalar.scale(0.0)
        if b == 0.0:
            return base
        const = rank_one([np.full(n, b if j == 0 else 1.0) for j, n in
                          enumerate(self.eval_grid.shape)], self.fmt)
        return base.combine(1.0, const, 1.0)


@dataclass(frozen=True)
class MaterialFieldGaNi(_FieldBase):
    """Material sampled at the grid points (rectangle-rule integration)."""


@dataclass(frozen=True)
class MaterialFieldGa(_FieldBase):
    """Material on the double grid for exact integration.

    ``fourier`` holds the Fourier coefficients of ``a`` on Z_{2N-1} and
    ``scalar`` their nodal values on the double grid.  ``approximate`` is set
    when the coefficients come from oversampled quadrature instead of a
    closed form.
    """

    fourier: object = None
    approximate: bool = False


# -- analytic pieces ---------------------------------------------------------

def indicator_samples(points, threshold):
    return (np.asarray(points) < threshold).astype(float)


def indicator_fourier(freqs, threshold):
    """``int_{-1/2}^{threshold} exp(-2 pi i m x) dx`` for each frequency m."""
    m = np.asarray(freqs, dtype=float)
    out = np.empty(m.shape, dtype=complex)
    zero = m == 0
    out[zero] = threshold + 0.5
    mm = m[~zero]
    out[~zero] = (np.exp(-2j * np.pi * mm * threshold) - np.exp(1j * np.pi * mm)) / (-2j * np.pi * mm)
    return out


def kl_modes(d, count):
    """The ``count`` lowest-|k| nonzero integer frequencies, ties lexicographic."""
    reach = 1
    while (2 * reach + 1) ** d - 1 < count:
        reach += 1
    reach += 1
    axes = [np.arange(-reach, reach + 1)] * d
    ks = np.array(np.meshgrid(*axes, indexing="ij")).reshape(d, -1).T
    ks = ks[np.any(ks != 0, axis=1)]
    keys = [tuple([int(np.dot(k, k))] + list(k)) for k in ks]
    order = sorted(range(len(ks)), key=lambda i: keys[i])
    return ks[order[:count]]


@dataclass(frozen=True)
class KLSample:
    """One fixed sample of the log-trigonometric random field."""

    modes: np.ndarray
    coeffs: np.ndarray
    C: float
    D: float
    exponent_range: Tuple[float, float] = field(default=(0.0, 0.0))

    def exponent(self, axes):
        """Sum_k c_k cos(2 pi k.x) on the tensor grid spanned by ``axes``."""
        shape = tuple(len(a) for a in axes)
        acc = np.zeros(shape, dtype=complex)
        for k, c in zip(self.modes, self.coeffs):
            term = np.array(c, dtype=complex)
            for j, x in enumerate(axes):
                term = np.multiply.outer(term, np.exp(2j * np.pi * k[j] * np.asarray(x)))
            acc += term
        return acc.real

    def values(self, axes):
        return np.exp(self.C + self.D * self.exponent(axes))

    def at(self, x):
        x = np.atleast_2d(x)
        g = np.cos(2 * np.pi * x @ self.modes.T) @ self.coeffs
        return np.exp(self.C + self.D * g)


def _exponent_point(modes, coeffs, x):
    phase = 2 * np.pi * modes @ x
    return float(coeffs @ np.cos(phase)), -2 * np.pi * (coeffs * np.sin(phase)) @ modes


def _extreme(modes, coeffs, d, sign):
    # coarse search on a periodic grid, then local polish of the best candidates
    n = 48 if d == 2 else 24
    axes = [np.arange(n) / n - 0.5] * d
    probe = KLSample(modes, coeffs, 0.0, 1.0)
    g = sign * probe.exponent(axes)
    best = np.argsort(g.ravel())[:5]
    out = np.inf
    for flat in best:
        idx = np.unravel_index(flat, g.shape)
        x0 = np.array([axes[j][i] for j, i in enumerate(idx)])

        def fun(x):
            v, grad = _exponent_point(modes, coeffs, x)
            return sign * v, sign * grad

        res = scipy.optimize.minimize(fun, x0, jac=True, method="BFGS",
                                      options={"gtol": 1e-13})
        out = min(out, float(res.fun), float(sign * _exponent_point(modes, coeffs, x0)[0]))
    return sign * out


@lru_cache(maxsize=16)
def kl_sample(d, seed=0, n_modes=None, bounds=(1.0, 10.0)):
    """Fixed sample: modes, uniform[-0.5, 0.5] coefficients from ``seed``.

    ``C`` and ``D`` are fitted to the continuous extremes of the exponent so
    the field spans ``bounds`` independently of any grid.
    """
    count = DEFAULT_KL_MODES[d] if n_modes is None else int(n_modes)
    modes = kl_modes(d, count)
    coeffs = np.random.default_rng(seed).uniform(-0.5, 0.5, count)
    gmin = _extreme(modes, coeffs, d, 1.0)
    gmax = _extreme(modes, coeffs, d, -1.0)
    lo, hi = bounds
    D = (np.log(hi) - np.log(lo)) / (gmax - gmin)
    C = np.log(lo) - D * gmin
    return KLSample(modes, coeffs, float(C), float(D), (gmin, gmax))


# -- discretisations ---------------------------------------------------------

def _separable(vec_pairs, weights, fmt):
    """Sum of weighted rank-1 terms, each term is one vector repeated over all axes."""
    out = None
    for w, vecs in zip(weights, vec_pairs):
        vecs = [v.astype(complex) if np.iscomplexobj(v) else v for v in vecs]
        vecs = [vecs[0] * w] + list(vecs[1:])
        term = rank_one(vecs, fmt)
        out = term if out is None else out.combine(1.0, term, 1.0)
    return out


def _shift_bounds(lo, hi, shift):
    if shift is None:
        return float(lo), float(hi)
    eig = np.linalg.eigvalsh(shift)
    return float(lo + eig[0]), float(hi + eig[-1])


def _compress(values, fmt, rank):
    if fmt == "full":
        if rank is None:
            return FullTensor(values)
        # the low-rank problem's material, recovered densely
        return FullTensor(decompose(values, "tt", TruncationPolicy.fixed(rank)).full())
    return decompose(values, fmt, TruncationPolicy.fixed(rank or DEFAULT_MATERIAL_RANK))


def material_gani(spec: MaterialSpec, grid: GridSpec, fmt="full", rank=None):
    """Coefficient field sampled at the grid points ``x_k = k/N``."""
    d, n = grid.d, grid.N
    shift = spec.shift(d)
    if spec.kind == "constant":
        scalar = _separable([[np.ones(n)] * d], [spec.value], fmt)
        bounds = (spec.value, spec.value)
    elif spec.kind == "square":
        chi = indicator_samples(grid.points, spec.threshold)
        scalar = _separable([[np.ones(n)] * d, [chi] * d], [1.0, spec.contrast], fmt)
        bounds = (min(1.0, 1.0 + spec.contrast), max(1.0, 1.0 + spec.contrast))
    else:
        sample = kl_sample(d, spec.seed, spec.n_modes, tuple(spec.bounds))
        values = sample.values([grid.points] * d)
        scalar = _compress(values, fmt, rank)
        bounds = (float(values.min()), float(values.max()))
    return MaterialFieldGaNi(grid, grid, scalar, shift, _shift_bounds(*bounds, shift), spec.kind)


def material_ga(spec: MaterialSpec, grid: GridSpec, fmt="full", rank=None,
                oversample_cap=OVERSAMPLE_CAP):
    """Fourier coefficients of the material on the double grid Z_{2N-1}."""
    d = grid.d
    dbl = grid.double()
    m = dbl.N
    shift = spec.shift(d)
    freqs = dbl.freqs
    delta = (freqs == 0).astype(float)
    approximate = False
    if spec.kind == "constant":
        fourier = _separable([[delta] * d], [spec.value], fmt)
        bounds = (spec.value, spec.value)
    elif spec.kind == "square":
        h = indicator_fourier(freqs, spec.threshold)
        fourier = _separable([[delta] * d, [h] * d], [1.0, spec.contrast], fmt)
        bounds = (min(1.0, 1.0 + spec.contrast), max(1.0, 1.0 + spec.contrast))
    else:
        sample = kl_sample(d, spec.seed, spec.n_modes, tuple(spec.bounds))
        fine = 4 * grid.N - 1
        if fine ** d > oversample_cap:
            raise MemoryError(
                f"oversampled quadrature grid {fine}^{d} exceeds the cap {oversample_cap}; "
                "use the gani scheme for the stochastic material at this size or raise the cap")
        fine_pts = GridSpec(d, fine).points
        coeffs = fftn_centered(sample.values([fine_pts] * d))
        lo = (fine - m) // 2
        coeffs = coeffs[(slice(lo, lo + m),) * d]
        if fmt == "full" and rank is None:
            fourier = FullTensor(coeffs)
        else:
            nodal = fftn_centered(coeffs, "inverse").real
            fourier = _compress(nodal, fmt, rank).fft("forward")
        bounds = tuple(spec.bounds)
        approximate = True
    scalar = fourier.fft("inverse")
    if fmt == "full":
        scalar = FullTensor(scalar.data.real)
    return MaterialFieldGa(grid, dbl, scalar, shift, _shift_bounds(*bounds, shift), spec.kind,
                           fourier=fourier, approximate=approximate)


def material_field(spec, grid, scheme, fmt="full", rank=None):
    if scheme == "gani":
        return material_gani(spec, grid, fmt, rank)
    if scheme == "ga":
        return material_ga(spec, grid, fmt, rank)
    raise ValueError(f"unknown scheme {scheme!r}")
