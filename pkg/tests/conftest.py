"""Shared oracles for the test-suite.

Everything here is written against explicit sums and closed forms so that
it does not reuse the package's FFT or operator code.
"""
import itertools

import numpy as np
import pytest

ACCEPTANCE_LINES = []


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running test")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def centered(n):
    h = (n - 1) // 2
    return np.arange(-h, h + 1)


def direct_dft(x, inverse=False):
    """O(N^2) centered DFT: forward carries 1/N, inverse none."""
    x = np.asarray(x, dtype=complex)
    k = centered(len(x))
    n = len(x)
    sign = 1 if inverse else -1
    w = np.exp(sign * 2j * np.pi * np.outer(k, k) / n)
    return w @ x if inverse else (w @ x) / n


def dense_dftn(x, inverse=False):
    """Mode-by-mode application of :func:`direct_dft`."""
    x = np.asarray(x, dtype=complex)
    for ax in range(x.ndim):
        x = np.apply_along_axis(direct_dft, ax, x, inverse)
    return x


def frequencies(d, n):
    """All integer vectors of Z_n^d in C order."""
    return np.array(list(itertools.product(centered(n), repeat=d)))


def indicator_coefficient(m, t):
    """int_{-1/2}^{t} exp(-2 pi i m x) dx, closed form."""
    if m == 0:
        return t + 0.5
    return (np.exp(-2j * np.pi * m * t) - np.exp(1j * np.pi * m)) / (-2j * np.pi * m)


def square_hat(j, rho=10.0, t=0.3):
    """Exact Fourier coefficient of 1 + rho * prod 1[x_i < t]."""
    val = rho
    for m in j:
        val = val * indicator_coefficient(int(m), t)
    return val + (1.0 if not np.any(j) else 0.0)


def sampled_hat(values, points):
    """Grid coefficient (1/|X|) sum_x a(x) exp(-2 pi i j.x) by explicit summation."""
    flat = values.ravel()

    def hat(j):
        phase = points @ np.asarray(j, dtype=float)
        return np.sum(flat * np.exp(-2j * np.pi * phase)) / flat.size

    return hat


def grid_points(d, n):
    return frequencies(d, n) / n


class DenseCellProblem:
    """Dense Galerkin system for A = a I + B on trigonometric polynomials of Z_N.

    ``hat(j)`` is the Fourier coefficient of ``a`` used by the bilinear form:
    exact for Ga, the grid (aliased) coefficient for GaNi.
    """

    def __init__(self, d, n, hat, shift=None, load=None):
        self.d, self.n = d, n
        self.B = np.zeros((d, d)) if shift is None else np.asarray(shift)
        self.E = np.eye(d)[0] if load is None else np.asarray(load, dtype=float)
        ks = frequencies(d, n)
        self.ks = ks
        self.nz = np.any(ks != 0, axis=1)
        cache = {}

        def h(j):
            key = tuple(int(v) for v in j)
            if key not in cache:
                cache[key] = hat(np.array(key))
            return cache[key]

        self.hat = h
        size = len(ks)
        K = np.zeros((size, size), dtype=complex)
        for a in range(size):
            for b in range(size):
                m, k = ks[a], ks[b]
                K[a, b] = 4 * np.pi ** 2 * (h(m - k) * (m @ k) + (a == b) * (m @ self.B @ k))
        self.K = K
        self.f = np.array([2j * np.pi * h(m) * (m @ self.E) for m in ks])

    def operator_matrix(self):
        """Matrix of the preconditioned operator on all of Z_N^d."""
        p = np.array([k @ k for k in self.ks], dtype=float)
        pinv = np.where(p > 0, 1.0 / np.where(p > 0, p, 1.0), 0.0)
        return pinv[:, None] * self.K

    def rhs(self):
        p = np.array([k @ k for k in self.ks], dtype=float)
        pinv = np.where(p > 0, 1.0 / np.where(p > 0, p, 1.0), 0.0)
        return pinv * self.f

    def solve(self):
        nz = self.nz
        u = np.zeros(len(self.ks), dtype=complex)
        u[nz] = np.linalg.solve(self.K[np.ix_(nz, nz)], self.f[nz])
        return u

    def a_eff(self, u=None):
        u = self.solve() if u is None else u
        E = self.E
        val = self.hat(np.zeros(self.d, dtype=int)) * (E @ E) + E @ self.B @ E
        for k, uk in zip(self.ks, u):
            if np.any(k):
                val += 2j * np.pi * (k @ E) * uk * self.hat(-k)
        return float(np.real(val))

    def reshape(self, u):
        return np.asarray(u).reshape((self.n,) * self.d)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
