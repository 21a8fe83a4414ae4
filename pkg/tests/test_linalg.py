import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fftlowrank.linalg import EvenGridError, fft1d, fftn_centered, qr_thin, svd_thin, truncation_index

from conftest import dense_dftn, direct_dft


def test_fft_constant_maps_to_mean():
    out = fft1d(np.ones(3))
    np.testing.assert_allclose(out, [0, 1, 0], atol=1e-15)


def test_fft_inverse_of_delta_is_constant():
    np.testing.assert_allclose(fft1d([0, 1, 0], "inverse"), [1, 1, 1], atol=1e-15)


def test_fft_round_trip_length7(rng):
    x = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    np.testing.assert_allclose(fft1d(fft1d(x), "inverse"), x, atol=1e-12)
    # the round trip agrees with the direct summation oracle as well
    np.testing.assert_allclose(direct_dft(direct_dft(x), inverse=True), x, atol=1e-12)


def test_fft_even_rejected():
    with pytest.raises(EvenGridError, match="even grid size unsupported"):
        fft1d(np.ones(4))
    with pytest.raises(EvenGridError):
        fftn_centered(np.ones((3, 4)))


def test_fft_unknown_direction():
    with pytest.raises(ValueError):
        fft1d(np.ones(3), "sideways")


@settings(max_examples=40, deadline=None)
@given(h=st.integers(0, 50), seed=st.integers(0, 2 ** 31 - 1))
def test_fft_round_trip_property(h, seed):
    n = 2 * h + 1
    r = np.random.default_rng(seed)
    x = r.standard_normal(n) + 1j * r.standard_normal(n)
    back = fft1d(fft1d(x), "inverse")
    assert np.linalg.norm(back - x) <= 1e-12 * np.linalg.norm(x)


@settings(max_examples=30, deadline=None)
@given(h=st.integers(0, 20), seed=st.integers(0, 2 ** 31 - 1))
def test_fft_matches_direct_sum(h, seed):
    n = 2 * h + 1
    r = np.random.default_rng(seed)
    x = r.standard_normal(n) + 1j * r.standard_normal(n)
    fast = fft1d(x)
    slow = direct_dft(x)
    assert np.max(np.abs(fast - slow)) <= 1e-12 * max(1.0, np.max(np.abs(slow)))
    np.testing.assert_allclose(fft1d(x, "inverse"), direct_dft(x, inverse=True), atol=1e-11)


def test_fftn_matches_modewise_direct(rng):
    x = rng.standard_normal((5, 3, 7))
    np.testing.assert_allclose(fftn_centered(x), dense_dftn(x), atol=1e-13)
    np.testing.assert_allclose(fftn_centered(x, "inverse"), dense_dftn(x, inverse=True),
                               atol=1e-12)


def test_fft1d_along_axis(rng):
    x = rng.standard_normal((5, 3))
    out = fft1d(x, axis=0)
    for c in range(3):
        np.testing.assert_allclose(out[:, c], direct_dft(x[:, c]), atol=1e-13)


def test_svd_identity():
    f = svd_thin(np.eye(3))
    np.testing.assert_allclose(f.singular_values, [1, 1, 1])


def test_svd_rank_one(rng):
    a, b = rng.standard_normal(4), rng.standard_normal(3)
    s = svd_thin(np.outer(a, b)).singular_values
    assert s[0] == pytest.approx(np.linalg.norm(a) * np.linalg.norm(b), rel=1e-13)
    assert np.all(s[1:] < 1e-13 * s[0])


def test_svd_reconstruction(rng):
    m = rng.standard_normal((4, 3))
    f = svd_thin(m)
    assert f.singular_values.shape == (3,)
    assert np.linalg.norm(f.reconstruct() - m) <= 1e-12 * np.linalg.norm(m)
    assert np.all(np.diff(f.singular_values) <= 0)
    np.testing.assert_allclose(f.left.conj().T @ f.left, np.eye(3), atol=1e-13)
    np.testing.assert_allclose(f.right_adj @ f.right_adj.conj().T, np.eye(3), atol=1e-13)


def test_svd_matches_gram_eigenvalues(rng):
    m = rng.standard_normal((5, 4)) + 1j * rng.standard_normal((5, 4))
    s = svd_thin(m).singular_values
    ev = np.sort(np.linalg.eigvalsh(m.conj().T @ m))[::-1]
    np.testing.assert_allclose(s, np.sqrt(np.clip(ev, 0, None)), rtol=1e-10, atol=1e-10)


def test_svd_rejects_non_finite():
    with pytest.raises(ValueError):
        svd_thin(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_qr_orthonormal_input(rng):
    q0, _ = np.linalg.qr(rng.standard_normal((6, 3)))
    f = qr_thin(q0)
    np.testing.assert_allclose(np.abs(f.r), np.eye(3), atol=1e-12)


def test_qr_properties(rng):
    m = rng.standard_normal((6, 3))
    f = qr_thin(m)
    np.testing.assert_allclose(f.q.conj().T @ f.q, np.eye(3), atol=1e-12)
    assert np.linalg.norm(f.q @ f.r - m) <= 1e-12 * np.linalg.norm(m)
    np.testing.assert_allclose(np.tril(f.r, -1), 0, atol=1e-15)


def test_qr_rank_deficient(rng):
    a = rng.standard_normal((6, 1))
    m = np.hstack([a, 2 * a, a])
    f = qr_thin(m)
    assert np.linalg.norm(f.q @ f.r - m) <= 1e-12 * np.linalg.norm(m)


def test_qr_rejects_non_finite():
    with pytest.raises(ValueError):
        qr_thin(np.array([[np.inf], [1.0]]))


def test_truncation_index_examples():
    assert truncation_index([3, 2, 1], tol=1) == 2
    assert truncation_index([3, 2, 1], tol=0) == 3
    assert truncation_index([3, 2, 1], rank=10) == 3
    assert truncation_index([3, 2, 1], rank=1) == 1
    assert truncation_index([3, 2, 1], tol=np.sqrt(5)) == 1
    assert truncation_index([3, 2, 1], tol=100) == 0


def test_truncation_index_rejects_bad_input():
    with pytest.raises(ValueError):
        truncation_index([3, -1], tol=0)
    with pytest.raises(ValueError):
        truncation_index([1, 2], tol=0)
    with pytest.raises(ValueError):
        truncation_index([2, 1], rank=0)
    with pytest.raises(ValueError):
        truncation_index([2, 1])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=1, max_size=12), st.floats(0, 20))
def test_truncation_index_is_minimal(values, tol):
    s = np.sort(np.array(values))[::-1]
    k = truncation_index(s, tol=tol)
    assert np.sqrt(np.sum(s[k:] ** 2)) <= tol
    if k > 0:
        assert np.sqrt(np.sum(s[k - 1:] ** 2)) > tol
