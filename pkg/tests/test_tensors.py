import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fftlowrank.homogenization import MaterialSpec, build_grid, material_gani
from fftlowrank.tensors import (CpTensor, FormatMismatch, FullTensor, TruncationPolicy,
                                TtTensor, TuckerTensor, constant, decompose, fft_d, hadamard,
                                inner, linear_combine, norm, param_count, random_tensor,
                                rank_one, reconstruct, truncate)
from fftlowrank.tensors import io as tio

from conftest import dense_dftn

LOWRANK = ("cp", "tucker", "tt")


def rel(a, b):
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(np.linalg.norm(b), 1e-300)


def formats_for(d):
    return LOWRANK if d == 2 else ("tucker", "tt")


# -- decompose / reconstruct ------------------------------------------------

@pytest.mark.parametrize("fmt", LOWRANK)
def test_square_material_is_rank_two(fmt):
    grid = build_grid(2, 15)
    values = material_gani(MaterialSpec("square"), grid).scalar.full()
    v, bound = decompose(values, fmt, TruncationPolicy.tolerance(1e-10 * np.linalg.norm(values)),
                         return_bound=True)
    assert v.max_rank() == 2
    assert rel(v.full(), values) < 1e-12


def test_square_material_rank_two_3d():
    grid = build_grid(3, 9)
    values = material_gani(MaterialSpec("square"), grid).scalar.full()
    tol = TruncationPolicy.tolerance(1e-10 * np.linalg.norm(values))
    assert decompose(values, "tucker", tol).ranks == (2, 2, 2)
    assert decompose(values, "tt", tol).ranks == (2, 2)


def test_separable_tensor_rank_one(rng):
    a, b, c = rng.standard_normal(4), rng.standard_normal(5), rng.standard_normal(6)
    x = np.einsum("i,j,k->ijk", a, b, c)
    pol = TruncationPolicy.tolerance(1e-12 * np.linalg.norm(x))
    tt = decompose(x, "tt", pol)
    tk = decompose(x, "tucker", pol)
    assert tt.ranks == (1, 1)
    assert tk.ranks == (1, 1, 1)
    assert rel(tt.full(), x) < 1e-13 and rel(tk.full(), x) < 1e-13


@pytest.mark.parametrize("fmt", ("tucker", "tt"))
def test_decompose_exact_at_zero_tolerance(fmt, rng):
    x = rng.standard_normal((7, 7, 7))
    assert rel(reconstruct(decompose(x, fmt, TruncationPolicy.tolerance(0))), x) < 1e-10


def test_decompose_tt_round_trip_5(rng):
    x = rng.standard_normal((5, 5, 5))
    assert rel(reconstruct(decompose(x, "tt", TruncationPolicy.tolerance(0))), x) < 1e-10


def test_decompose_orthogonality(rng):
    x = rng.standard_normal((6, 5, 4))
    tk = decompose(x, "tucker", TruncationPolicy.fixed(3))
    assert all(tk.orthonormal)
    for f in tk.factors:
        np.testing.assert_allclose(f.conj().T @ f, np.eye(f.shape[1]), atol=1e-10)
    tt = decompose(x, "tt", TruncationPolicy.fixed(3))
    for g in tt.carriages[:-1]:
        m = g.reshape(-1, g.shape[2])
        np.testing.assert_allclose(m.conj().T @ m, np.eye(m.shape[1]), atol=1e-10)


def test_cp_rejects_order_three(rng):
    with pytest.raises(NotImplementedError, match="CP construction for d>=3 not supported"):
        decompose(rng.standard_normal((3, 3, 3)), "cp")
    v = random_tensor((3, 3, 3), 2, "cp", rng)
    with pytest.raises(NotImplementedError):
        v.truncate(TruncationPolicy.fixed(1))


def test_reconstruct_examples():
    v = CpTensor([2.0], [np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]])])
    np.testing.assert_array_equal(reconstruct(v), [[0, 2], [0, 0]])
    ones = TtTensor([np.ones((1, 3, 1)), np.ones((1, 3, 1))])
    np.testing.assert_array_equal(reconstruct(ones), np.ones((3, 3)))


def test_reconstruct_guard():
    v = rank_one([np.ones(100)] * 3, "tt")
    with pytest.raises(MemoryError):
        v.full(cap=1000)


# -- linear combination -------------------------------------------------------

def test_combine_with_zero_keeps_values_and_adds_ranks(rng):
    v = random_tensor((5, 6), 2, "cp", rng)
    w = random_tensor((5, 6), 3, "cp", rng)
    out = linear_combine(1.0, v, 0.0, w)
    assert out.ranks == (5,)
    assert rel(out.full(), v.full()) < 1e-14


def test_tt_rank_addition(rng):
    v = random_tensor((4, 5, 6, 3), [2, 3, 2], "tt", rng)
    w = random_tensor((4, 5, 6, 3), [1, 2, 2], "tt", rng)
    assert (v + w).ranks == (3, 5, 4)
    v3 = random_tensor((4, 5, 6), [2, 3], "tt", rng)
    w3 = random_tensor((4, 5, 6), [1, 2], "tt", rng)
    assert (v3 + w3).ranks == (3, 5)


@pytest.mark.parametrize("fmt", LOWRANK)
def test_combine_dense_oracle(fmt, rng):
    shape = (5, 6) if fmt == "cp" else (5, 4, 6)
    v = random_tensor(shape, 2, fmt, rng, complex_=True)
    w = random_tensor(shape, 2, fmt, rng, complex_=True)
    a, b = 0.3 - 1.2j, 2.5
    assert rel(linear_combine(a, v, b, w).full(), a * v.full() + b * w.full()) < 1e-12


def test_combine_mismatch(rng):
    v = random_tensor((5, 5), 2, "tt", rng)
    with pytest.raises(FormatMismatch):
        v + random_tensor((5, 5), 2, "tucker", rng)
    with pytest.raises(FormatMismatch):
        v + random_tensor((5, 4), 2, "tt", rng)


# -- Hadamard -------------------------------------------------------------------

def test_cp_hadamard_rank_product(rng):
    v = random_tensor((5, 6), 2, "cp", rng)
    w = random_tensor((5, 6), 3, "cp", rng)
    assert hadamard(v, w).ranks == (6,)


@pytest.mark.parametrize("fmt", LOWRANK)
def test_hadamard_with_ones(fmt, rng):
    shape = (4, 5) if fmt == "cp" else (4, 5, 3)
    v = random_tensor(shape, 2, fmt, rng)
    ones = constant(1.0, shape, fmt)
    np.testing.assert_allclose(hadamard(ones, v).full(), v.full(), rtol=0, atol=1e-14)


def test_tucker_hadamard_dense(rng):
    v = random_tensor((5, 5, 5), 2, "tucker", rng)
    w = random_tensor((5, 5, 5), 2, "tucker", rng)
    h = hadamard(v, w)
    assert h.ranks == (4, 4, 4)
    assert rel(h.full(), v.full() * w.full()) < 1e-12


def test_tt_hadamard_ranks(rng):
    v = random_tensor((4, 5, 6), [2, 3], "tt", rng)
    w = random_tensor((4, 5, 6), [3, 1], "tt", rng)
    h = v.hadamard(w)
    assert h.ranks == (6, 3)
    assert rel(h.full(), v.full() * w.full()) < 1e-12


# -- FFT -------------------------------------------------------------------------

@pytest.mark.parametrize("fmt", ("full",) + LOWRANK)
def test_fft_keeps_ranks(fmt, rng):
    shape = (5, 7) if fmt == "cp" else (5, 7, 3)
    v = random_tensor(shape, 2, fmt, rng)
    assert fft_d(v).ranks == v.ranks
    assert fft_d(v, "inverse").ranks == v.ranks


@pytest.mark.parametrize("fmt", ("full",) + LOWRANK)
def test_fft_constant_is_delta(fmt):
    shape = (5, 3)
    out = fft_d(constant(2.5, shape, fmt)).full()
    expected = np.zeros(shape)
    expected[2, 1] = 2.5
    np.testing.assert_allclose(out, expected, atol=1e-14)


def test_fft_tt_dense_oracle(rng):
    v = random_tensor((5, 5, 5), 2, "tt", rng, complex_=True)
    assert rel(fft_d(v).full(), dense_dftn(v.full())) < 1e-11
    assert rel(fft_d(v, "inverse").full(), dense_dftn(v.full(), inverse=True)) < 1e-11


# -- truncation ---------------------------------------------------------------------

@pytest.mark.parametrize("fmt", LOWRANK)
def test_truncate_to_current_rank_is_identity(fmt, rng):
    shape = (6, 7) if fmt == "cp" else (6, 7, 5)
    v = random_tensor(shape, 3, fmt, rng)
    t = truncate(v, TruncationPolicy.fixed(3))
    assert rel(t.full(), v.full()) < 1e-12


@pytest.mark.parametrize("fmt", LOWRANK)
def test_truncate_recovers_rank_of_doubled(fmt, rng):
    shape = (6, 7) if fmt == "cp" else (6, 7, 5)
    v = random_tensor(shape, 2, fmt, rng)
    t = truncate(v + v, TruncationPolicy.tolerance(1e-12 * v.norm()))
    assert t.ranks == v.ranks
    assert rel(t.full(), 2 * v.full()) < 1e-12


def test_tucker_truncation_bound(rng):
    v = random_tensor((6, 6, 6), 4, "tucker", rng)
    t, bound = truncate(v, TruncationPolicy.fixed(2), return_bound=True)
    err = np.linalg.norm(v.full() - t.full())
    assert err <= bound * (1 + 1e-12)
    assert err > 0


def test_tt_truncation_bound(rng):
    v = random_tensor((6, 6, 6), [4, 4], "tt", rng)
    t, bound = truncate(v, TruncationPolicy.fixed(2), return_bound=True)
    assert np.linalg.norm(v.full() - t.full()) <= bound * (1 + 1e-12)


@pytest.mark.parametrize("fmt", LOWRANK)
def test_tolerance_policy_meets_tolerance(fmt, rng):
    shape = (8, 9) if fmt == "cp" else (6, 7, 5)
    v = random_tensor(shape, 4, fmt, rng)
    tol = 0.2 * v.norm()
    t = truncate(v, TruncationPolicy.tolerance(tol))
    assert np.linalg.norm(v.full() - t.full()) <= tol * (1 + 1e-12)


def test_truncate_rank_below_one_rejected():
    with pytest.raises(ValueError):
        TruncationPolicy.fixed(0)
    with pytest.raises(ValueError):
        TruncationPolicy.tolerance(-1.0)


@pytest.mark.parametrize("fmt", LOWRANK)
def test_truncate_is_projection(fmt, rng):
    shape = (6, 7) if fmt == "cp" else (6, 7, 5)
    v = random_tensor(shape, 4, fmt, rng, complex_=True)
    p = TruncationPolicy.fixed(2)
    once = truncate(v, p)
    twice = truncate(once, p)
    assert np.linalg.norm(once.full() - twice.full()) <= 1e-12 * np.linalg.norm(once.full())


@pytest.mark.parametrize("fmt", LOWRANK)
def test_small_norm_drop(fmt, rng):
    shape = (6, 7) if fmt == "cp" else (6, 7, 5)
    v = random_tensor(shape, 2, fmt, rng)
    tiny = random_tensor(shape, 1, fmt, rng).scale(1e-9)
    t, bound = truncate(v + tiny, TruncationPolicy("tol", tol=1e-6 * v.norm(),
                                                   drop_threshold=1e-6), return_bound=True)
    assert np.linalg.norm(t.full() - (v + tiny).full()) <= bound * (1 + 1e-9) + 1e-12
    assert t.max_rank() <= 2


# -- inner products and norms -----------------------------------------------------

@pytest.mark.parametrize("fmt", ("full",) + LOWRANK)
def test_inner_disjoint_support(fmt):
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert inner(rank_one([e1, e1], fmt), rank_one([e2, e2], fmt)) == 0


def test_tucker_core_norm_shortcut(rng):
    x = rng.standard_normal((5, 6, 4))
    v = decompose(x, "tucker", TruncationPolicy.fixed(3))
    val, shortcut = v.norm_route()
    assert shortcut
    assert val == pytest.approx(np.linalg.norm(v.full()), rel=1e-12)
    w = random_tensor((5, 6, 4), 2, "tucker", rng)
    val, shortcut = w.norm_route()
    assert not shortcut
    assert val == pytest.approx(np.linalg.norm(w.full()), rel=1e-12)


def test_tt_inner_dense(rng):
    for _ in range(5):
        v = random_tensor((5, 5, 5), 3, "tt", rng, complex_=True)
        w = random_tensor((5, 5, 5), 3, "tt", rng, complex_=True)
        ref = np.vdot(w.full(), v.full())
        assert abs(inner(v, w) - ref) <= 1e-11 * abs(ref)
        assert norm(v) == pytest.approx(np.linalg.norm(v.full()), rel=1e-12)


# -- parameter accounting ---------------------------------------------------------

def test_param_count_table_values(rng):
    n, r = 100, 5
    cp = CpTensor(np.ones(r), [np.ones((r, n))] * 3)
    tk = TuckerTensor(np.ones((r,) * 3), [np.ones((n, r))] * 3)
    tt = TtTensor([np.ones((1, n, r)), np.ones((r, n, r)), np.ones((r, n, 1))])
    assert param_count(cp) == 1500
    assert param_count(tk) == 1625
    assert param_count(tt) == 3500
    assert param_count(FullTensor(np.ones((7, 7, 7)))) == 343


# -- serialisation ----------------------------------------------------------------------

@pytest.mark.parametrize("fmt", ("full",) + LOWRANK)
@pytest.mark.parametrize("cplx", (False, True))
def test_container_round_trip(fmt, cplx, rng, tmp_path):
    shape = (5, 6) if fmt == "cp" else (5, 6, 3)
    v = random_tensor(shape, 2, fmt, rng, complex_=cplx)
    path = tmp_path / "t.lrt"
    tio.save(v, path)
    back = tio.load(path)
    assert back.format == v.format and back.ranks == v.ranks
    np.testing.assert_array_equal(back.full(), v.full())


def test_container_bad_magic():
    with pytest.raises(ValueError):
        tio.loads(b"NOPE" + b"\0" * 20)


# -- randomized dense-oracle property -----------------------------------------------

@st.composite
def operand_pair(draw):
    d = draw(st.sampled_from([2, 3]))
    fmt = draw(st.sampled_from(formats_for(d)))
    shape = tuple(draw(st.integers(2, 9)) for _ in range(d))
    r1, r2 = draw(st.integers(1, 3)), draw(st.integers(1, 3))
    seed = draw(st.integers(0, 2 ** 31 - 1))
    cplx = draw(st.booleans())
    return d, fmt, shape, r1, r2, seed, cplx


@settings(max_examples=60, deadline=None)
@given(operand_pair())
def test_binary_ops_match_dense(case):
    d, fmt, shape, r1, r2, seed, cplx = case
    r = np.random.default_rng(seed)
    v = random_tensor(shape, r1, fmt, r, complex_=cplx)
    w = random_tensor(shape, r2, fmt, r, complex_=cplx)
    dv, dw = v.full(), w.full()
    assert rel((v + w).full(), dv + dw) < 1e-11
    h = v.hadamard(w)
    assert rel(h.full(), dv * dw) < 1e-11
    assert h.ranks == tuple(a * b for a, b in zip(v.ranks, w.ranks))
    assert abs(v.inner(w) - np.vdot(dw, dv)) <= 1e-11 * max(np.linalg.norm(dv) * np.linalg.norm(dw), 1e-300)
    if all(n % 2 for n in shape):
        f = v.fft()
        assert f.ranks == v.ranks
        assert rel(f.full(), dense_dftn(dv)) < 1e-11


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["tucker", "tt"]), st.integers(1, 3), st.integers(0, 2 ** 31 - 1))
def test_truncation_error_within_bound(fmt, k, seed):
    r = np.random.default_rng(seed)
    v = random_tensor((6, 6, 6), 4, fmt, r)
    t, bound = v.truncate_with_bound(TruncationPolicy.fixed(k))
    assert np.linalg.norm(v.full() - t.full()) <= bound * (1 + 1e-10) + 1e-12
