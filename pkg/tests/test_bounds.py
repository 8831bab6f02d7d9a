import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from oracles import bcirc, random_hermitian_array
from tptail import bounds as B
from tptail.bounds import BoundQuery as Q
from tptail.spectral import NotHermitianError
from tptail.tensor import DenseTensor3, identity, ones, zeros


def test_query_validation():
    with pytest.raises(ValueError):
        Q(m=0, p=1)
    with pytest.raises(ValueError):
        Q(m=1, p=1, sigma2=-1)
    with pytest.raises(ValueError):
        Q(m=1, p=1, T=0)
    with pytest.raises(ValueError, match="length"):
        Q(m=1, p=3, b=(1.0, 2.0))
    assert Q(m=1, p=3, b=(3.0, 1.0, 2.0)).b_min == 1.0


def test_binary_divergence_examples():
    assert B.binary_divergence(0.3, 0.3) == 0
    assert B.binary_divergence(1.0, 0.2) == pytest.approx(math.log(5))
    assert B.binary_divergence(0.5, 0.25) == pytest.approx(0.143841036, abs=1e-9)
    assert B.binary_divergence(0.5, 0.0) == math.inf
    assert B.binary_divergence(0.0, 0.0) == 0
    with pytest.raises(ValueError):
        B.binary_divergence(1.5, 0.5)


def test_binary_divergence_grid_nonnegative():
    grid = np.linspace(0, 1, 100)
    inner = grid[1:-1]
    vals = np.array([[B.binary_divergence(c, d) for d in inner] for c in grid])
    assert np.all(vals >= 0)
    for i, c in enumerate(grid):
        for j, d in enumerate(inner):
            assert (vals[i, j] == 0) == (c == d) or abs(c - d) < 1e-15


def test_gaussian_series_examples():
    assert B.gaussian_series_lambda_bound(Q(m=2, p=3, sigma2=1, theta=0)).value == 6
    s = 1.3
    theta = s * math.sqrt(2 * math.log(6))
    assert B.gaussian_series_lambda_bound(Q(m=2, p=3, sigma2=s * s, theta=theta)).value == pytest.approx(1)
    assert B.gaussian_series_lambda_bound(Q(m=2, p=3, sigma2=1, theta=2)).value == pytest.approx(0.812011699, rel=1e-8)
    assert B.gaussian_series_lambda_bound(Q(m=2, p=3, sigma2=0, theta=1)).value == 0
    with pytest.raises(ValueError):
        B.gaussian_series_lambda_bound(Q(m=1, p=1, sigma2=1, theta=-1))


def test_gaussian_series_norm():
    assert B.gaussian_series_norm_bound(Q(m=2, p=2, sigma2=1, theta=0)).value == 8
    q = Q(m=3, p=2, sigma2=0.7, theta=1.1)
    assert B.gaussian_series_norm_bound(q).value == 2 * B.gaussian_series_lambda_bound(q).value
    assert B.gaussian_series_norm_bound(Q(m=1, p=1, sigma2=1, theta=2)).value == pytest.approx(0.270670566, rel=1e-8)


def test_gaussian_series_eigentuple():
    q = Q(m=2, p=2, sigma2=4, b=(3.0, 5.0))
    v = B.gaussian_series_eigentuple_bound(q)
    # 4 exp(-9/8) = 1.298612..., not 1.29953
    assert v.value == pytest.approx(4 * math.exp(-9 / 8), rel=1e-12)
    assert v.value == pytest.approx(1.29861, abs=1e-5)
    assert v.clipped == 1
    assert B.gaussian_series_eigentuple_bound(Q(m=2, p=2, sigma2=4, b=(0.0, 5.0))).value == 4
    with pytest.raises(ValueError):
        B.gaussian_series_eigentuple_bound(Q(m=2, p=2, sigma2=4, b=(-1.0, 5.0)))


def test_rectangular():
    assert B.rectangular_series_bound(Q(m=2, n=3, p=2, sigma2=1, theta=0)).value == 10
    q = Q(m=2, n=2, p=3, sigma2=1.5, theta=0.4)
    assert B.rectangular_series_bound(q).value == B.gaussian_series_norm_bound(q).value
    v = B.rectangular_series_bound(Q(m=2, n=3, p=2, sigma2=1, theta=1))
    assert v.value == pytest.approx(6.06530660, rel=1e-8)
    assert v.clipped == 1


def test_series_sigma2():
    assert B.series_sigma2([identity(2, 2)]) == pytest.approx(1)
    rng = np.random.default_rng(0)
    coeffs = [DenseTensor3(random_hermitian_array(rng, 2, 3)) for _ in range(3)]
    s2 = B.series_sigma2(coeffs)
    assert B.series_sigma2([a * 2.0 for a in coeffs]) == pytest.approx(4 * s2)
    ref = np.linalg.norm(sum(bcirc(a.data) @ bcirc(a.data) for a in coeffs), 2)
    assert s2 == pytest.approx(ref, rel=1e-10)
    rect = [DenseTensor3(rng.standard_normal((2, 3, 2))) for _ in range(2)]
    left = np.linalg.norm(sum(bcirc(a.data) @ bcirc(a.data).conj().T for a in rect), 2)
    right = np.linalg.norm(sum(bcirc(a.data).conj().T @ bcirc(a.data) for a in rect), 2)
    assert B.series_sigma2(rect, rectangular=True) == pytest.approx(max(left, right), rel=1e-10)
    with pytest.raises(NotHermitianError):
        B.series_sigma2([DenseTensor3(rng.standard_normal((2, 2, 2)))])
    with pytest.raises(ValueError):
        B.series_sigma2([identity(2, 2), identity(3, 2)])


def test_hadamard_sigma2():
    assert B.hadamard_sigma2(ones(2, 5, 1)) == 5
    e = zeros(2, 3, 2).data.copy()
    e[0, 0, 0] = 1.5 - 2j
    assert B.hadamard_sigma2(DenseTensor3(e)) == pytest.approx(6.25)
    rng = np.random.default_rng(1)
    a = rng.standard_normal((3, 2, 2))
    rows = [sum(abs(a[i, j, k]) ** 2 for j in range(2) for k in range(2)) for i in range(3)]
    cols = [sum(abs(a[i, j, k]) ** 2 for i in range(3) for k in range(2)) for j in range(2)]
    assert B.hadamard_sigma2(DenseTensor3(a), "all-slices") == pytest.approx(max(rows + cols))
    first_rows = [sum(abs(a[i, j, 0]) ** 2 for j in range(2)) for i in range(3)]
    first_cols = [sum(abs(a[i, j, 0]) ** 2 for i in range(3)) for j in range(2)]
    assert B.hadamard_sigma2(DenseTensor3(a)) == pytest.approx(max(first_rows + first_cols))
    with pytest.raises(ValueError):
        B.hadamard_sigma2(DenseTensor3(a), "bogus")


def test_chernoff1():
    q = Q(m=2, p=3, n_sum=5, theta=0.4, mu_bar_max=0.4)
    assert B.chernoff1_upper(q).value == 6
    assert B.chernoff1_upper(Q(m=1, p=2, n_sum=3, theta=1.0, mu_bar_max=0.2)).value == pytest.approx(2 * 0.2 ** 3)
    v = B.chernoff1_upper(Q(m=1, p=1, n_sum=10, theta=0.5, mu_bar_max=0.3))
    assert v.value == pytest.approx(math.exp(-10 * B.binary_divergence(0.5, 0.3)), rel=1e-14)
    # exp(-10 * 0.0871767...) = 0.418212, slightly above the rounded 0.41818
    assert v.value == pytest.approx(0.418212, abs=1e-6)
    assert v.valid
    assert not B.chernoff1_upper(Q(m=1, p=1, n_sum=10, theta=0.2, mu_bar_max=0.3)).valid
    lo = B.chernoff1_lower(Q(m=1, p=1, n_sum=10, theta=0.1, mu_bar_min=0.3))
    assert lo.valid and lo.value < 1
    with pytest.raises(ValueError):
        B.chernoff1_upper(Q(m=1, p=1, theta=0.5, mu_bar_max=1.0))


def test_chernoff1_eigentuple():
    v = B.chernoff1_eigentuple_upper(Q(m=1, p=2, n_sum=4, b=(2.0, 3.0), mu_bar_max=0.3))
    assert v.value == pytest.approx(2 * math.exp(-4 * B.binary_divergence(0.5, 0.3)), rel=1e-14)
    n, theta = 4, 0.5
    a = B.chernoff1_eigentuple_upper(Q(m=1, p=1, n_sum=n, b=(n * theta,), mu_bar_max=0.3))
    b = B.chernoff1_upper(Q(m=1, p=1, n_sum=n, theta=theta, mu_bar_max=0.3))
    assert a.value == b.value


def test_chernoff2():
    for fn, key in ((B.chernoff2_upper, "mu_max"), (B.chernoff2_lower, "mu_min")):
        assert fn(Q(m=2, p=3, theta=0.0, **{key: 1.3})).value == 6
    assert B.chernoff2_lower(Q(m=2, p=3, theta=1.0, mu_min=0.8, T=2)).value == pytest.approx(6 * math.exp(-0.4))
    v = B.chernoff2_upper(Q(m=2, p=3, mu_max=1, T=1, theta=1))
    assert v.value == pytest.approx(6 * math.e / 4, rel=1e-14)
    assert v.clipped == 1
    with pytest.raises(ValueError):
        B.chernoff2_lower(Q(m=1, p=1, theta=1.5, mu_min=1))
    with pytest.raises(ValueError):
        B.chernoff2_upper(Q(m=1, p=1, theta=-0.1, mu_max=1))
    q = Q(m=2, p=2, theta=0.6, mu_max=1.2, mu_min=0.4, T=0.9, b=(9.0, 1.0))
    assert B.chernoff2_eigentuple_upper(q).value == B.chernoff2_upper(q).value
    assert B.chernoff2_eigentuple_lower(q).value == B.chernoff2_lower(q).value


def test_bernstein_bounded_examples():
    assert B.bernstein_bounded(Q(m=2, p=2, sigma2=1, theta=0)).value == 4
    assert B.bernstein_bounded(Q(m=1, p=1, sigma2=1, T=1, theta=2)).value == pytest.approx(math.exp(-1.2), rel=1e-14)
    q = Q(m=2, p=3, sigma2=1.7, T=0.6, theta=1.7 / 0.6)
    a, b = B.bernstein_bounded_subgauss_regime(q), B.bernstein_bounded_subexp_regime(q)
    assert a.value == pytest.approx(b.value, rel=1e-12)
    assert a.value == pytest.approx(6 * math.exp(-3 * 1.7 / (8 * 0.36)), rel=1e-12)
    with pytest.raises(ValueError):
        B.bernstein_bounded(Q(m=1, p=1, sigma2=0, theta=1))


def test_bernstein_subexp_examples():
    assert B.bernstein_subexponential(Q(m=2, p=2, sigma2=1, theta=0)).value == 4
    v = B.bernstein_subexponential(Q(m=2, p=2, sigma2=2, T=1, theta=1))
    # 4 exp(-1/6) = 3.385926..., not 3.3866
    assert v.value == pytest.approx(4 * math.exp(-1 / 6), rel=1e-14)
    assert v.value == pytest.approx(3.385926, abs=1e-6)
    assert v.clipped == 1
    q = Q(m=1, p=2, sigma2=2.5, T=1.5, theta=2.5 / 1.5)
    a = B.bernstein_subexponential_subgauss_regime(q)
    b = B.bernstein_subexponential_subexp_regime(q)
    assert a.value == pytest.approx(b.value, rel=1e-12)
    assert a.value == pytest.approx(2 * math.exp(-2.5 / (4 * 2.25)), rel=1e-12)


def test_bernstein_validity_flags():
    q_low = Q(m=1, p=1, sigma2=1, T=1, theta=0.5)
    q_high = Q(m=1, p=1, sigma2=1, T=1, theta=2)
    assert B.bernstein_bounded_subgauss_regime(q_low).valid
    assert not B.bernstein_bounded_subgauss_regime(q_high).valid
    assert B.bernstein_subexponential_subexp_regime(q_high).valid
    assert not B.bernstein_subexponential_subexp_regime(q_low).valid


def test_bernstein_eigentuple():
    v = B.bernstein_subexponential_eigentuple(Q(m=1, p=2, sigma2=1, T=1, b=(2.0, 4.0)))
    assert v.value == pytest.approx(2 * math.exp(-2 / 3), rel=1e-14)
    with pytest.raises(ValueError):
        B.bernstein_bounded_eigentuple(Q(m=1, p=2, sigma2=1, b=(0.0, 1.0)))
    q = Q(m=1, p=2, sigma2=2, T=1, b=(2.0, 2.0))
    a = B.bernstein_bounded_eigentuple(q, "subgauss")
    b = B.bernstein_bounded_eigentuple(q, "subexp")
    assert a.value == pytest.approx(b.value, rel=1e-12)


def test_azuma_mcdiarmid():
    assert B.azuma_bound(Q(m=2, p=2, sigma2=1, theta=0)).value == 4
    s = 0.8
    theta = s * math.sqrt(8 * math.log(6))
    assert B.azuma_bound(Q(m=2, p=3, sigma2=s * s, theta=theta)).value == pytest.approx(1)
    assert B.azuma_bound(Q(m=1, p=1, sigma2=1, theta=2)).value == pytest.approx(0.60653066, rel=1e-8)
    q = Q(m=3, p=2, sigma2=0.3, theta=1.2, b=(1.2, 1.2))
    assert B.azuma_bound(q).value == B.mcdiarmid_bound(q).value
    assert B.azuma_eigentuple_bound(q).value == B.azuma_bound(q).value
    assert B.mcdiarmid_eigentuple_bound(q).value == B.mcdiarmid_bound(q).value


def test_delta_opt():
    delta, c = B.solve_delta_opt()
    assert abs(math.exp(delta) - 1 / delta) <= 1e-12
    assert abs(delta * math.exp(delta) - 1) <= 1e-12
    assert c == pytest.approx(10.28, abs=0.01)
    assert delta == pytest.approx(0.5671432904097838, abs=1e-15)


def test_expectation_chernoff():
    _, c = B.solve_delta_opt()
    lo, hi, ok = B.expectation_bounds_chernoff(2, 3, 0.0, 1.0)
    assert (lo, hi, ok) == (0.0, pytest.approx(6 * c), True)
    assert B.expectation_bounds_chernoff(1, 1, 1.0, 1e12)[1] == pytest.approx(c)
    lo, hi, ok = B.expectation_bounds_chernoff(1, 1, 1.0, 1.0)
    assert lo == 1 and hi == pytest.approx(3.7824, abs=1e-4) and ok
    assert not B.expectation_bounds_chernoff(1, 1, 10.0, 1.0)[2]


def test_gaussian_integral():
    assert B.gaussian_integral(0) == 0
    assert B.gaussian_integral(10) == pytest.approx(math.sqrt(math.pi) / 2, abs=1e-12)
    ref, _ = quad(lambda s: math.exp(-s * s), 0, 1, epsabs=1e-14)
    assert B.gaussian_integral(1) == pytest.approx(ref, abs=1e-13)
    assert B.gaussian_integral(1) == pytest.approx(0.746824, abs=1e-6)
    xs = np.linspace(0, 4, 50)
    assert np.all(np.diff([B.gaussian_integral(x) for x in xs]) > 0)


def test_expectation_subexp():
    assert B.expectation_bounds_subexp(2, 3, 0.0, 0.5)[1] == pytest.approx(4 * 6 * 0.5)
    one = B.expectation_bounds_subexp(1, 1, 1.3, 0.7)[1]
    assert B.expectation_bounds_subexp(3, 2, 1.3, 0.7)[1] == pytest.approx(6 * one)
    g1, _ = quad(lambda s: math.exp(-s * s), 0, 1, epsabs=1e-14)
    expect = 2 * (2 * g1 + 2 * math.exp(-1))
    lo, hi = B.expectation_bounds_subexp(1, 1, 2.0, 1.0, mu_max=0.3)
    assert hi == pytest.approx(expect, rel=1e-12)
    assert hi == pytest.approx(4.4588, abs=1e-4)
    assert lo == 0.3


def test_norm_expectation():
    assert B.norm_expectation_bounds(2, 2, 0) == (0, 0)
    lo, hi = B.norm_expectation_bounds(2, 3, 1.7)
    assert hi / lo == pytest.approx(24)
    assert B.norm_expectation_bounds(1, 1, 1.0) == (1.0, 4.0)


def test_registry():
    assert B.evaluate("azuma", Q(m=1, p=1, sigma2=1, theta=0)).value == 1
    with pytest.raises(KeyError):
        B.evaluate("nope", Q(m=1, p=1))
    for tid, fn in B.BOUNDS.items():
        assert callable(fn)


SCALAR_IDS = ["gaussian-series", "gaussian-series-norm", "rectangular-series", "hadamard",
              "bernstein-bounded", "bernstein-subexp", "azuma", "mcdiarmid"]


@pytest.mark.parametrize("tid", SCALAR_IDS)
@settings(max_examples=60, deadline=None)
@given(t1=st.floats(0, 10), t2=st.floats(0, 10), s1=st.floats(0.01, 5), s2=st.floats(0.01, 5))
def test_monotone_in_threshold_and_sigma2(tid, t1, t2, s1, s2):
    lo_t, hi_t = sorted((t1, t2))
    lo_s, hi_s = sorted((s1, s2))
    f = lambda theta, sig: B.evaluate(tid, Q(m=2, n=3, p=2, sigma2=sig, theta=theta, T=0.5)).value
    assert f(hi_t, lo_s) <= f(lo_t, lo_s)
    assert f(lo_t, lo_s) <= f(lo_t, hi_s)


EIGENTUPLE_PAIRS = [
    ("gaussian-series-eigentuple", "gaussian-series"),
    ("gaussian-series-norm-eigentuple", "gaussian-series-norm"),
    ("rectangular-series-eigentuple", "rectangular-series"),
    ("bernstein-bounded-eigentuple", "bernstein-bounded"),
    ("bernstein-bounded-eigentuple-subgauss", "bernstein-bounded-subgauss"),
    ("bernstein-bounded-eigentuple-subexp", "bernstein-bounded-subexp"),
    ("bernstein-subexp-eigentuple", "bernstein-subexp"),
    ("bernstein-subexp-eigentuple-subgauss", "bernstein-subexp-subgauss"),
    ("bernstein-subexp-eigentuple-subexp", "bernstein-subexp-subexp"),
    ("azuma-eigentuple", "azuma"),
    ("mcdiarmid-eigentuple", "mcdiarmid"),
]


@pytest.mark.parametrize("vec_id, scalar_id", EIGENTUPLE_PAIRS)
@settings(max_examples=40, deadline=None)
@given(theta=st.floats(1e-6, 20), sigma2=st.floats(0.01, 10), T=st.floats(0.05, 5))
def test_constant_vector_reduces_to_scalar(vec_id, scalar_id, theta, sigma2, T):
    qv = Q(m=2, n=3, p=3, sigma2=sigma2, T=T, b=(theta,) * 3)
    qs = Q(m=2, n=3, p=3, sigma2=sigma2, T=T, theta=theta)
    assert B.evaluate(vec_id, qv).value == B.evaluate(scalar_id, qs).value
