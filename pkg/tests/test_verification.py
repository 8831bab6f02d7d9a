import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats
from scipy.optimize import minimize_scalar

from tptail.bounds import BoundQuery, evaluate
from tptail.ensembles import (
    BoundedTpsdEnsemble,
    CenteredBoundedEnsemble,
    FiniteSupportTensorRV,
    HypothesisError,
    SeriesEnsemble,
    random_hermitian,
)
from tptail.spectral import d_max, lambda_max
from tptail.tensor import DenseTensor3, fdiag, identity, zeros
from tptail.verification import (
    ADAPTERS,
    CSV_HEADER,
    LEMMA_SUITE,
    DominationReport,
    EnumeratedSum,
    TailEstimate,
    adapter_for,
    check_averaged_mgf_tail,
    check_bounded_bernstein_mgf,
    check_cgf_symmetrized,
    check_chernoff_mgf,
    check_golden_thompson,
    check_laplace_method,
    check_lieb_trace,
    check_master_tail,
    check_mgf_gaussian,
    check_mgf_rademacher,
    check_subexp_bernstein_mgf,
    check_symmetrization,
    clopper_pearson_upper,
    estimate_tail,
    estimate_tails,
    exact_domination,
    rademacher_lambda_max,
    run_domination,
    run_lemma_suite,
    shipped_ensembles,
    shipped_experiments,
    sign_patterns,
    threshold_grid,
)
from tptail.verification.lemmas import random_centered, random_tpsd
from tptail.verification.stats import format_threshold, parse_threshold


def scalar(x):
    return DenseTensor3(np.array([[[x]]], dtype=float))


# --- Clopper-Pearson ---------------------------------------------------------

def test_clopper_pearson_closed_forms():
    # zero hits: 1 - alpha^(1/n)
    assert clopper_pearson_upper(0, 100, 0.05) == pytest.approx(1 - 0.05 ** (1 / 100), rel=1e-12)
    assert clopper_pearson_upper(10, 10, 0.01) == 1.0
    # n - 1 hits: P(X <= n - 1) = 1 - u^n = alpha  ->  u = (1 - alpha)^(1/n)
    assert clopper_pearson_upper(9, 10, 0.01) == pytest.approx(0.99 ** 0.1, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 500), frac=st.floats(0, 1), alpha=st.floats(0.001, 0.2))
def test_clopper_pearson_coverage_identity(n, frac, alpha):
    k = int(round(frac * n))
    u = clopper_pearson_upper(k, n, alpha)
    assert k / n <= u <= 1.0
    if k < n:
        # at the limit the binomial lower tail P(X <= k) equals alpha
        assert stats.binom.cdf(k, n, u) == pytest.approx(alpha, rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 200), frac=st.floats(0, 1))
def test_clopper_pearson_monotone_in_trials(n, frac):
    k = int(frac * n)
    u1 = clopper_pearson_upper(k, n, 0.01)
    u2 = clopper_pearson_upper(2 * k, 2 * n, 0.01)
    assert u2 <= u1 + 1e-15


def test_clopper_pearson_errors():
    with pytest.raises(ValueError):
        clopper_pearson_upper(5, 4, 0.01)
    with pytest.raises(ValueError):
        clopper_pearson_upper(0, 4, 1.5)


# --- tail estimation -------------------------------------------------------------

def test_estimate_tail_examples():
    rad = SeriesEnsemble([scalar(1.0)], "rademacher")
    assert estimate_tail(rad, "lambda_max", -1e9, 100, seed=0).p_hat == 1.0
    e = estimate_tail(rad, "lambda_max", 0.5, 10_000, seed=1)
    assert abs(e.p_hat - 0.5) < 0.02
    g = SeriesEnsemble([scalar(1.0)], "gaussian")
    e = estimate_tail(g, "lambda_max", 1.0, 10_000, seed=2)
    exact = 1 - stats.norm.cdf(1.0)
    assert exact <= e.ci_upper
    assert abs(e.p_hat - exact) < 0.015


def test_estimate_tail_is_worker_invariant():
    ens = SeriesEnsemble([random_hermitian(2, 3, np.random.default_rng(0)) for _ in range(3)])
    a = estimate_tails(ens, "lambda_max", [0.5, 1.0, 2.0], 9_000, seed=5, workers=1)
    b = estimate_tails(ens, "lambda_max", [0.5, 1.0, 2.0], 9_000, seed=5, workers=4)
    assert a == b
    c = estimate_tails(ens, "lambda_max", [0.5, 1.0, 2.0], 9_000, seed=6)
    assert a != c


def test_estimate_tail_vector_threshold():
    ens = SeriesEnsemble([fdiag([1.0, 0.0], 3)], "rademacher")
    # d_max is (1, 1, 1) for +A and (0, 0, 0) for -A
    e = estimate_tail(ens, "d_max", (0.5, 0.5, 0.5), 4000, seed=3)
    assert abs(e.p_hat - 0.5) < 0.05
    with pytest.raises(ValueError):
        estimate_tail(ens, "d_max", (0.5, 0.5), 10, seed=3)
    with pytest.raises(ValueError):
        estimate_tail(ens, "lambda_max", (0.5, 0.5, 0.5), 10, seed=3)
    with pytest.raises(ValueError, match="unknown statistic"):
        estimate_tail(ens, "trace", 0.5, 10, seed=3)


# --- domination ------------------------------------------------------------------

def test_domination_trivial_at_zero():
    ens = SeriesEnsemble([random_hermitian(2, 2, np.random.default_rng(1))])
    rep = run_domination("gaussian-series", ens, [0.0], trials=500)
    assert rep.rows[0].bound_raw == 4 and rep.dominated


def test_rademacher_scalar_domination():
    rad = SeriesEnsemble([scalar(1.0)], "rademacher")
    rep = run_domination("gaussian-series", rad, [0.5, 1.0, 1.5, 2.0], trials=10_000, seed=7)
    assert rep.dominated
    assert [r.estimate.p_hat for r in rep.rows][2:] == [0.0, 0.0]


def test_chernoff2_degenerate_point_ensemble():
    ens = BoundedTpsdEnsemble(2, 2, 5, T=1.0, law="point")
    assert ens.mu_max == pytest.approx(5.0)
    rep = run_domination("chernoff2-upper", ens, [0.0, 0.01, 0.5], trials=200)
    assert [r.estimate.hits for r in rep.rows] == [200, 0, 0]
    assert rep.dominated


def test_domination_rejects_wrong_kind_and_regime():
    ens = SeriesEnsemble([scalar(1.0)])
    with pytest.raises(ValueError, match="kind"):
        run_domination("chernoff1-upper", ens, [0.5], trials=10)
    cb = CenteredBoundedEnsemble(2, 2, 4)
    high = 10 * cb.sigma2 / cb.T
    with pytest.raises(ValueError, match="outside"):
        run_domination("bernstein-bounded-subgauss", cb, [high], trials=10)


def test_domination_aborts_on_hypothesis_failure():
    class Broken(BoundedTpsdEnsemble):
        def sample_summands_hat(self, rng, size):
            return 2.0 * super().sample_summands_hat(rng, size)

    with pytest.raises(HypothesisError):
        run_domination("chernoff2-upper", Broken(2, 2, 3, law="point"), [0.5], trials=10)


def test_report_csv_round_trip():
    rad = SeriesEnsemble([scalar(1.0)], "rademacher")
    rep = run_domination("gaussian-series", rad, [0.5, 1.0], trials=1000, seed=1)
    text = rep.to_csv()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert "\r" not in text
    back = DominationReport.from_csv(text)
    assert back.to_csv() == text
    assert [r.dominated for r in back.rows] == [r.dominated for r in rep.rows]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=4))
def test_threshold_format_round_trip(values):
    thr = values[0] if len(values) == 1 else tuple(values)
    text = format_threshold(thr)
    assert format_threshold(parse_threshold(text)) == text


@pytest.mark.parametrize("exp", shipped_experiments()[:28:3], ids=lambda e: e.name)
def test_shipped_grids_are_valid_and_reach_floor(exp):
    grid = exp.thresholds()
    assert len(grid) == 8
    values = [evaluate(exp.theorem_id, adapter_for(exp.theorem_id).query(t, exp.ensemble)) for t in grid]
    assert all(v.valid for v in values)
    raw = [v.value for v in values]
    assert min(raw) == pytest.approx(0.01, rel=1e-3) or min(raw) > 0.01


def test_adapters_cover_every_bound():
    from tptail.bounds import BOUNDS
    assert set(ADAPTERS) == set(BOUNDS)


def test_chernoff_lower_eigentuple_uses_lower_statistic():
    ens = BoundedTpsdEnsemble(2, 2, 10, law="uniform", scale_low=0.5, basis_seed=14)
    grid = threshold_grid("chernoff1-eigentuple-lower", ens, points=4)
    rep = run_domination("chernoff1-eigentuple-lower", ens, grid, trials=2000)
    assert rep.dominated


# --- exact enumeration --------------------------------------------------------------

def test_sign_patterns():
    s = sign_patterns(3)
    assert s.shape == (8, 3)
    assert len({tuple(r) for r in s}) == 8
    with pytest.raises(ValueError):
        sign_patterns(13)


def test_rademacher_enumeration_matches_binomial():
    vals = rademacher_lambda_max([scalar(1.0)] * 8)
    for t in (0, 2, 4, 8):
        expect = sum(math.comb(8, k) for k in range(9) if 2 * k - 8 >= t) / 256
        assert (vals >= t).mean() == expect


@pytest.mark.parametrize("n", [1, 4, 12])
def test_exact_domination_scalar(n):
    rng = np.random.default_rng(n)
    coeffs = [scalar(float(c)) for c in rng.uniform(0.2, 1.0, n)]
    rows = exact_domination(coeffs)
    assert len(rows) == 20 * 5
    assert all(r.dominated for r in rows)


# --- lemma checks -------------------------------------------------------------------

def test_golden_thompson_examples():
    rng = np.random.default_rng(0)
    c = random_hermitian(2, 3, rng)
    assert check_golden_thompson(c, zeros(2, 2, 3)).min_slack == pytest.approx(0, abs=1e-12)
    d = c @ c - c * 0.5
    assert abs(check_golden_thompson(c, d).min_slack) < 1e-10
    assert check_golden_thompson(c, random_hermitian(2, 3, rng)).passed


def test_mgf_examples():
    a = random_hermitian(2, 2, np.random.default_rng(1))
    assert check_mgf_gaussian(a, 0.0).min_slack == pytest.approx(0, abs=1e-14)
    r = check_mgf_gaussian(scalar(1.0), 1.0)
    assert r.passed and r.min_slack > -1e-12
    assert check_mgf_gaussian(a, 0.7).passed
    assert check_mgf_rademacher(a, 0.0).min_slack == pytest.approx(0, abs=1e-14)
    r = check_mgf_rademacher(scalar(1.0), 1.0)
    assert r.min_slack == pytest.approx(math.exp(0.5) - math.cosh(1.0), rel=1e-10)


def test_chernoff_mgf_examples():
    m, p = 2, 2
    for t in (0.3, 1.0, 2.0):
        r = check_chernoff_mgf(FiniteSupportTensorRV((identity(m, p),)), t)
        assert abs(r.min_slack) < 1e-12
        assert abs(check_chernoff_mgf(FiniteSupportTensorRV((zeros(m, p, p),)), t).min_slack) < 1e-12
    rng = np.random.default_rng(2)
    rv = FiniteSupportTensorRV(tuple(random_tpsd(2, 3, rng) for _ in range(3)))
    assert all(check_chernoff_mgf(rv, t).passed for t in (0.3, 1.0, 2.0))
    with pytest.raises(ValueError):
        check_chernoff_mgf(FiniteSupportTensorRV((identity(2, 2) * 2.0,)), 1.0)


def test_bernstein_mgf_examples():
    zero = FiniteSupportTensorRV((zeros(2, 2, 2),))
    assert abs(check_bounded_bernstein_mgf(zero, 0.5).min_slack) < 1e-14
    assert abs(check_subexp_bernstein_mgf(zero, 0.5).min_slack) < 1e-14
    a = 0.8
    r = check_bounded_bernstein_mgf(FiniteSupportTensorRV.symmetric(scalar(a)), 0.5)
    assert r.min_slack == pytest.approx(math.exp((math.exp(0.5) - 1.5) * a * a) - math.cosh(0.5 * a), rel=1e-9)
    rv = random_centered(2, 2, 3, np.random.default_rng(3), max_norm=1.0)
    near_zero = check_subexp_bernstein_mgf(rv, 1e-6)
    assert near_zero.passed and abs(near_zero.min_slack) < 1e-10
    with pytest.raises(ValueError):
        check_bounded_bernstein_mgf(FiniteSupportTensorRV((identity(1, 1),)), 0.5)


def test_symmetrization_and_lieb_examples():
    rng = np.random.default_rng(4)
    a = random_hermitian(2, 2, rng)
    zero = FiniteSupportTensorRV((zeros(2, 2, 2),))
    assert abs(check_symmetrization(a, zero).min_slack) < 1e-14
    x = random_hermitian(2, 2, rng)
    assert check_symmetrization(zeros(2, 2, 2), FiniteSupportTensorRV.symmetric(x)).passed
    assert abs(check_lieb_trace(a, FiniteSupportTensorRV((x,))).min_slack) < 1e-10
    rv = FiniteSupportTensorRV((scalar(0.3), scalar(-1.2)), np.array([0.4, 0.6]))
    r = check_lieb_trace(zeros(1, 1, 1), rv)
    assert abs(r.min_slack) < 1e-12  # with A = 0 both sides equal E e^X
    assert check_lieb_trace(a, random_centered(2, 2, 3, rng)).passed


def test_cgf_symmetrized_examples():
    a = random_hermitian(2, 2, np.random.default_rng(5))
    assert abs(check_cgf_symmetrized(a, a, 0.0).min_slack) < 1e-14
    r = check_cgf_symmetrized(scalar(1.0), scalar(1.0), 0.5)
    assert r.min_slack == pytest.approx(0.5 - math.log(math.cosh(1.0)), rel=1e-10)
    assert check_cgf_symmetrized(a, a, 1.3).passed


def test_laplace_examples():
    pm = FiniteSupportTensorRV.symmetric(scalar(1.0))
    assert check_laplace_method([pm], -2.0).passed
    r = check_laplace_method([pm], 0.5)
    best = minimize_scalar(lambda t: math.exp(-t / 2) * math.cosh(t), bounds=(0, 5), method="bounded").fun
    assert r.details == {} and r.min_slack >= best - 0.5 - 1e-3
    assert r.passed
    # constant tubes: the eigentuple reduces to the scalar case
    c = fdiag([1.0, 0.3], 2)
    rv = FiniteSupportTensorRV.symmetric(c)
    s = check_laplace_method([rv], (0.5, 0.5))
    e = check_laplace_method([rv], 0.5)
    assert s.min_slack == pytest.approx(e.min_slack, rel=1e-12)
    assert "condition_first_failure_t" in s.details


def test_master_and_averaged_examples():
    one = FiniteSupportTensorRV((scalar(0.4),))
    r = check_master_tail([one], lambda t: t, [scalar(0.4)], 1.0)
    assert r.passed
    pair = [FiniteSupportTensorRV.symmetric(scalar(1.0)), FiniteSupportTensorRV.symmetric(scalar(0.5))]
    r = check_master_tail(pair, lambda t: t * t / 2, [scalar(1.0), scalar(0.25)], 1.0)
    assert r.passed
    c = fdiag([0.6, 0.2], 2)
    rv = FiniteSupportTensorRV.symmetric(c)
    v = check_master_tail([rv], lambda t: t * t / 2, [c @ c], (0.4, 0.4))
    s = check_master_tail([rv], lambda t: t * t / 2, [c @ c], 0.4)
    assert v.min_slack == pytest.approx(s.min_slack, rel=1e-12)
    with pytest.raises(ValueError):
        check_master_tail(pair, lambda t: 0.0 * t, [scalar(1.0), scalar(0.25)], 1.0)
    assert check_averaged_mgf_tail(pair, 0.5).passed


def test_enumerated_sum():
    pm = FiniteSupportTensorRV.symmetric(scalar(1.0))
    s = EnumeratedSum.from_summands([pm, pm, pm])
    assert s.probs.sum() == pytest.approx(1)
    assert s.tail(theta=1.0) == pytest.approx(0.5)
    assert s.tail(theta=3.0) == pytest.approx(0.125)
    assert s.trace_mgf(0.4) == pytest.approx(math.cosh(0.4) ** 3)


def test_lemma_suite_ids_and_filter():
    assert len(LEMMA_SUITE) == 16
    res = run_lemma_suite(0, "golden-thompson")
    assert [r.lemma_id for r in res] == ["golden-thompson"]
    assert all(r.passed for r in res)
    assert len(run_lemma_suite(0, "cgf")) == 1
    with pytest.raises(KeyError):
        run_lemma_suite(0, "no-such-lemma")
    a = run_lemma_suite(3, "mgf-rademacher")[0]
    b = run_lemma_suite(3, "mgf-rademacher")[0]
    assert a.min_slack == b.min_slack
