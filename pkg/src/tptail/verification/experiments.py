"""Bound-domination experiments: theorem adapters, grids and shipped ensembles.

An adapter ties a theorem id to the statistic whose tail it controls, the
event threshold implied by a theorem parameter, and the :class:`BoundQuery`
built from an ensemble's exact parameters.  The theorem parameter (``theta``
or a vector ``b``) is what the report lists as the threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..bounds import BoundQuery, BoundValue, evaluate
from ..ensembles import (
    BoundedTpsdEnsemble,
    CenteredBoundedEnsemble,
    Ensemble,
    HadamardGaussianEnsemble,
    HypothesisError,
    MartingaleEnsemble,
    McDiarmidEnsemble,
    SeriesEnsemble,
    random_hermitian,
)
from ..tensor import DenseTensor3
from .stats import DominationReport, DominationRow, Threshold, estimate_tails

GRID_FLOOR = 0.01
GRID_POINTS = 8


@dataclass(frozen=True)
class TheoremAdapter:
    statistic: str
    kinds: Tuple[str, ...]
    query: Callable[[Threshold, Ensemble], BoundQuery]
    event: Callable[[Threshold, Ensemble], Threshold]
    param_range: Callable[[Ensemble], Tuple[float, float]]
    vector: bool = False
    # scalar grid coordinate -> theorem parameter (vector theorems scale a weight vector)
    lift: Optional[Callable[[float, Ensemble], Threshold]] = None


def _open_range(e: Ensemble) -> Tuple[float, float]:
    scale = max(math.sqrt(getattr(e, "sigma2", 0.0)), getattr(e, "T", 0.0), 1.0)
    return 0.0, 200.0 * scale


def eigentuple_weights(p: int) -> np.ndarray:
    """Fixed threshold shape with minimum entry 1, rising by a quarter across slices."""
    return 1.0 + 0.25 * np.arange(p) / max(p - 1, 1)


def _lift_weights(x: float, e: Ensemble) -> Tuple[float, ...]:
    return tuple(float(v) for v in x * eigentuple_weights(e.p))


def _identity(x, e):
    return x


def _q_sigma(x, e, T=None):
    kw = {"b": x} if isinstance(x, tuple) else {"theta": float(x)}
    n = e.n if e.n != e.m else None
    return BoundQuery(m=e.m, n=n, p=e.p, sigma2=e.sigma2, T=T or 1.0, **kw)


def _series_adapters() -> Dict[str, TheoremAdapter]:
    out = {}
    for suffix, stat, vstat in (("", "lambda_max", "d_max"), ("-norm", "norm", "vec_norm")):
        out[f"gaussian-series{suffix}"] = TheoremAdapter(stat, ("series",), _q_sigma, _identity, _open_range)
        out[f"gaussian-series{suffix}-eigentuple"] = TheoremAdapter(
            vstat, ("series",), _q_sigma, _identity, _open_range, vector=True, lift=_lift_weights)
    out["rectangular-series"] = TheoremAdapter("norm", ("series",), _q_sigma, _identity, _open_range)
    out["rectangular-series-eigentuple"] = TheoremAdapter(
        "vec_norm", ("series",), _q_sigma, _identity, _open_range, vector=True, lift=_lift_weights)
    out["hadamard"] = TheoremAdapter("norm", ("hadamard",), _q_sigma, _identity, _open_range)
    return out


def _chernoff_adapters() -> Dict[str, TheoremAdapter]:
    kinds = ("bounded-tpsd",)

    def q1(x, e):
        kw = {"b": x} if isinstance(x, tuple) else {"theta": float(x)}
        return BoundQuery(m=e.m, p=e.p, n_sum=e.n_sum, mu_bar_max=e.mu_bar_max, mu_bar_min=e.mu_bar_min, **kw)

    def q2(x, e):
        return BoundQuery(m=e.m, p=e.p, theta=float(x), mu_max=e.mu_max, mu_min=e.mu_min, T=e.T)

    def lift1(x, e):
        return _lift_weights(e.n_sum * x, e)

    def const_vec(c, e):
        return tuple([float(c)] * e.p)

    return {
        "chernoff1-upper": TheoremAdapter("lambda_max", kinds, q1, lambda x, e: e.n_sum * x,
                                          lambda e: (e.mu_bar_max, 1.0)),
        "chernoff1-lower": TheoremAdapter("lambda_min", kinds, q1, lambda x, e: e.n_sum * x,
                                          lambda e: (0.0, e.mu_bar_min)),
        "chernoff1-eigentuple-upper": TheoremAdapter("d_max", kinds, q1, _identity,
                                                     lambda e: (e.mu_bar_max, 1.0), vector=True, lift=lift1),
        "chernoff1-eigentuple-lower": TheoremAdapter("d_min", kinds, q1, _identity,
                                                     lambda e: (0.0, e.mu_bar_min), vector=True, lift=lift1),
        "chernoff2-upper": TheoremAdapter("lambda_max", kinds, q2, lambda x, e: (1 + x) * e.mu_max, _open_range),
        "chernoff2-lower": TheoremAdapter("lambda_min", kinds, q2, lambda x, e: (1 - x) * e.mu_min,
                                          lambda e: (0.0, 1.0)),
        "chernoff2-eigentuple-upper": TheoremAdapter(
            "d_max", kinds, q2, lambda x, e: const_vec((1 + x) * e.mu_max, e), _open_range),
        "chernoff2-eigentuple-lower": TheoremAdapter(
            "d_min", kinds, q2, lambda x, e: const_vec((1 - x) * e.mu_min, e), lambda e: (0.0, 1.0)),
    }


def _bernstein_adapters() -> Dict[str, TheoremAdapter]:
    kinds = ("centered-bounded",)
    out = {}
    for family, T_of in (("bounded", lambda e: e.T), ("subexp", lambda e: e.T_subexp)):
        def query(x, e, T_of=T_of):
            return _q_sigma(x, e, T=T_of(e))

        def boundary(e, T_of=T_of):
            return e.sigma2 / T_of(e)

        ranges = {
            "": _open_range,
            "-subgauss": lambda e, b=boundary: (0.0, b(e)),
            "-subexp": lambda e, b=boundary: (b(e), _open_range(e)[1]),
        }
        for regime, rng in ranges.items():
            out[f"bernstein-{family}{regime}"] = TheoremAdapter("lambda_max", kinds, query, _identity, rng)
            out[f"bernstein-{family}-eigentuple{regime}"] = TheoremAdapter(
                "d_max", kinds, query, _identity, rng, vector=True, lift=_lift_weights)
    return out


def _martingale_adapters() -> Dict[str, TheoremAdapter]:
    return {
        "azuma": TheoremAdapter("lambda_max", ("martingale",), _q_sigma, _identity, _open_range),
        "azuma-eigentuple": TheoremAdapter("d_max", ("martingale",), _q_sigma, _identity, _open_range,
                                           vector=True, lift=_lift_weights),
        "mcdiarmid": TheoremAdapter("lambda_max", ("mcdiarmid",), _q_sigma, _identity, _open_range),
        "mcdiarmid-eigentuple": TheoremAdapter("d_max", ("mcdiarmid",), _q_sigma, _identity, _open_range,
                                               vector=True, lift=_lift_weights),
    }


ADAPTERS: Dict[str, TheoremAdapter] = {
    **_series_adapters(), **_chernoff_adapters(), **_bernstein_adapters(), **_martingale_adapters()}


def adapter_for(theorem_id: str) -> TheoremAdapter:
    try:
        return ADAPTERS[theorem_id]
    except KeyError:
        raise KeyError(f"no experiment adapter for theorem id {theorem_id!r}") from None


def _check_compatible(theorem_id: str, ad: TheoremAdapter, ensemble: Ensemble):
    if ensemble.kind not in ad.kinds:
        raise ValueError(f"theorem {theorem_id} needs an ensemble of kind {ad.kinds}, got {ensemble.kind!r}")
    if theorem_id.startswith("gaussian-series") and getattr(ensemble, "rectangular", False):
        raise ValueError(f"theorem {theorem_id} needs Hermitian coefficients")
    if theorem_id.startswith("chernoff1") and ensemble.T > 1.0:
        raise ValueError(f"theorem {theorem_id} needs lambda_max(X_i) <= 1, ensemble has T = {ensemble.T}")


def bound_for(theorem_id: str, ensemble: Ensemble, threshold: Threshold) -> BoundValue:
    ad = adapter_for(theorem_id)
    return evaluate(theorem_id, ad.query(threshold, ensemble))


def threshold_grid(theorem_id: str, ensemble: Ensemble, points: int = GRID_POINTS,
                   floor: float = GRID_FLOOR) -> List[Threshold]:
    """Evenly spaced parameters from the loosest end of the valid range to where the raw bound reaches ``floor``.

    Both ends are clamped to the theorem's valid parameter range.
    """
    ad = adapter_for(theorem_id)
    lift = ad.lift or (lambda x, e: x)
    lo, hi = ad.param_range(ensemble)
    if ad.vector and lo <= 0.0:
        # eigentuple Bernstein forms need strictly positive thresholds
        lo = 1e-9 * hi

    def log_bound(x):
        v = bound_for(theorem_id, ensemble, lift(x, ensemble)).value
        return math.log(v) if v > 0 else -math.inf

    def crossing(target):
        # the bound is monotone on [lo, hi]; bisect on the sign of log(bound / target)
        g_lo, g_hi = log_bound(lo) - math.log(target), log_bound(hi) - math.log(target)
        if g_lo * g_hi > 0 or (g_lo == g_hi):
            return lo if abs(g_lo) <= abs(g_hi) else hi
        a, b = lo, hi
        for _ in range(200):
            mid = 0.5 * (a + b)
            if (log_bound(mid) - math.log(target) > 0) == (g_lo > 0):
                a = mid
            else:
                b = mid
        return 0.5 * (a + b)

    # keep clear of the range ends so rounding in the lift cannot leave the valid range
    eps = 1e-9 * (hi - lo)
    start = lo if log_bound(lo) >= log_bound(hi) else hi
    ends = np.clip(sorted((start, crossing(floor))), lo + eps, hi - eps)
    xs = np.linspace(ends[0], ends[1], points)
    return [lift(float(x), ensemble) for x in xs]


def run_domination(theorem_id: str, ensemble: Ensemble, threshold_grid: Sequence[Threshold],
                   trials: int = 10_000, alpha: float = 0.01, seed: int = 0,
                   workers: int = 1) -> DominationReport:
    """Monte Carlo tails against the raw bound at every grid parameter.

    Every sampled summand is certified against the theorem's almost-sure
    hypotheses first; a violation raises :class:`HypothesisError`.
    """
    ad = adapter_for(theorem_id)
    _check_compatible(theorem_id, ad, ensemble)
    grid = [tuple(float(v) for v in t) if ad.vector else float(t) for t in threshold_grid]
    bounds = []
    for t in grid:
        b = bound_for(theorem_id, ensemble, t)
        if not b.valid:
            bad = [k for k, ok in b.validity.items() if not ok]
            raise ValueError(f"threshold {t} lies outside the range of {theorem_id}: {', '.join(bad)}")
        bounds.append(b.value)
    events = [ad.event(t, ensemble) for t in grid]
    estimates = estimate_tails(ensemble, ad.statistic, events, trials, seed, alpha, workers)
    rows = tuple(DominationRow(t, est, b) for t, est, b in zip(grid, estimates, bounds))
    return DominationReport(theorem_id, rows)


# --- shipped experiments ------------------------------------------------------

@dataclass
class Experiment:
    name: str
    theorem_id: str
    ensemble: Ensemble
    grid: Optional[List[Threshold]] = None

    def thresholds(self) -> List[Threshold]:
        if self.grid is None:
            self.grid = threshold_grid(self.theorem_id, self.ensemble)
        return self.grid

    def run(self, trials: int = 10_000, alpha: float = 0.01, seed: int = 0, workers: int = 1) -> DominationReport:
        return run_domination(self.theorem_id, self.ensemble, self.thresholds(), trials, alpha, seed, workers)


def _hermitian_list(n: int, m: int, p: int, seed: int, scale: float = 1.0) -> List[DenseTensor3]:
    rng = np.random.default_rng(seed)
    return [random_hermitian(m, p, rng, scale=scale) for _ in range(n)]


def shipped_ensembles() -> Dict[str, Ensemble]:
    """The fixed ensembles behind the default experiment suite."""
    coeffs = _hermitian_list(4, 2, 3, seed=11, scale=0.5)
    rng = np.random.default_rng(12)
    rect = [DenseTensor3(0.5 * rng.standard_normal((2, 3, 2))) for _ in range(3)]
    return {
        "series-gaussian": SeriesEnsemble(coeffs, "gaussian"),
        "series-rademacher": SeriesEnsemble(coeffs, "rademacher"),
        "series-rectangular": SeriesEnsemble(rect, "gaussian", rectangular=True),
        "hadamard": HadamardGaussianEnsemble(DenseTensor3(np.random.default_rng(13).uniform(0.2, 1.0, (2, 3, 2)))),
        "tpsd-uniform": BoundedTpsdEnsemble(m=2, p=2, n_sum=10, T=1.0, law="uniform", scale_low=0.5, basis_seed=14),
        "tpsd-bernoulli": BoundedTpsdEnsemble(m=2, p=2, n_sum=12, T=1.0, law="bernoulli", q=0.5,
                                              scale_low=0.6, basis_seed=15),
        "centered-uniform": CenteredBoundedEnsemble(m=2, p=2, n_sum=10, T=1.0, law="uniform", scale_low=0.5,
                                                    basis_seed=16),
        "martingale": MartingaleEnsemble(_hermitian_list(6, 2, 2, seed=17, scale=0.5), damping=0.5),
        "mcdiarmid": McDiarmidEnsemble(_hermitian_list(6, 2, 2, seed=18, scale=0.5)),
    }


SHIPPED_PLAN: Tuple[Tuple[str, str], ...] = (
    ("gaussian-series", "series-gaussian"),
    ("gaussian-series", "series-rademacher"),
    ("gaussian-series-norm", "series-gaussian"),
    ("gaussian-series-eigentuple", "series-gaussian"),
    ("gaussian-series-norm-eigentuple", "series-rademacher"),
    ("rectangular-series", "series-rectangular"),
    ("rectangular-series-eigentuple", "series-rectangular"),
    ("hadamard", "hadamard"),
    ("chernoff1-upper", "tpsd-uniform"),
    ("chernoff1-lower", "tpsd-uniform"),
    ("chernoff1-eigentuple-upper", "tpsd-uniform"),
    ("chernoff1-eigentuple-lower", "tpsd-uniform"),
    ("chernoff2-upper", "tpsd-bernoulli"),
    ("chernoff2-lower", "tpsd-bernoulli"),
    ("chernoff2-eigentuple-upper", "tpsd-bernoulli"),
    ("chernoff2-eigentuple-lower", "tpsd-bernoulli"),
    ("bernstein-bounded", "centered-uniform"),
    ("bernstein-bounded-subgauss", "centered-uniform"),
    ("bernstein-bounded-subexp", "centered-uniform"),
    ("bernstein-bounded-eigentuple", "centered-uniform"),
    ("bernstein-subexp", "centered-uniform"),
    ("bernstein-subexp-subgauss", "centered-uniform"),
    ("bernstein-subexp-subexp", "centered-uniform"),
    ("bernstein-subexp-eigentuple", "centered-uniform"),
    ("azuma", "martingale"),
    ("azuma-eigentuple", "martingale"),
    ("mcdiarmid", "mcdiarmid"),
    ("mcdiarmid-eigentuple", "mcdiarmid"),
)


def shipped_experiments() -> List[Experiment]:
    ens = shipped_ensembles()
    return [Experiment(f"{tid}@{key}", tid, ens[key]) for tid, key in SHIPPED_PLAN]
