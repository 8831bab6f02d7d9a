"""Closed-form tail bounds for sums of random Hermitian T-product tensors.

Every evaluator takes a :class:`BoundQuery` and returns a :class:`BoundValue`.
The Laplace dual variable is already optimized out of each formula.  Values
may exceed one; ``BoundValue.clipped`` is ``min(value, 1)``.  Outside a
theorem's stated threshold range the value is still returned, with the
corresponding ``validity`` flag set to ``False``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import erf

from .spectral import NotHermitianError, is_hermitian, spectral_norm
from .tensor import DenseTensor3, ShapeError, tensor_sum

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class BoundQuery:
    """Parameters of one theorem instance.

    ``theta`` is a scalar threshold, ``b`` a threshold vector of length ``p``
    (eigentuple theorems).  ``n`` is the column count of rectangular
    tensors; ``n_sum`` the number of summands.
    """

    m: int
    p: int
    n: Optional[int] = None
    sigma2: float = 0.0
    theta: Optional[float] = None
    b: Optional[Tuple[float, ...]] = None
    T: float = 1.0
    n_sum: int = 1
    mu_max: Optional[float] = None
    mu_min: Optional[float] = None
    mu_bar_max: Optional[float] = None
    mu_bar_min: Optional[float] = None
    b_min: Optional[float] = field(default=None, init=False)

    def __post_init__(self):
        if self.m < 1 or self.p < 1 or (self.n is not None and self.n < 1):
            raise ValueError("dimensions m, n, p must be positive")
        if not self.sigma2 >= 0:
            raise ValueError(f"sigma2 must be nonnegative, got {self.sigma2}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.n_sum < 1:
            raise ValueError(f"n_sum must be at least 1, got {self.n_sum}")
        if self.b is not None:
            b = tuple(float(x) for x in np.ravel(self.b))
            if len(b) != self.p:
                raise ValueError(f"threshold vector has length {len(b)}, expected p = {self.p}")
            object.__setattr__(self, "b", b)
            object.__setattr__(self, "b_min", min(b))

    @property
    def mp(self) -> int:
        return self.m * self.p

    def require_theta(self) -> float:
        if self.theta is None:
            raise ValueError("this bound needs a scalar threshold theta")
        return float(self.theta)

    def require_b_min(self) -> float:
        if self.b_min is None:
            raise ValueError("this bound needs a threshold vector b")
        return self.b_min

    def require(self, name: str) -> float:
        value = getattr(self, name)
        if value is None:
            raise ValueError(f"this bound needs {name}")
        return float(value)


@dataclass(frozen=True)
class BoundValue:
    value: float
    theorem_id: str
    validity: Dict[str, bool] = field(default_factory=dict)

    @property
    def clipped(self) -> float:
        return min(self.value, 1.0)

    @property
    def valid(self) -> bool:
        return all(self.validity.values())


# --- scalar building blocks ----------------------------------------------

def xlogy(x: float, y: float) -> float:
    """``x * log(y)`` with ``0 * log(0) = 0``."""
    if x == 0.0:
        return 0.0
    return x * math.log(y)


def binary_divergence(c: float, d: float) -> float:
    """KL divergence between Bernoulli(c) and Bernoulli(d).

    Returns ``math.inf`` when ``d`` is 0 or 1 and differs from ``c``.
    """
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"c must lie in [0, 1], got {c}")
    if not 0.0 <= d <= 1.0:
        raise ValueError(f"d must lie in [0, 1], got {d}")
    if c == d:
        return 0.0
    if d in (0.0, 1.0):
        return math.inf
    value = xlogy(c, c / d) + xlogy(1.0 - c, (1.0 - c) / (1.0 - d))
    return max(value, 0.0)


def _gaussian_tail_exponent(x: float, sigma2: float, scale: float) -> float:
    # exp(-x^2 / (scale * sigma2)), with the sigma2 = 0 limit
    if x < 0:
        raise ValueError(f"threshold must be nonnegative, got {x}")
    if sigma2 == 0.0:
        return 1.0 if x == 0.0 else 0.0
    return math.exp(-x * x / (scale * sigma2))


def _nonnegative_b_min(q: BoundQuery, strict: bool = False) -> float:
    b = q.require_b_min()
    if strict and b <= 0:
        raise ValueError(f"threshold vector must be positive, min entry is {b}")
    if b < 0:
        raise ValueError(f"threshold vector must be nonnegative, min entry is {b}")
    return b


# --- Gaussian and Rademacher series --------------------------------------

def gaussian_series_lambda_bound(q: BoundQuery) -> BoundValue:
    """``mp exp(-theta^2 / (2 sigma^2))`` for the largest eigenvalue."""
    theta = q.require_theta()
    return BoundValue(q.mp * _gaussian_tail_exponent(theta, q.sigma2, 2.0), "gaussian-series")


def gaussian_series_norm_bound(q: BoundQuery) -> BoundValue:
    theta = q.require_theta()
    return BoundValue(2 * q.mp * _gaussian_tail_exponent(theta, q.sigma2, 2.0), "gaussian-series-norm")


def gaussian_series_eigentuple_bound(q: BoundQuery) -> BoundValue:
    b = _nonnegative_b_min(q)
    return BoundValue(q.mp * _gaussian_tail_exponent(b, q.sigma2, 2.0), "gaussian-series-eigentuple")


def gaussian_series_norm_eigentuple_bound(q: BoundQuery) -> BoundValue:
    b = _nonnegative_b_min(q)
    return BoundValue(2 * q.mp * _gaussian_tail_exponent(b, q.sigma2, 2.0), "gaussian-series-norm-eigentuple")


def rectangular_series_bound(q: BoundQuery) -> BoundValue:
    """``(m + n) p exp(-theta^2 / (2 sigma^2))`` for the spectral norm."""
    theta = q.require_theta()
    n = q.n if q.n is not None else q.m
    return BoundValue((q.m + n) * q.p * _gaussian_tail_exponent(theta, q.sigma2, 2.0), "rectangular-series")


def rectangular_series_eigentuple_bound(q: BoundQuery) -> BoundValue:
    b = _nonnegative_b_min(q)
    n = q.n if q.n is not None else q.m
    return BoundValue((q.m + n) * q.p * _gaussian_tail_exponent(b, q.sigma2, 2.0),
                      "rectangular-series-eigentuple")


def hadamard_series_bound(q: BoundQuery) -> BoundValue:
    """Rectangular bound for ``||X o A||`` with ``sigma2`` from :func:`hadamard_sigma2`."""
    theta = q.require_theta()
    n = q.n if q.n is not None else q.m
    return BoundValue((q.m + n) * q.p * _gaussian_tail_exponent(theta, q.sigma2, 2.0), "hadamard")


def series_sigma2(coefficients: Sequence[DenseTensor3], rectangular: bool = False) -> float:
    """Variance proxy of a matrix series.

    Hermitian path: ``||sum A_i^2||``.  Rectangular path:
    ``max(||sum A_i A_i^H||, ||sum A_i^H A_i||)``.
    """
    coefficients = list(coefficients)
    if not coefficients:
        raise ValueError("need at least one coefficient tensor")
    shape = coefficients[0].data.shape
    for i, a in enumerate(coefficients):
        if a.data.shape != shape:
            raise ShapeError(f"coefficient {i} has shape {a.shape}, expected {coefficients[0].shape}")
    if rectangular:
        left = tensor_sum(a @ a.H for a in coefficients)
        right = tensor_sum(a.H @ a for a in coefficients)
        return max(spectral_norm(left), spectral_norm(right))
    for i, a in enumerate(coefficients):
        if not a.is_square or not is_hermitian(a):
            raise NotHermitianError(f"coefficient {i} is not Hermitian")
    return spectral_norm(tensor_sum(a @ a for a in coefficients))


def hadamard_sigma2(a: DenseTensor3, mode: str = "stated") -> float:
    """Variance proxy for ``X o A`` with standard Gaussian ``X``.

    ``stated`` sums ``|a_ijk|^2`` over the first frontal slice only;
    ``all-slices`` sums over every frontal slice.  Both return the largest
    row or column sum.
    """
    sq = np.abs(a.data) ** 2
    if mode == "stated":
        sq = sq[:, :, :1]
    elif mode != "all-slices":
        raise ValueError(f"mode must be 'stated' or 'all-slices', got {mode!r}")
    rows = sq.sum(axis=(1, 2))
    cols = sq.sum(axis=(0, 2))
    return float(max(rows.max(), cols.max()))


# --- Chernoff ----------------------------------------------------------------

def _check_unit_open(name: str, value: float):
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")


def _chernoff1_upper_value(q: BoundQuery, x: float, theorem_id: str) -> BoundValue:
    mu = q.require("mu_bar_max")
    _check_unit_open("mu_bar_max", mu)
    value = q.mp * math.exp(-q.n_sum * binary_divergence(x, mu))
    return BoundValue(value, theorem_id, {"threshold in [mu_bar_max, 1]": mu <= x <= 1.0})


def _chernoff1_lower_value(q: BoundQuery, x: float, theorem_id: str) -> BoundValue:
    mu = q.require("mu_bar_min")
    _check_unit_open("mu_bar_min", mu)
    value = q.mp * math.exp(-q.n_sum * binary_divergence(x, mu))
    return BoundValue(value, theorem_id, {"threshold in [0, mu_bar_min]": 0.0 <= x <= mu})


def chernoff1_upper(q: BoundQuery) -> BoundValue:
    """``mp exp(-n D(theta || mu_bar_max))`` for ``lambda_max`` of the average."""
    return _chernoff1_upper_value(q, q.require_theta(), "chernoff1-upper")


def chernoff1_lower(q: BoundQuery) -> BoundValue:
    return _chernoff1_lower_value(q, q.require_theta(), "chernoff1-lower")


def chernoff1_eigentuple_upper(q: BoundQuery) -> BoundValue:
    """Chernoff I with the threshold ``b_min / n`` taken from a vector."""
    b = _nonnegative_b_min(q)
    return _chernoff1_upper_value(q, b / q.n_sum, "chernoff1-eigentuple-upper")


def chernoff1_eigentuple_lower(q: BoundQuery) -> BoundValue:
    b = _nonnegative_b_min(q)
    return _chernoff1_lower_value(q, b / q.n_sum, "chernoff1-eigentuple-lower")


def _chernoff2_upper_value(q: BoundQuery, theorem_id: str) -> BoundValue:
    theta = q.require_theta()
    if theta < 0:
        raise ValueError(f"theta must be nonnegative, got {theta}")
    mu = q.require("mu_max")
    log_base = theta - (1.0 + theta) * math.log1p(theta)
    return BoundValue(q.mp * math.exp(log_base * mu / q.T), theorem_id)


def _chernoff2_lower_value(q: BoundQuery, theorem_id: str) -> BoundValue:
    theta = q.require_theta()
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    mu = q.require("mu_min")
    log_base = -theta - xlogy(1.0 - theta, 1.0 - theta)
    return BoundValue(q.mp * math.exp(log_base * mu / q.T), theorem_id)


def chernoff2_upper(q: BoundQuery) -> BoundValue:
    """``mp (e^theta / (1 + theta)^(1 + theta))^(mu_max / T)``."""
    return _chernoff2_upper_value(q, "chernoff2-upper")


def chernoff2_lower(q: BoundQuery) -> BoundValue:
    """``mp (e^-theta / (1 - theta)^(1 - theta))^(mu_min / T)``, ``0^0 = 1``."""
    return _chernoff2_lower_value(q, "chernoff2-lower")


def chernoff2_eigentuple_upper(q: BoundQuery) -> BoundValue:
    # threshold vector is (1 + theta) mu_max * ones; right side as the scalar form
    return _chernoff2_upper_value(q, "chernoff2-eigentuple-upper")


def chernoff2_eigentuple_lower(q: BoundQuery) -> BoundValue:
    return _chernoff2_lower_value(q, "chernoff2-eigentuple-lower")


# --- Bernstein ---------------------------------------------------------------

def _require_positive_sigma2(q: BoundQuery):
    if not q.sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {q.sigma2}")


def _bernstein(q: BoundQuery, x: float, theorem_id: str, family: str, form: str) -> BoundValue:
    _require_positive_sigma2(q)
    if x < 0:
        raise ValueError(f"threshold must be nonnegative, got {x}")
    s2, T = q.sigma2, q.T
    boundary = s2 / T
    if family == "bounded":
        general_c, sub_c, exp_c = 1.0 / 3.0, 3.0 / 8.0, 3.0 / 8.0
    else:
        general_c, sub_c, exp_c = 1.0, 1.0 / 4.0, 1.0 / 4.0
    if form == "general":
        exponent = -(x * x / 2.0) / (s2 + T * x * general_c)
        validity = {}
    elif form == "subgauss":
        exponent = -sub_c * x * x / s2
        validity = {"threshold <= sigma2/T": x <= boundary}
    elif form == "subexp":
        exponent = -exp_c * x / T
        validity = {"threshold >= sigma2/T": x >= boundary}
    else:
        raise ValueError(f"unknown Bernstein form {form!r}")
    return BoundValue(q.mp * math.exp(exponent), theorem_id, validity)


def bernstein_bounded(q: BoundQuery) -> BoundValue:
    """``mp exp(-(theta^2/2) / (sigma^2 + T theta / 3))``."""
    return _bernstein(q, q.require_theta(), "bernstein-bounded", "bounded", "general")


def bernstein_bounded_subgauss_regime(q: BoundQuery) -> BoundValue:
    return _bernstein(q, q.require_theta(), "bernstein-bounded-subgauss", "bounded", "subgauss")


def bernstein_bounded_subexp_regime(q: BoundQuery) -> BoundValue:
    return _bernstein(q, q.require_theta(), "bernstein-bounded-subexp", "bounded", "subexp")


def bernstein_subexponential(q: BoundQuery) -> BoundValue:
    """``mp exp(-(theta^2/2) / (sigma^2 + T theta))``."""
    return _bernstein(q, q.require_theta(), "bernstein-subexp", "subexp", "general")


def bernstein_subexponential_subgauss_regime(q: BoundQuery) -> BoundValue:
    return _bernstein(q, q.require_theta(), "bernstein-subexp-subgauss", "subexp", "subgauss")


def bernstein_subexponential_subexp_regime(q: BoundQuery) -> BoundValue:
    return _bernstein(q, q.require_theta(), "bernstein-subexp-subexp", "subexp", "subexp")


def bernstein_bounded_eigentuple(q: BoundQuery, form: str = "general") -> BoundValue:
    b = _nonnegative_b_min(q, strict=True)
    suffix = "" if form == "general" else f"-{form}"
    return _bernstein(q, b, f"bernstein-bounded-eigentuple{suffix}", "bounded", form)


def bernstein_subexponential_eigentuple(q: BoundQuery, form: str = "general") -> BoundValue:
    b = _nonnegative_b_min(q, strict=True)
    suffix = "" if form == "general" else f"-{form}"
    return _bernstein(q, b, f"bernstein-subexp-eigentuple{suffix}", "subexp", form)


# --- martingales -----------------------------------------------------------

def azuma_bound(q: BoundQuery) -> BoundValue:
    """``mp exp(-theta^2 / (8 sigma^2))``."""
    return BoundValue(q.mp * _gaussian_tail_exponent(q.require_theta(), q.sigma2, 8.0), "azuma")


def mcdiarmid_bound(q: BoundQuery) -> BoundValue:
    # same right side as Azuma under bounded-difference hypotheses
    return BoundValue(q.mp * _gaussian_tail_exponent(q.require_theta(), q.sigma2, 8.0), "mcdiarmid")


def azuma_eigentuple_bound(q: BoundQuery) -> BoundValue:
    b = _nonnegative_b_min(q)
    return BoundValue(q.mp * _gaussian_tail_exponent(b, q.sigma2, 8.0), "azuma-eigentuple")


def mcdiarmid_eigentuple_bound(q: BoundQuery) -> BoundValue:
    b = _nonnegative_b_min(q)
    return BoundValue(q.mp * _gaussian_tail_exponent(b, q.sigma2, 8.0), "mcdiarmid-eigentuple")


# --- expectation bounds ----------------------------------------------------

def solve_delta_opt() -> Tuple[float, float]:
    """Root of ``e^delta = 1/delta`` and ``C = e^(e^delta) / delta``."""
    delta = brentq(lambda d: d * math.exp(d) - 1.0, 0.1, 1.0, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    return delta, math.exp(math.exp(delta)) / delta


def expectation_bounds_chernoff(m: int, p: int, mu_max: float, T: float) -> Tuple[float, float, bool]:
    """``(mu_max, C mp exp(-mu_max/T), lower <= upper)``."""
    if mu_max < 0 or not T > 0:
        raise ValueError("need mu_max >= 0 and T > 0")
    _, C = solve_delta_opt()
    upper = C * m * p * math.exp(-mu_max / T)
    return mu_max, upper, mu_max <= upper


def gaussian_integral(x: float) -> float:
    """``int_0^x exp(-s^2) ds``."""
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    return 0.5 * SQRT_PI * float(erf(x))


def expectation_bounds_subexp(m: int, p: int, sigma: float, T: float,
                              mu_max: Optional[float] = None) -> Tuple[Optional[float], float]:
    """``(mu_max, 2mp (sigma G(sigma/2T) + 2T exp(-sigma^2/4T^2)))``."""
    if sigma < 0 or not T > 0:
        raise ValueError("need sigma >= 0 and T > 0")
    upper = 2 * m * p * (sigma * gaussian_integral(sigma / (2 * T)) + 2 * T * math.exp(-sigma ** 2 / (4 * T ** 2)))
    return mu_max, upper


def norm_expectation_bounds(m: int, p: int, sigma: float) -> Tuple[float, float]:
    """Bracket ``(sigma^2, 4 mp sigma^2)`` for ``E ||X||^2`` of a Gaussian series."""
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    s2 = sigma * sigma
    return s2, 4 * m * p * s2


# --- registry --------------------------------------------------------------

BOUNDS: Dict[str, Callable[[BoundQuery], BoundValue]] = {
    "gaussian-series": gaussian_series_lambda_bound,
    "gaussian-series-norm": gaussian_series_norm_bound,
    "gaussian-series-eigentuple": gaussian_series_eigentuple_bound,
    "gaussian-series-norm-eigentuple": gaussian_series_norm_eigentuple_bound,
    "rectangular-series": rectangular_series_bound,
    "rectangular-series-eigentuple": rectangular_series_eigentuple_bound,
    "hadamard": hadamard_series_bound,
    "chernoff1-upper": chernoff1_upper,
    "chernoff1-lower": chernoff1_lower,
    "chernoff1-eigentuple-upper": chernoff1_eigentuple_upper,
    "chernoff1-eigentuple-lower": chernoff1_eigentuple_lower,
    "chernoff2-upper": chernoff2_upper,
    "chernoff2-lower": chernoff2_lower,
    "chernoff2-eigentuple-upper": chernoff2_eigentuple_upper,
    "chernoff2-eigentuple-lower": chernoff2_eigentuple_lower,
    "bernstein-bounded": bernstein_bounded,
    "bernstein-bounded-subgauss": bernstein_bounded_subgauss_regime,
    "bernstein-bounded-subexp": bernstein_bounded_subexp_regime,
    "bernstein-subexp": bernstein_subexponential,
    "bernstein-subexp-subgauss": bernstein_subexponential_subgauss_regime,
    "bernstein-subexp-subexp": bernstein_subexponential_subexp_regime,
    "bernstein-bounded-eigentuple": bernstein_bounded_eigentuple,
    "bernstein-bounded-eigentuple-subgauss": lambda q: bernstein_bounded_eigentuple(q, "subgauss"),
    "bernstein-bounded-eigentuple-subexp": lambda q: bernstein_bounded_eigentuple(q, "subexp"),
    "bernstein-subexp-eigentuple": bernstein_subexponential_eigentuple,
    "bernstein-subexp-eigentuple-subgauss": lambda q: bernstein_subexponential_eigentuple(q, "subgauss"),
    "bernstein-subexp-eigentuple-subexp": lambda q: bernstein_subexponential_eigentuple(q, "subexp"),
    "azuma": azuma_bound,
    "azuma-eigentuple": azuma_eigentuple_bound,
    "mcdiarmid": mcdiarmid_bound,
    "mcdiarmid-eigentuple": mcdiarmid_eigentuple_bound,
}


def evaluate(theorem_id: str, q: BoundQuery) -> BoundValue:
    try:
        fn = BOUNDS[theorem_id]
    except KeyError:
        raise KeyError(f"unknown theorem id {theorem_id!r}") from None
    return fn(q)
