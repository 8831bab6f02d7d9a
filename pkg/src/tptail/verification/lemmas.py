"""Deterministic checks of the trace, Loewner and Laplace-type inequalities.

Expectations are exact: finite-support random tensors are summed atom by
atom and the Gaussian case uses Gauss-Hermite quadrature.  Each check
returns a :class:`LemmaCheckResult` whose slack is right side minus left
side, scaled as documented per check; ``passed`` means ``min_slack >= -tol``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.hermite import hermgauss

from ..ensembles import FiniteSupportTensorRV, exact_expectation, random_hermitian
from ..spectral import (
    check_eigentuple_condition,
    lambda_max,
    loewner_slack,
    slice_eigvalsh,
    tensor_function,
    texp,
    tlog,
    tsqrt,
)
from ..tensor import DenseTensor3, identity, tensor_sum, to_slices, trace

TRACE_TOL = 1e-9
LOEWNER_TOL = 1e-10
TAIL_TOL = 1e-12
QUADRATURE_TOL = 1e-8
GH_NODES = 64


def default_t_grid() -> np.ndarray:
    """32 log-spaced dual variables on ``[0.01, 10]``."""
    return np.geomspace(1e-2, 1e1, 32)


@dataclass
class LemmaCheckResult:
    lemma_id: str
    min_slack: float
    trials: int = 1
    tol: float = TRACE_TOL
    witness: Optional[dict] = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.min_slack >= -self.tol

    @classmethod
    def combine(cls, lemma_id: str, results: Sequence["LemmaCheckResult"]) -> "LemmaCheckResult":
        """Aggregate instance results, keeping the witness of the worst one."""
        worst = min(results, key=lambda r: r.min_slack)
        details = {}
        for r in results:
            for k, v in r.details.items():
                details.setdefault(k, v)
        return cls(lemma_id, worst.min_slack, sum(r.trials for r in results), worst.tol,
                   worst.witness, details)


def _loewner_result(lemma_id: str, lhs: DenseTensor3, rhs: DenseTensor3, witness: dict,
                    tol: float = LOEWNER_TOL) -> LemmaCheckResult:
    # lhs <= rhs; slack is lambda_min(rhs - lhs) / max(1, ||rhs - lhs||)
    slack, scale = loewner_slack(lhs, rhs)
    return LemmaCheckResult(lemma_id, slack / scale, 1, tol, witness)


def _trace_result(lemma_id: str, lhs: float, rhs: float, witness: dict,
                  tol: float = TRACE_TOL) -> LemmaCheckResult:
    return LemmaCheckResult(lemma_id, (rhs - lhs) / max(1.0, abs(rhs)), 1, tol, witness)


def _tr(a: DenseTensor3) -> float:
    return trace(a).real


def _square(a: DenseTensor3) -> DenseTensor3:
    return tensor_function(a, "square")


# --- single-instance checks ------------------------------------------------

def check_golden_thompson(c: DenseTensor3, d: DenseTensor3) -> LemmaCheckResult:
    """``Tr exp(c + d) <= Tr(exp(c) * exp(d))``, slack relative to the right side."""
    lhs = _tr(texp(c + d))
    rhs = _tr(texp(c) @ texp(d))
    return _trace_result("golden-thompson", lhs, rhs, {"c": c, "d": d})


def gauss_hermite_normal(nodes: int = GH_NODES) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and probabilities of the Gauss-Hermite rule for a standard normal."""
    x, w = hermgauss(nodes)
    p = w / math.sqrt(math.pi)
    return math.sqrt(2.0) * x, p / p.sum()


def check_mgf_gaussian(a: DenseTensor3, t: float, nodes: int = GH_NODES) -> LemmaCheckResult:
    """``E exp(alpha t A) = exp(t^2 A^2 / 2)`` with the expectation by quadrature.

    Slack is minus the Frobenius-relative error.
    """
    x, p = gauss_hermite_normal(nodes)
    rv = FiniteSupportTensorRV(tuple(a * float(xi) for xi in x), p)
    lhs = exact_expectation(rv, lambda y: texp(y * t))
    rhs = texp(_square(a) * (t * t / 2.0))
    err = np.linalg.norm((lhs.data - rhs.data).ravel()) / max(np.linalg.norm(rhs.data.ravel()), 1e-300)
    return LemmaCheckResult("mgf-gaussian", -float(err), 1, QUADRATURE_TOL, {"a": a, "t": t})


def check_mgf_rademacher(a: DenseTensor3, t: float) -> LemmaCheckResult:
    """``E exp(beta t A) = cosh(tA) <= exp(t^2 A^2 / 2)``."""
    lhs = exact_expectation(FiniteSupportTensorRV.symmetric(a), lambda y: texp(y * t))
    rhs = texp(_square(a) * (t * t / 2.0))
    return _loewner_result("mgf-rademacher", lhs, rhs, {"a": a, "t": t})


def _require(cond: bool, message: str):
    if not cond:
        raise ValueError(message)


def _max_atom_lambda(rv: FiniteSupportTensorRV) -> float:
    return max(lambda_max(x) for x in rv.atoms)


def _is_centered(rv: FiniteSupportTensorRV) -> bool:
    mean = rv.mean()
    scale = max(1.0, max(x.frobenius() for x in rv.atoms))
    return mean.frobenius() <= 1e-10 * scale


def check_chernoff_mgf(rv: FiniteSupportTensorRV, t: float) -> LemmaCheckResult:
    """``E exp(tX) <= I + (e^t - 1) E X`` for TPSD ``X`` with ``lambda_max(X) <= 1``."""
    _require(min(-lambda_max(-x) for x in rv.atoms) >= -1e-10, "atoms must be TPSD")
    _require(_max_atom_lambda(rv) <= 1.0 + 1e-10, "atoms must have lambda_max <= 1")
    m, p = rv.atoms[0].m, rv.atoms[0].p
    lhs = exact_expectation(rv, lambda y: texp(y * t))
    rhs = identity(m, p) + rv.mean() * math.expm1(t)
    return _loewner_result("chernoff-mgf", lhs, rhs, {"rv": rv, "t": t})


def check_bounded_bernstein_mgf(rv: FiniteSupportTensorRV, t: float) -> LemmaCheckResult:
    """``E exp(tX) <= exp((e^t - t - 1) E X^2)`` for centered ``X`` with ``lambda_max(X) <= 1``."""
    _require(t > 0, "t must be positive")
    _require(_is_centered(rv), "random tensor must be centered")
    _require(_max_atom_lambda(rv) <= 1.0 + 1e-10, "atoms must have lambda_max <= 1")
    lhs = exact_expectation(rv, lambda y: texp(y * t))
    rhs = texp(exact_expectation(rv, _square) * (math.expm1(t) - t))
    return _loewner_result("bernstein-bounded-mgf", lhs, rhs, {"rv": rv, "t": t})


def subexp_moment_slack(rv: FiniteSupportTensorRV, a2: DenseTensor3, k_max: int = 6) -> Tuple[float, int]:
    """Worst normalized slack of ``E X^k <= k!/2 A^2`` over ``2 <= k <= k_max`` and the ``k`` attaining it."""
    worst, worst_k = math.inf, 2
    for k in range(2, k_max + 1):
        moment = exact_expectation(rv, lambda y, k=k: tensor_function(y, lambda w: w ** k))
        slack, scale = loewner_slack(moment, a2 * (math.factorial(k) / 2.0))
        if slack / scale < worst:
            worst, worst_k = slack / scale, k
    return worst, worst_k


def check_subexp_bernstein_mgf(rv: FiniteSupportTensorRV, t: float,
                               a_cap: Optional[DenseTensor3] = None) -> LemmaCheckResult:
    """``E exp(tX) <= exp(t^2 A^2 / (2 (1 - t)))`` for ``0 < t < 1`` and scale ``T = 1``.

    ``A^2`` defaults to ``E X^2``; the moment hypothesis is verified for ``k <= 6``.
    """
    _require(0.0 < t < 1.0, "t must lie in (0, 1)")
    _require(_is_centered(rv), "random tensor must be centered")
    a2 = exact_expectation(rv, _square) if a_cap is None else _square(a_cap)
    slack, k = subexp_moment_slack(rv, a2)
    _require(slack >= -LOEWNER_TOL, f"moment hypothesis fails at k = {k} (slack {slack:.3g})")
    lhs = exact_expectation(rv, lambda y: texp(y * t))
    rhs = texp(a2 * (t * t / (2.0 * (1.0 - t))))
    return _loewner_result("bernstein-subexp-mgf", lhs, rhs, {"rv": rv, "t": t})


def check_symmetrization(a_fixed: DenseTensor3, rv: FiniteSupportTensorRV) -> LemmaCheckResult:
    """``E Tr exp(A + X) <= E Tr exp(A + 2 beta X)`` for centered ``X`` and a Rademacher ``beta``."""
    _require(_is_centered(rv), "random tensor must be centered")
    lhs = sum(float(w) * _tr(texp(a_fixed + x)) for x, w in zip(rv.atoms, rv.probs))
    rhs = sum(float(w) * 0.5 * (_tr(texp(a_fixed + x * 2.0)) + _tr(texp(a_fixed - x * 2.0)))
              for x, w in zip(rv.atoms, rv.probs))
    return _trace_result("symmetrization", lhs, rhs, {"a": a_fixed, "rv": rv})


def check_cgf_symmetrized(x_fixed: DenseTensor3, a_cap: DenseTensor3, t: float) -> LemmaCheckResult:
    """``log E[exp(2 beta t X) | X] <= 2 t^2 A^2`` whenever ``X^2 <= A^2``."""
    a2 = _square(a_cap)
    slack, scale = loewner_slack(_square(x_fixed), a2)
    _require(slack >= -LOEWNER_TOL * scale, "hypothesis X^2 <= A^2 fails")
    mgf = exact_expectation(FiniteSupportTensorRV.symmetric(x_fixed), lambda y: texp(y * (2.0 * t)))
    return _loewner_result("cgf-symmetrized", tlog(mgf), a2 * (2.0 * t * t), {"x": x_fixed, "a": a_cap, "t": t})


def check_lieb_trace(a_fixed: DenseTensor3, rv: FiniteSupportTensorRV) -> LemmaCheckResult:
    """``E Tr exp(A + X) <= Tr exp(A + log E exp(X))``."""
    lhs = sum(float(w) * _tr(texp(a_fixed + x)) for x, w in zip(rv.atoms, rv.probs))
    rhs = _tr(texp(a_fixed + tlog(exact_expectation(rv, texp))))
    return _trace_result("lieb-trace", lhs, rhs, {"a": a_fixed, "rv": rv})


# --- tail checks by exact enumeration --------------------------------------

@dataclass(frozen=True)
class EnumeratedSum:
    """All outcomes of ``sum_i X_i`` for independent finite-support summands.

    ``eigenvalues[o]`` has shape ``(p, m)`` (ascending per slice).
    """

    probs: np.ndarray
    eigenvalues: np.ndarray
    m: int
    p: int

    @classmethod
    def from_summands(cls, summands: Sequence[FiniteSupportTensorRV]) -> "EnumeratedSum":
        hats = [np.stack([to_slices(a.data) for a in rv.atoms]) for rv in summands]
        probs, slices = [], []
        for combo in itertools.product(*[range(len(rv.atoms)) for rv in summands]):
            probs.append(math.prod(float(rv.probs[c]) for rv, c in zip(summands, combo)))
            slices.append(sum(h[c] for h, c in zip(hats, combo)))
        a0 = summands[0].atoms[0]
        return cls(np.array(probs), slice_eigvalsh(np.stack(slices)), a0.m, a0.p)

    def tail(self, theta: Optional[float] = None, b: Optional[Sequence[float]] = None) -> float:
        if b is not None:
            hit = np.all(self.eigenvalues[:, :, -1] >= np.asarray(b, float), axis=-1)
        else:
            hit = self.eigenvalues[:, :, -1].max(axis=-1) >= theta
        return float(self.probs[hit].sum())

    def trace_mgf(self, t: float) -> float:
        """``E Tr exp(tS)``."""
        return float(self.probs @ np.exp(t * self.eigenvalues).sum(axis=(1, 2)))

    def condition_failure(self, t_grid: Sequence[float]) -> Optional[float]:
        """First ``t`` at which some outcome of ``tS`` violates the eigentuple condition."""
        p = self.p
        for t in t_grid:
            w = t * self.eigenvalues
            lam = np.exp(w.max(axis=(1, 2)))
            lhs = lam ** p / p + 1.0 - 1.0 / p
            tr = np.exp(w).sum(axis=(1, 2))
            if np.any(tr - lhs < -1e-12 * np.maximum(1.0, np.abs(lhs))):
                return float(t)
        return None


def _threshold_kwargs(threshold) -> dict:
    if np.ndim(threshold) == 0:
        return {"theta": float(threshold)}
    return {"b": np.asarray(threshold, float)}


def _tail_rhs(log_terms: Callable[[float], float], threshold, t_grid) -> float:
    """``min_t exp(log_terms(t) - t * x)`` with ``x = theta`` or ``x = max_j b_j``."""
    x = float(threshold) if np.ndim(threshold) == 0 else float(np.max(threshold))
    best = min(log_terms(t) - t * x for t in t_grid)
    return math.exp(best) if best < 700.0 else math.inf


def _tail_result(lemma_id: str, exact: float, rhs: float, threshold, extra: dict) -> LemmaCheckResult:
    return LemmaCheckResult(lemma_id, rhs - exact, 1, TAIL_TOL, {"threshold": threshold, **extra},
                            {k: v for k, v in extra.items() if k == "condition_first_failure_t"})


def check_laplace_method(summands: Sequence[FiniteSupportTensorRV], threshold,
                         t_grid: Optional[Sequence[float]] = None) -> LemmaCheckResult:
    """Exact tail of ``lambda_max`` (scalar threshold) or ``d_max`` (vector) against the Laplace bound.

    The vector form divides by ``e^(t b_j)`` and takes the minimum over ``j``.
    For vector thresholds the first grid ``t`` at which ``tS`` breaks the
    eigentuple condition is recorded, not enforced.
    """
    t_grid = default_t_grid() if t_grid is None else t_grid
    s = EnumeratedSum.from_summands(summands)
    kw = _threshold_kwargs(threshold)
    exact = s.tail(**kw)
    rhs = _tail_rhs(lambda t: math.log(s.trace_mgf(t)), threshold, t_grid)
    vector = "b" in kw
    extra = {"condition_first_failure_t": s.condition_failure(t_grid)} if vector else {}
    return _tail_result("laplace-eigentuple" if vector else "laplace-eigenvalue", exact, rhs, threshold, extra)


def cgf_domination_slack(rv: FiniteSupportTensorRV, f: Callable[[float], float], a: DenseTensor3,
                         t_grid: Sequence[float]) -> float:
    """Worst normalized slack of ``log E exp(tX) <= f(t) A`` over the grid."""
    worst = math.inf
    for t in t_grid:
        cgf = tlog(exact_expectation(rv, lambda y: texp(y * t)))
        slack, scale = loewner_slack(cgf, a * f(t))
        worst = min(worst, slack / scale)
    return worst


def check_master_tail(summands: Sequence[FiniteSupportTensorRV], f: Callable[[float], float],
                      a_list: Sequence[DenseTensor3], threshold,
                      t_grid: Optional[Sequence[float]] = None) -> LemmaCheckResult:
    """Exact tail against ``mp min_t exp(-t x + f(t) lambda_max(sum A_i))``.

    The hypothesis ``f(t) A_i >= log E exp(t X_i)`` is verified on the grid first.
    """
    t_grid = default_t_grid() if t_grid is None else t_grid
    for i, (rv, a) in enumerate(zip(summands, a_list)):
        slack = cgf_domination_slack(rv, f, a, t_grid)
        _require(slack >= -LOEWNER_TOL, f"summand {i}: f(t) A_i does not dominate log E exp(t X_i)")
    s = EnumeratedSum.from_summands(summands)
    kw = _threshold_kwargs(threshold)
    lam = lambda_max(tensor_sum(a_list))
    log_mp = math.log(s.m * s.p)
    rhs = _tail_rhs(lambda t: log_mp + f(t) * lam, threshold, t_grid)
    vector = "b" in kw
    extra = {"condition_first_failure_t": s.condition_failure(t_grid)} if vector else {}
    return _tail_result("master-tail-eigentuple" if vector else "master-tail", s.tail(**kw), rhs, threshold, extra)


def check_averaged_mgf_tail(summands: Sequence[FiniteSupportTensorRV], threshold,
                            t_grid: Optional[Sequence[float]] = None) -> LemmaCheckResult:
    """Exact tail against ``mp min_t exp(-t x + n log lambda_max(mean_i E exp(t X_i)))``."""
    t_grid = default_t_grid() if t_grid is None else t_grid
    n = len(summands)
    s = EnumeratedSum.from_summands(summands)
    kw = _threshold_kwargs(threshold)
    log_mp = math.log(s.m * s.p)

    def log_terms(t):
        avg = tensor_sum(exact_expectation(rv, lambda y: texp(y * t)) for rv in summands) * (1.0 / n)
        return log_mp + n * math.log(lambda_max(avg))

    rhs = _tail_rhs(log_terms, threshold, t_grid)
    vector = "b" in kw
    extra = {"condition_first_failure_t": s.condition_failure(t_grid)} if vector else {}
    lemma_id = "averaged-mgf-tail-eigentuple" if vector else "averaged-mgf-tail"
    return _tail_result(lemma_id, s.tail(**kw), rhs, threshold, extra)


# --- random instance generators ---------------------------------------------

def random_tpsd(m: int, p: int, rng: np.random.Generator, cap: float = 1.0) -> DenseTensor3:
    """TPSD tensor ``G^H G`` rescaled to have ``lambda_max`` uniform on ``(0, cap]``."""
    g = random_hermitian(m, p, rng)
    gram = g @ g
    top = lambda_max(gram)
    return gram * (cap * (1.0 - rng.random()) / top) if top > 0 else gram


def random_centered(m: int, p: int, n_atoms: int, rng: np.random.Generator,
                    max_lambda: Optional[float] = None, max_norm: Optional[float] = None) -> FiniteSupportTensorRV:
    """Centered finite-support tensor, rescaled so every atom meets the given caps."""
    atoms = [random_hermitian(m, p, rng, complex=bool(rng.integers(2))) for _ in range(n_atoms)]
    rv = FiniteSupportTensorRV(tuple(atoms), rng.dirichlet(np.ones(n_atoms))).centered()
    factor = 1.0
    if max_lambda is not None:
        top = _max_atom_lambda(rv)
        if top > 0:
            factor = min(factor, max_lambda / top)
    if max_norm is not None:
        top = max(float(np.abs(slice_eigvalsh(to_slices(x.data))).max()) for x in rv.atoms)
        if top > 0:
            factor = min(factor, max_norm / top)
    return rv.scaled(factor * (1.0 - 0.5 * rng.random()))


def _hermitian_pair(rng, shapes=((2, 3), (3, 2))):
    m, p = shapes[int(rng.integers(len(shapes)))]
    cplx = bool(rng.integers(2))
    return random_hermitian(m, p, rng, complex=cplx), random_hermitian(m, p, rng, complex=cplx)


# --- suite -----------------------------------------------------------------

T_GRID_MGF = tuple(np.round(np.arange(1, 21) * 0.1, 10))


def _suite_golden_thompson(rng):
    results = [check_golden_thompson(*_hermitian_pair(rng)) for _ in range(100)]
    return LemmaCheckResult.combine("golden-thompson", results)


def _suite_golden_thompson_commuting(rng):
    results = []
    for _ in range(50):
        c, _ = _hermitian_pair(rng)
        d = tensor_function(c, lambda w: 0.3 * w ** 2 - w)
        r = check_golden_thompson(c, d)
        results.append(LemmaCheckResult("golden-thompson-commuting", -abs(r.min_slack), 1, LOEWNER_TOL, r.witness))
    return LemmaCheckResult.combine("golden-thompson-commuting", results)


def _suite_mgf_gaussian(rng):
    results = [check_mgf_gaussian(random_hermitian(2, 2, rng, complex=bool(i % 2), scale=0.5), t)
               for i in range(30) for t in (0.3, 0.7, 1.0)]
    return LemmaCheckResult.combine("mgf-gaussian", results)


def _suite_mgf_rademacher(rng):
    tensors = [random_hermitian(2, 2 + i % 2, rng, complex=bool(i % 2)) for i in range(100)]
    results = [check_mgf_rademacher(a, t) for a in tensors for t in T_GRID_MGF]
    return LemmaCheckResult.combine("mgf-rademacher", results)


def _suite_chernoff_mgf(rng):
    results = []
    for i in range(30):
        rv = FiniteSupportTensorRV(tuple(random_tpsd(2, 2 + i % 2, rng) for _ in range(3)),
                                   rng.dirichlet(np.ones(3)))
        results += [check_chernoff_mgf(rv, t) for t in (0.3, 1.0, 2.0)]
    return LemmaCheckResult.combine("chernoff-mgf", results)


def _suite_bernstein_bounded(rng):
    results = []
    for i in range(30):
        rv = random_centered(2, 2 + i % 2, 3, rng, max_lambda=1.0)
        results += [check_bounded_bernstein_mgf(rv, t) for t in (0.1, 0.5, 1.0, 2.0)]
    return LemmaCheckResult.combine("bernstein-bounded-mgf", results)


def _suite_bernstein_subexp(rng):
    results = []
    for i in range(30):
        rv = random_centered(2, 2 + i % 2, 3, rng, max_norm=3.0)
        results += [check_subexp_bernstein_mgf(rv, t) for t in (0.1, 0.3, 0.5, 0.9)]
    return LemmaCheckResult.combine("bernstein-subexp-mgf", results)


def _suite_symmetrization(rng):
    results = [check_symmetrization(random_hermitian(2, 2, rng), random_centered(2, 2, 3, rng))
               for _ in range(30)]
    return LemmaCheckResult.combine("symmetrization", results)


def _suite_cgf(rng):
    results = []
    for i in range(30):
        x = random_hermitian(2, 2, rng, complex=bool(i % 2))
        if i % 3 == 0:
            a = x
        else:
            g = random_hermitian(2, 2, rng, scale=0.5)
            a = tsqrt(_square(x) + g @ g)
        results += [check_cgf_symmetrized(x, a, t) for t in (0.1, 0.5, 1.0, 2.0)]
    return LemmaCheckResult.combine("cgf-symmetrized", results)


def _suite_lieb(rng):
    results = []
    for _ in range(30):
        atoms = tuple(random_hermitian(2, 2, rng) for _ in range(3))
        results.append(check_lieb_trace(random_hermitian(2, 2, rng), FiniteSupportTensorRV(atoms, rng.dirichlet(np.ones(3)))))
    return LemmaCheckResult.combine("lieb-trace", results)


def _rademacher_summands(rng, n: int, m: int = 2, p: int = 2, scale: float = 0.5):
    caps = [random_hermitian(m, p, rng, scale=scale) for _ in range(n)]
    return caps, [FiniteSupportTensorRV.symmetric(a) for a in caps]


def _tpsd_summands(rng, n: int, m: int = 2, p: int = 2):
    out = []
    for _ in range(n):
        atoms = (random_tpsd(m, p, rng), random_tpsd(m, p, rng))
        out.append(FiniteSupportTensorRV(atoms, rng.dirichlet(np.ones(2))))
    return out


def _threshold_points(s: EnumeratedSum, vector: bool, p: int, k: int = 5):
    top = float(s.eigenvalues[:, :, -1].max())
    xs = np.linspace(0.1 * top, top, k)
    if not vector:
        return list(xs)
    w = 1.0 + 0.25 * np.arange(p) / max(p - 1, 1)
    return [tuple(x * w / w.max()) for x in xs]


def _suite_laplace(vector: bool):
    def run(rng):
        results = []
        for i in range(6):
            _, summands = _rademacher_summands(rng, 4 + i % 3)
            s = EnumeratedSum.from_summands(summands)
            for thr in _threshold_points(s, vector, s.p):
                results.append(check_laplace_method(summands, thr))
        return LemmaCheckResult.combine("laplace-eigentuple" if vector else "laplace-eigenvalue", results)
    return run


def _suite_master(vector: bool):
    def run(rng):
        results = []
        for i in range(4):
            caps, summands = _rademacher_summands(rng, 4 + i % 2)
            s = EnumeratedSum.from_summands(summands)
            for thr in _threshold_points(s, vector, s.p):
                results.append(check_master_tail(summands, lambda t: t * t / 2.0, [_square(a) for a in caps], thr))
            tpsd = _tpsd_summands(rng, 4 + i % 2)
            s = EnumeratedSum.from_summands(tpsd)
            for thr in _threshold_points(s, vector, s.p):
                results.append(check_master_tail(tpsd, math.expm1, [rv.mean() for rv in tpsd], thr))
        return LemmaCheckResult.combine("master-tail-eigentuple" if vector else "master-tail", results)
    return run


def _suite_averaged(vector: bool):
    def run(rng):
        results = []
        for i in range(4):
            _, summands = _rademacher_summands(rng, 4 + i % 2)
            for group in (summands, _tpsd_summands(rng, 4 + i % 2)):
                s = EnumeratedSum.from_summands(group)
                for thr in _threshold_points(s, vector, s.p):
                    results.append(check_averaged_mgf_tail(group, thr))
        lemma_id = "averaged-mgf-tail-eigentuple" if vector else "averaged-mgf-tail"
        return LemmaCheckResult.combine(lemma_id, results)
    return run


LEMMA_SUITE: Dict[str, Callable[[np.random.Generator], LemmaCheckResult]] = {
    "golden-thompson": _suite_golden_thompson,
    "golden-thompson-commuting": _suite_golden_thompson_commuting,
    "mgf-gaussian": _suite_mgf_gaussian,
    "mgf-rademacher": _suite_mgf_rademacher,
    "chernoff-mgf": _suite_chernoff_mgf,
    "bernstein-bounded-mgf": _suite_bernstein_bounded,
    "bernstein-subexp-mgf": _suite_bernstein_subexp,
    "symmetrization": _suite_symmetrization,
    "cgf-symmetrized": _suite_cgf,
    "lieb-trace": _suite_lieb,
    "laplace-eigenvalue": _suite_laplace(False),
    "laplace-eigentuple": _suite_laplace(True),
    "master-tail": _suite_master(False),
    "master-tail-eigentuple": _suite_master(True),
    "averaged-mgf-tail": _suite_averaged(False),
    "averaged-mgf-tail-eigentuple": _suite_averaged(True),
}


def run_lemma_suite(seed: int = 0, filter: Optional[str] = None) -> List[LemmaCheckResult]:
    """Run the entry named ``filter``, or every entry whose id contains it.

    Each entry gets its own stream derived from ``seed`` and its position, so
    filtering does not change the instances an entry sees.
    """
    if filter is not None and filter in LEMMA_SUITE:
        names = [filter]
    else:
        names = [k for k in LEMMA_SUITE if filter is None or filter in k]
    if not names:
        raise KeyError(f"no lemma check matches {filter!r}; known ids: {', '.join(LEMMA_SUITE)}")
    out = []
    for name in names:
        idx = list(LEMMA_SUITE).index(name)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(idx,)))
        out.append(LEMMA_SUITE[name](rng))
    return out
