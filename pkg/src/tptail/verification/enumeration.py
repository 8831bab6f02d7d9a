"""Exact tails of Rademacher series by enumerating every sign pattern."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from ..bounds import (
    BoundQuery,
    azuma_bound,
    bernstein_bounded,
    bernstein_subexponential,
    gaussian_series_lambda_bound,
    mcdiarmid_bound,
    series_sigma2,
)
from ..spectral import slice_eigvalsh, spectral_norm
from ..tensor import DenseTensor3, to_slices

MAX_TERMS = 12


def sign_patterns(n: int) -> np.ndarray:
    """All ``2^n`` vectors in ``{-1, +1}^n``, shape ``(2^n, n)``."""
    if not 0 <= n <= MAX_TERMS:
        raise ValueError(f"enumeration supports at most {MAX_TERMS} terms, got {n}")
    codes = np.arange(2 ** n)[:, None] >> np.arange(n)[None, :]
    return 2.0 * (codes & 1) - 1.0


def rademacher_lambda_max(coefficients: Sequence[DenseTensor3]) -> np.ndarray:
    """``lambda_max(sum_i s_i A_i)`` for every sign pattern ``s`` (each has probability ``2^-n``)."""
    hats = np.stack([to_slices(a.data) for a in coefficients])
    sums = np.einsum("si,ipmn->spmn", sign_patterns(len(coefficients)), hats)
    return slice_eigvalsh(sums)[..., -1].max(axis=-1)


def exact_tail(values: np.ndarray, theta: float) -> float:
    return float(np.count_nonzero(values >= theta)) / values.size


@dataclass(frozen=True)
class ExactComparison:
    theorem_id: str
    theta: float
    exact: float
    bound_raw: float

    @property
    def dominated(self) -> bool:
        return self.exact <= self.bound_raw


def rademacher_bound_queries(coefficients: Sequence[DenseTensor3]) -> Dict[str, BoundQuery]:
    """Per-theorem hypothesis parameters for ``sum_i s_i A_i``, keyed by theorem id, with ``theta`` unset.

    * Gaussian/Rademacher series: ``sigma2 = ||sum A_i^2||``.
    * Azuma: differences ``s_i A_i`` square to ``A_i^2``; same ``sigma2``.
    * McDiarmid: ``F = sum x_i A_i`` has difference caps ``2 A_i``, so ``sigma2 = 4 ||sum A_i^2||``.
    * Bounded Bernstein: centered, ``lambda_max(s_i A_i) <= max ||A_i||``.
    * Subexponential Bernstein: ``E X_i^k <= k!/2 (max ||A_i|| / 3)^(k-2) A_i^2``.
    """
    a0 = coefficients[0]
    s2 = series_sigma2(coefficients)
    cap = max(spectral_norm(a) for a in coefficients)
    base = dict(m=a0.m, p=a0.p)
    return {
        "gaussian-series": BoundQuery(sigma2=s2, **base),
        "azuma": BoundQuery(sigma2=s2, **base),
        "mcdiarmid": BoundQuery(sigma2=4.0 * s2, **base),
        "bernstein-bounded": BoundQuery(sigma2=s2, T=cap, **base),
        "bernstein-subexp": BoundQuery(sigma2=s2, T=cap / 3.0, **base),
    }


_EVALUATORS = {
    "gaussian-series": gaussian_series_lambda_bound,
    "azuma": azuma_bound,
    "mcdiarmid": mcdiarmid_bound,
    "bernstein-bounded": bernstein_bounded,
    "bernstein-subexp": bernstein_subexponential,
}


def exact_domination(coefficients: Sequence[DenseTensor3], points: int = 20) -> List[ExactComparison]:
    """Exact ``lambda_max`` tails against every applicable bound on ``points`` thresholds in ``[0, max]``."""
    values = rademacher_lambda_max(coefficients)
    top = max(float(values.max()), 0.0)
    queries = rademacher_bound_queries(coefficients)
    out = []
    for theta in np.linspace(0.0, top, points):
        exact = exact_tail(values, theta)
        for tid, q in queries.items():
            qt = BoundQuery(**{**_fields(q), "theta": float(theta)})
            out.append(ExactComparison(tid, float(theta), exact, _EVALUATORS[tid](qt).value))
    return out


def _fields(q: BoundQuery) -> dict:
    return {k: getattr(q, k) for k in ("m", "p", "n", "sigma2", "T", "n_sum")}
