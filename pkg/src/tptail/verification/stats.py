"""Monte Carlo tail estimates with exact binomial confidence limits."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import beta

from ..ensembles import Ensemble, SeedSpec
from ..spectral import slice_eigvalsh, slice_singular_values

Threshold = Union[float, Tuple[float, ...]]

CSV_HEADER = ("theorem_id", "threshold", "trials", "hits", "p_hat", "ci_upper",
              "bound_raw", "bound_clipped", "dominated", "margin")


def clopper_pearson_upper(hits: int, trials: int, alpha: float) -> float:
    """One-sided exact upper confidence limit at level ``1 - alpha``."""
    if trials < 1 or not 0 <= hits <= trials:
        raise ValueError(f"need 0 <= hits <= trials and trials >= 1, got {hits}/{trials}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if hits == trials:
        return 1.0
    return float(beta.ppf(1.0 - alpha, hits + 1, trials - hits))


@dataclass(frozen=True)
class TailEstimate:
    trials: int
    hits: int
    alpha: float
    ci_upper: float

    @classmethod
    def from_counts(cls, hits: int, trials: int, alpha: float = 0.01) -> "TailEstimate":
        return cls(trials=trials, hits=hits, alpha=alpha, ci_upper=clopper_pearson_upper(hits, trials, alpha))

    @property
    def p_hat(self) -> float:
        return self.hits / self.trials


# --- statistics over batches of transform slices ----------------------------
# each returns (values, direction); the event is values >= threshold ("ge")
# or values <= threshold ("le"), entrywise for vector statistics

def _lambda_max(s):
    return slice_eigvalsh(s)[..., -1].max(axis=-1)


def _lambda_min(s):
    return slice_eigvalsh(s)[..., 0].min(axis=-1)


def _norm(s):
    return slice_singular_values(s)[..., 0].max(axis=-1)


def _d_max(s):
    return slice_eigvalsh(s)[..., -1]


def _d_min(s):
    return slice_eigvalsh(s)[..., 0]


def _vec_norm(s):
    return slice_singular_values(s)[..., 0]


STATISTICS: Dict[str, Tuple[Callable[[np.ndarray], np.ndarray], str, bool]] = {
    # name: (function, direction, vector valued)
    "lambda_max": (_lambda_max, "ge", False),
    "lambda_min": (_lambda_min, "le", False),
    "norm": (_norm, "ge", False),
    "d_max": (_d_max, "ge", True),
    "d_min": (_d_min, "le", True),
    "vec_norm": (_vec_norm, "ge", True),
}


def statistic_values(statistic: str, slices: np.ndarray) -> np.ndarray:
    return _lookup(statistic)[0](slices)


def _lookup(statistic: str):
    try:
        return STATISTICS[statistic]
    except KeyError:
        raise ValueError(f"unknown statistic {statistic!r}; choose from {sorted(STATISTICS)}") from None


def count_hits(statistic: str, values: np.ndarray, threshold: Threshold) -> int:
    _, direction, vector = _lookup(statistic)
    thr = np.asarray(threshold, dtype=float)
    if vector:
        if thr.ndim != 1 or thr.shape[0] != values.shape[-1]:
            raise ValueError(f"statistic {statistic} needs a threshold vector of length {values.shape[-1]}")
        hit = (values >= thr) if direction == "ge" else (values <= thr)
        return int(np.all(hit, axis=-1).sum())
    if thr.ndim != 0:
        raise ValueError(f"statistic {statistic} needs a scalar threshold")
    hit = (values >= thr) if direction == "ge" else (values <= thr)
    return int(hit.sum())


def _run_chunk(ensemble: Ensemble, statistic: str, thresholds: Sequence[Threshold], seeds: SeedSpec,
               chunk: int, size: int, certify: bool) -> List[int]:
    rng = seeds.rng(chunk)
    summands = ensemble.sample_summands_hat(rng, size)
    if certify:
        ensemble.check_hypotheses(summands)
    values = statistic_values(statistic, summands.sum(axis=1))
    return [count_hits(statistic, values, thr) for thr in thresholds]


def estimate_tails(ensemble: Ensemble, statistic: str, thresholds: Sequence[Threshold], trials: int,
                   seed: int, alpha: float = 0.01, workers: int = 1, certify: bool = True,
                   chunk_size: int = 2000) -> List[TailEstimate]:
    """Tail estimates for several thresholds from one shared set of samples.

    Outcomes depend only on ``seed`` and ``chunk_size``, never on ``workers``.
    """
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    _lookup(statistic)
    thresholds = list(thresholds)
    seeds = SeedSpec(seed, chunk_size)
    chunks = seeds.chunks(trials)

    def job(c):
        return _run_chunk(ensemble, statistic, thresholds, seeds, c[0], c[1], certify)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(job, chunks))
    else:
        counts = [job(c) for c in chunks]
    totals = np.sum(counts, axis=0) if counts and thresholds else np.zeros(len(thresholds), int)
    return [TailEstimate.from_counts(int(h), trials, alpha) for h in totals]


def estimate_tail(ensemble: Ensemble, statistic: str, threshold: Threshold, trials: int, seed: int,
                  alpha: float = 0.01, workers: int = 1) -> TailEstimate:
    return estimate_tails(ensemble, statistic, [threshold], trials, seed, alpha, workers)[0]


# --- domination reports ------------------------------------------------------

@dataclass(frozen=True)
class DominationRow:
    """One grid point.  ``recorded`` holds ``(dominated, margin)`` as read
    back from a CSV, so rounding to 12 digits cannot change them."""

    threshold: Threshold
    estimate: TailEstimate
    bound_raw: float
    recorded: Optional[Tuple[bool, float]] = None

    @property
    def bound_clipped(self) -> float:
        return min(self.bound_raw, 1.0)

    @property
    def dominated(self) -> bool:
        if self.recorded is not None:
            return self.recorded[0]
        return self.estimate.ci_upper <= self.bound_raw

    @property
    def margin(self) -> float:
        if self.recorded is not None:
            return self.recorded[1]
        return self.bound_raw - self.estimate.ci_upper


@dataclass(frozen=True)
class DominationReport:
    theorem_id: str
    rows: Tuple[DominationRow, ...]

    @property
    def dominated(self) -> bool:
        return all(r.dominated for r in self.rows)

    def first_violation(self) -> Optional[DominationRow]:
        return next((r for r in self.rows if not r.dominated), None)

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if header:
            writer.writerow(CSV_HEADER)
        for r in self.rows:
            writer.writerow(format_row(self.theorem_id, r))
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DominationReport":
        reader = csv.reader(io.StringIO(text))
        head = next(reader, None)
        if tuple(head or ()) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {head}")
        theorem_id, rows = None, []
        for rec in reader:
            if not rec:
                continue
            theorem_id = theorem_id or rec[0]
            if rec[0] != theorem_id:
                raise ValueError(f"mixed theorem ids {theorem_id!r} and {rec[0]!r}")
            thr = parse_threshold(rec[1])
            trials, hits = int(rec[2]), int(rec[3])
            ci = float(rec[5])
            # alpha is not part of the schema; the stored limit is kept verbatim
            est = TailEstimate(trials=trials, hits=hits, alpha=math.nan, ci_upper=ci)
            if rec[8] not in ("true", "false"):
                raise ValueError(f"dominated must be true or false, got {rec[8]!r}")
            rows.append(DominationRow(thr, est, float(rec[6]), (rec[8] == "true", float(rec[9]))))
        return cls(theorem_id or "", tuple(rows))


def fmt(x: float) -> str:
    return f"{x:.12g}"


def format_threshold(threshold: Threshold) -> str:
    if isinstance(threshold, (tuple, list, np.ndarray)):
        return ";".join(fmt(float(v)) for v in threshold)
    return fmt(float(threshold))


def parse_threshold(text: str) -> Threshold:
    parts = text.split(";")
    if len(parts) == 1:
        return float(parts[0])
    return tuple(float(v) for v in parts)


def format_row(theorem_id: str, r: DominationRow) -> List[str]:
    e = r.estimate
    return [theorem_id, format_threshold(r.threshold), str(e.trials), str(e.hits), fmt(e.p_hat),
            fmt(e.ci_upper), fmt(r.bound_raw), fmt(r.bound_clipped),
            "true" if r.dominated else "false", fmt(r.margin)]
