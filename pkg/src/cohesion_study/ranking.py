"""Percentile ranking of coding units by rater-score standard deviation.

Units from all techniques are pooled and ranked by increasing SD of the
raters' scores. For each technique, the curve C(n) counts its units falling
at or below the pooled SD threshold of the n-th percentile (n = 5..100,
step 5). The ideal curve places all of a technique's units in the first
ranking positions; the AUC ratio of observed to ideal curves summarizes
how much of the low-disagreement head of the ranking a technique owns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

PERCENTILES = tuple(range(5, 101, 5))


@dataclass(frozen=True)
class UnitStat:
    unit_id: str
    technique: str
    rater_score_sd: float


@dataclass(frozen=True)
class RankingCurve:
    technique: str
    points: tuple[tuple[int, int], ...]  # (percentile, count)
    auc_ratio: float


class RankingError(ValueError):
    pass


def _trapezoid_auc(counts: Sequence[float]) -> float:
    xs = PERCENTILES
    return sum(
        0.5 * (counts[i] + counts[i + 1]) * (xs[i + 1] - xs[i])
        for i in range(len(xs) - 1)
    )


def ranking_analysis(unit_stats: Sequence[UnitStat]) -> dict[str, RankingCurve]:
    """Observed and ideal percentile curves with AUC ratios per technique.

    Ties in SD are broken by (technique, unit_id) so the ranking is
    deterministic; the percentile threshold is the SD at rank
    ceil(n/100 * N) with inclusive comparison. The ideal curve uses the
    same rank rule, so a technique whose units occupy the lowest-SD ranks
    scores an AUC ratio of exactly 1.
    """
    techniques = sorted({u.technique for u in unit_stats})
    if len(techniques) < 2:
        raise RankingError("need units from at least 2 techniques")
    pool = sorted(unit_stats, key=lambda u: (u.rater_score_sd, u.technique, u.unit_id))
    n_total = len(pool)
    n_by_tech = {t: sum(1 for u in pool if u.technique == t) for t in techniques}

    out: dict[str, RankingCurve] = {}
    thresholds = [
        pool[max(0, math.ceil(n / 100.0 * n_total) - 1)].rater_score_sd
        for n in PERCENTILES
    ]
    for tech in techniques:
        sds = [u.rater_score_sd for u in pool if u.technique == tech]
        observed = [sum(1 for s in sds if s <= thr) for thr in thresholds]
        ideal = [
            min(math.ceil(n / 100.0 * n_total), n_by_tech[tech])
            for n in PERCENTILES
        ]
        auc_ideal = _trapezoid_auc(ideal)
        if auc_ideal == 0.0:
            raise RankingError(f"technique {tech!r} has an empty ideal curve")
        ratio = _trapezoid_auc(observed) / auc_ideal
        out[tech] = RankingCurve(
            technique=tech,
            points=tuple(zip(PERCENTILES, observed)),
            auc_ratio=ratio,
        )
    return out


def pooled_counts(unit_stats: Sequence[UnitStat]) -> list[int]:
    """Count of pooled units at or below each percentile threshold."""
    pool = sorted(unit_stats, key=lambda u: (u.rater_score_sd, u.technique, u.unit_id))
    n_total = len(pool)
    thresholds = [
        pool[max(0, math.ceil(n / 100.0 * n_total) - 1)].rater_score_sd
        for n in PERCENTILES
    ]
    sds = [u.rater_score_sd for u in pool]
    return [sum(1 for s in sds if s <= thr) for thr in thresholds]
