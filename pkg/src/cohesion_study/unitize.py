"""Three unitizing techniques mapping a timeline to ordered coding units.

* change-driven segmentation: cut when the accumulated weight of distinct
  change categories since the last boundary reaches a threshold (goal changes
  count double);
* continuous coding: cut at speaker changes, thought boundaries, argument
  changes, and every 20 s of uninterrupted same-speaker talk;
* fixed-interval windows of a configurable width.

All unitizers are pure and deterministic.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .model import ChangeCategory, CodingUnit, InteractionTimeline, ModelError


class UnitizeError(ValueError):
    """Unitizer configuration or input problem."""


@dataclass(frozen=True)
class EstConfig:
    threshold: int = 3
    goal_weight: int = 2
    other_weight: int = 1
    min_unit_duration: float = 0.0  # 0 disables short-unit merging

    def __post_init__(self) -> None:
        if self.threshold < 1:
            raise UnitizeError("threshold must be >= 1")
        if not self.goal_weight >= self.other_weight >= 1:
            raise UnitizeError("need goal_weight >= other_weight >= 1")

    def weight(self, category: ChangeCategory) -> int:
        return self.goal_weight if category is ChangeCategory.GOALS else self.other_weight


TAIL_DROP = "drop"
TAIL_KEEP = "keep"
TAIL_MERGE = "merge"


@dataclass(frozen=True)
class IntervalConfig:
    window: float
    tail_policy: str = TAIL_DROP

    def __post_init__(self) -> None:
        if self.window <= 0:
            raise UnitizeError("window must be > 0")
        if self.tail_policy not in (TAIL_DROP, TAIL_KEEP, TAIL_MERGE):
            raise UnitizeError(f"unknown tail policy {self.tail_policy!r}")


@dataclass(frozen=True)
class ActConfig:
    max_turn_duration: float = 20.0

    def __post_init__(self) -> None:
        if self.max_turn_duration <= 0:
            raise UnitizeError("max_turn_duration must be > 0")


def _build_units(
    timeline: InteractionTimeline, technique: str, boundaries: Iterable[float],
    end: float | None = None,
) -> list[CodingUnit]:
    """Turn interior boundary timestamps into a list of half-open units."""
    stop = timeline.duration if end is None else end
    cuts = sorted({b for b in boundaries if 0.0 < b < stop})
    edges = [0.0] + cuts + [stop]
    return [
        CodingUnit(
            unit_id=f"{timeline.id}:{technique}:{i}",
            interaction_id=timeline.id,
            technique=technique,
            start=edges[i],
            end=edges[i + 1],
            index=i,
        )
        for i in range(len(edges) - 1)
    ]


def est_boundaries(timeline: InteractionTimeline, cfg: EstConfig) -> list[float]:
    """Boundary timestamps of the change-driven technique (streaming scan).

    Maintains the set of distinct categories seen since the last boundary;
    each category contributes its weight once. All changes sharing a
    timestamp are absorbed before the threshold check, so a timestamp yields
    at most one boundary.
    """
    boundaries: list[float] = []
    seen: set[ChangeCategory] = set()
    weight = 0
    i, changes = 0, timeline.changes
    while i < len(changes):
        t = changes[i].t
        while i < len(changes) and changes[i].t == t:
            cat = changes[i].category
            if cat not in seen:
                seen.add(cat)
                weight += cfg.weight(cat)
            i += 1
        if weight >= cfg.threshold:
            boundaries.append(t)
            seen.clear()
            weight = 0
    return [b for b in boundaries if 0.0 < b < timeline.duration]


def unitize_est(timeline: InteractionTimeline, cfg: EstConfig | None = None) -> list[CodingUnit]:
    cfg = cfg or EstConfig()
    units = _build_units(timeline, "EST", est_boundaries(timeline, cfg))
    if cfg.min_unit_duration > 0:
        units = _merge_short_units(units, cfg.min_unit_duration)
    return units


def _merge_short_units(units: list[CodingUnit], min_duration: float) -> list[CodingUnit]:
    """Merge units shorter than the minimum into their predecessor."""
    merged: list[CodingUnit] = []
    for u in units:
        if merged and u.duration < min_duration:
            prev = merged[-1]
            merged[-1] = CodingUnit(
                unit_id=prev.unit_id, interaction_id=prev.interaction_id,
                technique=prev.technique, start=prev.start, end=u.end, index=prev.index,
            )
        else:
            merged.append(u)
    return [
        CodingUnit(u.unit_id.rsplit(":", 1)[0] + f":{i}", u.interaction_id,
                   u.technique, u.start, u.end, i)
        for i, u in enumerate(merged)
    ]


def unitize_interval(timeline: InteractionTimeline, cfg: IntervalConfig) -> list[CodingUnit]:
    w = cfg.window
    technique = f"AUT{w:g}"
    n_full = int(math.floor(timeline.duration / w + 1e-9))
    residue = timeline.duration - n_full * w
    if residue < 1e-9:
        residue = 0.0
    if n_full == 0 and cfg.tail_policy == TAIL_DROP:
        raise UnitizeError(
            f"no units produced: window {w} exceeds duration {timeline.duration} "
            "under the drop policy"
        )
    boundaries = [k * w for k in range(1, n_full + 1)]
    if cfg.tail_policy == TAIL_DROP:
        end = n_full * w
        boundaries = boundaries[:-1]
    elif cfg.tail_policy == TAIL_KEEP:
        end = timeline.duration
        if residue == 0.0:
            boundaries = boundaries[:-1]
    else:  # merge: the final full window absorbs the residue
        end = timeline.duration
        boundaries = boundaries[:-1]
    return _build_units(timeline, technique, boundaries, end=end)


def act_boundaries(timeline: InteractionTimeline, cfg: ActConfig) -> list[float]:
    """Boundary timestamps of the continuous-coding technique."""
    boundaries: set[float] = set()
    prev_speaker: str | None = None
    span_start = 0.0
    span_end = 0.0

    def close_span() -> None:
        # cap same-speaker spans: extra cuts every max_turn_duration seconds
        k = 1
        while span_start + k * cfg.max_turn_duration < span_end - 1e-9:
            boundaries.add(span_start + k * cfg.max_turn_duration)
            k += 1

    for u in timeline.utterances:
        if u.speaker != prev_speaker:
            if prev_speaker is not None:
                close_span()
            boundaries.add(u.start)
            span_start = u.start
            prev_speaker = u.speaker
        if u.argument_change:
            boundaries.add(u.start)
        boundaries.update(u.thought_boundaries)
        span_end = max(span_end, u.end)
    if prev_speaker is not None:
        close_span()
    return sorted(b for b in boundaries if 0.0 < b < timeline.duration)


def unitize_act(timeline: InteractionTimeline, cfg: ActConfig | None = None) -> list[CodingUnit]:
    cfg = cfg or ActConfig()
    return _build_units(timeline, "ACT", act_boundaries(timeline, cfg))


# ---------------------------------------------------------------------------
# Summary table
# ---------------------------------------------------------------------------

def unit_summary(units: Sequence[CodingUnit]) -> list[dict]:
    """Per-technique count, mean duration and population SD of durations."""
    if not units:
        raise UnitizeError("empty unit list")
    groups: dict[str, list[float]] = {}
    for u in units:
        groups.setdefault(u.technique, []).append(u.duration)
    out = []
    for technique in sorted(groups):
        ds = groups[technique]
        mean = sum(ds) / len(ds)
        sd = math.sqrt(sum((d - mean) ** 2 for d in ds) / len(ds))
        out.append({"technique": technique, "count": len(ds), "mean": mean, "sd": sd})
    return out


# ---------------------------------------------------------------------------
# Units file (CSV)
# ---------------------------------------------------------------------------

UNITS_HEADER = ["unit_id", "interaction_id", "technique", "start", "end", "index"]


def write_units_csv(units: Iterable[CodingUnit], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(UNITS_HEADER)
        for u in units:
            w.writerow([u.unit_id, u.interaction_id, u.technique,
                        f"{u.start:.3f}", f"{u.end:.3f}", u.index])


def read_units_csv(path: str | Path) -> list[CodingUnit]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(UNITS_HEADER) - set(reader.fieldnames):
            raise ModelError(f"{path}: missing units header {UNITS_HEADER}")
        for row in reader:
            out.append(
                CodingUnit(
                    unit_id=row["unit_id"],
                    interaction_id=row["interaction_id"],
                    technique=row["technique"],
                    start=float(row["start"]),
                    end=float(row["end"]),
                    index=int(row["index"]),
                )
            )
    return out
