"""Domain types for annotated interaction timelines, coding units and ratings.

Timelines are loaded from JSON documents (one per interaction). Ratings travel
as CSV with one row per (rater, unit, item) score. All types are frozen
dataclasses; validation happens at construction time.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence


class ModelError(ValueError):
    """Invalid domain data (schema or invariant violation)."""


class ChangeCategory(Enum):
    """The seven situational change categories, serialized as C1..C7."""

    TIME = "C1"
    SPACE = "C2"
    OBJECTS = "C3"
    CHARACTERS = "C4"
    CHARACTER_INTERACTION = "C5"
    CAUSES = "C6"
    GOALS = "C7"

    @classmethod
    def from_tag(cls, tag: str) -> "ChangeCategory":
        try:
            return cls(tag)
        except ValueError:
            raise ModelError(f"unknown change category tag {tag!r} (expected C1..C7)")


@dataclass(frozen=True)
class ChangeEvent:
    t: float
    category: ChangeCategory
    note: str = ""

    def __post_init__(self) -> None:
        if self.t < 0:
            raise ModelError(f"change event time must be non-negative, got {self.t}")


@dataclass(frozen=True)
class UtteranceEvent:
    speaker: str
    start: float
    end: float
    thought_boundaries: tuple[float, ...] = ()
    argument_change: bool = False

    def __post_init__(self) -> None:
        if not self.start < self.end:
            raise ModelError(
                f"utterance start must precede end, got [{self.start}, {self.end}]"
            )
        prev = self.start
        for tb in self.thought_boundaries:
            if not (self.start < tb < self.end):
                raise ModelError(
                    f"thought boundary {tb} outside open interval "
                    f"({self.start}, {self.end})"
                )
            if tb <= prev and prev != self.start:
                raise ModelError("thought boundaries must be strictly increasing")
            prev = tb


@dataclass(frozen=True)
class InteractionTimeline:
    id: str
    duration: float
    players: int = 2
    changes: tuple[ChangeEvent, ...] = ()
    utterances: tuple[UtteranceEvent, ...] = ()
    clip_uri: str = ""
    focus_image_uri: str = ""

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ModelError(f"duration must be positive, got {self.duration}")
        if self.players < 2:
            raise ModelError(f"players must be >= 2, got {self.players}")
        object.__setattr__(self, "changes", tuple(sorted(self.changes, key=lambda c: c.t)))
        object.__setattr__(self, "utterances", tuple(sorted(self.utterances, key=lambda u: u.start)))
        for c in self.changes:
            if c.t > self.duration:
                raise ModelError(
                    f"timeline {self.id}: change event at t={c.t} out of range "
                    f"[0, {self.duration}]"
                )
        for u in self.utterances:
            if u.start < 0 or u.end > self.duration:
                raise ModelError(
                    f"timeline {self.id}: utterance [{u.start}, {u.end}] out of range "
                    f"[0, {self.duration}]"
                )


@dataclass(frozen=True)
class CodingUnit:
    unit_id: str
    interaction_id: str
    technique: str  # "EST", "ACT", or "AUT<w>"
    start: float
    end: float
    index: int

    def __post_init__(self) -> None:
        if not self.start < self.end:
            raise ModelError(
                f"unit {self.unit_id}: start must precede end, got "
                f"[{self.start}, {self.end}]"
            )

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class QuestionnaireItem:
    item_id: str
    text: str
    dimension: str  # "task" | "social"
    inverted: bool = False
    active: bool = True

    def __post_init__(self) -> None:
        if self.dimension not in ("task", "social"):
            raise ModelError(f"dimension must be 'task' or 'social', got {self.dimension!r}")


@dataclass(frozen=True)
class Rating:
    rater_id: str
    unit_id: str
    scores: dict[str, int]
    submitted_at: float = 0.0
    valid: bool = True

    def __post_init__(self) -> None:
        for item_id, score in self.scores.items():
            if score not in (1, 2, 3, 4, 5):
                raise ModelError(
                    f"score for item {item_id!r} must be an integer in 1..5, got {score}"
                )


SCALE_MIN, SCALE_MAX = 1, 5


def invert_score(score: int) -> int:
    """Reverse-code a 5-point Likert score (1 <-> 5, 2 <-> 4)."""
    return SCALE_MAX + SCALE_MIN - score


def default_questionnaire() -> list[QuestionnaireItem]:
    """The 10-item task/social cohesion questionnaire.

    One reverse-coded item (conflicting aspirations); the respect-differences
    and share-responsibility items are inactive by default, mirroring their
    removal from analysis after rater feedback.
    """
    return [
        QuestionnaireItem("t1", "Do you feel that group members share the same purpose, goal, intentions?", "task"),
        QuestionnaireItem("t2", "Do group members give each other a lot of feedback?", "task"),
        QuestionnaireItem("t3", "Do group members seem to have sufficient time to make their contribution?", "task"),
        QuestionnaireItem("t4", "Do group members have conflicting aspirations for the team's performance?", "task", inverted=True),
        QuestionnaireItem("t5", "Do group members respect individual differences and contributions?", "task", active=False),
        QuestionnaireItem("s1", "Were group members open and frank in expressing ideas/feelings?", "social"),
        QuestionnaireItem("s2", "How engaged in the discussion do group members seem?", "social"),
        QuestionnaireItem("s3", "Do group members appear to be in tune/in sync with each other?", "social"),
        QuestionnaireItem("s4", "Do group members listen attentively to each other?", "social"),
        QuestionnaireItem("s5", "Does the group seem to share responsibility for the task?", "social", active=False),
    ]


def subscale_score(
    rating: Rating, questionnaire: Sequence[QuestionnaireItem], dimension: str
) -> float:
    """Mean score over the active items of one dimension.

    Reverse-coded items are mapped through ``invert_score`` before averaging.
    Inactive items may be present in the rating but are ignored.
    """
    items = [q for q in questionnaire if q.dimension == dimension and q.active]
    if not items:
        raise ModelError(f"questionnaire has no active items for dimension {dimension!r}")
    total = 0.0
    for item in items:
        if item.item_id not in rating.scores:
            raise ModelError(
                f"rating by {rating.rater_id} for unit {rating.unit_id} is missing "
                f"active item {item.item_id!r}"
            )
        x = rating.scores[item.item_id]
        total += invert_score(x) if item.inverted else x
    return total / len(items)


# ---------------------------------------------------------------------------
# Timeline file format
# ---------------------------------------------------------------------------

def timeline_from_dict(doc: dict) -> InteractionTimeline:
    try:
        changes = tuple(
            ChangeEvent(t=float(c["t"]), category=ChangeCategory.from_tag(c["category"]), note=c.get("note", ""))
            for c in doc.get("changes", [])
        )
        utterances = tuple(
            UtteranceEvent(
                speaker=str(u["speaker"]),
                start=float(u["start"]),
                end=float(u["end"]),
                thought_boundaries=tuple(float(x) for x in u.get("thought_boundaries", [])),
                argument_change=bool(u.get("argument_change", False)),
            )
            for u in doc.get("utterances", [])
        )
        return InteractionTimeline(
            id=str(doc.get("id", "")) or "unnamed",
            duration=float(doc["duration"]),
            players=int(doc.get("players", 2)),
            changes=changes,
            utterances=utterances,
            clip_uri=str(doc.get("clip_uri", "")),
            focus_image_uri=str(doc.get("focus_image_uri", "")),
        )
    except KeyError as exc:
        raise ModelError(f"timeline document missing field {exc.args[0]!r}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(f"timeline document malformed: {exc}")


def timeline_to_dict(tl: InteractionTimeline) -> dict:
    return {
        "id": tl.id,
        "duration": tl.duration,
        "players": tl.players,
        "clip_uri": tl.clip_uri,
        "focus_image_uri": tl.focus_image_uri,
        "changes": [
            {"t": c.t, "category": c.category.value, "note": c.note} for c in tl.changes
        ],
        "utterances": [
            {
                "speaker": u.speaker,
                "start": u.start,
                "end": u.end,
                "thought_boundaries": list(u.thought_boundaries),
                "argument_change": u.argument_change,
            }
            for u in tl.utterances
        ],
    }


def load_timeline(path: str | Path) -> InteractionTimeline:
    """Load and validate one interaction timeline from a JSON file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise ModelError(f"{path}: expected a JSON object at top level")
    try:
        return timeline_from_dict(doc)
    except ModelError as exc:
        raise ModelError(f"{path}: {exc}")


def save_timeline(tl: InteractionTimeline, path: str | Path) -> None:
    Path(path).write_text(json.dumps(timeline_to_dict(tl), indent=2) + "\n")


# ---------------------------------------------------------------------------
# Questionnaire file format
# ---------------------------------------------------------------------------

def load_questionnaire(path: str | Path) -> list[QuestionnaireItem]:
    doc = json.loads(Path(path).read_text())
    try:
        return [
            QuestionnaireItem(
                item_id=str(it["item_id"]),
                text=str(it["text"]),
                dimension=str(it["dimension"]),
                inverted=bool(it.get("inverted", False)),
                active=bool(it.get("active", True)),
            )
            for it in doc["items"]
        ]
    except KeyError as exc:
        raise ModelError(f"{path}: questionnaire item missing field {exc.args[0]!r}")


def save_questionnaire(items: Sequence[QuestionnaireItem], path: str | Path) -> None:
    doc = {
        "items": [
            {
                "item_id": it.item_id,
                "text": it.text,
                "dimension": it.dimension,
                "inverted": it.inverted,
                "active": it.active,
            }
            for it in items
        ]
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Ratings export (CSV, one row per item score)
# ---------------------------------------------------------------------------

RATINGS_HEADER = ["rater_id", "unit_id", "item_id", "score", "valid", "submitted_at"]


def write_ratings_csv(ratings: Iterable[Rating], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RATINGS_HEADER)
        for r in ratings:
            for item_id in sorted(r.scores):
                w.writerow(
                    [r.rater_id, r.unit_id, item_id, r.scores[item_id],
                     int(r.valid), f"{r.submitted_at:.3f}"]
                )


def read_ratings_csv(path: str | Path) -> list[Rating]:
    """Reassemble Rating objects from the flat per-item CSV export."""
    rows: dict[tuple[str, str], dict] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(RATINGS_HEADER) - set(reader.fieldnames):
            raise ModelError(f"{path}: missing ratings header {RATINGS_HEADER}")
        for row in reader:
            key = (row["rater_id"], row["unit_id"])
            rec = rows.setdefault(
                key,
                {"scores": {}, "valid": True, "submitted_at": 0.0},
            )
            rec["scores"][row["item_id"]] = int(row["score"])
            rec["valid"] = rec["valid"] and bool(int(row["valid"]))
            rec["submitted_at"] = max(rec["submitted_at"], float(row["submitted_at"]))
    return [
        Rating(rater_id=k[0], unit_id=k[1], scores=v["scores"],
               submitted_at=v["submitted_at"], valid=v["valid"])
        for k, v in rows.items()
    ]


def mark_invalid(rating: Rating) -> Rating:
    return replace(rating, valid=False)
