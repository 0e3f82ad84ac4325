"""Rating-collection service: randomized serving, attention checks, storage.

Sessions draw units in a seeded random order without replacement. Every 10th
served unit carries one attention-check item with a known answer; a wrong
answer invalidates the 10-unit block it closes (scope configurable).
Ratings are persisted to an append-only JSONL event log; replaying the log
reconstructs the full service state, so a process restart loses nothing.
"""

from __future__ import annotations

import json
import random
import secrets
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .model import (
    CodingUnit,
    ModelError,
    QuestionnaireItem,
    Rating,
    subscale_score,
)
from .stats import RatingMatrix

HONEY_POT_CADENCE = 10

AGE_BANDS = ("18-24", "25-34", "35-44", "45-54", "55-64", "65+")
GENDERS = ("female", "male", "other", "prefer not to say")

DISCARD_BLOCK = "block"
DISCARD_ALL_OF_RATER = "all-of-rater"
DISCARD_SINGLE_UNIT = "single-unit"


class ServiceError(ValueError):
    pass


class StudyComplete(Exception):
    """All units in the pool have been served to this session."""


@dataclass(frozen=True)
class HoneyPot:
    item_id: str
    text: str
    expected_answer: int

    def __post_init__(self) -> None:
        if self.expected_answer not in (1, 2, 3, 4, 5):
            raise ServiceError("expected answer must be in 1..5")


def default_honey_pots() -> list[HoneyPot]:
    return [
        HoneyPot(f"hp{v}", f"This is an attention check. Please select {v}.", v)
        for v in (1, 2, 3, 4, 5)
    ]


@dataclass
class StudySession:
    session_id: str
    demographics: dict
    seed: int
    administered: list[str] = field(default_factory=list)  # served unit ids, in order
    order: list[str] = field(default_factory=list)  # full randomized pool order
    cursor: int = 0  # units submitted so far
    honey_answers: dict[int, tuple[str, int]] = field(default_factory=dict)
    # served position -> (pot item_id, given answer)


@dataclass
class _StoredRating:
    session_id: str
    served_position: int  # 1-based position within the session
    rating: Rating


class StudyService:
    """In-process study server; the HTTP layer is a thin wrapper over this."""

    def __init__(
        self,
        units: Sequence[CodingUnit],
        questionnaire: Sequence[QuestionnaireItem],
        honey_pots: Sequence[HoneyPot] | None = None,
        store_path: str | Path | None = None,
        seed: int = 0,
        clip_uris: dict[str, str] | None = None,
        focus_image_uris: dict[str, str] | None = None,
        discard_scope: str = DISCARD_BLOCK,
        instructions: str = (
            "You will watch short clips of a group interaction and answer a few "
            "questions about the group after each clip. You may stop at any time."
        ),
    ) -> None:
        if not units:
            raise ServiceError("study not configured: empty unit pool")
        if discard_scope not in (DISCARD_BLOCK, DISCARD_ALL_OF_RATER, DISCARD_SINGLE_UNIT):
            raise ServiceError(f"unknown discard scope {discard_scope!r}")
        self.units = {u.unit_id: u for u in units}
        self.unit_order = sorted(self.units)
        self.questionnaire = list(questionnaire)
        self.honey_pots = list(honey_pots) if honey_pots else default_honey_pots()
        self.seed = seed
        self.discard_scope = discard_scope
        self.instructions = instructions
        self.clip_uris = clip_uris or {}
        self.focus_image_uris = focus_image_uris or {}
        self.sessions: dict[str, StudySession] = {}
        self.ratings: list[_StoredRating] = []
        self._tokens: dict[str, bool] = {}  # submission_token -> stored flag
        self._session_counter = 0
        self._invalidated = False
        self._store_path = Path(store_path) if store_path else None
        self._store_fh = None
        if self._store_path is not None:
            if self._store_path.exists():
                self._replay_log()
            self._store_fh = open(self._store_path, "a")

    # -- persistence --------------------------------------------------------

    def _append_event(self, event: dict) -> None:
        if self._store_fh is not None:
            self._store_fh.write(json.dumps(event, sort_keys=True) + "\n")
            self._store_fh.flush()

    def _replay_log(self) -> None:
        with open(self._store_path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                self._apply_event(event)

    def _apply_event(self, event: dict) -> None:
        kind = event["type"]
        if kind == "session_opened":
            self._session_counter += 1
            self.sessions[event["session_id"]] = StudySession(
                session_id=event["session_id"],
                demographics=event["demographics"],
                seed=event["seed"],
                order=list(event["order"]),
            )
        elif kind == "rating_submitted":
            session = self.sessions[event["session_id"]]
            rating = Rating(
                rater_id=event["session_id"],
                unit_id=event["unit_id"],
                scores={k: int(v) for k, v in event["scores"].items()},
                submitted_at=event["submitted_at"],
            )
            position = event["served_position"]
            self.ratings.append(_StoredRating(event["session_id"], position, rating))
            self._tokens[event["submission_token"]] = True
            if event.get("honey_pot"):
                hp = event["honey_pot"]
                session.honey_answers[position] = (hp["item_id"], int(hp["answer"]))
            session.administered.append(event["unit_id"])
            session.cursor = position
        else:
            raise ServiceError(f"unknown event type {kind!r} in store")

    # -- protocol -----------------------------------------------------------

    def open_session(self, demographics: dict) -> dict:
        """Create a session with a fresh seed and a randomized serving order.

        No network or connection metadata is accepted or stored.
        """
        age = demographics.get("age_band")
        if age not in AGE_BANDS:
            raise ServiceError(f"age_band must be one of {AGE_BANDS}, got {age!r}")
        gender = demographics.get("gender", "prefer not to say")
        if gender not in GENDERS:
            raise ServiceError(f"gender must be one of {GENDERS}, got {gender!r}")
        self._session_counter += 1
        session_id = f"s{self._session_counter:05d}-{secrets.token_hex(4)}"
        seed = random.Random(self.seed * 1000003 + self._session_counter).getrandbits(32)
        order = list(self.unit_order)
        random.Random(seed).shuffle(order)
        session = StudySession(
            session_id=session_id,
            demographics={"age_band": age, "gender": gender},
            seed=seed,
            order=order,
        )
        self.sessions[session_id] = session
        self._append_event(
            {
                "type": "session_opened",
                "session_id": session_id,
                "demographics": session.demographics,
                "seed": seed,
                "order": order,
            }
        )
        return {
            "session_id": session_id,
            "instructions": self.instructions,
            "total_units": len(order),
        }

    def _session(self, session_id: str) -> StudySession:
        if session_id not in self.sessions:
            raise ServiceError(f"unknown session {session_id!r}")
        return self.sessions[session_id]

    def next_unit(self, session_id: str) -> dict:
        """Payload for the next unserved unit in the session's random order.

        Repeated calls before a submission return the same unit. Raises
        StudyComplete when the pool is exhausted.
        """
        session = self._session(session_id)
        if session.cursor >= len(session.order):
            raise StudyComplete(session_id)
        position = session.cursor + 1  # 1-based served position
        unit = self.units[session.order[session.cursor]]
        items = [
            {
                "item_id": q.item_id,
                "text": q.text,
                "dimension": q.dimension,
                "inverted": q.inverted,
            }
            for q in self.questionnaire
        ]
        honey_pot = None
        if position % HONEY_POT_CADENCE == 0:
            rng = random.Random(session.seed * 1000003 + position)
            pot = rng.choice(self.honey_pots)
            slot = rng.randrange(len(items) + 1)
            honey_pot = {"item_id": pot.item_id, "text": pot.text, "position": slot}
            items.insert(slot, {"item_id": pot.item_id, "text": pot.text,
                                "dimension": "attention", "inverted": False})
        return {
            "session_id": session_id,
            "served_position": position,
            "remaining": len(session.order) - session.cursor,
            "unit": {
                "unit_id": unit.unit_id,
                "interaction_id": unit.interaction_id,
                "technique": unit.technique,
                "start": unit.start,
                "end": unit.end,
            },
            "clip_uri": self.clip_uris.get(unit.interaction_id, ""),
            "focus_image_uri": self.focus_image_uris.get(unit.interaction_id, ""),
            "items": items,
            "honey_pot": honey_pot,
        }

    def submit_rating(
        self,
        session_id: str,
        unit_id: str,
        scores: dict[str, int],
        submission_token: str,
        submitted_at: float = 0.0,
    ) -> dict:
        """Persist one rating atomically; duplicate tokens are no-ops."""
        if submission_token in self._tokens:
            return {"stored": False, "session_id": session_id, "unit_id": unit_id}
        session = self._session(session_id)
        if session.cursor >= len(session.order):
            raise ServiceError("study complete: no unit pending")
        expected_unit = session.order[session.cursor]
        if unit_id not in self.units:
            raise ServiceError(f"unknown unit {unit_id!r}")
        if unit_id != expected_unit:
            raise ServiceError(
                f"unit {unit_id!r} was not served to session {session_id!r}"
            )
        position = session.cursor + 1
        pot_entry = None
        if position % HONEY_POT_CADENCE == 0:
            rng = random.Random(session.seed * 1000003 + position)
            pot = rng.choice(self.honey_pots)
            rng.randrange(len(self.questionnaire) + 1)
            if pot.item_id not in scores:
                raise ServiceError(f"missing attention-check answer {pot.item_id!r}")
            pot_entry = {"item_id": pot.item_id, "answer": int(scores[pot.item_id])}
        # inactive items are collected when present (they are served like any
        # other) but only active items are required; scoring excludes them later
        item_scores = {}
        for q in self.questionnaire:
            if q.item_id in scores:
                item_scores[q.item_id] = int(scores[q.item_id])
            elif q.active:
                raise ServiceError(f"missing score for active item {q.item_id!r}")
        for item_id, value in scores.items():
            if int(value) not in (1, 2, 3, 4, 5):
                raise ServiceError(f"score for {item_id!r} out of range 1..5: {value}")
        rating = Rating(
            rater_id=session_id, unit_id=unit_id, scores=item_scores,
            submitted_at=submitted_at,
        )
        self.ratings.append(_StoredRating(session_id, position, rating))
        self._tokens[submission_token] = True
        if pot_entry is not None:
            session.honey_answers[position] = (pot_entry["item_id"], pot_entry["answer"])
        session.administered.append(unit_id)
        session.cursor = position
        self._append_event(
            {
                "type": "rating_submitted",
                "session_id": session_id,
                "unit_id": unit_id,
                "served_position": position,
                "scores": {k: int(v) for k, v in item_scores.items()},
                "honey_pot": pot_entry,
                "submission_token": submission_token,
                "submitted_at": submitted_at,
            }
        )
        return {"stored": True, "session_id": session_id, "unit_id": unit_id}

    # -- analysis-side exports ----------------------------------------------

    def _expected_answer(self, item_id: str) -> int:
        for pot in self.honey_pots:
            if pot.item_id == item_id:
                return pot.expected_answer
        raise ServiceError(f"unknown attention-check item {item_id!r}")

    def apply_validity_filter(self) -> tuple[list[Rating], int]:
        """Invalidate ratings covered by failed attention checks.

        Scope "block" drops the 10-unit block ending at the failed check;
        "all-of-rater" drops the whole session; "single-unit" drops only the
        unit carrying the check. Idempotent.
        """
        failed_positions: dict[str, list[int]] = {}
        for session in self.sessions.values():
            bad = [
                pos for pos, (item_id, answer) in session.honey_answers.items()
                if answer != self._expected_answer(item_id)
            ]
            if bad:
                failed_positions[session.session_id] = bad
        discarded = 0
        valid: list[Rating] = []
        for i, stored in enumerate(self.ratings):
            bad = failed_positions.get(stored.session_id, [])
            invalid = False
            if self.discard_scope == DISCARD_ALL_OF_RATER:
                invalid = bool(bad)
            elif self.discard_scope == DISCARD_SINGLE_UNIT:
                invalid = stored.served_position in bad
            else:
                invalid = any(
                    p - HONEY_POT_CADENCE < stored.served_position <= p for p in bad
                )
            if invalid:
                discarded += 1
                if stored.rating.valid:
                    self.ratings[i] = _StoredRating(
                        stored.session_id, stored.served_position,
                        Rating(
                            rater_id=stored.rating.rater_id,
                            unit_id=stored.rating.unit_id,
                            scores=stored.rating.scores,
                            submitted_at=stored.rating.submitted_at,
                            valid=False,
                        ),
                    )
            else:
                valid.append(self.ratings[i].rating)
        self._invalidated = True
        return valid, discarded

    def all_ratings(self) -> list[Rating]:
        return [s.rating for s in self.ratings]

    def export_matrices(self) -> dict[tuple[str, str], RatingMatrix]:
        """Valid ratings aggregated to subscale scores, per (technique, dimension)."""
        valid, _ = self.apply_validity_filter()
        if not valid:
            raise ServiceError("no valid ratings to export")
        return build_matrices(valid, self.units.values(), self.questionnaire)


def build_matrices(
    ratings: Sequence[Rating],
    units: Sequence[CodingUnit],
    questionnaire: Sequence[QuestionnaireItem],
) -> dict[tuple[str, str], RatingMatrix]:
    """Group subscale scores by unit within each (technique, dimension) cell."""
    unit_index = {u.unit_id: u for u in units}
    cells: dict[tuple[str, str], dict[str, list[float]]] = {}
    for r in ratings:
        if not r.valid:
            continue
        unit = unit_index.get(r.unit_id)
        if unit is None:
            raise ModelError(f"rating references unknown unit {r.unit_id!r}")
        for dim in ("task", "social"):
            score = subscale_score(r, questionnaire, dim)
            cell = cells.setdefault((unit.technique, dim), {})
            cell.setdefault(r.unit_id, []).append(score)
    out = {}
    for key, per_unit in cells.items():
        targets = tuple(sorted(per_unit))
        out[key] = RatingMatrix(
            targets=targets,
            values=tuple(tuple(per_unit[t]) for t in targets),
            dimension=key[1],
        )
    return out
