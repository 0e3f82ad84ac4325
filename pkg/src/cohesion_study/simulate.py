"""Seeded simulation of raters for desk-scale end-to-end runs.

Each interaction gets a latent cohesion level per dimension; every unit of
that interaction inherits it. A simulated rater answers each item with
clamp(round(latent + noise), 1, 5), answering reverse-coded items through
the inversion so the analysis-side de-inversion recovers the latent value.
Expert whole-interaction scores go through the identical zero-noise path,
which makes the zero-noise MSE exactly 0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import CodingUnit, QuestionnaireItem, Rating, invert_score

EXPERT_HEADER = ["interaction_id", "dimension", "score"]


@dataclass(frozen=True)
class SimulationConfig:
    n_raters: int = 20
    noise_sd: float = 0.5
    seed: int = 0
    latent_low: float = 1.0
    latent_high: float = 5.0


def _clamp_score(x: float) -> int:
    return int(min(5, max(1, np.floor(x + 0.5))))


def _latents(
    interaction_ids: Sequence[str], cfg: SimulationConfig
) -> dict[tuple[str, str], float]:
    rng = np.random.default_rng(cfg.seed)
    out = {}
    for iid in sorted(set(interaction_ids)):
        for dim in ("task", "social"):
            out[(iid, dim)] = float(rng.uniform(cfg.latent_low, cfg.latent_high))
    return out


def simulate_ratings(
    units: Sequence[CodingUnit],
    questionnaire: Sequence[QuestionnaireItem],
    cfg: SimulationConfig,
) -> tuple[list[Rating], dict[tuple[str, str], float]]:
    """Generate ratings for every (rater, unit) pair plus expert scores.

    Returns the rating list and the expert whole-interaction subscale scores
    keyed by (interaction_id, dimension).
    """
    latents = _latents([u.interaction_id for u in units], cfg)
    rng = np.random.default_rng(cfg.seed + 1)
    ratings = []
    ordered_units = sorted(units, key=lambda u: u.unit_id)
    for r in range(cfg.n_raters):
        rater_id = f"sim{r:03d}"
        for u in ordered_units:
            scores = {}
            for item in questionnaire:
                latent = latents[(u.interaction_id, item.dimension)]
                noise = float(rng.normal(0.0, cfg.noise_sd)) if cfg.noise_sd > 0 else 0.0
                value = _clamp_score(latent + noise)
                scores[item.item_id] = invert_score(value) if item.inverted else value
            ratings.append(
                Rating(rater_id=rater_id, unit_id=u.unit_id, scores=scores,
                       submitted_at=float(len(ratings)))
            )
    expert = {}
    active = {d: [q for q in questionnaire if q.dimension == d and q.active]
              for d in ("task", "social")}
    for (iid, dim), latent in latents.items():
        items = active[dim]
        expert[(iid, dim)] = sum(_clamp_score(latent) for _ in items) / len(items)
    return ratings, expert


def write_expert_scores(
    expert: dict[tuple[str, str], float], path: str | Path
) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EXPERT_HEADER)
        for (iid, dim) in sorted(expert):
            w.writerow([iid, dim, f"{expert[(iid, dim)]:.6f}"])


def read_expert_scores(path: str | Path) -> dict[tuple[str, str], float]:
    out = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out[(row["interaction_id"], row["dimension"])] = float(row["score"])
    return out
