"""Study bundle: one directory holding everything a study run needs.

Layout: timelines/*.json, units.csv, questionnaire.json, honey_pots.json and
a manifest.json carrying SHA-256 hashes of every file so a bundle can be
verified before serving.
"""

from __future__ import annotations

import hashlib
import json
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .model import (
    InteractionTimeline,
    QuestionnaireItem,
    default_questionnaire,
    load_questionnaire,
    load_timeline,
    save_questionnaire,
)
from .service import HoneyPot, default_honey_pots
from .unitize import read_units_csv


class BundleError(ValueError):
    pass


@dataclass
class StudyBundle:
    root: Path
    timelines: list[InteractionTimeline]
    units: list
    questionnaire: list[QuestionnaireItem]
    honey_pots: list[HoneyPot]


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def write_honey_pots(pots: Sequence[HoneyPot], path: Path) -> None:
    doc = {"honey_pots": [
        {"item_id": p.item_id, "text": p.text, "expected_answer": p.expected_answer}
        for p in pots
    ]}
    path.write_text(json.dumps(doc, indent=2) + "\n")


def read_honey_pots(path: Path) -> list[HoneyPot]:
    doc = json.loads(path.read_text())
    return [
        HoneyPot(p["item_id"], p["text"], int(p["expected_answer"]))
        for p in doc["honey_pots"]
    ]


def create_bundle(
    out_dir: str | Path,
    timeline_paths: Sequence[str | Path],
    units_path: str | Path,
    questionnaire_path: str | Path | None = None,
    honey_pots_path: str | Path | None = None,
) -> Path:
    """Assemble and hash a study bundle directory; returns its path."""
    out = Path(out_dir)
    (out / "timelines").mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {}
    timeline_names = []
    for p in timeline_paths:
        p = Path(p)
        load_timeline(p)  # validate before copying
        dest = out / "timelines" / p.name
        shutil.copyfile(p, dest)
        rel = f"timelines/{p.name}"
        files[rel] = _sha256(dest)
        timeline_names.append(rel)
    units = read_units_csv(units_path)
    known = {tl: True for tl in (load_timeline(out / t).id for t in timeline_names)}
    for u in units:
        if u.interaction_id not in known:
            raise BundleError(
                f"unit {u.unit_id!r} references unknown timeline {u.interaction_id!r}"
            )
    shutil.copyfile(units_path, out / "units.csv")
    files["units.csv"] = _sha256(out / "units.csv")
    if questionnaire_path:
        shutil.copyfile(questionnaire_path, out / "questionnaire.json")
    else:
        save_questionnaire(default_questionnaire(), out / "questionnaire.json")
    files["questionnaire.json"] = _sha256(out / "questionnaire.json")
    if honey_pots_path:
        shutil.copyfile(honey_pots_path, out / "honey_pots.json")
    else:
        write_honey_pots(default_honey_pots(), out / "honey_pots.json")
    files["honey_pots.json"] = _sha256(out / "honey_pots.json")
    manifest = {"timelines": timeline_names, "files": files}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return out


def load_bundle(root: str | Path, verify: bool = True) -> StudyBundle:
    root = Path(root)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise BundleError(f"{root}: not a study bundle (no manifest.json)")
    manifest = json.loads(manifest_path.read_text())
    if verify:
        for rel, digest in manifest["files"].items():
            path = root / rel
            if not path.exists():
                raise BundleError(f"bundle file missing: {rel}")
            if _sha256(path) != digest:
                raise BundleError(f"bundle file corrupted (hash mismatch): {rel}")
    timelines = [load_timeline(root / rel) for rel in manifest["timelines"]]
    units = read_units_csv(root / "units.csv")
    ids = {tl.id for tl in timelines}
    for u in units:
        if u.interaction_id not in ids:
            raise BundleError(
                f"unit {u.unit_id!r} references unknown timeline {u.interaction_id!r}"
            )
    return StudyBundle(
        root=root,
        timelines=timelines,
        units=units,
        questionnaire=load_questionnaire(root / "questionnaire.json"),
        honey_pots=read_honey_pots(root / "honey_pots.json"),
    )
