"""Full analysis chain over units, ratings and expert scores.

Mirrors the study's analysis order: per-technique agreement (ICC grid),
two-stage variance comparison (interval widths first, then the best interval
width against the continuous and change-driven techniques), information loss
against expert whole-interaction scores behind an explicit
normality/homoscedasticity gate, and percentile ranking of units by rater
disagreement. Every gate decision is recorded in the report so the choice of
test is auditable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import ranking as ranking_mod
from . import stats
from .model import CodingUnit, QuestionnaireItem, Rating, subscale_score
from .service import build_matrices

DIMENSIONS = ("task", "social")


@dataclass(frozen=True)
class ReportConfig:
    significance: float = 0.05
    digits: int = 6
    bf_variant: str = "spread"  # variance comparisons; "means" also supported


def _round(x: float, digits: int) -> float:
    if x is None or not math.isfinite(x):
        return x
    return round(x, digits)


def unit_scores(
    units: Sequence[CodingUnit],
    ratings: Sequence[Rating],
    questionnaire: Sequence[QuestionnaireItem],
) -> dict[str, dict[str, dict[str, float]]]:
    """Per-unit mean and SD of raters' subscale scores, per dimension.

    Returns {dimension: {unit_id: {"mean": .., "sd": .., "n": ..}}} using
    only valid ratings. SD is the sample SD (0 for a single rating).
    """
    by_unit: dict[str, list[Rating]] = {}
    for r in ratings:
        if r.valid:
            by_unit.setdefault(r.unit_id, []).append(r)
    out: dict[str, dict[str, dict[str, float]]] = {d: {} for d in DIMENSIONS}
    for dim in DIMENSIONS:
        for u in units:
            rs = by_unit.get(u.unit_id)
            if not rs:
                continue
            vals = np.array([subscale_score(r, questionnaire, dim) for r in rs])
            sd = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
            out[dim][u.unit_id] = {"mean": float(vals.mean()), "sd": sd, "n": vals.size}
    return out


def _test_result_dict(res: stats.TestResult, digits: int) -> dict:
    d = {"statistic": _round(res.statistic, digits), "df1": _round(res.df1, digits),
         "p": _round(res.p, digits)}
    if res.df2 is not None:
        d["df2"] = _round(res.df2, digits)
    return d


def _variance_stage(
    group_names: list[str],
    groups: list[list[float]],
    cfg: ReportConfig,
) -> dict:
    """Omnibus spread test plus Bonferroni-corrected pairwise post hocs."""
    try:
        omnibus = stats.brown_forsythe(groups, variant=cfg.bf_variant)
    except stats.StatsError as exc:
        return {"error": str(exc)}
    stage = {
        "groups": group_names,
        "group_sd": {
            name: _round(float(np.std(np.asarray(g), ddof=1)), cfg.digits)
            for name, g in zip(group_names, groups)
        },
        "omnibus": _test_result_dict(omnibus, cfg.digits),
        "significant": omnibus.p < cfg.significance,
    }
    pairs = []
    raw_p = []
    labels = []
    for i in range(len(groups)):
        for j in range(i + 1, len(groups)):
            try:
                res = stats.brown_forsythe([groups[i], groups[j]], variant=cfg.bf_variant)
                raw_p.append(res.p)
            except stats.StatsError:
                raw_p.append(1.0)
            labels.append((group_names[i], group_names[j]))
    adjusted = stats.bonferroni(raw_p, len(raw_p)) if raw_p else []
    for (a, b), p_raw, p_adj in zip(labels, raw_p, adjusted):
        pairs.append({
            "pair": [a, b],
            "p_raw": _round(p_raw, cfg.digits),
            "p_adjusted": _round(p_adj, cfg.digits),
            "significant": p_adj < cfg.significance,
        })
    stage["post_hoc"] = pairs
    return stage


def _information_loss(
    technique_names: list[str],
    mse_samples: dict[str, list[float]],
    cfg: ReportConfig,
) -> dict:
    """Shapiro-Wilk gate, then Kruskal-Wallis or Bartlett-gated Welch ANOVA."""
    gate: list[dict] = []
    normal = True
    for tech in technique_names:
        sample = mse_samples[tech]
        try:
            sw = stats.shapiro_wilk(sample)
            gate.append({"step": "shapiro_wilk", "technique": tech,
                         **_test_result_dict(sw, cfg.digits)})
            if sw.p < cfg.significance:
                normal = False
        except stats.StatsError as exc:
            gate.append({"step": "shapiro_wilk", "technique": tech, "error": str(exc)})
            normal = False
    groups = [mse_samples[t] for t in technique_names]
    out: dict = {"techniques": technique_names, "gate": gate}
    out["mse"] = {
        t: {"mean": _round(float(np.mean(mse_samples[t])), cfg.digits),
            "sd": _round(float(np.std(np.asarray(mse_samples[t]), ddof=1)), cfg.digits)}
        for t in technique_names
    }
    if not normal:
        out["selected_test"] = "kruskal_wallis"
        out["selection_reason"] = "at least one MSE sample deviates from normality"
        try:
            out["test"] = _test_result_dict(stats.kruskal_wallis(groups), cfg.digits)
        except stats.StatsError as exc:
            out["test"] = {"error": str(exc)}
        return out
    try:
        bart = stats.bartlett(groups)
        out["gate"].append({"step": "bartlett", **_test_result_dict(bart, cfg.digits)})
        heteroscedastic = bart.p < cfg.significance
    except stats.StatsError as exc:
        out["gate"].append({"step": "bartlett", "error": str(exc)})
        heteroscedastic = True
    out["selected_test"] = "welch_anova"
    out["selection_reason"] = (
        "homoscedasticity violated" if heteroscedastic
        else "normality and homoscedasticity hold; Welch ANOVA remains valid"
    )
    try:
        welch = stats.welch_anova(groups)
        out["test"] = _test_result_dict(welch, cfg.digits)
        if welch.p < cfg.significance:
            out["post_hoc"] = [
                {
                    "pair": [technique_names[r.i], technique_names[r.j]],
                    "mean_diff": _round(r.mean_diff, cfg.digits),
                    "p": _round(r.p, cfg.digits),
                    "significant": r.p < cfg.significance,
                }
                for r in stats.games_howell(groups)
            ]
    except stats.StatsError as exc:
        out["test"] = {"error": str(exc)}
    return out


def analyze(
    units: Sequence[CodingUnit],
    ratings: Sequence[Rating],
    expert_scores: dict[tuple[str, str], float],
    questionnaire: Sequence[QuestionnaireItem],
    cfg: ReportConfig | None = None,
) -> dict:
    """Run the full analysis and return a JSON-serializable report."""
    cfg = cfg or ReportConfig()
    techniques = sorted({u.technique for u in units})
    units_by_tech = {t: [u for u in units if u.technique == t] for t in techniques}
    scores = unit_scores(units, ratings, questionnaire)

    report: dict = {
        "config": {
            "significance": cfg.significance,
            "digits": cfg.digits,
            "bf_variant": cfg.bf_variant,
            "icc_ci_method": "exact F-distribution quantiles",
            "ranking_ideal_rule": "min(ceil(n/100 * N), N_tech), same rank rule as the observed curve",
        }
    }

    # unit summary (count, mean duration, population SD)
    report["unit_summary"] = [
        {
            "technique": t,
            "count": len(units_by_tech[t]),
            "mean_duration": _round(
                float(np.mean([u.duration for u in units_by_tech[t]])), cfg.digits),
            "sd_duration": _round(
                float(np.std([u.duration for u in units_by_tech[t]])), cfg.digits),
        }
        for t in techniques
    ]

    # ICC grid
    matrices = build_matrices(ratings, units, questionnaire)
    icc_grid: dict = {}
    for tech in techniques:
        icc_grid[tech] = {}
        for dim in DIMENSIONS:
            m = matrices.get((tech, dim))
            if m is None:
                icc_grid[tech][dim] = {"error": "no ratings"}
                continue
            try:
                res = stats.icc_one_way_average(m)
                icc_grid[tech][dim] = {
                    "icc": _round(res.icc, cfg.digits),
                    "ci_low": _round(res.ci_low, cfg.digits),
                    "ci_high": _round(res.ci_high, cfg.digits),
                    "confidence": res.confidence,
                }
            except stats.StatsError as exc:
                icc_grid[tech][dim] = {"error": str(exc)}
    report["icc"] = icc_grid

    # variance comparison, two stages
    interval_techs = sorted(t for t in techniques if t.startswith("AUT"))
    other_techs = sorted(t for t in techniques if not t.startswith("AUT"))
    variance: dict = {}
    for dim in DIMENSIONS:
        entry: dict = {}
        means_by_tech = {
            t: [scores[dim][u.unit_id]["mean"] for u in units_by_tech[t]
                if u.unit_id in scores[dim]]
            for t in techniques
        }
        winner = None
        if len(interval_techs) >= 2:
            groups = [means_by_tech[t] for t in interval_techs]
            entry["interval_stage"] = _variance_stage(interval_techs, groups, cfg)
            if "error" not in entry["interval_stage"]:
                winner = max(
                    interval_techs,
                    key=lambda t: entry["interval_stage"]["group_sd"][t],
                )
                entry["retained_interval"] = winner
        elif interval_techs:
            winner = interval_techs[0]
            entry["retained_interval"] = winner
        final_techs = sorted(other_techs + ([winner] if winner else []))
        if len(final_techs) >= 2:
            groups = [means_by_tech[t] for t in final_techs]
            entry["final_stage"] = _variance_stage(final_techs, groups, cfg)
        variance[dim] = entry
    report["variance"] = variance

    # information loss (MSE vs expert), on the retained techniques
    info: dict = {}
    for dim in DIMENSIONS:
        retained = variance[dim].get("retained_interval")
        loss_techs = sorted(other_techs + ([retained] if retained else []))
        mse_samples: dict[str, list[float]] = {}
        for tech in loss_techs:
            per_interaction: dict[str, list[float]] = {}
            for u in units_by_tech[tech]:
                if u.unit_id in scores[dim]:
                    per_interaction.setdefault(u.interaction_id, []).append(
                        scores[dim][u.unit_id]["mean"]
                    )
            sample = []
            for iid in sorted(per_interaction):
                expert = expert_scores.get((iid, dim))
                if expert is None:
                    continue
                sample.append(stats.mse_vs_expert(per_interaction[iid], expert))
            mse_samples[tech] = sample
        if all(len(s) >= 3 for s in mse_samples.values()) and len(loss_techs) >= 2:
            info[dim] = _information_loss(loss_techs, mse_samples, cfg)
        else:
            info[dim] = {
                "error": "not enough interactions with expert scores",
                "mse_sample_sizes": {t: len(s) for t, s in mse_samples.items()},
            }
    report["information_loss"] = info

    # ranking by rater-score SD
    rank: dict = {}
    for dim in DIMENSIONS:
        pool = [
            ranking_mod.UnitStat(u.unit_id, u.technique, scores[dim][u.unit_id]["sd"])
            for u in units
            if u.unit_id in scores[dim]
        ]
        if len({u.technique for u in pool}) >= 2:
            curves = ranking_mod.ranking_analysis(pool)
            rank[dim] = {
                t: {
                    "points": [list(p) for p in c.points],
                    "auc_ratio": _round(c.auc_ratio, cfg.digits),
                }
                for t, c in sorted(curves.items())
            }
        else:
            rank[dim] = {"error": "fewer than 2 techniques with rated units"}
    report["ranking"] = rank
    return report


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def report_to_text(report: dict) -> str:
    """Human-readable rendering of the machine report."""
    lines: list[str] = []
    add = lines.append
    add("COHESION ANNOTATION STUDY - ANALYSIS REPORT")
    add("=" * 44)
    cfgd = report["config"]
    add(f"significance threshold: {cfgd['significance']}  "
        f"(variance tests: Brown-Forsythe, {cfgd['bf_variant']} variant)")
    add("")
    add("Unit summary")
    add("-" * 44)
    add(f"{'technique':<10}{'count':>7}{'mean dur':>12}{'sd dur':>10}")
    for row in report["unit_summary"]:
        add(f"{row['technique']:<10}{row['count']:>7}"
            f"{row['mean_duration']:>12.2f}{row['sd_duration']:>10.2f}")
    add("")
    add("Inter-rater agreement (ICC, one-way average-measures)")
    add("-" * 44)
    add(f"{'technique':<10}{'task':>26}{'social':>26}")
    for tech, cells in sorted(report["icc"].items()):
        rendered = []
        for dim in DIMENSIONS:
            cell = cells[dim]
            if "error" in cell:
                rendered.append(f"[{cell['error']}]")
            else:
                rendered.append(
                    f"{cell['icc']:.2f} (CI [{cell['ci_low']:.2f}, {cell['ci_high']:.2f}])"
                )
        add(f"{tech:<10}{rendered[0]:>26}{rendered[1]:>26}")
    add("")
    for dim in DIMENSIONS:
        add(f"Variance comparison ({dim})")
        add("-" * 44)
        entry = report["variance"][dim]
        for stage_name in ("interval_stage", "final_stage"):
            stage = entry.get(stage_name)
            if not stage:
                continue
            if "error" in stage:
                add(f"  {stage_name}: {stage['error']}")
                continue
            o = stage["omnibus"]
            df2 = o.get("df2")
            add(f"  {stage_name} [{', '.join(stage['groups'])}]: "
                f"F({o['df1']:.0f}, {df2:.2f}) = {o['statistic']:.2f}, p = {o['p']:.4g}")
            for ph in stage["post_hoc"]:
                mark = "*" if ph["significant"] else " "
                add(f"    {ph['pair'][0]} vs {ph['pair'][1]}: "
                    f"p(adj) = {ph['p_adjusted']:.4g} {mark}")
        if "retained_interval" in entry:
            add(f"  retained interval technique: {entry['retained_interval']}")
        add("")
    for dim in DIMENSIONS:
        add(f"Information loss vs expert (MSE, {dim})")
        add("-" * 44)
        entry = report["information_loss"][dim]
        if "error" in entry:
            add(f"  {entry['error']}")
            add("")
            continue
        for tech in entry["techniques"]:
            m = entry["mse"][tech]
            add(f"  {tech}: MSE mean = {m['mean']:.3f}, SD = {m['sd']:.3f}")
        add(f"  selected test: {entry['selected_test']} ({entry['selection_reason']})")
        t = entry.get("test", {})
        if "error" in t:
            add(f"  test error: {t['error']}")
        elif "df2" in t:
            add(f"  F({t['df1']:.1f}, {t['df2']:.1f}) = {t['statistic']:.2f}, "
                f"p = {t['p']:.4g}")
        elif t:
            add(f"  chi2 = {t['statistic']:.2f}, df = {t['df1']:.0f}, p = {t['p']:.4g}")
        for ph in entry.get("post_hoc", []):
            mark = "*" if ph["significant"] else " "
            add(f"    {ph['pair'][0]} vs {ph['pair'][1]}: "
                f"diff = {ph['mean_diff']:.3f}, p = {ph['p']:.4g} {mark}")
        add("")
    for dim in DIMENSIONS:
        add(f"Ranking by rater-score SD ({dim})")
        add("-" * 44)
        entry = report["ranking"][dim]
        if "error" in entry:
            add(f"  {entry['error']}")
            add("")
            continue
        for tech, curve in sorted(entry.items()):
            add(f"  {tech}: AUC ratio = {curve['auc_ratio']:.2f}")
        add("")
    return "\n".join(lines) + "\n"
