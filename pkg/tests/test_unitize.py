import math
import random

import pytest

from cohesion_study.model import (
    ChangeCategory,
    ChangeEvent,
    InteractionTimeline,
    UtteranceEvent,
    load_timeline,
)
from cohesion_study.unitize import (
    ActConfig,
    EstConfig,
    IntervalConfig,
    UnitizeError,
    est_boundaries,
    read_units_csv,
    unit_summary,
    unitize_act,
    unitize_est,
    unitize_interval,
    write_units_csv,
)

C = ChangeCategory


def tl(duration, changes=(), utterances=(), tid="t"):
    return InteractionTimeline(
        id=tid, duration=duration, players=3,
        changes=tuple(ChangeEvent(t, c) for t, c in changes),
        utterances=tuple(utterances),
    )


def spans(units):
    return [(u.start, u.end) for u in units]


# -- EST --------------------------------------------------------------------

def test_est_no_changes_single_unit():
    units = unitize_est(tl(53))
    assert spans(units) == [(0.0, 53.0)]


def test_est_repeats_do_not_accumulate():
    # repeated character-interaction changes never trigger; the simultaneous
    # trio at t=12 weighs 1+1+2 >= 3
    changes = [(2, C.CHARACTER_INTERACTION), (5, C.CHARACTER_INTERACTION),
               (8, C.CHARACTER_INTERACTION), (12, C.SPACE),
               (12, C.CHARACTER_INTERACTION), (12, C.GOALS), (15, C.SPACE)]
    units = unitize_est(tl(20, changes))
    assert spans(units) == [(0.0, 12.0), (12.0, 20.0)]


def test_est_three_distinct_categories_trigger():
    changes = [(3, C.TIME), (7, C.SPACE), (9, C.CHARACTERS),
               (11, C.OBJECTS), (14, C.CAUSES), (16, C.CHARACTER_INTERACTION)]
    units = unitize_est(tl(20, changes))
    assert spans(units) == [(0.0, 9.0), (9.0, 16.0), (16.0, 20.0)]


def test_est_lone_goal_insufficient():
    units = unitize_est(tl(12, [(4, C.GOALS), (9, C.GOALS)]))
    assert spans(units) == [(0.0, 12.0)]


def test_est_goal_plus_one_other_triggers():
    units = unitize_est(tl(12, [(4, C.GOALS), (9, C.TIME)]))
    assert spans(units) == [(0.0, 9.0), (9.0, 12.0)]


def test_est_boundary_at_duration_suppressed():
    changes = [(10, C.TIME), (10, C.SPACE), (10, C.GOALS)]
    units = unitize_est(tl(10.0, changes))
    assert spans(units) == [(0.0, 10.0)]


def test_est_min_unit_duration_merges():
    changes = [(5, C.TIME), (5, C.SPACE), (5, C.GOALS),
               (5.5, C.CAUSES), (5.5, C.OBJECTS), (5.5, C.CHARACTERS)]
    # without merging: [0,5), [5,5.5), [5.5,20); the 0.5s unit joins its predecessor
    cfg = EstConfig(min_unit_duration=2.0)
    units = unitize_est(tl(20, changes), cfg)
    assert spans(units) == [(0.0, 5.5), (5.5, 20.0)]
    assert [u.index for u in units] == [0, 1]


def naive_est_boundaries(timeline, cfg):
    """Quadratic re-scan oracle: recompute the category set from the last
    boundary for every prefix of the change stream."""
    times = sorted({c.t for c in timeline.changes})
    boundaries = []
    last = -1.0
    for t in times:
        seen = set()
        for c in timeline.changes:
            if last < c.t <= t:
                seen.add(c.category)
        weight = sum(cfg.weight(cat) for cat in seen)
        if weight >= cfg.threshold:
            boundaries.append(t)
            last = t
    return [b for b in boundaries if 0.0 < b < timeline.duration]


def random_change_timeline(rnd, goal_heavy=False):
    duration = rnd.uniform(10, 60)
    n = rnd.randint(0, 25)
    cats = list(C)
    changes = []
    for _ in range(n):
        t = round(rnd.uniform(0, duration - 0.5), 1)  # coarse grid forces shared timestamps
        cat = C.GOALS if (goal_heavy and rnd.random() < 0.6) else rnd.choice(cats)
        changes.append((t, cat))
    return tl(duration, changes)


@pytest.mark.parametrize("goal_heavy", [False, True])
def test_est_streaming_equals_rescan_oracle(goal_heavy):
    rnd = random.Random(123 if goal_heavy else 321)
    cfg = EstConfig()
    for _ in range(1000):
        timeline = random_change_timeline(rnd, goal_heavy)
        assert est_boundaries(timeline, cfg) == naive_est_boundaries(timeline, cfg)


def test_est_rule_anchors_exhaustive():
    # all category multisets of size <= 4, each event at a distinct timestamp:
    # a boundary exists iff the accumulated distinct-category weight ever hits 3
    from itertools import combinations_with_replacement

    cfg = EstConfig()
    for size in range(1, 5):
        for combo in combinations_with_replacement(list(C), size):
            changes = [(float(i + 1), cat) for i, cat in enumerate(combo)]
            units = unitize_est(tl(100.0, changes), cfg)
            distinct = set(combo)
            weight = sum(cfg.weight(c) for c in distinct)
            if weight >= 3:
                assert len(units) >= 2, combo
            else:
                assert len(units) == 1, combo


def test_est_removing_change_never_splits_units():
    rnd = random.Random(9)
    cfg = EstConfig()
    for _ in range(200):
        timeline = random_change_timeline(rnd)
        if not timeline.changes:
            continue
        base = len(unitize_est(timeline, cfg))
        drop = rnd.randrange(len(timeline.changes))
        reduced = InteractionTimeline(
            id=timeline.id, duration=timeline.duration, players=timeline.players,
            changes=tuple(c for i, c in enumerate(timeline.changes) if i != drop),
        )
        assert len(unitize_est(reduced, cfg)) <= base


# -- interval ---------------------------------------------------------------

def test_interval_drop_full_windows_only():
    units = unitize_interval(tl(53), IntervalConfig(8, "drop"))
    assert spans(units) == [(k * 8.0, (k + 1) * 8.0) for k in range(6)]
    assert all(u.duration == 8.0 for u in units)


def test_interval_exact_division_policies_agree():
    for policy in ("drop", "keep", "merge"):
        units = unitize_interval(tl(24), IntervalConfig(8, policy))
        assert spans(units) == [(0.0, 8.0), (8.0, 16.0), (16.0, 24.0)]


def test_interval_keep_emits_residue():
    units = unitize_interval(tl(53), IntervalConfig(21, "keep"))
    assert spans(units) == [(0.0, 21.0), (21.0, 42.0), (42.0, 53.0)]


def test_interval_merge_extends_last():
    units = unitize_interval(tl(53), IntervalConfig(21, "merge"))
    assert spans(units) == [(0.0, 21.0), (21.0, 53.0)]


def test_interval_window_beyond_duration_drop_errors():
    with pytest.raises(UnitizeError, match="no units produced"):
        unitize_interval(tl(10), IntervalConfig(15, "drop"))
    units = unitize_interval(tl(10), IntervalConfig(15, "keep"))
    assert spans(units) == [(0.0, 10.0)]


def test_interval_technique_tag():
    assert unitize_interval(tl(53), IntervalConfig(8))[0].technique == "AUT8"
    assert unitize_interval(tl(53), IntervalConfig(21))[0].technique == "AUT21"


# -- ACT --------------------------------------------------------------------

def test_act_single_speaker_no_rules():
    utts = [UtteranceEvent("a", 0.0, 15.0)]
    units = unitize_act(tl(15, utterances=utts))
    assert spans(units) == [(0.0, 15.0)]


def test_act_speaker_change_and_thought_boundary():
    utts = [UtteranceEvent("a", 0.0, 10.0),
            UtteranceEvent("b", 10.0, 25.0, thought_boundaries=(18.0,))]
    units = unitize_act(tl(25, utterances=utts))
    assert spans(units) == [(0.0, 10.0), (10.0, 18.0), (18.0, 25.0)]


def test_act_twenty_second_cap():
    utts = [UtteranceEvent("a", 0.0, 45.0)]
    units = unitize_act(tl(45, utterances=utts))
    assert spans(units) == [(0.0, 20.0), (20.0, 40.0), (40.0, 45.0)]


def test_act_cap_spans_consecutive_same_speaker_utterances():
    utts = [UtteranceEvent("a", 0.0, 12.0), UtteranceEvent("a", 12.0, 30.0)]
    units = unitize_act(tl(30, utterances=utts))
    assert spans(units) == [(0.0, 20.0), (20.0, 30.0)]


def test_act_argument_change_cuts():
    utts = [UtteranceEvent("a", 0.0, 8.0),
            UtteranceEvent("a", 8.0, 14.0, argument_change=True)]
    units = unitize_act(tl(14, utterances=utts))
    assert spans(units) == [(0.0, 8.0), (8.0, 14.0)]


# -- partition properties ---------------------------------------------------

def random_full_timeline(rnd):
    duration = round(rnd.uniform(20, 60), 1)
    timeline = random_change_timeline(rnd)
    n_utt = rnd.randint(1, 6)
    edges = sorted(round(rnd.uniform(0.5, duration - 0.5), 1) for _ in range(n_utt - 1))
    bounds = [0.0] + edges + [duration]
    utts = []
    prev = None
    for k in range(n_utt):
        if bounds[k] >= bounds[k + 1]:
            continue
        s = rnd.choice(["a", "b", "c"])
        tbs = ()
        if bounds[k + 1] - bounds[k] > 4 and rnd.random() < 0.4:
            tbs = (round(rnd.uniform(bounds[k] + 0.2, bounds[k + 1] - 0.2), 2),)
        utts.append(UtteranceEvent(s, bounds[k], bounds[k + 1], tbs,
                                   rnd.random() < 0.2))
        prev = s
    return InteractionTimeline(
        id="t", duration=duration, players=3,
        changes=timeline.changes if timeline.duration <= duration else tuple(
            c for c in timeline.changes if c.t <= duration),
        utterances=tuple(utts),
    )


def assert_tiles(units, start, end):
    assert units[0].start == start
    assert units[-1].end == end
    for a, b in zip(units, units[1:]):
        assert a.end == b.start
        assert a.start < a.end


def test_partition_properties_random_timelines():
    rnd = random.Random(2024)
    for _ in range(300):
        timeline = random_full_timeline(rnd)
        assert_tiles(unitize_est(timeline), 0.0, timeline.duration)
        assert_tiles(unitize_act(timeline), 0.0, timeline.duration)
        w = rnd.choice([5.0, 8.0, 15.0, 21.0])
        for policy in ("keep", "merge"):
            assert_tiles(unitize_interval(timeline, IntervalConfig(w, policy)),
                         0.0, timeline.duration)
        n_full = int(timeline.duration // w)
        if n_full:
            dropped = unitize_interval(timeline, IntervalConfig(w, "drop"))
            assert_tiles(dropped, 0.0, n_full * w)


def test_determinism():
    rnd = random.Random(5)
    timeline = random_full_timeline(rnd)
    assert unitize_est(timeline) == unitize_est(timeline)
    assert unitize_act(timeline) == unitize_act(timeline)
    cfg = IntervalConfig(8.0, "keep")
    assert unitize_interval(timeline, cfg) == unitize_interval(timeline, cfg)


# -- summary ----------------------------------------------------------------

def test_summary_constant_durations():
    units = unitize_interval(tl(24), IntervalConfig(8))
    [row] = unit_summary(units)
    assert row == {"technique": "AUT8", "count": 3, "mean": 8.0, "sd": 0.0}


def test_summary_hand_formula():
    from cohesion_study.model import CodingUnit

    units = [CodingUnit(f"t:ACT:{i}", "t", "ACT", s, e, i)
             for i, (s, e) in enumerate([(0.0, 10.0), (10.0, 30.0), (30.0, 60.0)])]
    # durations 10, 20, 30
    [row] = unit_summary(units)
    assert row["count"] == 3
    assert row["mean"] == pytest.approx(20.0)
    assert row["sd"] == pytest.approx(math.sqrt(200.0 / 3.0))


def test_summary_aut21_drop_sd_zero(timeline_paths):
    units = []
    for path in timeline_paths:
        units.extend(unitize_interval(load_timeline(path), IntervalConfig(21, "drop")))
    [row] = unit_summary(units)
    assert row["sd"] == 0.0
    assert row["mean"] == 21.0


def test_summary_empty_group():
    with pytest.raises(UnitizeError):
        unit_summary([])


def test_units_csv_roundtrip(tmp_path):
    units = unitize_interval(tl(53, tid="x"), IntervalConfig(8))
    path = tmp_path / "units.csv"
    write_units_csv(units, path)
    assert read_units_csv(path) == units
