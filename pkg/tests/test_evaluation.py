import numpy as np
import pytest
from hypothesis import given, strategies as st

from cgebd import evaluation as ev
from cgebd.annotations import BoundaryAnnotation
from cgebd.errors import ConfigError
from oracles import brute_matching


def ann(raters, duration=10.0, vid="v"):
    return BoundaryAnnotation(vid, 10.0, int(duration * 10), duration, raters)


def test_thresholds():
    assert ev.THRESHOLDS == (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5)


def test_rel_dis():
    assert ev.rel_dis(10.0, 10.4, 10.0) == pytest.approx(0.04)
    assert ev.rel_dis(3.0, 3.0, 5.0) == 0
    assert ev.rel_dis(0.0, 7.0, 7.0) == 1.0
    with pytest.raises(ConfigError):
        ev.rel_dis(0, 1, 0)


def test_matching_examples():
    assert ev.match_boundaries([1.0, 2.0], [1.0, 2.0], 0.05) == 2
    assert ev.match_boundaries([1.0], [1.0, 1.05], 0.05) == 1
    assert ev.match_boundaries([1.0, 1.1], [1.1, 1.0], 0.5) == 2
    # greedy nearest would pair 1.0 with 1.04 and strand 0.96
    assert ev.match_boundaries([0.96, 1.0], [1.04, 0.92], 0.05) == 2


timestamps = st.lists(st.floats(0, 1, allow_nan=False), max_size=6)


@given(timestamps, timestamps, st.sampled_from(ev.THRESHOLDS))
def test_matching_equals_brute_force(preds, gts, thr):
    assert ev.match_boundaries(sorted(preds), sorted(gts), thr) == brute_matching(preds, gts, thr)


def test_prf_conventions():
    assert ev.prf(0, 0, 0) == (1.0, 1.0, 1.0)
    assert ev.prf(0, 0, 3)[2] == 0.0
    assert ev.prf(0, 2, 0)[2] == 0.0
    p, r, f = ev.prf(2, 4, 2)
    assert (p, r) == (0.5, 1.0) and f == pytest.approx(2 / 3)


def test_report_examples():
    a = ann([[2.0, 5.0]])
    rep = ev.f1_report({"v": [2.0, 5.0]}, [a])
    assert rep.f1 == [1.0] * 10 and rep.avg_f1 == 1.0
    assert ev.f1_report({}, [a]).f1 == [0.0] * 10
    two = ann([[1.0], [6.0, 8.0]])
    rep = ev.f1_report({"v": [6.0, 8.0]}, [two])
    assert rep.f1_at(0.05) == 1.0
    assert rep.videos[0].best_rater[0] == 1
    empty = ann([])
    assert ev.f1_report({"v": []}, [empty]).avg_f1 == 1.0


@given(st.lists(st.floats(0, 10, allow_nan=False), max_size=5),
       st.lists(st.lists(st.floats(0, 10, allow_nan=False), max_size=5), min_size=1, max_size=4),
       st.randoms())
def test_report_properties(preds, raters, rnd):
    raters = [sorted(r) for r in raters]
    a = ann(raters)
    rep = ev.f1_report({"v": sorted(preds)}, [a])
    assert all(0 <= v <= 1 for row in (rep.precision, rep.recall, rep.f1) for v in row)
    assert all(x <= y + 1e-12 for x, y in zip(rep.f1, rep.f1[1:]))
    shuffled = list(raters)
    rnd.shuffle(shuffled)
    rep2 = ev.f1_report({"v": sorted(preds)}, [ann(shuffled)])
    assert rep2.f1 == rep.f1 and rep2.precision == rep.precision and rep2.recall == rep.recall


def test_aggregation_is_mean_over_videos_in_id_order():
    a, b = ann([[1.0]], vid="b"), ann([[5.0]], vid="a")
    rep = ev.f1_report({"a": [5.0], "b": [9.0]}, [a, b])
    assert rep.f1_at(0.05) == 0.5
    assert [v.video_id for v in rep.videos] == ["a", "b"]


def test_table_and_csv():
    rep = ev.f1_report({"v": [2.0]}, [ann([[2.0]])])
    lines = rep.table().splitlines()
    assert lines[0].split("|")[1].strip() == "0.05" and "avg" in lines[0]
    rows = rep.to_csv().splitlines()
    assert rows[0].startswith("metric,0.05,0.10") and rows[0].endswith(",avg")
    assert rows[3].startswith("f1,1.000000")
