import json
import logging
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docextract.errors import InvalidThresholdError
from docextract.evaluation import (
    IOU_THRESHOLDS,
    GtInstance,
    Match,
    PredInstance,
    average_precision,
    evaluate,
    load_instances,
    match_instances,
)
from eval_cases import random_case, to_instances
from helpers import R
from oracles import brute_force_metrics, interpolated_ap


def G(page, label, *box):
    return GtInstance(page, label, R(*box))


def P(page, label, score, *box):
    return PredInstance(page, label, R(*box), score)


def test_thresholds():
    assert IOU_THRESHOLDS == (0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95)


def test_perfect_predictions_score_one():
    gt = [G(0, "text", 0, 0, 10, 10), G(0, "table", 20, 20, 50, 50), G(1, "text", 5, 5, 9, 9)]
    preds = [P(g.page_id, g.label, 0.9, *g.rect.to_list()) for g in gt]
    r = evaluate(gt, preds)
    assert (r.mAP, r.AP50, r.AR50) == (1.0, 1.0, 1.0)


def test_tp_fp_tp_sequence():
    # frozen from the exact-fraction oracle: two GT, hits at ranks 1 and 3
    gt = [G(0, "text", 0, 0, 10, 10), G(0, "text", 20, 0, 30, 10)]
    preds = [P(0, "text", 0.9, 0, 0, 10, 10), P(0, "text", 0.8, 50, 50, 60, 60), P(0, "text", 0.7, 20, 0, 30, 10)]
    r = evaluate(gt, preds, iou_thresholds=(0.5,))
    assert r.AP50 == pytest.approx(0.834983498349835, abs=1e-12)
    assert interpolated_ap([True, False, True], 2) == pytest.approx(0.834983498349835, abs=1e-15)
    assert r.AR50 == 1.0
    assert r.counts["text"] == (2, 1, 0)


def test_no_predictions():
    r = evaluate([G(0, "text", 0, 0, 10, 10)], [])
    assert (r.mAP, r.AP50, r.AR50) == (0.0, 0.0, 0.0)
    assert r.counts["text"] == (0, 0, 1)


def test_iou_just_below_threshold_is_a_miss():
    # IoU = 49/101 < 0.5
    gt = [G(0, "text", 0, 0, 10, 10)]
    preds = [P(0, "text", 0.9, 0, 0, 10, 4.9)]
    assert len(preds) == 1
    assert match_instances(gt, preds, 0.5)[0].gt is None


def test_greedy_order_by_score():
    gt = [G(0, "text", 0, 0, 10, 10)]
    low = P(0, "text", 0.2, 0, 0, 10, 10)
    high = P(0, "text", 0.9, 0, 0, 10, 9)
    matches = {m.pred: m for m in match_instances(gt, [low, high], 0.5)}
    assert matches[high].is_tp and not matches[low].is_tp


def test_other_pages_and_labels_do_not_match():
    gt = [G(0, "text", 0, 0, 10, 10)]
    preds = [P(1, "text", 0.9, 0, 0, 10, 10), P(0, "table", 0.9, 0, 0, 10, 10)]
    r = evaluate(gt, preds)
    assert r.AP50 == 0.0
    assert list(r.per_category_ap) == ["text"]


def test_max_dets_caps_per_page_and_category():
    gt = [G(0, "text", 0, 0, 10, 10)]
    preds = [P(0, "text", 0.9, 50, 50, 60, 60), P(0, "text", 0.5, 0, 0, 10, 10)]
    assert evaluate(gt, preds, max_dets=1).AR50 == 0.0
    assert evaluate(gt, preds, max_dets=2).AR50 == 1.0


@pytest.mark.parametrize("t", [0, -0.1, 1.5])
def test_invalid_threshold(t):
    with pytest.raises(InvalidThresholdError):
        match_instances([], [], t)


def test_thresholds_must_include_half():
    with pytest.raises(InvalidThresholdError):
        evaluate([G(0, "text", 0, 0, 1, 1)], [], iou_thresholds=(0.75,))


def test_absent_category_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="docextract.evaluation"):
        assert average_precision([Match(P(0, "x", 0.5, 0, 0, 1, 1), None)], 0) == 0.0
    assert "absent" in caplog.text


def test_load_instances_formats():
    raw = json.dumps([{"page_id": "a", "bbox": [0, 0, 1, 1], "label": "text", "score": 0.5}])
    assert load_instances(raw, predictions=True) == [P("a", "text", 0.5, 0, 0, 1, 1)]
    wrapped = json.dumps({"instances": [{"page_id": 0, "bbox": [0, 0, 1, 1], "label": "text"}]})
    assert load_instances(wrapped, predictions=False) == [G(0, "text", 0, 0, 1, 1)]


def test_report_table_and_dict():
    gt = [G(0, "text", 0, 0, 10, 10)]
    r = evaluate(gt, [P(0, "text", 0.9, 0, 0, 10, 10)])
    assert r.to_dict()["categories"]["text"]["AP"]["0.50"] == 1.0
    assert r.format_table().splitlines()[-1].split()[:2] == ["all", "1.0000"]


@pytest.mark.parametrize("seed", range(60))
def test_matches_exhaustive_oracle(seed):
    gt, preds = random_case(random.Random(seed))
    expected = brute_force_metrics(gt, preds, IOU_THRESHOLDS)
    r = evaluate(*to_instances(gt, preds))
    assert (r.mAP, r.AP50, r.AR50) == pytest.approx(expected, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_invariant_to_prediction_order(seed):
    rng = random.Random(seed)
    gt, preds = random_case(rng)
    # distinct scores so input order cannot matter
    preds = [(p, lab, r, (k + 1) / (len(preds) + 1)) for k, (p, lab, r, _) in enumerate(preds)]
    g, p = to_instances(gt, preds)
    shuffled = list(p)
    rng.shuffle(shuffled)
    a, b = evaluate(g, p), evaluate(g, shuffled)
    assert (a.mAP, a.AP50, a.AR50) == (b.mAP, b.AP50, b.AR50)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_metrics_bounded_and_monotone_in_threshold(seed):
    g, p = to_instances(*random_case(random.Random(seed)))
    r = evaluate(g, p)
    for aps in r.per_category_ap.values():
        values = [aps[t] for t in IOU_THRESHOLDS]
        assert all(0.0 <= v <= 1.0 for v in values)
        assert values == sorted(values, reverse=True)
    assert 0.0 <= r.mAP <= r.AP50 + 1e-12
    assert r.AP50 <= 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_adding_a_perfect_top_prediction_never_hurts_recall(seed):
    gt, preds = random_case(random.Random(seed))
    g, p = to_instances(gt, preds)
    before = evaluate(g, p).AR50
    extra = [PredInstance(x.page_id, x.label, x.rect, 2.0) for x in g]
    assert evaluate(g, p + extra).AR50 == 1.0 >= before
