import numpy as np
import pytest

from infraqa.core import ObjectClass
from infraqa.detection import (average_precision, map_at_05, match_frame,
                               per_frame_ad)
from infraqa.geometry import iou_3d
from conftest import make_frame, make_obj, nearby_box, random_box
from oracles import ap_40pt, greedy_match_oracle


class TestMatchFrame:
    def test_exact_hit(self):
        gt = [make_obj()]
        pred = [make_obj(score=0.9)]
        r = match_frame(pred, gt, 0.5)
        assert r.matches == ((0, 0),)
        assert r.false_positive_preds == ()
        assert r.false_negative_gts == ()

    def test_one_to_one_prefers_higher_score(self):
        gt = [make_obj()]
        preds = [make_obj(score=0.9), make_obj(score=0.8)]
        r = match_frame(preds, gt, 0.5)
        assert r.matches == ((0, 0),)
        assert r.false_positive_preds == (1,)

    def test_threshold_bounds(self):
        with pytest.raises(ValueError):
            match_frame([], [], 0.0)

    def test_matches_greedy_oracle_on_random_frames(self, rng):
        for _ in range(30):
            anchor = random_box(rng, span=5.0)
            gts = [make_obj(box=nearby_box(rng, anchor)) for _ in range(3)]
            preds = [make_obj(box=nearby_box(rng, anchor),
                              score=float(rng.uniform(0, 1))) for _ in range(3)]
            got = match_frame(preds, gts, 0.5)
            matched = {pi for pi, _ in got.matches}
            flags = greedy_match_oracle(
                [(p.box, p.score) for p in preds],
                [g.box for g in gts], iou_3d, 0.5)
            assert [i in matched for i in range(3)] == flags


class TestAveragePrecision:
    def test_perfect_single_detection(self):
        assert average_precision([(0.9, True)], 1) == pytest.approx(1.0)

    def test_fp_above_tp(self):
        assert average_precision([(0.9, False), (0.8, True)], 1) == pytest.approx(0.5)

    def test_no_detections(self):
        assert average_precision([], 1) == 0.0

    def test_zero_gt_rejected(self):
        with pytest.raises(ValueError):
            average_precision([(0.9, True)], 0)

    def test_matches_independent_oracle(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 12))
            n_gt = int(rng.integers(1, 8))
            flags = [(float(rng.uniform(0, 1)), bool(rng.random() < 0.5))
                     for _ in range(n)]
            n_tp = sum(f for _, f in flags)
            if n_tp > n_gt:
                continue
            assert average_precision(flags, n_gt) == pytest.approx(
                ap_40pt(flags, n_gt), abs=1e-12)

    def test_removing_fp_never_decreases_ap(self, rng):
        for _ in range(30):
            flags = [(float(rng.uniform(0, 1)), bool(rng.random() < 0.6))
                     for _ in range(10)]
            n_gt = max(1, sum(f for _, f in flags))
            fps = [i for i, (_, f) in enumerate(flags) if not f]
            if not fps:
                continue
            reduced = [f for i, f in enumerate(flags) if i != fps[0]]
            assert average_precision(reduced, n_gt) >= \
                average_precision(flags, n_gt) - 1e-12


class TestMapAt05:
    def test_perfect_predictions(self):
        gt = [make_frame(i, [make_obj(x=float(i)), make_obj(
            cls=ObjectClass.PEDESTRIAN, x=10.0 + i)]) for i in range(3)]
        pred = [make_frame(i, [make_obj(x=float(i), score=0.9), make_obj(
            cls=ObjectClass.PEDESTRIAN, x=10.0 + i, score=0.8)]) for i in range(3)]
        r = map_at_05(gt, pred)
        assert r.map_value == pytest.approx(1.0)
        assert set(r.per_class_ap) == {ObjectClass.CAR, ObjectClass.PEDESTRIAN}

    def test_mean_over_present_classes(self):
        gt = [make_frame(0, [make_obj(cls=ObjectClass.CAR),
                             make_obj(cls=ObjectClass.TRUCK, x=10.0, l=8.0)])]
        # car hit exactly, truck detected twice (one FP above the TP)
        pred = [make_frame(0, [
            make_obj(cls=ObjectClass.CAR, score=0.9),
            make_obj(cls=ObjectClass.TRUCK, x=40.0, l=8.0, score=0.95),
            make_obj(cls=ObjectClass.TRUCK, x=10.0, l=8.0, score=0.8)])]
        r = map_at_05(gt, pred)
        assert r.per_class_ap[ObjectClass.CAR] == pytest.approx(1.0)
        assert r.per_class_ap[ObjectClass.TRUCK] == pytest.approx(0.5)
        assert r.map_value == pytest.approx(0.75)

    def test_empty_ground_truth_errors(self):
        gt = [make_frame(0, [])]
        pred = [make_frame(0, [])]
        with pytest.raises(ValueError, match="no evaluable classes"):
            map_at_05(gt, pred)

    def test_score_rescaling_invariance(self, rng):
        gt = [make_frame(i, [make_obj(x=3.0 * k) for k in range(3)])
              for i in range(2)]
        pred = [make_frame(i, [make_obj(x=3.0 * k + float(rng.uniform(-1, 1)),
                                        score=float(rng.uniform(0.2, 0.9)))
                               for k in range(3)]) for i in range(2)]
        base = map_at_05(gt, pred).map_value
        scaled = [
            make_frame(f.frame_index, [
                make_obj(box=o.box, score=o.score * 0.5) for o in f.objects])
            for f in pred]
        assert map_at_05(gt, scaled).map_value == pytest.approx(base, abs=1e-12)


class TestPerFrameAd:
    def test_all_matched(self):
        gt = make_frame(0, [make_obj()])
        pred = make_frame(0, [make_obj(score=0.9)])
        assert per_frame_ad(gt, pred) == pytest.approx(1.0)

    def test_one_tp_one_fp_one_fn(self):
        gt = make_frame(0, [make_obj(x=0.0), make_obj(x=10.0)])
        pred = make_frame(0, [make_obj(x=0.0, score=0.9),
                              make_obj(x=50.0, score=0.8)])
        assert per_frame_ad(gt, pred) == pytest.approx(1 / 3)

    def test_empty_both_sides(self):
        assert per_frame_ad(make_frame(0, []), make_frame(0, [])) == 1.0

    def test_preds_without_gt(self):
        assert per_frame_ad(make_frame(0, []),
                            make_frame(0, [make_obj(score=0.5)])) == 0.0

    def test_equals_one_iff_clean(self, rng):
        for _ in range(20):
            n = int(rng.integers(0, 4))
            gt = make_frame(0, [make_obj(x=5.0 * k) for k in range(n)])
            pred = make_frame(0, [make_obj(x=5.0 * k, score=0.9)
                                  for k in range(n)])
            assert per_frame_ad(gt, pred) == 1.0
