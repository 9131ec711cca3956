"""Detection accuracy: 40-point interpolated mAP@[0.5] and the per-frame
detection-accuracy series feeding the reliability KPI.

Matching is per class, greedy in descending score order, one-to-one against
the unmatched ground truth of highest 3D IoU above the threshold (standard
AP matching). AP uses the 40-point recall interpolation of the KITTI
evaluation protocol.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import FrameRecord, ObjectClass, ObjectRecord
from .geometry import iou_3d

N_RECALL_POINTS = 40
DEFAULT_IOU_THRESHOLD = 0.5


@dataclass(frozen=True)
class FrameMatchResult:
    """One-frame matching outcome for a single class."""

    matches: tuple[tuple[int, int], ...]  # (pred index, gt index)
    false_positive_preds: tuple[int, ...]
    false_negative_gts: tuple[int, ...]


@dataclass(frozen=True)
class APResult:
    per_class_ap: dict[ObjectClass, float]
    map_value: float
    per_frame_ad: tuple[tuple[int, float], ...]


def match_frame(preds: list[ObjectRecord], gts: list[ObjectRecord],
                iou_threshold: float) -> FrameMatchResult:
    """Greedy score-ordered one-to-one matching within a single class."""
    if not (0.0 < iou_threshold < 1.0):
        raise ValueError(f"iou_threshold {iou_threshold} outside (0,1)")
    order = sorted(range(len(preds)),
                   key=lambda i: (-(preds[i].score or 0.0), i))
    matched_gt: set[int] = set()
    matches: list[tuple[int, int]] = []
    false_pos: list[int] = []
    for pi in order:
        best_gt, best_iou = -1, 0.0
        for gi, gt in enumerate(gts):
            if gi in matched_gt:
                continue
            iou = iou_3d(preds[pi].box, gt.box)
            if iou >= iou_threshold and iou > best_iou:
                best_gt, best_iou = gi, iou
        if best_gt >= 0:
            matched_gt.add(best_gt)
            matches.append((pi, best_gt))
        else:
            false_pos.append(pi)
    false_neg = [gi for gi in range(len(gts)) if gi not in matched_gt]
    return FrameMatchResult(tuple(matches), tuple(false_pos), tuple(false_neg))


def average_precision(flags: list[tuple[float, bool]], n_gt: int) -> float:
    """40-point interpolated AP from (score, is_tp) detections.

    Mean over recall thresholds r in {1/40, ..., 1} of the maximum
    precision achieved at recall >= r.
    """
    if n_gt < 1:
        raise ValueError("average_precision undefined for n_gt = 0")
    ranked = sorted(flags, key=lambda f: -f[0])
    tp = 0
    points: list[tuple[float, float]] = []  # (recall, precision)
    for k, (_, is_tp) in enumerate(ranked, start=1):
        if is_tp:
            tp += 1
        points.append((tp / n_gt, tp / k))

    acc = 0.0
    for step in range(1, N_RECALL_POINTS + 1):
        r = step / N_RECALL_POINTS
        best = 0.0
        for recall, precision in points:
            if recall >= r - 1e-12 and precision > best:
                best = precision
        acc += best
    return acc / N_RECALL_POINTS


def _frames_by_index(frames) -> dict[int, FrameRecord]:
    return {f.frame_index: f for f in frames}


def map_at_05(gt_frames: list[FrameRecord], pred_frames: list[FrameRecord],
              iou_threshold: float = DEFAULT_IOU_THRESHOLD) -> APResult:
    """Per-class AP with globally score-ranked detections, plus the
    per-frame detection-accuracy series."""
    gt_by_idx = _frames_by_index(gt_frames)
    pred_by_idx = _frames_by_index(pred_frames)
    if set(gt_by_idx) != set(pred_by_idx):
        raise ValueError("gt and pred frame index sets differ")

    per_class_flags: dict[ObjectClass, list[tuple[float, bool]]] = {
        c: [] for c in ObjectClass}
    per_class_ngt: dict[ObjectClass, int] = {c: 0 for c in ObjectClass}

    for idx in sorted(gt_by_idx):
        gt_objs = gt_by_idx[idx].objects
        pred_objs = pred_by_idx[idx].objects
        for cls in ObjectClass:
            gts = [o for o in gt_objs if o.cls is cls]
            preds = [o for o in pred_objs if o.cls is cls]
            per_class_ngt[cls] += len(gts)
            result = match_frame(preds, gts, iou_threshold)
            matched = {pi for pi, _ in result.matches}
            for pi, pred in enumerate(preds):
                per_class_flags[cls].append((pred.score or 0.0, pi in matched))

    per_class_ap: dict[ObjectClass, float] = {}
    for cls in ObjectClass:
        if per_class_ngt[cls] >= 1:
            per_class_ap[cls] = average_precision(per_class_flags[cls],
                                                  per_class_ngt[cls])
    if not per_class_ap:
        raise ValueError("no evaluable classes: ground truth is empty")

    map_value = sum(per_class_ap.values()) / len(per_class_ap)
    ad_series = tuple(
        (idx, per_frame_ad(gt_by_idx[idx], pred_by_idx[idx], iou_threshold))
        for idx in sorted(gt_by_idx))
    return APResult(per_class_ap, map_value, ad_series)


def per_frame_ad(gt_frame: FrameRecord, pred_frame: FrameRecord,
                 iou_threshold: float = DEFAULT_IOU_THRESHOLD) -> float:
    """Within-frame detection accuracy TP/(TP+FP+FN), pooled over classes.

    Empty frame on both sides counts as 1.0; predictions without any
    ground truth count as 0.0.
    """
    tp = fp = fn = 0
    for cls in ObjectClass:
        gts = [o for o in gt_frame.objects if o.cls is cls]
        preds = [o for o in pred_frame.objects if o.cls is cls]
        result = match_frame(preds, gts, iou_threshold)
        tp += len(result.matches)
        fp += len(result.false_positive_preds)
        fn += len(result.false_negative_gts)
    total = tp + fp + fn
    if total == 0:
        return 1.0
    return tp / total
