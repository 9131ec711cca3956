"""HOTA with 3D IoU similarity: DetA/AssA decomposition over the
alpha grid {0.05, 0.10, ..., 0.95}.

Follows the published two-pass procedure: a first pass accumulates global
alignment scores between ground-truth and predicted track ids, a second
pass performs one optimal per-frame matching weighted by those scores and
thresholds it at each alpha. Evaluation is class-aware by default (per
class, averaged over classes present in the ground truth).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import FrameRecord, ObjectClass
from .geometry import iou_3d

ALPHA_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))


@dataclass(frozen=True)
class HotaResult:
    hota: float
    det_a: float
    ass_a: float
    per_alpha: tuple[tuple[float, float], ...]


def optimal_assignment(cost: np.ndarray) -> list[tuple[int, int]]:
    """Globally optimal one-to-one assignment minimizing total cost.

    Returns (row, col) pairs sorted by row index. Ties between equal-cost
    assignments resolve deterministically (fixed algorithm, fixed input
    traversal order).
    """
    cost = np.asarray(cost, dtype=float)
    if cost.size == 0:
        return []
    if not np.isfinite(cost).all():
        raise ValueError("cost matrix must be finite")
    rows, cols = linear_sum_assignment(cost)
    return sorted(zip(rows.tolist(), cols.tolist()))


def _frames_by_index(frames) -> dict[int, FrameRecord]:
    return {f.frame_index: f for f in frames}


def _class_hota(gt_frames, pred_frames, frame_indices) -> HotaResult | None:
    """HOTA for the tracks of a single class; None when the class has
    neither gt nor predictions."""
    gt_ids: dict[int, int] = {}
    pred_ids: dict[int, int] = {}
    per_frame: list[tuple[list[int], list[int], np.ndarray]] = []

    n_gt_total = 0
    n_pred_total = 0
    for idx in frame_indices:
        gts = gt_frames[idx]
        preds = pred_frames[idx]
        for o in preds:
            if o.track_id is None:
                raise ValueError("tracking ids required on predictions")
        g_rows = []
        for o in gts:
            key = o.track_id if o.track_id is not None else -1 - len(gt_ids)
            g_rows.append(gt_ids.setdefault(key, len(gt_ids)))
        p_cols = [pred_ids.setdefault(o.track_id, len(pred_ids)) for o in preds]
        sim = np.zeros((len(gts), len(preds)))
        for gi, g in enumerate(gts):
            for pi, p in enumerate(preds):
                sim[gi, pi] = iou_3d(g.box, p.box)
        per_frame.append((g_rows, p_cols, sim))
        n_gt_total += len(gts)
        n_pred_total += len(preds)

    if n_gt_total == 0 and n_pred_total == 0:
        return None

    n_g, n_p = len(gt_ids), len(pred_ids)
    # Pass 1: accumulate similarity-weighted potential matches per id pair.
    potential = np.zeros((n_g, n_p))
    gt_count = np.zeros(n_g)
    pred_count = np.zeros(n_p)
    for g_rows, p_cols, sim in per_frame:
        if g_rows and p_cols:
            denom = sim.sum(axis=0, keepdims=True) + sim.sum(axis=1, keepdims=True) - sim
            weights = np.divide(sim, denom, out=np.zeros_like(sim),
                                where=denom > np.finfo(float).eps)
            potential[np.ix_(g_rows, p_cols)] += weights
        for g in g_rows:
            gt_count[g] += 1
        for p in p_cols:
            pred_count[p] += 1

    with np.errstate(divide="ignore", invalid="ignore"):
        global_alignment = potential / (
            gt_count[:, None] + pred_count[None, :] - potential)
        global_alignment = np.nan_to_num(global_alignment)

    # Pass 2: one optimal matching per frame, thresholded at each alpha.
    n_alpha = len(ALPHA_GRID)
    tp = np.zeros(n_alpha)
    fn = np.zeros(n_alpha)
    fp = np.zeros(n_alpha)
    match_counts = [np.zeros((n_g, n_p)) for _ in range(n_alpha)]
    eps = np.finfo(float).eps
    for g_rows, p_cols, sim in per_frame:
        if not g_rows or not p_cols:
            fn += len(g_rows)
            fp += len(p_cols)
            continue
        score = global_alignment[np.ix_(g_rows, p_cols)] * sim
        pairs = optimal_assignment(-score)
        for a, alpha in enumerate(ALPHA_GRID):
            matched = [(r, c) for r, c in pairs if sim[r, c] >= alpha - eps]
            tp[a] += len(matched)
            fn[a] += len(g_rows) - len(matched)
            fp[a] += len(p_cols) - len(matched)
            for r, c in matched:
                match_counts[a][g_rows[r], p_cols[c]] += 1

    per_alpha: list[tuple[float, float]] = []
    det_sum = ass_sum = hota_sum = 0.0
    for a, alpha in enumerate(ALPHA_GRID):
        denom = tp[a] + fn[a] + fp[a]
        det_a = tp[a] / denom if denom > 0 else 0.0
        if tp[a] > 0:
            mc = match_counts[a]
            fna = gt_count[:, None] - mc
            fpa = pred_count[None, :] - mc
            with np.errstate(divide="ignore", invalid="ignore"):
                ass_scores = np.nan_to_num(mc / (mc + fna + fpa))
            ass_a = float((ass_scores * mc).sum() / tp[a])
        else:
            ass_a = 0.0
        hota_alpha = float(np.sqrt(det_a * ass_a))
        per_alpha.append((alpha, hota_alpha))
        det_sum += det_a
        ass_sum += ass_a
        hota_sum += hota_alpha

    return HotaResult(hota_sum / n_alpha, det_sum / n_alpha,
                      ass_sum / n_alpha, tuple(per_alpha))


def hota_3d(gt_frames: list[FrameRecord], pred_frames: list[FrameRecord],
            class_aware: bool = True) -> HotaResult:
    """HOTA over a sequence; class-aware by default (averaged over classes
    present in the ground truth)."""
    gt_by_idx = _frames_by_index(gt_frames)
    pred_by_idx = _frames_by_index(pred_frames)
    if set(gt_by_idx) != set(pred_by_idx):
        raise ValueError("gt and pred frame index sets differ")
    indices = sorted(gt_by_idx)

    if class_aware:
        class_groups = [
            ({i: [o for o in gt_by_idx[i].objects if o.cls is cls] for i in indices},
             {i: [o for o in pred_by_idx[i].objects if o.cls is cls] for i in indices},
             cls)
            for cls in ObjectClass
        ]
    else:
        class_groups = [
            ({i: list(gt_by_idx[i].objects) for i in indices},
             {i: list(pred_by_idx[i].objects) for i in indices},
             None)
        ]

    results = []
    for gts, preds, cls in class_groups:
        has_gt = any(gts[i] for i in indices)
        if class_aware and not has_gt:
            continue
        res = _class_hota(gts, preds, indices)
        if res is not None:
            results.append(res)
    if not results:
        raise ValueError("no evaluable classes: ground truth is empty")

    n = len(results)
    per_alpha = tuple(
        (ALPHA_GRID[a], sum(r.per_alpha[a][1] for r in results) / n)
        for a in range(len(ALPHA_GRID)))
    return HotaResult(sum(r.hota for r in results) / n,
                      sum(r.det_a for r in results) / n,
                      sum(r.ass_a for r in results) / n,
                      per_alpha)
