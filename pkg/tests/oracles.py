"""Independent brute-force oracles used by the test suite.

Everything here is deliberately written from first principles and shares
no code path with the package: assignment by full permutation
enumeration, IoU by Monte-Carlo volume sampling, AP and HOTA by direct
accumulation.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def rotate2d(x, y, yaw):
    c, s = math.cos(yaw), math.sin(yaw)
    return c * x - s * y, s * x + c * y


def box_corners_oracle(cx, cy, length, width, yaw):
    """Footprint corners by direct rotation-matrix application."""
    out = []
    for lx, ly in [(length / 2, width / 2), (-length / 2, width / 2),
                   (-length / 2, -width / 2), (length / 2, -width / 2)]:
        rx, ry = rotate2d(lx, ly, yaw)
        out.append((cx + rx, cy + ry))
    return out


def point_in_box(px, py, pz, box):
    """Membership test in a yaw-rotated box via inverse transform."""
    dx, dy = px - box.center_x, py - box.center_y
    lx, ly = rotate2d(dx, dy, -box.yaw)
    return (abs(lx) <= box.length / 2 and abs(ly) <= box.width / 2
            and abs(pz - box.center_z) <= box.height / 2)


def mc_iou_3d(a, b, n_samples, rng):
    """Monte-Carlo 3D IoU: sample uniformly inside box a, estimate the
    intersection volume from the fraction of samples falling inside b."""
    local = rng.uniform(-0.5, 0.5, size=(n_samples, 3))
    local *= np.array([a.length, a.width, a.height])
    c, s = math.cos(a.yaw), math.sin(a.yaw)
    wx = a.center_x + c * local[:, 0] - s * local[:, 1]
    wy = a.center_y + s * local[:, 0] + c * local[:, 1]
    wz = a.center_z + local[:, 2]
    # inverse transform into b's local frame
    dx, dy, dz = wx - b.center_x, wy - b.center_y, wz - b.center_z
    cb, sb = math.cos(-b.yaw), math.sin(-b.yaw)
    lx = cb * dx - sb * dy
    ly = sb * dx + cb * dy
    inside = ((np.abs(lx) <= b.length / 2) & (np.abs(ly) <= b.width / 2)
              & (np.abs(dz) <= b.height / 2))
    vol_a = a.length * a.width * a.height
    vol_b = b.length * b.width * b.height
    inter = vol_a * inside.mean()
    union = vol_a + vol_b - inter
    return inter / union


def mc_polygon_intersection_area(poly_a, poly_b, n_samples, rng):
    """Monte-Carlo area of intersection of two convex polygons."""
    pts = np.array(poly_a + poly_b)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    samples = rng.uniform(lo, hi, size=(n_samples, 2))

    def inside(poly, p):
        res = np.ones(len(p), dtype=bool)
        n = len(poly)
        for i in range(n):
            ax, ay = poly[i]
            bx, by = poly[(i + 1) % n]
            res &= (bx - ax) * (p[:, 1] - ay) - (by - ay) * (p[:, 0] - ax) >= 0
        return res

    frac = (inside(poly_a, samples) & inside(poly_b, samples)).mean()
    return frac * (hi - lo).prod()


def brute_min_assignment(cost):
    """Minimum-cost one-to-one assignment by permutation enumeration.

    Returns (pairs, total). Rectangular matrices assign min(n, m) pairs.
    """
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    best_total, best_pairs = None, []
    if n <= m:
        for perm in itertools.permutations(range(m), n):
            total = sum(cost[i, perm[i]] for i in range(n))
            if best_total is None or total < best_total - 1e-15:
                best_total, best_pairs = total, [(i, perm[i]) for i in range(n)]
    else:
        for perm in itertools.permutations(range(n), m):
            total = sum(cost[perm[j], j] for j in range(m))
            if best_total is None or total < best_total - 1e-15:
                best_total, best_pairs = total, [(perm[j], j) for j in range(m)]
    return sorted(best_pairs), best_total


def brute_max_assignment(score):
    pairs, total = brute_min_assignment(-np.asarray(score, dtype=float))
    return pairs, -total


def ap_40pt(score_tp_pairs, n_gt):
    """40-point interpolated AP, written independently."""
    ranked = sorted(score_tp_pairs, key=lambda p: -p[0])
    precisions, recalls = [], []
    tp = 0
    for k, (_, is_tp) in enumerate(ranked, 1):
        tp += int(is_tp)
        precisions.append(tp / k)
        recalls.append(tp / n_gt)
    total = 0.0
    for i in range(1, 41):
        r = i / 40
        candidates = [p for p, rc in zip(precisions, recalls) if rc >= r - 1e-12]
        total += max(candidates) if candidates else 0.0
    return total / 40


def greedy_match_oracle(pred_boxes_scores, gt_boxes, iou_fn, threshold):
    """Score-ordered greedy matching; returns the TP flag per prediction
    in the original order."""
    order = sorted(range(len(pred_boxes_scores)),
                   key=lambda i: (-pred_boxes_scores[i][1], i))
    taken = set()
    flags = [False] * len(pred_boxes_scores)
    for pi in order:
        box = pred_boxes_scores[pi][0]
        ious = [(iou_fn(box, g), gi) for gi, g in enumerate(gt_boxes)
                if gi not in taken]
        ious = [(v, gi) for v, gi in ious if v >= threshold]
        if ious:
            v, gi = max(ious, key=lambda t: (t[0], -t[1]))
            taken.add(gi)
            flags[pi] = True
    return flags


ALPHAS = [round(0.05 * k, 2) for k in range(1, 20)]


def brute_hota_single_class(frames, iou_fn):
    """HOTA for one class with permutation-enumeration matching.

    frames: list of (gt_list, pred_list) where each element is
    (track_id, box). Mirrors the two-pass reference procedure but uses no
    shared code with the implementation under test.
    """
    gt_ids = sorted({tid for gts, _ in frames for tid, _ in gts})
    pr_ids = sorted({tid for _, prs in frames for tid, _ in prs})
    gi = {t: k for k, t in enumerate(gt_ids)}
    pi = {t: k for k, t in enumerate(pr_ids)}
    ng, np_ = len(gt_ids), len(pr_ids)

    potential = [[0.0] * np_ for _ in range(ng)]
    gcount = [0] * ng
    pcount = [0] * np_
    sims = []
    for gts, prs in frames:
        sim = [[iou_fn(gb, pb) for _, pb in prs] for _, gb in gts]
        sims.append(sim)
        for r, (gt, _) in enumerate(gts):
            gcount[gi[gt]] += 1
        for c, (pt, _) in enumerate(prs):
            pcount[pi[pt]] += 1
        for r in range(len(gts)):
            for c in range(len(prs)):
                row_sum = sum(sim[r])
                col_sum = sum(sim[rr][c] for rr in range(len(gts)))
                denom = row_sum + col_sum - sim[r][c]
                if denom > 1e-300:
                    potential[gi[gts[r][0]]][pi[prs[c][0]]] += sim[r][c] / denom

    galign = [[0.0] * np_ for _ in range(ng)]
    for r in range(ng):
        for c in range(np_):
            denom = gcount[r] + pcount[c] - potential[r][c]
            if denom > 0:
                galign[r][c] = potential[r][c] / denom

    eps = np.finfo(float).eps
    tps = {a: 0 for a in ALPHAS}
    fns = {a: 0 for a in ALPHAS}
    fps = {a: 0 for a in ALPHAS}
    mcounts = {a: [[0] * np_ for _ in range(ng)] for a in ALPHAS}
    for (gts, prs), sim in zip(frames, sims):
        if not gts or not prs:
            for a in ALPHAS:
                fns[a] += len(gts)
                fps[a] += len(prs)
            continue
        score = [[galign[gi[gts[r][0]]][pi[prs[c][0]]] * sim[r][c]
                  for c in range(len(prs))] for r in range(len(gts))]
        pairs, _ = brute_max_assignment(score)
        for a in ALPHAS:
            matched = [(r, c) for r, c in pairs if sim[r][c] >= a - eps]
            tps[a] += len(matched)
            fns[a] += len(gts) - len(matched)
            fps[a] += len(prs) - len(matched)
            for r, c in matched:
                mcounts[a][gi[gts[r][0]]][pi[prs[c][0]]] += 1

    det_as, ass_as, hotas = [], [], []
    for a in ALPHAS:
        denom = tps[a] + fns[a] + fps[a]
        det_a = tps[a] / denom if denom else 0.0
        if tps[a]:
            acc = 0.0
            for r in range(ng):
                for c in range(np_):
                    mc = mcounts[a][r][c]
                    if mc:
                        fna = gcount[r] - mc
                        fpa = pcount[c] - mc
                        acc += mc * (mc / (mc + fna + fpa))
            ass_a = acc / tps[a]
        else:
            ass_a = 0.0
        det_as.append(det_a)
        ass_as.append(ass_a)
        hotas.append(math.sqrt(det_a * ass_a))
    n = len(ALPHAS)
    return sum(hotas) / n, sum(det_as) / n, sum(ass_as) / n
