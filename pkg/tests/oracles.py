"""Independent reference computations used to freeze and cross-check
expected values. These deliberately avoid the package's code paths."""

from __future__ import annotations

import itertools
from fractions import Fraction


def rect_iou(a, b) -> float:
    """IoU of (x0, y0, x1, y1) tuples by direct arithmetic."""
    ix = max(0.0, min(a[2], b[2]) - max(a[0], b[0]))
    iy = max(0.0, min(a[3], b[3]) - max(a[1], b[1]))
    inter = ix * iy
    ua = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return inter / ua if ua > 0 else 0.0


def pixel_area(rects, scale=1):
    """Union area by rasterizing integer-coordinate rects onto a grid."""
    cells = set()
    for x0, y0, x1, y1 in rects:
        for x in range(int(x0 * scale), int(x1 * scale)):
            for y in range(int(y0 * scale), int(y1 * scale)):
                cells.add((x, y))
    return len(cells) / (scale * scale)


def brute_force_match(gts, preds, threshold):
    """Enumerate every injective assignment of predictions to GT boxes and
    keep the one that is lexicographically best when predictions are read
    in descending-score order: first maximize whether/how well the top
    prediction is matched, then the next, and so on.

    gts: list of rects; preds: list of (rect, score). Returns a list aligned
    with ``preds`` holding the matched GT index or None.
    """
    order = sorted(range(len(preds)), key=lambda k: (-preds[k][1], k))
    options = []
    for k in order:
        opts = [None] + [g for g in range(len(gts)) if rect_iou(preds[k][0], gts[g]) >= threshold]
        options.append(opts)
    best_key, best = None, None
    for combo in itertools.product(*options):
        used = [g for g in combo if g is not None]
        if len(used) != len(set(used)):
            continue
        key = []
        for k, g in zip(order, combo):
            if g is None:
                key.append((0, 0.0, 0))
            else:
                key.append((1, rect_iou(preds[k][0], gts[g]), -g))
        if best_key is None or key > best_key:
            best_key, best = key, combo
    out = [None] * len(preds)
    for k, g in zip(order, best):
        out[k] = g
    return out


def interpolated_ap(flags_by_score, total_gt) -> float:
    """101-point interpolated AP straight from the definition.

    flags_by_score: TP/FP booleans already sorted by descending score.
    For each recall level r = i/100, take the best precision over every
    cutoff whose recall reaches r (0 if none), then average. Exact
    rational arithmetic throughout.
    """
    if total_gt == 0:
        return 0.0
    points = []
    tp = fp = 0
    for flag in flags_by_score:
        tp += flag
        fp += not flag
        points.append((Fraction(tp, total_gt), Fraction(tp, tp + fp)))
    acc = Fraction(0)
    for i in range(101):
        r = Fraction(i, 100)
        candidates = [p for rec, p in points if rec >= r]
        acc += max(candidates) if candidates else 0
    return float(acc / 101)


def brute_force_metrics(gt, preds, thresholds):
    """mAP / AP50 / AR50 over categories present in the ground truth.

    gt: list of (page, label, rect); preds: list of (page, label, rect, score).
    """
    labels = sorted({g[1] for g in gt})
    aps, ap50, ar50 = [], [], []
    for label in labels:
        per_t = []
        for t in thresholds:
            flags = []  # (score, index, is_tp)
            n_gt = 0
            pages = sorted({g[0] for g in gt} | {p[0] for p in preds}, key=str)
            for page in pages:
                g_rects = [g[2] for g in gt if g[0] == page and g[1] == label]
                p_items = [(p[2], p[3]) for p in preds if p[0] == page and p[1] == label]
                idx = [k for k, p in enumerate(preds) if p[0] == page and p[1] == label]
                n_gt += len(g_rects)
                matched = brute_force_match(g_rects, p_items, t)
                for k, m in zip(idx, matched):
                    flags.append((preds[k][3], k, m is not None))
            flags.sort(key=lambda f: (-f[0], f[1]))
            ap = interpolated_ap([f[2] for f in flags], n_gt)
            per_t.append(ap)
            if t == 0.5:
                ap50.append(ap)
                ar50.append(sum(f[2] for f in flags) / n_gt)
        aps.append(sum(per_t) / len(per_t))
    n = len(labels)
    return sum(aps) / n, sum(ap50) / n, sum(ar50) / n
