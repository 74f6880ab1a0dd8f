"""COCO-style detection metrics: greedy IoU matching, 101-point AP,
mAP over IoU 0.50:0.05:0.95, AP50 and AR50."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from .errors import InvalidThresholdError, UndefinedIoUError
from .geometry import iou
from .model import Rect

logger = logging.getLogger(__name__)

IOU_THRESHOLDS = tuple(round(0.5 + 0.05 * k, 2) for k in range(10))
RECALL_POINTS = np.arange(101) / 100


@dataclass(frozen=True)
class GtInstance:
    page_id: Any
    label: str
    rect: Rect


@dataclass(frozen=True)
class PredInstance:
    page_id: Any
    label: str
    rect: Rect
    score: float


@dataclass(frozen=True)
class Match:
    pred: PredInstance
    gt: GtInstance | None
    iou: float = 0.0

    @property
    def is_tp(self) -> bool:
        return self.gt is not None


@dataclass
class EvalReport:
    per_category_ap: dict[str, dict[float, float]] = field(default_factory=dict)
    per_category_ar50: dict[str, float] = field(default_factory=dict)
    mAP: float = 0.0
    AP50: float = 0.0
    AR50: float = 0.0
    #: per category (tp, fp, fn) at IoU 0.5
    counts: dict[str, tuple[int, int, int]] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "mAP": self.mAP,
            "AP50": self.AP50,
            "AR50": self.AR50,
            "categories": {
                label: {
                    "AP": {f"{t:.2f}": v for t, v in aps.items()},
                    "AR50": self.per_category_ar50[label],
                    "tp": self.counts[label][0],
                    "fp": self.counts[label][1],
                    "fn": self.counts[label][2],
                }
                for label, aps in sorted(self.per_category_ap.items())
            },
        }

    def format_table(self) -> str:
        header = ("category", "AP", "AP50", "AR50", "TP", "FP", "FN")
        rows = []
        for label, aps in sorted(self.per_category_ap.items()):
            tp, fp, fn = self.counts[label]
            rows.append(
                (
                    label,
                    f"{np.mean(list(aps.values())):.4f}",
                    f"{aps[0.5]:.4f}",
                    f"{self.per_category_ar50[label]:.4f}",
                    str(tp),
                    str(fp),
                    str(fn),
                )
            )
        rows.append(("all", f"{self.mAP:.4f}", f"{self.AP50:.4f}", f"{self.AR50:.4f}", "", "", ""))
        widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
        fmt = lambda r: "  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))  # noqa: E731
        return "\n".join([fmt(header), "  ".join("-" * w for w in widths), *map(fmt, rows)])


def _safe_iou(a: Rect, b: Rect) -> float:
    try:
        return iou(a, b)
    except UndefinedIoUError:
        return 0.0


def _cap(preds: list[PredInstance], max_dets: int | None) -> list[PredInstance]:
    ordered = sorted(enumerate(preds), key=lambda t: (-t[1].score, t[0]))
    if max_dets is not None:
        ordered = ordered[:max_dets]
    return [p for _, p in ordered]


def _group(items: Iterable) -> dict[tuple, list]:
    out: dict[tuple, list] = {}
    for it in items:
        out.setdefault((it.page_id, it.label), []).append(it)
    return out


def match_instances(
    gt: list[GtInstance],
    preds: list[PredInstance],
    iou_threshold: float,
    max_dets: int | None = None,
) -> list[Match]:
    """Greedy matching per (page, category).

    Predictions are visited by descending score; each claims the unmatched
    ground truth with the highest IoU at or above ``iou_threshold`` (first
    listed wins ties) or becomes a false positive. ``max_dets`` keeps only
    the top-scoring predictions per page and category.
    """
    if not 0 < iou_threshold <= 1:
        raise InvalidThresholdError(f"IoU threshold must be in (0, 1], got {iou_threshold}")
    gt_groups = _group(gt)
    out = []
    for key, group in _group(preds).items():
        candidates = gt_groups.get(key, [])
        taken = [False] * len(candidates)
        for p in _cap(group, max_dets):
            best, best_iou = -1, iou_threshold
            for k, g in enumerate(candidates):
                if taken[k]:
                    continue
                v = _safe_iou(p.rect, g.rect)
                if v >= best_iou and (best < 0 or v > best_iou):
                    best, best_iou = k, v
            if best >= 0:
                taken[best] = True
                out.append(Match(p, candidates[best], best_iou))
            else:
                out.append(Match(p, None))
    return out


def average_precision(matches: list[Match], total_gt: int) -> float:
    """101-point interpolated AP of one category's matches."""
    if total_gt == 0:
        logger.warning("average precision requested for a category absent from ground truth")
        return 0.0
    if not matches:
        return 0.0
    ordered = sorted(enumerate(matches), key=lambda t: (-t[1].pred.score, t[0]))
    tp = np.cumsum([m.is_tp for _, m in ordered], dtype=float)
    fp = np.cumsum([not m.is_tp for _, m in ordered], dtype=float)
    recall = tp / total_gt
    precision = tp / (tp + fp)
    precision = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, RECALL_POINTS, side="left")
    q = np.where(idx < len(precision), precision[np.minimum(idx, len(precision) - 1)], 0.0)
    return float(np.mean(q))


def evaluate(
    gt: list[GtInstance],
    preds: list[PredInstance],
    iou_thresholds: tuple[float, ...] = IOU_THRESHOLDS,
    max_dets: int = 100,
) -> EvalReport:
    """Score predictions against ground truth.

    Categories are those present in the ground truth; predictions of other
    categories are ignored, as in COCO.
    """
    if 0.5 not in iou_thresholds:
        raise InvalidThresholdError("iou_thresholds must include 0.5")
    labels = sorted({g.label for g in gt})
    report = EvalReport()
    if not labels:
        return report
    for label in labels:
        g_l = [g for g in gt if g.label == label]
        p_l = [p for p in preds if p.label == label]
        aps = {}
        for t in iou_thresholds:
            matches = match_instances(g_l, p_l, t, max_dets)
            aps[t] = average_precision(matches, len(g_l))
            if t == 0.5:
                tp = sum(m.is_tp for m in matches)
                report.counts[label] = (tp, len(matches) - tp, len(g_l) - tp)
                report.per_category_ar50[label] = tp / len(g_l)
        report.per_category_ap[label] = aps
    report.mAP = float(np.mean([np.mean(list(a.values())) for a in report.per_category_ap.values()]))
    report.AP50 = float(np.mean([a[0.5] for a in report.per_category_ap.values()]))
    report.AR50 = float(np.mean(list(report.per_category_ar50.values())))
    return report


def load_instances(raw: bytes | str, predictions: bool) -> list:
    """Parse a GT or prediction file: a JSON array of
    ``{page_id, bbox, label[, score]}`` (or an object with an
    ``instances`` array)."""
    data = json.loads(raw)
    if isinstance(data, dict):
        data = data["instances"]
    out = []
    for d in data:
        rect = Rect.from_list(d["bbox"])
        if predictions:
            out.append(PredInstance(d["page_id"], d["label"], rect, float(d["score"])))
        else:
            out.append(GtInstance(d["page_id"], d["label"], rect))
    return out
