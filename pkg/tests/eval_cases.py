"""Random detection-evaluation cases small enough for exhaustive matching."""

from __future__ import annotations

from docextract.evaluation import GtInstance, PredInstance
from docextract.model import Rect

LABELS = ("text", "table", "image")


def _box(rng, size=100):
    x0, y0 = rng.randint(0, size), rng.randint(0, size)
    return (float(x0), float(y0), float(x0 + rng.randint(5, 60)), float(y0 + rng.randint(5, 60)))


def _jitter(rng, box, amount):
    x0, y0, x1, y1 = box
    dx0, dy0, dx1, dy1 = (rng.uniform(-amount, amount) for _ in range(4))
    x0, x1 = sorted((x0 + dx0, x1 + dx1))
    y0, y1 = sorted((y0 + dy0, y1 + dy1))
    return (x0, y0, x1 + 0.5, y1 + 0.5)


def random_case(rng, max_boxes=6):
    """Returns (gt tuples, pred tuples) in the oracle's format:
    gt (page, label, rect) and pred (page, label, rect, score)."""
    gt, preds = [], []
    for page in range(rng.randint(1, 2)):
        for label in rng.sample(LABELS, rng.randint(1, 2)):
            boxes = [_box(rng) for _ in range(rng.randint(0, max_boxes))]
            gt += [(page, label, b) for b in boxes]
            for _ in range(rng.randint(0, max_boxes)):
                if boxes and rng.random() < 0.7:
                    rect = _jitter(rng, rng.choice(boxes), rng.choice([1, 5, 15]))
                else:
                    rect = _box(rng)
                # coarse scores so ties happen
                preds.append((page, label, rect, rng.choice([0.3, 0.5, 0.5, 0.7, 0.9, rng.random()])))
    if not gt:
        gt.append((0, "text", _box(rng)))
    return gt, preds


def to_instances(gt, preds):
    return (
        [GtInstance(p, lab, Rect(*r)) for p, lab, r in gt],
        [PredInstance(p, lab, Rect(*r), s) for p, lab, r, s in preds],
    )
