"""Bounding-box conflict resolution for one page of categorized blocks.

Three passes run in order: discard filtering, containment removal and
partial-overlap resolution. Afterwards no two kept, non-deferred blocks
share interior area.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field, replace

from .config import EngineConfig
from .errors import UnresolvableOverlapError
from .geometry import (
    area,
    containment_ratio,
    intersect,
    largest_free_part,
    overlap_area,
    shrink_to_avoid,
)
from .model import (
    FIGURE_CATEGORIES,
    TEXT_LIKE_CATEGORIES,
    Block,
    BlockCategory,
    Line,
    Rect,
    hull,
    is_discard,
)

logger = logging.getLogger(__name__)

CONTAINED_IN_IMAGE = "contained-in-image"
CONTAINED_IN_TABLE = "contained-in-table"
CONTAINED_IN_FORMULA = "contained-in-formula"
DISCARD_CATEGORY = "discard-category"
ABSORBED_BY_OVERLAP = "absorbed-by-overlap"

_CAPTIONS = frozenset(
    {BlockCategory.IMAGE_CAPTION, BlockCategory.TABLE_CAPTION, BlockCategory.TABLE_FOOTNOTE}
)


@dataclass
class ResolutionReport:
    """What post-processing did to a page's blocks, keyed by block id.

    ``hosts`` maps a removed block to the block that swallowed it.
    """

    removed: list[tuple[int, str]] = field(default_factory=list)
    shrunk: list[tuple[int, Rect, Rect]] = field(default_factory=list)
    deferred: list[int] = field(default_factory=list)
    hosts: dict[int, int] = field(default_factory=dict)

    def extend(self, other: ResolutionReport) -> ResolutionReport:
        self.removed.extend(other.removed)
        self.shrunk.extend(other.shrunk)
        self.deferred.extend(other.deferred)
        self.hosts.update(other.hosts)
        return self

    def is_empty(self) -> bool:
        return not (self.removed or self.shrunk or self.deferred)

    def to_dict(self) -> dict:
        return {
            "removed": [{"id": i, "reason": r, "host": self.hosts.get(i)} for i, r in self.removed],
            "shrunk": [{"id": i, "old": o.to_list(), "new": n.to_list()} for i, o, n in self.shrunk],
            "deferred": list(self.deferred),
        }


def filter_discard(blocks: list[Block]) -> tuple[list[Block], list[Block]]:
    kept = [b for b in blocks if not is_discard(b.category)]
    dropped = [b for b in blocks if is_discard(b.category)]
    return kept, dropped


def remove_contained(
    blocks: list[Block], config: EngineConfig | None = None
) -> tuple[list[Block], ResolutionReport]:
    """Drop text and formulas swallowed by figures, and anything swallowed
    by a displayed formula. Captions and footnotes are never removed."""
    cfg = config or EngineConfig()
    thr = cfg.containment_threshold
    report = ResolutionReport()
    removed: set[int] = set()

    for cand in blocks:
        if cand.category in _CAPTIONS or area(cand.rect) == 0:
            continue
        best: tuple[float, int, Block] | None = None
        for host in blocks:
            if host is cand or host.block_id in removed:
                continue
            if host.category in FIGURE_CATEGORIES:
                if cand.category not in (BlockCategory.TEXT, BlockCategory.INTERLINE_EQUATION):
                    continue
                priority = 1
            elif host.category is BlockCategory.INTERLINE_EQUATION:
                priority = 0
            else:
                continue
            ratio = containment_ratio(cand.rect, host.rect)
            if ratio >= thr and (best is None or (ratio, priority) > best[:2]):
                best = (ratio, priority, host)
        if best is None:
            continue
        host = best[2]
        reason = {
            BlockCategory.IMAGE: CONTAINED_IN_IMAGE,
            BlockCategory.TABLE: CONTAINED_IN_TABLE,
        }.get(host.category, CONTAINED_IN_FORMULA)
        removed.add(cand.block_id)
        report.removed.append((cand.block_id, reason))
        report.hosts[cand.block_id] = host.block_id

    return [b for b in blocks if b.block_id not in removed], report


def _order_key(b: Block, rect: Rect) -> tuple:
    return (b.page_index, rect.y0, rect.x0, b.block_id)


def _span_hull(b: Block) -> Rect | None:
    return hull(s.rect for s in b.spans)


def resolve_overlaps(
    blocks: list[Block], config: EngineConfig | None = None
) -> tuple[list[Block], ResolutionReport]:
    """Make kept blocks pairwise interior-disjoint.

    Overlapping pairs are handled worst-first (largest shared area):

    * text vs figure: the figure is deferred and keeps its rect;
    * same family: both rects are cut apart with :func:`shrink_to_avoid`;
      when that is impossible the lower-confidence block is clipped to its
      span hull and then to the largest part clear of the other. A figure
      with nothing left is deferred; a text block with nothing left is
      absorbed (its spans move to the winner).
    """
    cfg = config or EngineConfig()
    by_id = {b.block_id: b for b in blocks}
    if len(by_id) != len(blocks):
        raise ValueError("block ids must be unique within a page")
    original = {b.block_id: b.rect for b in blocks}
    rects = dict(original)
    extra_lines: dict[int, list[Line]] = {}
    deferred: list[int] = []
    removed: list[tuple[int, str]] = []
    hosts: dict[int, int] = {}
    active = set(by_id)
    version = dict.fromkeys(by_id, 0)
    ids = [b.block_id for b in blocks]

    heap: list[tuple] = []

    def push(i: int, j: int) -> None:
        ov = overlap_area(rects[i], rects[j])
        if ov > 0:
            ki, kj = _order_key(by_id[i], rects[i]), _order_key(by_id[j], rects[j])
            if kj < ki:
                i, j, ki, kj = j, i, kj, ki
            heapq.heappush(heap, (-ov, ki, kj, i, j, version[i], version[j]))

    for n, i in enumerate(ids):
        for j in ids[n + 1 :]:
            push(i, j)

    def touch(i: int) -> None:
        version[i] += 1
        for j in ids:
            if j != i and j in active:
                push(i, j)

    def drop(i: int) -> None:
        active.discard(i)
        version[i] += 1

    while heap:
        _, _, _, i, j, vi, vj = heapq.heappop(heap)
        if i not in active or j not in active or version[i] != vi or version[j] != vj:
            continue
        a, b = by_id[i], by_id[j]
        fig_a, fig_b = a.category in FIGURE_CATEGORIES, b.category in FIGURE_CATEGORIES
        if fig_a != fig_b:
            fig = i if fig_a else j
            rects[fig] = original[fig]
            deferred.append(fig)
            drop(fig)
            continue
        try:
            new_a, new_b = shrink_to_avoid(
                rects[i],
                rects[j],
                containment_threshold=cfg.containment_threshold,
                min_keep_ratio=cfg.min_keep_ratio,
            )
        except UnresolvableOverlapError:
            pass
        else:
            rects[i], rects[j] = new_a, new_b
            touch(i)
            touch(j)
            continue

        # fallback: clip the weaker block
        loser, winner = sorted(
            (i, j), key=lambda k: (by_id[k].score, area(rects[k]), -k)
        )
        clipped: Rect | None = rects[loser]
        span_hull = _span_hull(by_id[loser])
        if span_hull is not None and not fig_a:
            clipped = intersect(clipped, span_hull) or clipped
        if overlap_area(clipped, rects[winner]) > 0:
            clipped = largest_free_part(clipped, rects[winner])
        if clipped is not None:
            rects[loser] = clipped
            touch(loser)
        elif fig_a:
            rects[loser] = original[loser]
            deferred.append(loser)
            drop(loser)
        else:
            removed.append((loser, ABSORBED_BY_OVERLAP))
            hosts[loser] = winner
            if by_id[winner].category in TEXT_LIKE_CATEGORIES:
                moved = list(by_id[loser].lines) + extra_lines.pop(loser, [])
                extra_lines.setdefault(winner, []).extend(moved)
            drop(loser)

    # absorbed spans may land in a block that is itself absorbed later
    for loser, _ in removed:
        winner = hosts[loser]
        while winner not in active and winner in hosts:
            winner = hosts[winner]
        hosts[loser] = winner

    report = ResolutionReport(removed=removed, deferred=deferred, hosts=hosts)
    out = []
    removed_ids = {i for i, _ in removed}
    for b in blocks:
        i = b.block_id
        if i in removed_ids:
            continue
        if i not in deferred and rects[i] != original[i]:
            report.shrunk.append((i, original[i], rects[i]))
        lines = b.lines + tuple(extra_lines.get(i, ()))
        out.append(replace(b, rect=rects[i], lines=lines))
    return out, report


def postprocess_page(
    blocks: list[Block], config: EngineConfig | None = None
) -> tuple[list[Block], list[Block], ResolutionReport]:
    """Run all three passes. Returns (kept blocks, discarded blocks, report);
    deferred blocks stay in the kept list and are named in the report."""
    kept, dropped = filter_discard(blocks)
    report = ResolutionReport(removed=[(b.block_id, DISCARD_CATEGORY) for b in dropped])
    kept, contained = remove_contained(kept, config)
    report.extend(contained)
    kept, overlaps = resolve_overlaps(kept, config)
    report.extend(overlaps)
    return kept, dropped, report
