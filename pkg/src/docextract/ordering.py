"""Page segmentation into single-column regions and reading-order assignment.

Segmentation is a recursive XY-cut. At each level the region is first
split into horizontal bands at full-width whitespace gaps; consecutive
bands that share a common vertical gutter are regrouped so that a column
layout is not sliced into rows. If regrouping leaves a single group, the
region is split into columns at full-height whitespace gaps instead.
Leaves (no further split) are single-column regions.
"""

from __future__ import annotations

import logging
from bisect import bisect_right
from dataclasses import dataclass, field, replace

from .config import EngineConfig
from .geometry import overlap_area, rect_distance
from .model import Block, LangType, Rect, hull

logger = logging.getLogger(__name__)

Interval = tuple[float, float]


@dataclass(frozen=True)
class PageRegion:
    rect: Rect
    member_block_ids: tuple[int, ...]
    path: tuple[int, ...] = ()
    column_count: int = 1


@dataclass
class RegionNode:
    """Cut tree for diagnostics. ``cut`` is "h" (rows), "v" (columns) or
    None for a leaf; ``cuts`` are the split coordinates."""

    rect: Rect
    cut: str | None = None
    cuts: list[float] = field(default_factory=list)
    children: list[RegionNode] = field(default_factory=list)
    members: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        out: dict = {"rect": self.rect.to_list()}
        if self.cut is None:
            out["members"] = list(self.members)
        else:
            out["cut"] = self.cut
            out["cuts"] = list(self.cuts)
            out["children"] = [c.to_dict() for c in self.children]
        return out


def _clusters(blocks: list[Block], axis: int, gap: float) -> tuple[list[list[Block]], list[float]]:
    """Group blocks into runs along ``axis`` (0 = x, 1 = y) separated by
    whitespace of at least ``gap``. Returns groups and cut positions."""
    lo = (lambda b: b.rect.x0) if axis == 0 else (lambda b: b.rect.y0)
    hi = (lambda b: b.rect.x1) if axis == 0 else (lambda b: b.rect.y1)
    ordered = sorted(blocks, key=lambda b: (lo(b), hi(b), b.block_id))
    groups: list[list[Block]] = []
    cuts: list[float] = []
    end = None
    for b in ordered:
        if end is None or lo(b) - end < gap:
            if end is None:
                groups.append([])
            groups[-1].append(b)
            end = hi(b) if end is None else max(end, hi(b))
        else:
            cuts.append((end + lo(b)) / 2)
            groups.append([b])
            end = hi(b)
    return groups, cuts


def _free_intervals(blocks: list[Block], x0: float, x1: float) -> list[Interval]:
    spans = sorted((b.rect.x0, b.rect.x1) for b in blocks)
    free, cursor = [], x0
    for s, e in spans:
        if s > cursor:
            free.append((cursor, s))
        cursor = max(cursor, e)
    if cursor < x1:
        free.append((cursor, x1))
    return free


def _intersect_intervals(a: list[Interval], b: list[Interval], min_width: float) -> list[Interval]:
    out = []
    for s1, e1 in a:
        for s2, e2 in b:
            s, e = max(s1, s2), min(e1, e2)
            if e - s >= min_width:
                out.append((s, e))
    return out


def _group_bands(bands: list[list[Block]], x0: float, x1: float, gap_x: float) -> list[list[Block]]:
    groups: list[list[Block]] = []
    common: list[Interval] = []
    for band in bands:
        free = [iv for iv in _free_intervals(band, x0, x1) if iv[1] - iv[0] >= gap_x]
        shared = _intersect_intervals(common, free, gap_x) if groups else []
        if groups and shared:
            groups[-1].extend(band)
            common = shared
        else:
            groups.append(list(band))
            common = free
    return groups


def _segment(blocks: list[Block], cfg: EngineConfig, path: tuple[int, ...], out: list[PageRegion]) -> RegionNode:
    rect = hull(b.rect for b in blocks)
    node = RegionNode(rect)

    def split(kind: str, groups: list[list[Block]], cuts: list[float]) -> RegionNode:
        node.cut, node.cuts = kind, cuts
        for n, g in enumerate(groups):
            node.children.append(_segment(g, cfg, path + (n,), out))
        return node

    if len(blocks) > 1:
        bands, h_cuts = _clusters(blocks, 1, cfg.gap_y)
        if len(bands) > 1:
            groups = _group_bands(bands, rect.x0, rect.x1, cfg.gap_x)
            if len(groups) > 1:
                cuts = [min(b.rect.y0 for b in g) for g in groups[1:]]
                return split("h", groups, cuts)
        columns, v_cuts = _clusters(blocks, 0, cfg.gap_x)
        if len(columns) > 1:
            return split("v", columns, v_cuts)
        if len(bands) > 1:
            return split("h", bands, h_cuts)

    members = sorted(blocks, key=lambda b: (b.rect.y0, b.rect.x0, b.block_id))
    node.members = [b.block_id for b in members]
    out.append(PageRegion(rect, tuple(node.members), path))
    return node


def segment_page(
    blocks: list[Block],
    page_w: float,
    page_h: float,
    config: EngineConfig | None = None,
) -> tuple[list[PageRegion], RegionNode]:
    """Split a page's (overlap-free, non-deferred) blocks into regions that
    each hold at most one column. Returns the regions in reading order and
    the cut tree rooted at the page rect."""
    cfg = config or EngineConfig()
    page = Rect(0.0, 0.0, page_w, page_h)
    if not blocks:
        return [], RegionNode(page)
    regions: list[PageRegion] = []
    root = _segment(list(blocks), cfg, (), regions)
    return regions, RegionNode(page, "root", [], [root])


def order_regions(regions: list[PageRegion]) -> list[PageRegion]:
    """Depth-first order of the cut tree: rows top to bottom, columns left
    to right."""
    return sorted(regions, key=lambda r: r.path)


def _home_region(rect: Rect, regions: list[PageRegion]) -> int:
    best, best_key = 0, None
    for n, reg in enumerate(regions):
        key = (-overlap_area(rect, reg.rect), rect_distance(rect, reg.rect), n)
        if best_key is None or key < best_key:
            best, best_key = n, key
    return best


def assign_order(
    blocks: list[Block],
    regions: list[PageRegion],
    deferred: list[Block] = (),
) -> list[Block]:
    """Number blocks 0..n-1 by region order, then (y0, x0) within a region.

    Deferred figures are slotted into the region they overlap most, just
    before the first member whose top edge lies below theirs.
    """
    by_id = {b.block_id: b for b in blocks}
    regions = order_regions(regions)
    slots: list[list[Block]] = [[by_id[i] for i in r.member_block_ids] for r in regions]

    if not regions:
        seq = sorted(deferred, key=lambda b: (b.rect.y0, b.rect.x0, b.block_id))
    else:
        inserts: list[list[tuple[int, Block]]] = [[] for _ in regions]
        for d in sorted(deferred, key=lambda b: (b.rect.y0, b.rect.x0, b.block_id)):
            n = _home_region(d.rect, regions)
            ys = [m.rect.y0 for m in slots[n]]
            inserts[n].append((bisect_right(ys, d.rect.y0), d))
        seq = []
        for members, extra in zip(slots, inserts):
            merged: list[Block] = []
            pending = list(extra)
            for k, m in enumerate(members):
                while pending and pending[0][0] <= k:
                    merged.append(pending.pop(0)[1])
                merged.append(m)
            merged.extend(d for _, d in pending)
            seq.extend(merged)
    return [replace(b, order_index=k) for k, b in enumerate(seq)]


def looks_vertical(blocks: list[Block]) -> bool:
    """Heuristic for vertical-script pages: most text blocks are tall and narrow."""
    tall = [b for b in blocks if b.rect.height > 3 * b.rect.width]
    return len(blocks) >= 3 and len(tall) * 2 > len(blocks)


def order_page(
    blocks: list[Block],
    deferred: list[Block],
    page_w: float,
    page_h: float,
    config: EngineConfig | None = None,
    language: LangType | None = None,
) -> tuple[list[Block], RegionNode]:
    if language is LangType.UNKNOWN and looks_vertical(blocks):
        logger.warning("page looks vertically typeset; column ordering assumes horizontal text")
    regions, tree = segment_page(blocks, page_w, page_h, config)
    return assign_order(blocks, regions, deferred), tree
