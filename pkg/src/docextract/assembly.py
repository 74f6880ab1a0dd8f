"""Block content: formula masking, line assembly, paragraph merging and
caption/label attachment."""

from __future__ import annotations

import logging
import statistics
import unicodedata
from dataclasses import dataclass, replace

from .config import EngineConfig
from .geometry import intersect, rect_distance
from .ingest import is_cjk_ideograph
from .model import (
    SATELLITE_HOSTS,
    Block,
    BlockCategory,
    LangType,
    Line,
    Rect,
    Span,
    SpanKind,
)

logger = logging.getLogger(__name__)

TERMINAL_PUNCTUATION = frozenset(".。!！?？:：")
HYPHENS = frozenset("-‐­")
_FORMULA_KINDS = (SpanKind.INLINE_EQUATION, SpanKind.INTERLINE_EQUATION)


@dataclass(frozen=True)
class MaskedRegion:
    parent_block_id: int
    holes: tuple[Rect, ...]
    remnants: tuple[Rect, ...]


def _merge_intervals(intervals):
    out: list[list[float]] = []
    for s, e in sorted(intervals):
        if out and s <= out[-1][1]:
            out[-1][1] = max(out[-1][1], e)
        else:
            out.append([s, e])
    return out


def mask_formulas(block: Block, formulas: list[Span]) -> MaskedRegion:
    """Cut inline-formula areas out of a text block.

    The remainder is decomposed into rectangles by horizontal bands: the
    block is sliced at every hole's top and bottom edge and, inside each
    slice, the x-ranges not covered by a hole become remnants.
    """
    r = block.rect
    holes = tuple(h for h in (intersect(f.rect, r) for f in formulas) if h is not None)
    if not holes:
        return MaskedRegion(block.block_id, (), (r,))
    ys = sorted({r.y0, r.y1} | {h.y0 for h in holes} | {h.y1 for h in holes})
    remnants = []
    for ya, yb in zip(ys, ys[1:]):
        covered = _merge_intervals((h.x0, h.x1) for h in holes if h.y0 <= ya and h.y1 >= yb)
        cursor = r.x0
        for s, e in covered:
            if s > cursor:
                remnants.append(Rect(cursor, ya, s, yb))
            cursor = max(cursor, e)
        if cursor < r.x1:
            remnants.append(Rect(cursor, ya, r.x1, yb))
    return MaskedRegion(block.block_id, holes, tuple(remnants))


def in_hole(span: Span, masked: MaskedRegion) -> bool:
    cx, cy = span.rect.center
    return any(h.x0 < cx < h.x1 and h.y0 < cy < h.y1 for h in masked.holes)


def assemble_lines(
    text_spans: list[Span],
    formula_spans: list[Span] = (),
    factor: float = 0.5,
) -> list[Line]:
    """Group spans into lines by vertical center and sort each line by x0.

    A span joins the current line when its vertical center is within
    ``factor`` times the median span height of the line's mean center.
    """
    spans = list(text_spans) + list(formula_spans)
    if not spans:
        return []
    threshold = factor * statistics.median(s.rect.height for s in spans)
    ordered = sorted(spans, key=lambda s: (s.rect.center[1], s.rect.x0))
    groups: list[list[Span]] = []
    centers: list[float] = []
    for s in ordered:
        cy = s.rect.center[1]
        if groups:
            mean = sum(centers) / len(centers)
            if abs(cy - mean) <= threshold:
                groups[-1].append(s)
                centers.append(cy)
                continue
        groups.append([s])
        centers = [cy]
    return [Line(tuple(sorted(g, key=lambda s: (s.rect.x0, s.rect.y0)))) for g in groups]


# --- text rendering -------------------------------------------------------


def is_cjk(ch: str) -> bool:
    if is_cjk_ideograph(ch):
        return True
    cp = ord(ch)
    return 0x3000 <= cp <= 0x303F or 0xFF00 <= cp <= 0xFFEF or 0x3040 <= cp <= 0x30FF


def join_text(left: str, right: str, dehyphenate: bool = True) -> str:
    """Join two fragments: drop a line-end hyphen before a lowercase word,
    add no space next to CJK text or existing whitespace, else one space."""
    if not left:
        return right
    if not right:
        return left
    lch, rch = left[-1], right[0]
    if dehyphenate and lch in HYPHENS and rch.islower():
        return left[:-1] + right
    if lch.isspace() or rch.isspace() or is_cjk(lch) or is_cjk(rch):
        return left + right
    return left + " " + right


def span_text(span: Span) -> str:
    if span.kind is SpanKind.INLINE_EQUATION:
        return f"${span.content.strip()}$"
    return span.content


def line_text(line: Line) -> str:
    out = ""
    for span in line.spans:
        out = join_text(out, span_text(span), dehyphenate=False)
    return out.strip()


def lines_text(lines) -> str:
    out = ""
    for line in lines:
        out = join_text(out, line_text(line))
    return out


def block_text(block: Block) -> str:
    """Plain text of a text-like block, including merged continuations."""
    return lines_text(block.all_lines())


# --- paragraph merging ----------------------------------------------------


def ends_open(text: str) -> bool:
    t = text.rstrip()
    if not t:
        return False
    return t[-1] in HYPHENS or t[-1] not in TERMINAL_PUNCTUATION


def starts_continuation(text: str, language: LangType | None = None) -> bool:
    t = text.lstrip()
    if not t:
        return False
    ch = t[0]
    if "a" <= ch <= "z" or (ch.islower() and "LATIN" in unicodedata.name(ch, "")):
        return True
    if language is LangType.ZH and is_cjk(ch):
        return unicodedata.category(ch) not in ("Ps", "Pi")
    return False


def should_merge(a: Block, b: Block, language: LangType | None = None) -> bool:
    if a.category is not BlockCategory.TEXT or b.category is not BlockCategory.TEXT:
        return False
    a_lines, b_lines = a.all_lines(), b.all_lines()
    if not a_lines or not b_lines:
        return False
    return ends_open(line_text(a_lines[-1])) and starts_continuation(line_text(b_lines[0]), language)


def merge_paragraphs(
    ordered_blocks: list[Block],
    across_pages: bool = True,
    language: LangType | None = None,
) -> list[Block]:
    """Fold paragraph continuations into the block they continue.

    Only directly adjacent Text blocks merge, so any other block in between
    (figure, title, table) breaks a paragraph. The continuation is kept
    whole under ``merged_blocks`` of the head block.
    """
    out: list[Block] = []
    for b in ordered_blocks:
        if out:
            head = out[-1]
            last_page = head.merged_blocks[-1].page_index if head.merged_blocks else head.page_index
            same_page = last_page == b.page_index
            if (same_page or across_pages) and should_merge(head, b, language):
                out[-1] = replace(head, merged_blocks=head.merged_blocks + (b,) + b.merged_blocks)
                continue
        out.append(b)
    return out


# --- satellites ------------------------------------------------------------


def median_line_height(blocks: list[Block], default: float = 12.0) -> float:
    heights = [
        line.rect.height
        for b in blocks
        if b.category in (BlockCategory.TEXT, BlockCategory.TITLE)
        for line in b.lines
        if any(s.kind is SpanKind.TEXT for s in line.spans)
    ]
    heights = [h for h in heights if h > 0]
    return statistics.median(heights) if heights else default


def _prefers_host_above(category: BlockCategory) -> bool:
    return category is not BlockCategory.TABLE_CAPTION


def attach_satellites(
    ordered_blocks: list[Block],
    config: EngineConfig | None = None,
    line_height: float | None = None,
) -> list[Block]:
    """Link captions, footnotes and equation labels to their nearest host.

    Hosts are looked up on the satellite's page. Image captions and table
    footnotes prefer a host above them, table captions a host below; the
    preference only breaks distance ties. A satellite with no host within
    ``attach_dist_factor`` median line heights is left unlinked.
    """
    cfg = config or EngineConfig()
    out = list(ordered_blocks)
    pages: dict[int, list[Block]] = {}
    for b in out:
        pages.setdefault(b.page_index, []).append(b)
    limits = {
        p: cfg.attach_dist_factor
        * (line_height if line_height is not None else median_line_height(bs, cfg.default_line_height))
        for p, bs in pages.items()
    }
    for n, sat in enumerate(out):
        host_cat = SATELLITE_HOSTS.get(sat.category)
        if host_cat is None:
            continue
        best, best_key = None, None
        for host in pages[sat.page_index]:
            if host.category is not host_cat:
                continue
            d = rect_distance(sat.rect, host.rect)
            host_above = host.rect.center[1] <= sat.rect.center[1]
            preferred = host_above == _prefers_host_above(sat.category)
            key = (d, not preferred, host.block_id)
            if best_key is None or key < best_key:
                best, best_key = host, key
        if best is not None and best_key[0] <= limits[sat.page_index]:
            out[n] = replace(sat, host_id=best.block_id)
        else:
            logger.info(
                "orphan %s block %d on page %d", sat.category.value, sat.block_id, sat.page_index
            )
            out[n] = replace(sat, host_id=None)
    return out
