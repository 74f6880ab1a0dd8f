"""End-to-end processing of a :class:`DocumentBundle`."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field, replace

from . import __version__
from .assembly import (
    assemble_lines,
    attach_satellites,
    block_text,
    in_hole,
    mask_formulas,
    merge_paragraphs,
)
from .config import EngineConfig
from .emit import build_intermediate, markup_balanced
from .geometry import area, containment_ratio, overlap_area
from .ingest import Detection, DocumentBundle, PageDigest, TextSpan, extract_meta
from .layout import CONTAINED_IN_FORMULA, ResolutionReport, postprocess_page
from .model import (
    TEXT_LIKE_CATEGORIES,
    Block,
    BlockCategory,
    DocMeta,
    IntermediateDoc,
    LangType,
    Line,
    ParseType,
    Span,
    SpanKind,
)
from .ordering import RegionNode, order_page

logger = logging.getLogger(__name__)

VERSION_ENV = "EXTRACT_VERSION_NAME"

# inline formulas may sit in any running-text block except a bare label
_FORMULA_HOSTS = TEXT_LIKE_CATEGORIES - {BlockCategory.EQUATION_LABEL}


def engine_version() -> str:
    return os.environ.get(VERSION_ENV) or __version__


@dataclass
class PageResult:
    blocks: list[Block]
    discarded: list[Block]
    report: ResolutionReport
    tree: RegionNode


@dataclass
class ExtractionResult:
    doc: IntermediateDoc
    meta: DocMeta
    pages: list[PageResult] = field(default_factory=list)

    def debug_dict(self) -> dict:
        return {
            "source_id": self.doc.source_id,
            "pages": [
                {"page_idx": n, "regions": p.tree.to_dict(), "resolution": p.report.to_dict()}
                for n, p in enumerate(self.pages)
            ],
        }


def _table_markup(content, table_format: str) -> str:
    if content is None:
        return ""
    if isinstance(content, str):
        markup, fmt = content, ("html" if content.lstrip().startswith("<") else "latex")
    else:
        fmt = table_format if table_format in content else next(iter(sorted(content)), table_format)
        markup = content.get(fmt, "")
    if markup and not markup_balanced(markup, fmt):
        logger.warning("table markup is not well formed (%s); passing through", fmt)
    return markup


def _best_host(rect, blocks: list[Block], min_ratio: float) -> Block | None:
    best, best_ratio = None, 0.0
    for b in blocks:
        if area(rect) > 0:
            ratio = containment_ratio(rect, b.rect)
        else:
            ratio = 1.0 if b.rect.contains_point(*rect.center) else 0.0
        if ratio >= min_ratio and ratio > best_ratio:
            best, best_ratio = b, ratio
    return best


def build_page_blocks(
    page: PageDigest,
    parse_type: ParseType,
    config: EngineConfig | None = None,
    table_format: str = "html",
) -> list[Block]:
    """Turn a page's detections and text spans into categorized blocks.

    Every detection keeps its list position as block id. Text spans go to
    the text block holding most of them; inline formulas become spans of
    the text block they sit in (or a block of their own when they sit in
    none). Spans start out one per line; lines are assembled later.
    """
    cfg = config or EngineConfig()
    if parse_type is ParseType.OCR and page.ocr_spans is not None:
        source: tuple[TextSpan, ...] = page.ocr_spans
    else:
        if parse_type is ParseType.OCR and page.native_spans:
            logger.warning("page %d: no OCR spans supplied, using native text", page.page_index)
        source = page.native_spans

    blocks: dict[int, Block] = {}
    inline: list[tuple[int, Detection]] = []
    for idx, det in enumerate(page.detections):
        if det.label == SpanKind.INLINE_EQUATION.value:
            inline.append((idx, det))
            continue
        if area(det.rect) == 0:
            logger.debug("page %d: dropping zero-area %s detection", page.page_index, det.label)
            continue
        cat = BlockCategory(det.label)
        lines: tuple[Line, ...] = ()
        if cat is BlockCategory.IMAGE:
            lines = (Line((Span(det.rect, SpanKind.IMAGE, f"p{page.page_index}_b{idx}", det.score),)),)
        elif cat is BlockCategory.TABLE:
            markup = _table_markup(det.content, table_format)
            lines = (Line((Span(det.rect, SpanKind.TABLE, markup, det.score),)),)
        elif cat is BlockCategory.INTERLINE_EQUATION and isinstance(det.content, str):
            lines = (Line((Span(det.rect, SpanKind.INTERLINE_EQUATION, det.content, det.score),)),)
        blocks[idx] = Block(idx, cat, det.rect, lines, score=det.score, page_index=page.page_index)

    extra: dict[int, list[Span]] = {i: [] for i in blocks}
    hosts = [b for b in blocks.values() if b.category in _FORMULA_HOSTS]
    for idx, det in inline:
        if not isinstance(det.content, str) or not det.content.strip():
            logger.debug("page %d: inline formula %d has no recognition output", page.page_index, idx)
            continue
        span = Span(det.rect, SpanKind.INLINE_EQUATION, det.content, det.score)
        host = _best_host(det.rect, hosts, cfg.span_assign_ratio)
        if host is None:
            if area(det.rect) == 0:
                continue
            blocks[idx] = Block(
                idx, BlockCategory.TEXT, det.rect, score=det.score, page_index=page.page_index
            )
            extra[idx] = [span]
        else:
            extra[host.block_id].append(span)

    text_hosts = [b for b in blocks.values() if b.category in TEXT_LIKE_CATEGORIES]
    equations = [
        b for b in blocks.values() if b.category is BlockCategory.INTERLINE_EQUATION and not b.lines
    ]
    for ts in source:
        if not ts.text.strip():
            continue
        span = Span(ts.rect, SpanKind.TEXT, ts.text)
        host = _best_host(ts.rect, text_hosts + equations, cfg.span_assign_ratio)
        if host is not None:
            extra[host.block_id].append(span)

    out = []
    for idx in sorted(blocks):
        b = blocks[idx]
        spans = extra[idx]
        if b.category is BlockCategory.INTERLINE_EQUATION and not b.lines:
            # no recognition output: fall back to whatever text lies inside
            inside = sorted(spans, key=lambda s: (s.rect.y0, s.rect.x0))
            content = " ".join(s.content.strip() for s in inside)
            if content:
                b = replace(b, lines=(Line((Span(b.rect, SpanKind.INTERLINE_EQUATION, content, b.score),)),))
        elif b.category in TEXT_LIKE_CATEGORIES:
            det = page.detections[idx]
            # recognized text attached to the detection itself
            has_text = any(s.kind is SpanKind.TEXT for s in spans)
            if not has_text and det.label == b.category.value and isinstance(det.content, str):
                if det.content.strip():
                    spans = spans + [Span(b.rect, SpanKind.TEXT, det.content, det.score)]
            b = replace(b, lines=tuple(Line((s,)) for s in spans))
        out.append(b)
    return out


def _rehome_spans(blocks: list[Block], deferred: set[int]) -> list[Block]:
    """Move spans that no longer touch their (shrunk) block to the text
    block they overlap most; spans touching no text block are dropped."""
    text_blocks = [b for b in blocks if b.category in TEXT_LIKE_CATEGORIES and b.block_id not in deferred]
    keep: dict[int, list[Span]] = {b.block_id: [] for b in text_blocks}
    for b in text_blocks:
        for s in b.spans:
            if overlap_area(s.rect, b.rect) > 0 or (area(s.rect) == 0 and b.rect.contains_point(*s.rect.center)):
                keep[b.block_id].append(s)
                continue
            target = max(text_blocks, key=lambda t: (overlap_area(s.rect, t.rect), -t.block_id))
            if overlap_area(s.rect, target.rect) > 0:
                keep[target.block_id].append(s)
            else:
                logger.debug("dropping span %r outside every text block", s.content[:20])
    return [
        replace(b, lines=tuple(Line((s,)) for s in keep[b.block_id])) if b.block_id in keep else b
        for b in blocks
    ]


def assemble_block(block: Block, config: EngineConfig | None = None) -> Block:
    """Mask inline formulas, drop text recognized inside them, and group the
    rest into lines with the formulas reinserted."""
    if block.category not in TEXT_LIKE_CATEGORIES:
        return block
    cfg = config or EngineConfig()
    spans = list(block.spans)
    formulas = [s for s in spans if s.kind is SpanKind.INLINE_EQUATION]
    masked = mask_formulas(block, formulas)
    texts = [s for s in spans if s.kind is SpanKind.TEXT and not in_hole(s, masked)]
    lines = assemble_lines(texts, formulas, cfg.line_merge_factor)
    return replace(block, lines=tuple(lines))


def process_page(
    page: PageDigest,
    parse_type: ParseType,
    config: EngineConfig | None = None,
    table_format: str = "html",
    language: LangType | None = None,
) -> PageResult:
    cfg = config or EngineConfig()
    raw = build_page_blocks(page, parse_type, cfg, table_format)
    kept, dropped, report = postprocess_page(raw, cfg)

    # equation labels swallowed by their equation become its tag
    by_id = {b.block_id: b for b in raw}
    tags: dict[int, str] = {}
    for bid, reason in report.removed:
        if reason == CONTAINED_IN_FORMULA and by_id[bid].category is BlockCategory.EQUATION_LABEL:
            text = block_text(assemble_block(by_id[bid], cfg))
            host = report.hosts[bid]
            if text and host not in tags:
                tags[host] = text
    kept = [replace(b, label=tags[b.block_id]) if b.block_id in tags else b for b in kept]

    deferred_ids = set(report.deferred)
    kept = _rehome_spans(kept, deferred_ids)
    kept = [assemble_block(b, cfg) for b in kept]
    active = [b for b in kept if b.block_id not in deferred_ids]
    deferred = [b for b in kept if b.block_id in deferred_ids]
    ordered, tree = order_page(active, deferred, page.width, page.height, cfg, language)
    ordered = attach_satellites(ordered, cfg)
    dropped = [assemble_block(b, cfg) for b in dropped]
    return PageResult(ordered, dropped, report, tree)


def extract_document(
    bundle: DocumentBundle,
    config: EngineConfig | None = None,
    *,
    table_format: str = "html",
    mode: str = "auto",
    language: LangType | None = None,
    version: str | None = None,
) -> ExtractionResult:
    """Run the full pipeline on one bundle.

    ``mode`` is ``"auto"``, ``"txt"`` or ``"ocr"``; anything but auto
    overrides the parseability classifier. ``language`` overrides language
    detection.
    """
    cfg = config or EngineConfig()
    meta = extract_meta(bundle, cfg)
    if mode != "auto":
        meta = replace(meta, parse_type=ParseType(mode))
    if language is not None:
        meta = replace(meta, language=language)

    pages = [process_page(p, meta.parse_type, cfg, table_format, meta.language) for p in bundle.pages]

    flat = [b for p in pages for b in p.blocks]
    merged = merge_paragraphs(flat, cfg.merge_across_pages, meta.language)
    per_page: list[list[Block]] = [[] for _ in pages]
    for b in merged:
        per_page[b.page_index].append(b)

    doc = build_intermediate(
        meta,
        per_page,
        version or engine_version(),
        bundle.source_id,
        discarded=[p.discarded for p in pages],
    )
    return ExtractionResult(doc, meta, pages)
