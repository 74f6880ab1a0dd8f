"""Shared value types for the extraction engine.

Coordinates are page points with the origin at the top-left corner and y
growing downward, so "top to bottom" is ascending ``y0``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator


class BlockCategory(str, Enum):
    TITLE = "title"
    TEXT = "text"
    IMAGE = "image"
    IMAGE_CAPTION = "image_caption"
    TABLE = "table"
    TABLE_CAPTION = "table_caption"
    TABLE_FOOTNOTE = "table_footnote"
    INTERLINE_EQUATION = "interline_equation"
    EQUATION_LABEL = "equation_label"
    HEADER = "header"
    FOOTER = "footer"
    PAGE_NUMBER = "page_number"
    PAGE_NOTE = "page_note"


class SpanKind(str, Enum):
    TEXT = "text"
    INLINE_EQUATION = "inline_equation"
    INTERLINE_EQUATION = "interline_equation"
    IMAGE = "image"
    TABLE = "table"


class ParseType(str, Enum):
    TXT = "txt"
    OCR = "ocr"


class LangType(str, Enum):
    ZH = "zh"
    EN = "en"
    UNKNOWN = "unknown"


DISCARD_CATEGORIES = frozenset(
    {
        BlockCategory.HEADER,
        BlockCategory.FOOTER,
        BlockCategory.PAGE_NUMBER,
        BlockCategory.PAGE_NOTE,
    }
)

#: Blocks that carry running text assembled from spans.
TEXT_LIKE_CATEGORIES = frozenset(
    {
        BlockCategory.TITLE,
        BlockCategory.TEXT,
        BlockCategory.IMAGE_CAPTION,
        BlockCategory.TABLE_CAPTION,
        BlockCategory.TABLE_FOOTNOTE,
        BlockCategory.EQUATION_LABEL,
    }
)

FIGURE_CATEGORIES = frozenset({BlockCategory.IMAGE, BlockCategory.TABLE})

#: satellite category -> host category
SATELLITE_HOSTS = {
    BlockCategory.IMAGE_CAPTION: BlockCategory.IMAGE,
    BlockCategory.TABLE_CAPTION: BlockCategory.TABLE,
    BlockCategory.TABLE_FOOTNOTE: BlockCategory.TABLE,
    BlockCategory.EQUATION_LABEL: BlockCategory.INTERLINE_EQUATION,
}


def is_discard(category: BlockCategory) -> bool:
    """Return True for headers, footers, page numbers and page notes."""
    return category in DISCARD_CATEGORIES


@dataclass(frozen=True)
class Rect:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        coords = tuple(float(c) for c in (self.x0, self.y0, self.x1, self.y1))
        for name, c in zip(("x0", "y0", "x1", "y1"), coords):
            object.__setattr__(self, name, c)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"non-finite rect coordinates: {coords}")
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValueError(f"inverted rect: {coords}")

    @classmethod
    def from_list(cls, values) -> Rect:
        x0, y0, x1, y1 = (float(v) for v in values)
        return cls(x0, y0, x1, y1)

    def to_list(self) -> list[float]:
        return [self.x0, self.y0, self.x1, self.y1]

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2)

    def clamp(self, width: float, height: float) -> Rect:
        def c(v: float, hi: float) -> float:
            return min(max(v, 0.0), hi)

        return Rect(c(self.x0, width), c(self.y0, height), c(self.x1, width), c(self.y1, height))

    def contains_point(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1


def hull(rects) -> Rect | None:
    """Smallest rect covering all of ``rects`` (None for an empty input)."""
    rects = list(rects)
    if not rects:
        return None
    return Rect(
        min(r.x0 for r in rects),
        min(r.y0 for r in rects),
        max(r.x1 for r in rects),
        max(r.y1 for r in rects),
    )


_ASSET_REF = re.compile(r"^[\w.\-/:]+$")


@dataclass(frozen=True)
class Span:
    rect: Rect
    kind: SpanKind
    content: str
    score: float = 1.0


@dataclass(frozen=True)
class Line:
    spans: tuple[Span, ...]

    @property
    def rect(self) -> Rect:
        return hull(s.rect for s in self.spans)


@dataclass(frozen=True)
class Block:
    """A categorized page region.

    ``merged_blocks`` holds paragraph continuations (possibly from later
    pages) folded into this block; each keeps its own page and geometry.
    ``host_id`` links a caption, footnote or equation label to its host,
    and ``label`` carries an equation tag absorbed from a contained label.
    """

    block_id: int
    category: BlockCategory
    rect: Rect
    lines: tuple[Line, ...] = ()
    order_index: int | None = None
    score: float = 1.0
    page_index: int = 0
    host_id: int | None = None
    label: str | None = None
    merged_blocks: tuple[Block, ...] = ()

    @property
    def spans(self) -> Iterator[Span]:
        for line in self.lines:
            yield from line.spans

    def all_lines(self) -> list[Line]:
        lines = list(self.lines)
        for tail in self.merged_blocks:
            lines.extend(tail.all_lines())
        return lines


@dataclass(frozen=True)
class DocMeta:
    page_count: int
    page_dims: tuple[tuple[float, float], ...]
    language: LangType
    parse_type: ParseType
    garbled: bool

    def __post_init__(self) -> None:
        if self.page_count < 1:
            raise ValueError("page_count must be >= 1")
        if len(self.page_dims) != self.page_count:
            raise ValueError("page_dims length must equal page_count")
        if any(w <= 0 or h <= 0 for w, h in self.page_dims):
            raise ValueError("page dimensions must be positive")


@dataclass(frozen=True)
class PageInfo:
    page_idx: int
    page_size: tuple[float, float]
    para_blocks: tuple[Block, ...] = ()
    discarded_blocks: tuple[Block, ...] = ()


@dataclass(frozen=True)
class IntermediateDoc:
    pdf_info: tuple[PageInfo, ...]
    parse_type: ParseType
    version_name: str
    source_id: str = ""

    def iter_blocks(self) -> Iterator[Block]:
        for page in self.pdf_info:
            yield from page.para_blocks


# validate_block descriptors
SPAN_OUTSIDE_BLOCK = "span-outside-block"
LINE_UNSORTED = "line-unsorted"
SPAN_EMPTY_CONTENT = "span-empty-content"
SPAN_BAD_SCORE = "span-score-out-of-range"
ASSET_REF_MALFORMED = "asset-ref-malformed"


def _span_meets(span: Rect, block: Rect) -> bool:
    ix = min(span.x1, block.x1) - max(span.x0, block.x0)
    iy = min(span.y1, block.y1) - max(span.y0, block.y0)
    if ix > 0 and iy > 0:
        return True
    # degenerate spans only need to lie on the block
    degenerate = span.width == 0 or span.height == 0
    return degenerate and ix >= 0 and iy >= 0


def validate_block(block: Block) -> list[str]:
    """Return one descriptor per violated block invariant; empty when valid.

    Merged continuation blocks are checked against their own rects.
    """
    found: set[str] = set()
    for b in (block, *block.merged_blocks):
        for line in b.lines:
            xs = [s.rect.x0 for s in line.spans]
            if xs != sorted(xs):
                found.add(LINE_UNSORTED)
            for span in line.spans:
                if not _span_meets(span.rect, b.rect):
                    found.add(SPAN_OUTSIDE_BLOCK)
                if not 0.0 <= span.score <= 1.0:
                    found.add(SPAN_BAD_SCORE)
                if span.kind in (SpanKind.TEXT, SpanKind.INLINE_EQUATION, SpanKind.INTERLINE_EQUATION):
                    if not span.content:
                        found.add(SPAN_EMPTY_CONTENT)
                elif span.kind is SpanKind.IMAGE and not _ASSET_REF.match(span.content):
                    found.add(ASSET_REF_MALFORMED)
    order = [SPAN_OUTSIDE_BLOCK, LINE_UNSORTED, SPAN_EMPTY_CONTENT, SPAN_BAD_SCORE, ASSET_REF_MALFORMED]
    return [d for d in order if d in found]
