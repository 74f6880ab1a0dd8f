from __future__ import annotations

from docextract.model import Block, BlockCategory, Line, Rect, Span, SpanKind


def R(x0, y0, x1, y1) -> Rect:
    return Rect(float(x0), float(y0), float(x1), float(y1))


def span(x0, y0, x1, y1, content="x", kind=SpanKind.TEXT, score=1.0) -> Span:
    return Span(R(x0, y0, x1, y1), kind, content, score)


def block(bid, cat, x0, y0, x1, y1, *, score=1.0, page=0, lines=(), text=None) -> Block:
    if isinstance(cat, str):
        cat = BlockCategory(cat)
    if text is not None:
        lines = (Line((span(x0, y0, x1, y1, text),)),)
    return Block(bid, cat, R(x0, y0, x1, y1), tuple(lines), score=score, page_index=page)


def page(index=0, width=595.0, height=842.0, native=(), images=(), detections=(), **extra) -> dict:
    d = {
        "page_index": index,
        "width": width,
        "height": height,
        "native_spans": [{"bbox": list(b), "text": t} for b, t in native],
        "image_regions": [list(r) for r in images],
        "detections": [
            {"bbox": list(b), "label": lab, "score": sc, **({"content": c} if c is not None else {})}
            for b, lab, sc, *rest in detections
            for c in [rest[0] if rest else None]
        ],
    }
    d.update(extra)
    return d


def bundle(pages, source_id="doc", encrypted=False, hint=None) -> dict:
    d = {"source_id": source_id, "declared_encrypted": encrypted, "pages": list(pages)}
    if hint is not None:
        d["declared_language_hint"] = hint
    return d


FUZZ_CATEGORIES = (
    "title", "text", "text", "text", "image", "table", "image_caption", "table_caption",
    "interline_equation", "header", "footer", "page_number",
)


def random_page_blocks(rng, n, width=595.0, height=842.0) -> list[Block]:
    """Random, heavily overlapping detections with one text span each."""
    out = []
    for k in range(n):
        w = rng.uniform(10, width * 0.6)
        h = rng.uniform(8, height * 0.25)
        x0 = rng.uniform(0, width - w)
        y0 = rng.uniform(0, height - h)
        cat = BlockCategory(rng.choice(FUZZ_CATEGORIES))
        x0, y0 = round(x0, 1), round(y0, 1)
        x1, y1 = round(x0 + w, 1), round(y0 + h, 1)
        lines = (Line((span(x0, y0, x1, y1, f"t{k}"),)),) if cat not in (BlockCategory.IMAGE, BlockCategory.TABLE) else ()
        out.append(Block(k, cat, R(x0, y0, x1, y1), lines, score=round(rng.random(), 3)))
    return out
