"""Intermediate document construction and output formats."""

from __future__ import annotations

import json
import logging
import math
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .assembly import block_text
from .model import (
    FIGURE_CATEGORIES,
    Block,
    BlockCategory,
    DocMeta,
    IntermediateDoc,
    Line,
    PageInfo,
    ParseType,
    Rect,
    Span,
    SpanKind,
    is_discard,
)

logger = logging.getLogger(__name__)

OUTPUT_FORMATS = ("markdown", "structured", "both")
TABLE_FORMATS = ("html", "latex")

IO_FAILURE = "io-failure"
PLACEHOLDER = "placeholder"
WRITTEN = "ok"


@dataclass(frozen=True)
class EmitConfig:
    output_format: str = "markdown"
    dump_intermediate: bool = False
    asset_dir: Path | None = None
    table_format: str = "html"
    debug: bool = False
    #: prefix used for image links in Markdown (asset dir relative to the .md)
    asset_link_base: str = "images"

    def __post_init__(self) -> None:
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"output_format must be one of {OUTPUT_FORMATS}")
        if self.table_format not in TABLE_FORMATS:
            raise ValueError(f"table_format must be one of {TABLE_FORMATS}")


def build_intermediate(
    meta: DocMeta,
    pages: list[list[Block]],
    version: str,
    source_id: str = "",
    discarded: list[list[Block]] | None = None,
) -> IntermediateDoc:
    infos = []
    for n, blocks in enumerate(pages):
        para = tuple(
            sorted(
                (b for b in blocks if not is_discard(b.category)),
                key=lambda b: (b.order_index if b.order_index is not None else math.inf, b.block_id),
            )
        )
        dropped = tuple(discarded[n]) if discarded else ()
        infos.append(PageInfo(n, meta.page_dims[n], para, dropped))
    return IntermediateDoc(tuple(infos), meta.parse_type, version, source_id)


# --- markdown ----------------------------------------------------------------


def _tag(label: str) -> str:
    return label.strip().strip("()（）").strip()


def _equation(block: Block, labels: list[str]) -> str:
    latex = " ".join(s.content.strip() for s in block.spans if s.content.strip())
    if not latex:
        return "[equation]"
    tags = [_tag(t) for t in ([block.label] if block.label else []) + labels]
    tags = [t for t in tags if t]
    if tags:
        latex = f"{latex} \\tag{{{tags[0]}}}"
    return f"$$\n{latex}\n$$"


def _figure(block: Block, manifest: dict | None, link_base: str) -> str:
    key = asset_key(block)
    entry = (manifest or {}).get(key)
    link = None
    if entry and entry.get("status") == WRITTEN:
        link = f"{link_base}/{entry['path']}" if link_base else entry["path"]
    if block.category is BlockCategory.TABLE:
        markup = "".join(s.content for s in block.spans).strip()
        if markup:
            return markup
        return f"![]({link})" if link else "[table]"
    return f"![]({link})" if link else "[image]"


def render_order(doc: IntermediateDoc) -> list[Block]:
    """para_blocks in rendering order: attached satellites follow their
    host, and attached equation labels are folded into the equation."""
    seq: list[Block] = []
    for page in doc.pdf_info:
        ids = {b.block_id for b in page.para_blocks}
        followers: dict[int, list[Block]] = {}
        for b in page.para_blocks:
            if b.host_id is not None and b.host_id in ids:
                followers.setdefault(b.host_id, []).append(b)
        for b in page.para_blocks:
            if b.host_id is not None and b.host_id in ids:
                continue
            seq.append(b)
            seq.extend(followers.get(b.block_id, []))
    return seq


def to_markdown(doc: IntermediateDoc, cfg: EmitConfig | None = None, manifest: dict | None = None) -> str:
    cfg = cfg or EmitConfig()
    seq = render_order(doc)
    labels: dict[tuple[int, int], list[str]] = {}
    for b in seq:
        if b.category is BlockCategory.EQUATION_LABEL and b.host_id is not None:
            labels.setdefault((b.page_index, b.host_id), []).append(block_text(b))
    chunks = []
    for b in seq:
        if b.category is BlockCategory.EQUATION_LABEL and b.host_id is not None:
            continue
        if b.category is BlockCategory.INTERLINE_EQUATION:
            chunk = _equation(b, labels.get((b.page_index, b.block_id), []))
        elif b.category in FIGURE_CATEGORIES:
            chunk = _figure(b, manifest, cfg.asset_link_base)
        else:
            text = block_text(b)
            if not text:
                continue
            chunk = f"# {text}" if b.category is BlockCategory.TITLE else text
        chunks.append(chunk + "\n\n")
    return "".join(chunks)


# --- structured output -------------------------------------------------------


def _span_to_dict(s: Span) -> dict[str, Any]:
    return {"type": s.kind.value, "bbox": s.rect.to_list(), "content": s.content, "score": s.score}


def _block_to_dict(b: Block) -> dict[str, Any]:
    out: dict[str, Any] = {
        "type": b.category.value,
        "id": b.block_id,
        "bbox": b.rect.to_list(),
        "page_idx": b.page_index,
        "score": b.score,
        "index": b.order_index,
        "lines": [
            {"bbox": line.rect.to_list(), "spans": [_span_to_dict(s) for s in line.spans]}
            for line in b.lines
        ],
    }
    if b.host_id is not None:
        out["host_id"] = b.host_id
    if b.label is not None:
        out["label"] = b.label
    if b.merged_blocks:
        out["merged_blocks"] = [_block_to_dict(m) for m in b.merged_blocks]
    return out


def _block_from_dict(d: dict[str, Any]) -> Block:
    lines = tuple(
        Line(
            tuple(
                Span(Rect.from_list(s["bbox"]), SpanKind(s["type"]), s["content"], s["score"])
                for s in line["spans"]
            )
        )
        for line in d["lines"]
    )
    return Block(
        block_id=d["id"],
        category=BlockCategory(d["type"]),
        rect=Rect.from_list(d["bbox"]),
        lines=lines,
        order_index=d["index"],
        score=d["score"],
        page_index=d["page_idx"],
        host_id=d.get("host_id"),
        label=d.get("label"),
        merged_blocks=tuple(_block_from_dict(m) for m in d.get("merged_blocks", [])),
    )


def doc_to_dict(doc: IntermediateDoc) -> dict[str, Any]:
    return {
        "pdf_info": [
            {
                "page_idx": p.page_idx,
                "page_size": list(p.page_size),
                "para_blocks": [_block_to_dict(b) for b in p.para_blocks],
                "discarded_blocks": [_block_to_dict(b) for b in p.discarded_blocks],
            }
            for p in doc.pdf_info
        ],
        "_parse_type": doc.parse_type.value,
        "_version_name": doc.version_name,
    }


def doc_from_dict(data: dict[str, Any], source_id: str = "") -> IntermediateDoc:
    pages = tuple(
        PageInfo(
            p["page_idx"],
            tuple(p["page_size"]),
            tuple(_block_from_dict(b) for b in p["para_blocks"]),
            tuple(_block_from_dict(b) for b in p.get("discarded_blocks", [])),
        )
        for p in data["pdf_info"]
    )
    return IntermediateDoc(pages, ParseType(data["_parse_type"]), data["_version_name"], source_id)


def dumps_canonical(data: Any) -> bytes:
    return (json.dumps(data, ensure_ascii=False, sort_keys=True, indent=2) + "\n").encode("utf-8")


def to_structured(doc: IntermediateDoc) -> bytes:
    """Canonical JSON: sorted keys, two-space indent, UTF-8, trailing newline."""
    assert doc.pdf_info, "documents without pages are rejected at ingest"
    return dumps_canonical(doc_to_dict(doc))


def from_structured(raw: bytes | str, source_id: str = "") -> IntermediateDoc:
    return doc_from_dict(json.loads(raw), source_id)


# --- table markup --------------------------------------------------------------


_HTML_TAG = re.compile(r"<(/?)([a-zA-Z][a-zA-Z0-9]*)[^>]*?(/?)>")
_VOID_TAGS = frozenset({"br", "hr", "img", "col", "meta", "input", "wbr"})


def markup_balanced(markup: str, fmt: str) -> bool:
    """Shallow well-formedness: matched HTML tags, or matched braces and
    \\begin/\\end environments for LaTeX."""
    if fmt == "html":
        stack = []
        for closing, name, selfclose in _HTML_TAG.findall(markup):
            name = name.lower()
            if selfclose or name in _VOID_TAGS:
                continue
            if closing:
                if not stack or stack.pop() != name:
                    return False
            else:
                stack.append(name)
        return not stack
    depth = 0
    for ch in re.sub(r"\\[{}]", "", markup):
        depth += ch == "{"
        depth -= ch == "}"
        if depth < 0:
            return False
    envs = re.findall(r"\\(begin|end)\{([^}]*)\}", markup)
    stack = []
    for kind, name in envs:
        if kind == "begin":
            stack.append(name)
        elif not stack or stack.pop() != name:
            return False
    return depth == 0 and not stack


# --- assets --------------------------------------------------------------------


def asset_key(block: Block) -> str:
    return f"p{block.page_index}_b{block.block_id}"


def asset_name(source_id: str, block: Block) -> str:
    return f"{source_id}_p{block.page_index}_{block.order_index}.png"


def crop_assets(doc: IntermediateDoc, bundle, cfg: EmitConfig, base_dir: Path | None = None) -> dict:
    """Crop every image/table block out of its page raster.

    Returns a manifest ``{asset_key: {"path", "status", "error"?}}``. Blocks
    on pages without a raster get placeholder entries; a failed read or
    write is recorded per entry and does not stop the run.
    """
    manifest: dict[str, dict] = {}
    figures = [
        b for p in doc.pdf_info for b in p.para_blocks if b.category in FIGURE_CATEGORIES
    ]
    rasters = {p.page_index: p.page_raster_ref for p in bundle.pages}
    if cfg.asset_dir is None and any(rasters.get(b.page_index) for b in figures):
        raise ValueError("asset_dir is required to crop figures from page rasters")
    dims = {p.page_index: (p.width, p.height) for p in bundle.pages}

    from PIL import Image

    opened: dict[int, Any] = {}
    for b in figures:
        key = asset_key(b)
        ref = rasters.get(b.page_index)
        if not ref:
            manifest[key] = {"path": None, "status": PLACEHOLDER}
            continue
        name = asset_name(doc.source_id or bundle.source_id, b)
        try:
            if b.page_index not in opened:
                src = Path(ref) if base_dir is None else Path(base_dir) / ref
                with Image.open(src) as im:
                    im.load()
                    opened[b.page_index] = im.copy()
            page_img = opened[b.page_index]
            pw, ph = dims[b.page_index]
            sx, sy = page_img.width / pw, page_img.height / ph
            box = (
                math.floor(b.rect.x0 * sx),
                math.floor(b.rect.y0 * sy),
                math.ceil(b.rect.x1 * sx),
                math.ceil(b.rect.y1 * sy),
            )
            os.makedirs(cfg.asset_dir, exist_ok=True)
            page_img.crop(box).save(Path(cfg.asset_dir) / name, format="PNG")
            manifest[key] = {"path": name, "status": WRITTEN}
        except OSError as exc:
            logger.warning("could not write asset %s: %s", name, exc)
            manifest[key] = {"path": name, "status": IO_FAILURE, "error": str(exc)}
    return manifest
