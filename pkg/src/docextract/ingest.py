"""Bundle loading and document-level preprocessing classifiers."""

from __future__ import annotations

import json
import logging
import math
import unicodedata
from dataclasses import dataclass
from typing import IO, Any

import jsonschema

from .config import EngineConfig
from .errors import MalformedInputError, SchemaViolationError, UnprocessableDocumentError
from .geometry import union_area
from .model import BlockCategory, DocMeta, LangType, ParseType, Rect, SpanKind

logger = logging.getLogger(__name__)

IGNORE_LABEL = "ignore"
DETECTION_LABELS = sorted(
    {c.value for c in BlockCategory} | {SpanKind.INLINE_EQUATION.value, IGNORE_LABEL}
)

_BBOX = {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4}
_TEXT_SPAN = {
    "type": "object",
    "required": ["bbox", "text"],
    "properties": {"bbox": _BBOX, "text": {"type": "string"}},
}

BUNDLE_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["source_id", "declared_encrypted", "pages"],
    "properties": {
        "source_id": {"type": "string", "minLength": 1},
        "declared_encrypted": {"type": "boolean"},
        "declared_language_hint": {"enum": ["zh", "en", None]},
        "pages": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": [
                    "page_index",
                    "width",
                    "height",
                    "native_spans",
                    "image_regions",
                    "detections",
                ],
                "properties": {
                    "page_index": {"type": "integer", "minimum": 0},
                    "width": {"type": "number", "exclusiveMinimum": 0},
                    "height": {"type": "number", "exclusiveMinimum": 0},
                    "native_spans": {"type": "array", "items": _TEXT_SPAN},
                    "ocr_spans": {"type": "array", "items": _TEXT_SPAN},
                    "image_regions": {"type": "array", "items": _BBOX},
                    "detections": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["bbox", "label", "score"],
                            "properties": {
                                "bbox": _BBOX,
                                "label": {"enum": DETECTION_LABELS},
                                "score": {"type": "number", "minimum": 0, "maximum": 1},
                                "content": {
                                    "oneOf": [
                                        {"type": "string"},
                                        {
                                            "type": "object",
                                            "additionalProperties": {"type": "string"},
                                        },
                                    ]
                                },
                            },
                        },
                    },
                    "page_raster_ref": {"type": ["string", "null"]},
                },
            },
        },
    },
}


@dataclass(frozen=True)
class TextSpan:
    rect: Rect
    text: str


@dataclass(frozen=True)
class Detection:
    """A model detection. ``content`` carries recognition output when the
    upstream model produced one: LaTeX for formulas, markup for tables
    (a string, or a mapping keyed by ``"html"``/``"latex"``), or text."""

    rect: Rect
    label: str
    score: float
    content: str | dict[str, str] | None = None


@dataclass(frozen=True)
class PageDigest:
    page_index: int
    width: float
    height: float
    native_spans: tuple[TextSpan, ...] = ()
    image_regions: tuple[Rect, ...] = ()
    detections: tuple[Detection, ...] = ()
    page_raster_ref: str | None = None
    ocr_spans: tuple[TextSpan, ...] | None = None

    @property
    def native_text(self) -> str:
        return "".join(s.text for s in self.native_spans)


@dataclass(frozen=True)
class DocumentBundle:
    source_id: str
    pages: tuple[PageDigest, ...]
    declared_encrypted: bool = False
    declared_language_hint: LangType | None = None

    def __post_init__(self) -> None:
        if not self.pages:
            raise SchemaViolationError("bundle has no pages")


def _rect(values, width: float, height: float) -> Rect:
    if not all(math.isfinite(v) for v in values):
        raise SchemaViolationError(f"non-finite bbox {values}")
    x0, y0, x1, y1 = values
    r = Rect(min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))
    return r.clamp(width, height)


def _text_spans(items, w: float, h: float) -> tuple[TextSpan, ...]:
    return tuple(TextSpan(_rect(s["bbox"], w, h), s["text"]) for s in items)


def bundle_from_dict(data: Any) -> DocumentBundle:
    """Validate a decoded bundle document and build a :class:`DocumentBundle`.

    Rects are clamped to page bounds and ``ignore`` detections are dropped.
    """
    try:
        jsonschema.validate(data, BUNDLE_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaViolationError(f"{where}: {exc.message}") from None

    if data["declared_encrypted"]:
        raise UnprocessableDocumentError(f"{data['source_id']}: document is encrypted")

    raw_pages = sorted(data["pages"], key=lambda p: p["page_index"])
    indices = [p["page_index"] for p in raw_pages]
    if indices != list(range(len(raw_pages))):
        raise SchemaViolationError(f"page_index values must be contiguous from 0, got {indices}")

    pages = []
    for p in raw_pages:
        w, h = float(p["width"]), float(p["height"])
        if not (math.isfinite(w) and math.isfinite(h)):
            raise SchemaViolationError(f"page {p['page_index']}: non-finite page size")
        detections = tuple(
            Detection(_rect(d["bbox"], w, h), d["label"], float(d["score"]), d.get("content"))
            for d in p["detections"]
            if d["label"] != IGNORE_LABEL
        )
        ocr = p.get("ocr_spans")
        pages.append(
            PageDigest(
                page_index=p["page_index"],
                width=w,
                height=h,
                native_spans=_text_spans(p["native_spans"], w, h),
                image_regions=tuple(_rect(r, w, h) for r in p["image_regions"]),
                detections=detections,
                page_raster_ref=p.get("page_raster_ref"),
                ocr_spans=None if ocr is None else _text_spans(ocr, w, h),
            )
        )
    hint = data.get("declared_language_hint")
    return DocumentBundle(
        source_id=data["source_id"],
        pages=tuple(pages),
        declared_encrypted=False,
        declared_language_hint=LangType(hint) if hint else None,
    )


def load_bundle(stream: IO[bytes] | IO[str] | bytes | str) -> DocumentBundle:
    """Read a bundle from a byte/text stream or an in-memory document."""
    raw = stream if isinstance(stream, (bytes, str)) else stream.read()
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedInputError(f"bundle is not UTF-8: {exc}") from None
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"bundle is not valid JSON: {exc}") from None
    return bundle_from_dict(data)


def bundle_to_dict(bundle: DocumentBundle) -> dict[str, Any]:
    pages = []
    for p in bundle.pages:
        page: dict[str, Any] = {
            "page_index": p.page_index,
            "width": p.width,
            "height": p.height,
            "native_spans": [{"bbox": s.rect.to_list(), "text": s.text} for s in p.native_spans],
            "image_regions": [r.to_list() for r in p.image_regions],
            "detections": [],
        }
        for d in p.detections:
            det: dict[str, Any] = {"bbox": d.rect.to_list(), "label": d.label, "score": d.score}
            if d.content is not None:
                det["content"] = d.content
            page["detections"].append(det)
        if p.ocr_spans is not None:
            page["ocr_spans"] = [{"bbox": s.rect.to_list(), "text": s.text} for s in p.ocr_spans]
        if p.page_raster_ref is not None:
            page["page_raster_ref"] = p.page_raster_ref
        pages.append(page)
    data: dict[str, Any] = {
        "source_id": bundle.source_id,
        "declared_encrypted": bundle.declared_encrypted,
        "pages": pages,
    }
    if bundle.declared_language_hint is not None:
        data["declared_language_hint"] = bundle.declared_language_hint.value
    return data


def serialize_bundle(bundle: DocumentBundle) -> bytes:
    return json.dumps(bundle_to_dict(bundle), ensure_ascii=False, sort_keys=True, indent=2).encode("utf-8")


# --- classifiers -----------------------------------------------------------


def _image_cover(page: PageDigest) -> float:
    page_area = page.width * page.height
    return union_area(page.image_regions) / page_area


def classify_parseability(bundle: DocumentBundle, config: EngineConfig | None = None) -> ParseType:
    """Decide whether a document needs OCR.

    A document is scanned when its pages carry almost no native text on
    average, or when enough of its pages are dominated by raster images.
    """
    cfg = config or EngineConfig()
    n = len(bundle.pages)
    chars = sum(sum(not ch.isspace() for ch in p.native_text) for p in bundle.pages)
    if chars / n < cfg.text_chars_threshold:
        return ParseType.OCR
    covered = sum(_image_cover(p) >= cfg.image_cover_ratio for p in bundle.pages)
    if covered / n >= cfg.image_page_fraction:
        return ParseType.OCR
    return ParseType.TXT


def _is_bad_codepoint(ch: str) -> bool:
    if ch == "\ufffd":
        return True
    cat = unicodedata.category(ch)
    if cat == "Co":
        return True
    return cat == "Cc" and not ch.isspace()


def garbled_ratio(bundle: DocumentBundle) -> float:
    text = "".join(p.native_text for p in bundle.pages)
    if not text:
        return 0.0
    return sum(_is_bad_codepoint(ch) for ch in text) / len(text)


def detect_garbled(bundle: DocumentBundle, config: EngineConfig | None = None) -> bool:
    cfg = config or EngineConfig()
    return garbled_ratio(bundle) > cfg.garbled_ratio


_CJK_RANGES = (
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
    (0x20000, 0x2A6DF),
    (0x2A700, 0x2EBEF),
    (0x30000, 0x3134F),
)


def is_cjk_ideograph(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def detect_language(bundle: DocumentBundle, config: EngineConfig | None = None) -> LangType:
    if bundle.declared_language_hint is not None:
        return bundle.declared_language_hint
    cfg = config or EngineConfig()
    letters = [ch for p in bundle.pages for ch in p.native_text if ch.isalpha()]
    if not letters:
        return LangType.UNKNOWN
    cjk = sum(is_cjk_ideograph(ch) for ch in letters)
    return LangType.ZH if cjk / len(letters) >= cfg.cjk_ratio else LangType.EN


def extract_meta(bundle: DocumentBundle, config: EngineConfig | None = None) -> DocMeta:
    garbled = detect_garbled(bundle, config)
    parse_type = ParseType.OCR if garbled else classify_parseability(bundle, config)
    return DocMeta(
        page_count=len(bundle.pages),
        page_dims=tuple((p.width, p.height) for p in bundle.pages),
        language=detect_language(bundle, config),
        parse_type=parse_type,
        garbled=garbled,
    )
