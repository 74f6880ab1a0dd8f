"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line
that is printed in the terminal summary."""

import random
import re
import time
from pathlib import Path

from docextract.assembly import block_text, line_text, mask_formulas, merge_paragraphs
from docextract.emit import from_structured, to_markdown, to_structured
from docextract.evaluation import IOU_THRESHOLDS, evaluate
from docextract.geometry import area, iou, union_area
from docextract.ingest import (
    bundle_from_dict,
    classify_parseability,
    detect_language,
    extract_meta,
    load_bundle,
)
from docextract.layout import postprocess_page
from docextract.model import Block, BlockCategory, LangType, Line, ParseType, SpanKind
from docextract.ordering import order_page
from docextract.pipeline import assemble_block, extract_document
from eval_cases import random_case, to_instances
from helpers import R, bundle, page, random_page_blocks, span
from layouts import LAYOUTS, H, W
from merge_cases import ALL as MERGE_CASES
from oracles import brute_force_metrics

FIXTURES = Path(__file__).parent / "fixtures"
CURATED = ("paper", "textbook", "report")

RESULTS: dict[int, tuple[bool, str, str]] = {}

_TEXT = BlockCategory.TEXT
_DOLLAR = re.compile(r"\$([^$]+)\$")


def record(key: int, title: str, ok: bool, detail: str) -> None:
    RESULTS[key] = (ok, title, detail)
    assert ok, detail


# 1 -----------------------------------------------------------------------------


def test_overlap_freeness():
    rng = random.Random(20240501)
    pages, violations = 1000, 0
    start = time.perf_counter()
    for _ in range(pages):
        blocks = random_page_blocks(rng, rng.randint(5, 60))
        kept, _, report = postprocess_page(blocks)
        deferred = set(report.deferred)
        flow = [b for b in kept if b.block_id not in deferred]
        violations += sum(iou(a.rect, b.rect) > 1e-3 for n, a in enumerate(flow) for b in flow[n + 1 :])
    elapsed = time.perf_counter() - start
    record(
        1, "overlap-freeness", violations == 0 and elapsed < 60,
        f"{pages} fuzzed pages, {violations} violations, {elapsed:.1f}s",
    )


# 2 -----------------------------------------------------------------------------


def _sequence(blocks):
    return tuple(b.block_id for b in sorted(blocks, key=lambda b: b.order_index))


def test_reading_order_fixtures():
    exact = single_ok = singles = 0
    for layout in LAYOUTS:
        got = _sequence(order_page(list(layout.blocks), [], W, H)[0])
        exact += got == layout.expected
        if layout.single_column:
            singles += 1
            y_sort = tuple(b.block_id for b in sorted(layout.blocks, key=lambda b: (b.rect.y0, b.rect.x0)))
            single_ok += got == y_sort
    n = len(LAYOUTS)
    record(
        2, "reading-order fixtures", n >= 12 and exact >= n - 1 and single_ok == singles,
        f"{exact}/{n} exact, single-column vs y-sort {single_ok}/{singles}",
    )


# 3 -----------------------------------------------------------------------------


def _formula_block(rng, bid):
    """A text block of 1-3 lines holding 0-4 inline formulas per line, with
    junk text spans recognized underneath each formula."""
    spans, expected = [], []
    y = 10.0
    for _ in range(rng.randint(1, 3)):
        x, row = 10.0, []
        for k in range(rng.randint(1, 6)):
            w = rng.uniform(15, 60)
            if rng.random() < 0.4 and sum(1 for r in row if r) < 4:
                content = f"f_{{{bid}.{k}}}"
                spans.append(span(x, y - 1, x + w, y + 13, content, SpanKind.INLINE_EQUATION))
                spans.append(span(x + 2, y + 1, x + w - 2, y + 11, "#junk#"))
                row.append(content)
            else:
                spans.append(span(x, y, x + w, y + 12, f"w{k}"))
                row.append(None)
            x += w + rng.uniform(2, 6)
        expected.append([c for c in row if c])
        y += 16
    rng.shuffle(spans)
    rect = R(5, 5, max(s.rect.x1 for s in spans) + 5, y + 2)
    return Block(bid, _TEXT, rect, tuple(Line((s,)) for s in spans)), expected


def test_formula_reintegration():
    rng = random.Random(7)
    blocks = [_formula_block(rng, bid) for bid in range(200)]
    order_ok = tiling_ok = 0
    total_formulas = 0
    for raw, expected in blocks:
        formulas = [s for s in raw.spans if s.kind is SpanKind.INLINE_EQUATION]
        total_formulas += len(formulas)
        masked = mask_formulas(raw, formulas)
        whole = area(raw.rect)
        parts = sum(area(r) for r in masked.remnants) + union_area(list(masked.holes))
        tiling_ok += abs(parts - whole) <= 1e-6 * whole
        got = [_DOLLAR.findall(line_text(line)) for line in assemble_block(raw).lines]
        order_ok += got == expected and "#junk#" not in block_text(assemble_block(raw))
    n = len(blocks)
    record(
        3, "formula reintegration", order_ok == n and tiling_ok == n,
        f"{order_ok}/{n} blocks with all $..$ segments in x-order ({total_formulas} formulas), "
        f"tiling balanced {tiling_ok}/{n}",
    )


# 4 -----------------------------------------------------------------------------


def _squash(s):
    return re.sub(r"[\s\-‐­]", "", s)


def test_paragraph_merging():
    decisions = preserved = 0
    for _, a_text, b_text, b_page, lang, should, merged_text in MERGE_CASES:
        a = Block(0, _TEXT, R(50, 700, 545, 720), (Line((span(50, 700, 545, 720, a_text),)),))
        b_rect = R(50, 60, 545, 80) if b_page else R(50, 730, 545, 750)
        b = Block(1, _TEXT, b_rect, (Line((span(*b_rect.to_list(), b_text),)),), page_index=b_page)
        out = merge_paragraphs([a, b], language=lang)
        merged = len(out) == 1
        decisions += merged == should and (not merged or block_text(out[0]) == merged_text)
        flat = "".join(block_text(x) for x in out)
        preserved += _squash(flat) == _squash(a_text + b_text)
    n = len(MERGE_CASES)
    record(
        4, "paragraph merging", n == 30 and decisions == n and preserved == n,
        f"rule table {decisions}/{n}, text preserved {preserved}/{n}",
    )


# 5 -----------------------------------------------------------------------------


def _pages(texts, covers=()):
    out = []
    for i, text in enumerate(texts):
        native = [((10, 10, 580, 30), text)] if text else []
        images = [(0, 0, 595, 842 * covers[i])] if i < len(covers) and covers[i] else []
        out.append(page(i, native=native, images=images))
    return bundle_from_dict(bundle(out))


def test_classifier_boundaries():
    body = "x" * 200
    cases = [
        ("T_chars below", classify_parseability(_pages(["abcd", "abcd"])), ParseType.OCR),
        ("T_chars at/above", classify_parseability(_pages(["abcde", "a b c d e f"])), ParseType.TXT),
        ("C_cover below", classify_parseability(_pages([body, body], [0.79, 0.79])), ParseType.TXT),
        ("C_cover above", classify_parseability(_pages([body, body], [0.81, 0.81])), ParseType.OCR),
        ("P_pages below", classify_parseability(_pages([body] * 3, [0.9, 0, 0])), ParseType.TXT),
        ("P_pages at", classify_parseability(_pages([body] * 2, [0.9, 0])), ParseType.OCR),
        ("G_ratio below", extract_meta(_pages(["\ufffd" * 4 + "x" * 96])).parse_type, ParseType.TXT),
        ("G_ratio above", extract_meta(_pages(["\ufffd" * 6 + "x" * 94])).parse_type, ParseType.OCR),
        ("CJK ratio below", detect_language(_pages(["中" * 25 + "x" * 75])), LangType.EN),
        ("CJK ratio above", detect_language(_pages(["中" * 35 + "x" * 65])), LangType.ZH),
    ]
    ok = [name for name, got, want in cases if got is want]
    bad = [name for name, got, want in cases if got is not want]
    record(5, "classifier boundaries", len(ok) == 10, f"{len(ok)}/10" + (f" failing: {bad}" if bad else ""))


# 6 -----------------------------------------------------------------------------


def _run(name):
    b = load_bundle((FIXTURES / f"{name}.bundle.json").read_bytes())
    doc = extract_document(b, version="acceptance").doc
    return to_markdown(doc), to_structured(doc)


def test_round_trip_and_determinism():
    round_trips = deterministic = 0
    for name in CURATED:
        md1, st1 = _run(name)
        md2, st2 = _run(name)
        deterministic += md1 == md2 and st1 == st2
        round_trips += to_structured(from_structured(st1)) == st1
    n = len(CURATED)
    record(
        6, "round-trip and determinism", round_trips == n and deterministic == n,
        f"byte-identical round-trip {round_trips}/{n}, identical reruns {deterministic}/{n}",
    )


# 7 -----------------------------------------------------------------------------


def test_metric_oracle():
    rng = random.Random(99)
    agree, cases, worst = 0, 60, 0.0
    for _ in range(cases):
        gt, preds = random_case(rng, max_boxes=3)
        want = brute_force_metrics(gt, preds, IOU_THRESHOLDS)
        r = evaluate(*to_instances(gt, preds))
        diff = max(abs(x - y) for x, y in zip((r.mAP, r.AP50, r.AR50), want))
        worst = max(worst, diff)
        agree += diff <= 1e-9
    perfect = 0
    for _ in range(10):
        gt, _ = random_case(rng, max_boxes=3)
        preds = [(p, lab, rect, rng.random()) for p, lab, rect in gt]
        r = evaluate(*to_instances(gt, preds))
        perfect += (r.mAP, r.AP50, r.AR50) == (1.0, 1.0, 1.0)
    record(
        7, "metric oracle", agree == cases and perfect == 10,
        f"{agree}/{cases} random cases within 1e-9 (max diff {worst:.1e}), perfect fixtures {perfect}/10",
    )


# 8 -----------------------------------------------------------------------------


def test_end_to_end_goldens():
    start = time.perf_counter()
    outputs = {name: _run(name)[0] for name in CURATED}
    elapsed = time.perf_counter() - start
    matches = [n for n in CURATED if outputs[n] == (FIXTURES / f"{n}.golden.md").read_text(encoding="utf-8")]
    record(
        8, "end-to-end goldens", len(matches) == 3 and elapsed < 5,
        f"{len(matches)}/3 byte-identical, {elapsed:.2f}s",
    )
