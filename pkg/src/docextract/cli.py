"""Command-line entry points: ``extract`` and ``extract-eval``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .emit import EmitConfig, crop_assets, dumps_canonical, doc_to_dict, to_markdown, to_structured
from .errors import MalformedInputError, SchemaViolationError, UnprocessableDocumentError
from .evaluation import evaluate, load_instances
from .ingest import load_bundle
from .model import LangType
from .pipeline import extract_document

EXIT_OK = 0
EXIT_UNPROCESSABLE = 1
EXIT_SCHEMA = 2
EXIT_IO = 3

logger = logging.getLogger("docextract")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="extract",
        description="Convert a document bundle (page text spans + model detections) to Markdown/JSON.",
    )
    p.add_argument("-i", "--input", required=True, help="bundle file")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--format", choices=["markdown", "structured", "both"], default="markdown")
    p.add_argument("--table-format", choices=["html", "latex"], default="html")
    p.add_argument("--asset-dir", help="directory for cropped images/tables (default: <output>/images)")
    p.add_argument("--dump-intermediate", action="store_true")
    p.add_argument("--debug", action="store_true", help="write region tree and overlap report")
    p.add_argument("--lang", choices=["zh", "en"])
    p.add_argument("--mode", choices=["txt", "ocr", "auto"], default="auto")
    return p


def run_cli(argv: list[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_SCHEMA

    logging.basicConfig(level=logging.DEBUG if args.debug else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    in_path = Path(args.input)
    out_dir = Path(args.output)
    asset_dir = Path(args.asset_dir) if args.asset_dir else out_dir / "images"
    cfg = EmitConfig(
        output_format=args.format,
        dump_intermediate=args.dump_intermediate,
        asset_dir=asset_dir,
        table_format=args.table_format,
        debug=args.debug,
        asset_link_base=Path(os.path.relpath(asset_dir, out_dir)).as_posix(),
    )

    try:
        with open(in_path, "rb") as fh:
            bundle = load_bundle(fh)
    except UnprocessableDocumentError as exc:
        print(f"extract: unprocessable document: {exc}", file=sys.stderr)
        return EXIT_UNPROCESSABLE
    except (MalformedInputError, SchemaViolationError) as exc:
        print(f"extract: invalid bundle: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"extract: cannot read {in_path}: {exc}", file=sys.stderr)
        return EXIT_IO

    result = extract_document(
        bundle,
        table_format=cfg.table_format,
        mode=args.mode,
        language=LangType(args.lang) if args.lang else None,
    )
    doc = result.doc
    sid = bundle.source_id
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        manifest = crop_assets(doc, bundle, cfg, base_dir=in_path.parent)
        if cfg.output_format in ("markdown", "both"):
            (out_dir / f"{sid}.md").write_text(to_markdown(doc, cfg, manifest), encoding="utf-8")
        if cfg.output_format in ("structured", "both"):
            (out_dir / f"{sid}.structured").write_bytes(to_structured(doc))
        if cfg.dump_intermediate:
            payload = {
                "doc": doc_to_dict(doc),
                "meta": {
                    "page_count": result.meta.page_count,
                    "page_dims": [list(d) for d in result.meta.page_dims],
                    "language": result.meta.language.value,
                    "parse_type": result.meta.parse_type.value,
                    "garbled": result.meta.garbled,
                },
                "assets": manifest,
            }
            (out_dir / f"{sid}.intermediate").write_bytes(dumps_canonical(payload))
        if cfg.debug:
            (out_dir / f"{sid}.debug").write_bytes(dumps_canonical(result.debug_dict()))
    except OSError as exc:
        print(f"extract: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())


def run_eval_cli(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(prog="extract-eval", description="Score layout/formula detections.")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--max-dets", type=int, default=100)
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    try:
        args = p.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_SCHEMA
    try:
        gt = load_instances(Path(args.gt).read_bytes(), predictions=False)
        preds = load_instances(Path(args.pred).read_bytes(), predictions=True)
    except OSError as exc:
        print(f"extract-eval: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, TypeError) as exc:
        print(f"extract-eval: invalid instance file: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    report = evaluate(gt, preds, max_dets=args.max_dets)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    else:
        print(report.format_table())
    return EXIT_OK


def eval_main() -> None:
    sys.exit(run_eval_cli())
