"""Input coercion for the estimator API."""

from __future__ import annotations

import os
from pathlib import Path

from .ingest import DocumentBundle, bundle_from_dict, load_bundle
from .model import Block


def _one_bundle(x) -> DocumentBundle:
    if isinstance(x, DocumentBundle):
        return x
    if isinstance(x, dict):
        return bundle_from_dict(x)
    if isinstance(x, bytes):
        return load_bundle(x)
    if isinstance(x, (str, os.PathLike)):
        with open(Path(x), "rb") as fh:
            return load_bundle(fh)
    raise TypeError(f"cannot interpret {type(x).__name__} as a document bundle")


def check_bundles(X) -> list[DocumentBundle]:
    """Accept one bundle or a sequence of bundles given as
    :class:`DocumentBundle`, decoded dicts, raw bytes or file paths."""
    if isinstance(X, (DocumentBundle, dict, bytes, str, os.PathLike)):
        return [_one_bundle(X)]
    try:
        items = list(X)
    except TypeError:
        raise TypeError(f"expected a bundle or a sequence of bundles, got {type(X).__name__}") from None
    if not items:
        raise ValueError("expected at least one bundle")
    return [_one_bundle(x) for x in items]


def check_pages(X) -> list[list[Block]]:
    """Accept one page (a list of blocks) or a list of pages."""
    items = list(X)
    if items and all(isinstance(b, Block) for b in items):
        items = [items]
    pages = []
    for page in items:
        page = list(page)
        if not all(isinstance(b, Block) for b in page):
            raise TypeError("pages must be sequences of Block")
        ids = [b.block_id for b in page]
        if len(set(ids)) != len(ids):
            raise ValueError("block ids must be unique within a page")
        pages.append(page)
    return pages
