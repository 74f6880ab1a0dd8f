"""scikit-learn compatible wrappers around the pipeline stages.

Nothing here is learned: ``fit`` validates the hyperparameters and freezes
them into an :class:`EngineConfig`, so the estimators can sit in a
``Pipeline`` or be swept with ``GridSearchCV`` over the thresholds.
"""

from __future__ import annotations

from dataclasses import fields

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_bundles, check_pages
from .config import EngineConfig
from .emit import EmitConfig, to_markdown, to_structured
from .ingest import classify_parseability, detect_garbled
from .layout import postprocess_page
from .model import LangType, ParseType
from .ordering import order_page
from .pipeline import extract_document

_CONFIG_FIELDS = {f.name for f in fields(EngineConfig)}


class _ConfigMixin:
    def _make_config(self) -> EngineConfig:
        params = {k: v for k, v in self.get_params(deep=False).items() if k in _CONFIG_FIELDS}
        for name, value in params.items():
            if isinstance(value, float) and value < 0:
                raise ValueError(f"{name} must be non-negative, got {value}")
        return EngineConfig(**params)


class ParseabilityClassifier(_ConfigMixin, ClassifierMixin, BaseEstimator):
    """Label documents ``"txt"`` (native text usable) or ``"ocr"``
    (scanned or garbled)."""

    def __init__(
        self,
        text_chars_threshold=5.0,
        image_cover_ratio=0.8,
        image_page_fraction=0.5,
        garbled_ratio=0.05,
    ):
        self.text_chars_threshold = text_chars_threshold
        self.image_cover_ratio = image_cover_ratio
        self.image_page_fraction = image_page_fraction
        self.garbled_ratio = garbled_ratio

    def fit(self, X, y=None):
        check_bundles(X)
        self.config_ = self._make_config()
        self.classes_ = np.array([ParseType.OCR.value, ParseType.TXT.value])
        return self

    def predict(self, X):
        check_is_fitted(self, "config_")
        out = []
        for bundle in check_bundles(X):
            if detect_garbled(bundle, self.config_):
                out.append(ParseType.OCR.value)
            else:
                out.append(classify_parseability(bundle, self.config_).value)
        return np.array(out)


class LayoutPostProcessor(_ConfigMixin, TransformerMixin, BaseEstimator):
    """Per-page discard filtering, containment removal and overlap
    resolution. ``transform`` returns the kept blocks of each page;
    ``resolve`` also returns the discarded blocks and the report."""

    def __init__(self, containment_threshold=0.8, overlap_eps=0.001, min_keep_ratio=0.5):
        self.containment_threshold = containment_threshold
        self.overlap_eps = overlap_eps
        self.min_keep_ratio = min_keep_ratio

    def fit(self, X=None, y=None):
        self.config_ = self._make_config()
        return self

    def resolve(self, page):
        check_is_fitted(self, "config_")
        (blocks,) = check_pages([page])
        return postprocess_page(blocks, self.config_)

    def transform(self, X):
        check_is_fitted(self, "config_")
        return [postprocess_page(page, self.config_)[0] for page in check_pages(X)]


class ReadingOrderSorter(_ConfigMixin, TransformerMixin, BaseEstimator):
    """Assign ``order_index`` to overlap-free blocks, page by page."""

    def __init__(self, gap_x=12.0, gap_y=8.0, page_size=(595.0, 842.0)):
        self.gap_x = gap_x
        self.gap_y = gap_y
        self.page_size = page_size

    def fit(self, X=None, y=None):
        self.config_ = self._make_config()
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        w, h = self.page_size
        out = []
        for page in check_pages(X):
            ordered, _ = order_page(page, [], w, h, self.config_)
            out.append(ordered)
        return out


class DocumentExtractor(_ConfigMixin, TransformerMixin, BaseEstimator):
    """Bundles in, documents out.

    ``output`` selects what ``transform`` yields per bundle: the
    intermediate document, Markdown text, or canonical structured bytes.
    """

    def __init__(
        self,
        text_chars_threshold=5.0,
        image_cover_ratio=0.8,
        image_page_fraction=0.5,
        garbled_ratio=0.05,
        cjk_ratio=0.3,
        containment_threshold=0.8,
        overlap_eps=0.001,
        min_keep_ratio=0.5,
        span_assign_ratio=0.5,
        gap_x=12.0,
        gap_y=8.0,
        line_merge_factor=0.5,
        attach_dist_factor=2.0,
        merge_across_pages=True,
        table_format="html",
        mode="auto",
        language=None,
        output="intermediate",
        version=None,
    ):
        self.text_chars_threshold = text_chars_threshold
        self.image_cover_ratio = image_cover_ratio
        self.image_page_fraction = image_page_fraction
        self.garbled_ratio = garbled_ratio
        self.cjk_ratio = cjk_ratio
        self.containment_threshold = containment_threshold
        self.overlap_eps = overlap_eps
        self.min_keep_ratio = min_keep_ratio
        self.span_assign_ratio = span_assign_ratio
        self.gap_x = gap_x
        self.gap_y = gap_y
        self.line_merge_factor = line_merge_factor
        self.attach_dist_factor = attach_dist_factor
        self.merge_across_pages = merge_across_pages
        self.table_format = table_format
        self.mode = mode
        self.language = language
        self.output = output
        self.version = version

    def fit(self, X=None, y=None):
        if self.mode not in ("auto", "txt", "ocr"):
            raise ValueError(f"mode must be auto, txt or ocr, got {self.mode!r}")
        if self.output not in ("intermediate", "markdown", "structured"):
            raise ValueError(f"unknown output {self.output!r}")
        self.emit_config_ = EmitConfig(table_format=self.table_format)
        self.config_ = self._make_config()
        return self

    def transform(self, X):
        check_is_fitted(self, "config_")
        lang = LangType(self.language) if self.language else None
        out = []
        for bundle in check_bundles(X):
            doc = extract_document(
                bundle,
                self.config_,
                table_format=self.table_format,
                mode=self.mode,
                language=lang,
                version=self.version,
            ).doc
            if self.output == "markdown":
                out.append(to_markdown(doc, self.emit_config_))
            elif self.output == "structured":
                out.append(to_structured(doc))
            else:
                out.append(doc)
        return out
