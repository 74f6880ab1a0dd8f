"""Layout post-processing and Markdown/JSON conversion for document
extraction pipelines.

Upstream models (layout and formula detection, formula/table recognition,
OCR) deliver their output as a document bundle; this package orders,
cleans and stitches it into a reading-order document.
"""

__version__ = "0.1.0"

from .config import EngineConfig  # noqa: E402
from .emit import EmitConfig, from_structured, to_markdown, to_structured  # noqa: E402
from .estimators import (  # noqa: E402
    DocumentExtractor,
    LayoutPostProcessor,
    ParseabilityClassifier,
    ReadingOrderSorter,
)
from .ingest import DocumentBundle, extract_meta, load_bundle  # noqa: E402
from .pipeline import extract_document  # noqa: E402

__all__ = [
    "DocumentBundle",
    "DocumentExtractor",
    "EmitConfig",
    "EngineConfig",
    "LayoutPostProcessor",
    "ParseabilityClassifier",
    "ReadingOrderSorter",
    "extract_document",
    "extract_meta",
    "from_structured",
    "load_bundle",
    "to_markdown",
    "to_structured",
]
