from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class EngineConfig:
    """Tunable thresholds for every stage of the pipeline.

    Distances are in page points; ratios are fractions of an area or of a
    codepoint count.
    """

    # ingest
    text_chars_threshold: float = 5.0
    image_cover_ratio: float = 0.8
    image_page_fraction: float = 0.5
    garbled_ratio: float = 0.05
    cjk_ratio: float = 0.3
    # layout post-processing
    containment_threshold: float = 0.8
    overlap_eps: float = 0.001
    min_keep_ratio: float = 0.5
    span_assign_ratio: float = 0.5
    # reading order
    gap_x: float = 12.0
    gap_y: float = 8.0
    # content assembly
    line_merge_factor: float = 0.5
    attach_dist_factor: float = 2.0
    default_line_height: float = 12.0
    merge_across_pages: bool = True
