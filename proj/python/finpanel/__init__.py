"""Firm-registry and financial-statement panel building primitives.

The heavy lifting lives in the C++ core; this package re-exports the bound
operations. Statements are plain dicts mapping line codes ("2110") to
integer values in thousands of rubles.
"""

from _finpanel import (
    ARTICULATION_THRESHOLD,
    __version__,
    adjust_totals,
    check_articulation,
    equations,
    generate_corpus,
    grid_cell,
    is_line_code,
    line_codes,
    line_section,
    normalize_to_thousands,
    quality_for_rank,
)

__all__ = [
    "ARTICULATION_THRESHOLD",
    "__version__",
    "adjust_totals",
    "check_articulation",
    "equations",
    "generate_corpus",
    "grid_cell",
    "is_line_code",
    "line_codes",
    "line_section",
    "normalize_to_thousands",
    "quality_for_rank",
]
