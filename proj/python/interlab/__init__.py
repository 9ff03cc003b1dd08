"""Random interlacements, reflected walks and spanning forests on graph exhaustions."""

from ._interlab import (
    Error,
    Graph,
    Window,
    build_family,
    config_hash,
    effective_resistance,
    entry_measure_free,
    equilibrium,
    equivalence_report,
    load_window,
    panel_marginals,
    run,
    run_text,
    sample_interlacement,
    sample_reflected,
    suite_paper,
    wilson,
)

__all__ = [
    "Error",
    "Graph",
    "Window",
    "build_family",
    "config_hash",
    "effective_resistance",
    "entry_measure_free",
    "equilibrium",
    "equivalence_report",
    "load_window",
    "panel_marginals",
    "run",
    "run_text",
    "sample_interlacement",
    "sample_reflected",
    "suite_paper",
    "wilson",
]
__version__ = "0.3.0"
