from ._core import (
    SynthQAError,
    Table,
    bootstrap_sample,
    check_rules,
    evaluate,
    improvement,
    independent_sample,
    kendall_tau,
    mode_collapse_sample,
    optimize,
    rank_models,
    render_figures,
    run_cli,
    suggest,
)

__all__ = [
    "SynthQAError",
    "Table",
    "bootstrap_sample",
    "check_rules",
    "evaluate",
    "improvement",
    "independent_sample",
    "kendall_tau",
    "mode_collapse_sample",
    "optimize",
    "rank_models",
    "render_figures",
    "run_cli",
    "suggest",
]
