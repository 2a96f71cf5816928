"""Explainability metrics for batch surrogate optimization."""

from ._iemso import (
    IemsoError,
    abd,
    analyze_csv,
    chee,
    cr,
    default_reference,
    des,
    dis,
    evaluate,
    export_csv,
    gp_predict,
    hve,
    hypervolume,
    mdpe,
    os,
    pareto_front,
    pce,
    problem_bounds,
    read_trace,
    run_experiment,
    write_report,
)

__all__ = [
    "IemsoError",
    "abd",
    "analyze_csv",
    "chee",
    "cr",
    "default_reference",
    "des",
    "dis",
    "evaluate",
    "export_csv",
    "gp_predict",
    "hve",
    "hypervolume",
    "mdpe",
    "os",
    "pareto_front",
    "pce",
    "problem_bounds",
    "read_trace",
    "run_experiment",
    "write_report",
]
