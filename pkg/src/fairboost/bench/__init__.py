"""Benchmark tooling: dataset preparation, mu sweeps and reports."""

from .prepare import DATASET_NAMES, DOWNLOADS, PreparedPaths, prepare_dataset
from .report import (
    DropReport,
    SWEEP_CSV_HEADER,
    accuracy_drop_report,
    emit_curves,
    load_sweep_csv,
    render_drop_report,
    sweep_csv,
    sweep_curves_svg,
)
from .sweep import (
    DEFAULT_MU_GRID,
    HyperGrid,
    SweepConfig,
    SweepResult,
    SweepRow,
    benchmark_sweep_config,
    di_trend,
    run_sweep,
    tune_vanilla,
)
from .synthetic import synthetic_biased

__all__ = [
    "DATASET_NAMES",
    "DEFAULT_MU_GRID",
    "DOWNLOADS",
    "DropReport",
    "HyperGrid",
    "PreparedPaths",
    "SWEEP_CSV_HEADER",
    "SweepConfig",
    "SweepResult",
    "SweepRow",
    "accuracy_drop_report",
    "benchmark_sweep_config",
    "di_trend",
    "emit_curves",
    "load_sweep_csv",
    "prepare_dataset",
    "render_drop_report",
    "run_sweep",
    "sweep_csv",
    "sweep_curves_svg",
    "synthetic_biased",
    "tune_vanilla",
]
