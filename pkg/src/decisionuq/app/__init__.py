"""Case studies, configuration-driven study runner, flat-file I/O and the CLI."""
from .config import LossEntry, StudyConfig
from .dyke import DykeTable, dyke_estimates, run_dyke_replicates, simulate_dyke_data, water_level_rows
from .io import emit_report, ingest_csv, write_csv
from .normal_demo import normal_predictive_demo
from .study import EstimateReport, build_posterior, run_risk, run_study
from .verify import verify_theorems

__all__ = [
    "DykeTable", "EstimateReport", "LossEntry", "StudyConfig", "build_posterior", "dyke_estimates", "emit_report",
    "ingest_csv", "normal_predictive_demo", "run_dyke_replicates", "run_risk", "run_study", "simulate_dyke_data",
    "verify_theorems", "water_level_rows", "write_csv",
]
