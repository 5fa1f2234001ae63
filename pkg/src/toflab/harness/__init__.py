"""Scenario ingestion, Monte-Carlo runs, the drift-error table, CSV and CLI."""

from .csvio import emit_csv, read_csv
from .montecarlo import RNG_ALGORITHM, TrialRecord, run_monte_carlo, trial_rng
from .scenario import DriftMode, Scenario, load_scenario, parse_scenario
from .sweep import sweep
from .table1 import Table1Row, reproduce_table1

__all__ = [
    "DriftMode",
    "RNG_ALGORITHM",
    "Scenario",
    "Table1Row",
    "TrialRecord",
    "emit_csv",
    "load_scenario",
    "parse_scenario",
    "read_csv",
    "reproduce_table1",
    "run_monte_carlo",
    "sweep",
    "trial_rng",
]
