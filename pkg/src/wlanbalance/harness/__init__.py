"""Scenario files, experiment sweeps, CSV output and the command line."""

from .csv_writer import CSV_HEADER, emit_csv
from .experiments import ExperimentSpec, run_exp1, run_exp2
from .loader import ScenarioLoader, dump_scenario, load_scenario, parse_scenario, scenario_to_dict

__all__ = [
    "CSV_HEADER",
    "ExperimentSpec",
    "ScenarioLoader",
    "dump_scenario",
    "emit_csv",
    "load_scenario",
    "parse_scenario",
    "run_exp1",
    "run_exp2",
    "scenario_to_dict",
]
