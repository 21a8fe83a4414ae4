"""Config parsing, run execution, experiment families and report writers."""
from .config import ConfigError, RunConfig, load_config, parse_config_text
from .experiments import FAMILIES, FamilyResult, replicate_experiment, table3_param_count
from .outputs import to_json, write_outputs
from .runner import ExperimentResult, reference_coefficient, run_case

__all__ = [
    "ConfigError", "ExperimentResult", "FAMILIES", "FamilyResult", "RunConfig", "load_config",
    "parse_config_text", "reference_coefficient", "replicate_experiment", "run_case",
    "table3_param_count", "to_json", "write_outputs",
]
