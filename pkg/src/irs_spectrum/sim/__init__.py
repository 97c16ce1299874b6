"""Scenario configuration, Monte Carlo sweeps and result persistence."""

from .config import (ALL_DESIGNS, AO_DESIGN, DEFAULTS, SETUP_ROLES, ConfigError, HotspotPlacement,
                     ScenarioConfig, SolverSettings, config_from_dict, dump_config, load_config, parse_config,
                     save_config)
from .results import (COLUMNS, ResultRecord, SummaryRow, format_summary, mean_rate_table,
                      read_results, summarize, write_results)
from .sweep import run_sweep, run_trial, trial_channels, trial_geometry, trial_seed
