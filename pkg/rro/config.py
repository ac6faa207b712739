import logging
from typing import Optional

import yaml
from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

# --- Pydantic Models for Configuration Validation ---

class SolverSettings(BaseModel):
    # Relative tolerance under which a chord gradient counts as equal to alpha.
    collinear_tolerance: float = Field(default=1e-9, gt=0, lt=1e-3)
    # Relative tolerance for budget comparisons (budget_used <= budget_total).
    budget_tolerance: float = Field(default=1e-9, gt=0, lt=1e-3)
    trace_xtol: float = Field(default=1e-12, gt=0)
    trace_max_iterations: int = Field(default=200, ge=10)
    unimodal_h_tolerance: float = Field(default=1e-13, gt=0)
    max_search_iterations: int = Field(default=400, ge=10)
    knapsack_enumeration_limit: int = Field(default=1_000_000, ge=1)
    # Cells of the multiple-choice table past which exact completion is skipped.
    exact_completion_cells: int = Field(default=10_000_000, ge=0)

class OracleSettings(BaseModel):
    max_supported: int = Field(default=6, ge=1)
    max_complement: int = Field(default=8, ge=1)

class PlotSettings(BaseModel):
    width_px: int = 960
    height_px: int = 720
    svg_hashsalt: str = "rro"
    complement_color: str = "#404040"
    base_color: str = "#9e9e9e"
    reinforced_color: str = "#2e7d32"
    chord_color: str = "#c62828"

class LoggingSettings(BaseModel):
    level: str = "INFO"
    format: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"

class AppConfig(BaseModel):
    solver: SolverSettings = Field(default_factory=SolverSettings)
    oracle: OracleSettings = Field(default_factory=OracleSettings)
    plot: PlotSettings = Field(default_factory=PlotSettings)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)


# --- Configuration Loading Function ---

def load_config(config_path: Optional[str] = "config.yml") -> AppConfig:
    """
    Loads the application configuration from a YAML file and validates it.

    A missing file is not an error: the solvers are usable as a library
    without any configuration, so the defaults are returned instead.

    Args:
        config_path: The path to the configuration file, or None for defaults.

    Returns:
        An AppConfig object with the loaded and validated settings.

    Raises:
        ValueError: If the config file cannot be parsed or is invalid.
    """
    if config_path is None:
        return AppConfig()
    try:
        with open(config_path, 'r') as f:
            config_data = yaml.safe_load(f)
    except FileNotFoundError:
        logger.debug("No configuration file at '%s'; using defaults.", config_path)
        return AppConfig()
    except yaml.YAMLError as e:
        raise ValueError(f"Error parsing YAML file: {e}")

    if not config_data:
        return AppConfig()

    try:
        return AppConfig(**config_data)
    except Exception as e:
        # Pydantic's ValidationError can be complex, so we wrap it.
        raise ValueError(f"Configuration validation error: {e}")


def reload_settings(config_path: Optional[str]) -> AppConfig:
    """Replaces the global settings in place so modules holding a reference see the change."""
    fresh = load_config(config_path)
    for name in AppConfig.model_fields:
        setattr(settings, name, getattr(fresh, name))
    return settings

# --- Global Config Object ---

# Loaded once when the module is imported; library calls read their
# defaults from here and the CLI may reload it with --config.
try:
    settings = load_config()
except ValueError as e:
    logger.warning("Could not load configuration, falling back to defaults. %s", e)
    settings = AppConfig()
