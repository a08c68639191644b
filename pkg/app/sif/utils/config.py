# sif/utils/config.py

import json
import os
from functools import lru_cache
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

from sif.utils.logger import configure_logging, get_logger

logger = get_logger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parents[2] / "config.json"


class LoggingSettings(BaseModel):
    level: str = Field(default="INFO", description="Console log level.")
    log_dir: str = Field(default="logs", description="Directory of the rotating log file.")


class OperatorSettings(BaseModel):
    quad_level: int = Field(default=8, ge=2, description="Midpoint subdivisions per axis for Exact_B.")
    max_quad_elements: int = Field(
        default=50_000_000,
        ge=1,
        description="Upper bound on quadrature samples held in memory for one latitude row.",
    )
    threads: int = Field(default=1, ge=1, description="Worker threads for assembly and block solves.")


class SpectrumSettings(BaseModel):
    dense_cap: int = Field(default=40, ge=2, description="Largest N accepted by the dense eigensolver.")
    block_cap: int = Field(default=400, ge=2, description="Largest N accepted by the block-circulant route without force.")
    oversample: int = Field(default=4, ge=1, description="Symbol lattice oversampling factor.")


class DecompositionSettings(BaseModel):
    delta: float = Field(default=1e-3, gt=0)
    max_inner_iterations: int = Field(default=200, ge=1)
    max_imfs: int = Field(default=8, ge=1)
    chi: float = Field(default=1.6, gt=0)
    energy_floor: float = Field(default=1e-12, ge=0)


class Settings(BaseModel):
    """Validated runtime configuration."""

    logging: LoggingSettings = Field(default_factory=LoggingSettings)
    operator: OperatorSettings = Field(default_factory=OperatorSettings)
    spectrum: SpectrumSettings = Field(default_factory=SpectrumSettings)
    decomposition: DecompositionSettings = Field(default_factory=DecompositionSettings)

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "logging": {"level": "INFO", "log_dir": "logs"},
                "operator": {"quad_level": 8, "threads": 4},
                "spectrum": {"dense_cap": 40},
            }
        }
    )


def load_config(config_path: str) -> dict:
    """
    Load configuration from a JSON file.

    Parameters:
    ----------
    config_path : str
        The file path to the configuration JSON.

    Returns:
    -------
    dict
        The loaded configuration data.
    """
    if not os.path.exists(config_path):
        logger.error(f"Configuration file {config_path} not found.")
        raise FileNotFoundError(f"{config_path} does not exist.")
    with open(config_path, "r") as f:
        config_data = json.load(f)
    logger.debug(f"Configuration loaded from {config_path}.")
    return config_data


_ENV_OVERRIDES = {
    "SIF_THREADS": ("operator", "threads"),
    "SIF_QUAD_LEVEL": ("operator", "quad_level"),
    "SIF_DENSE_CAP": ("spectrum", "dense_cap"),
    "SIF_BLOCK_CAP": ("spectrum", "block_cap"),
}


def _apply_env_overrides(data: dict) -> dict:
    for var, (section, key) in _ENV_OVERRIDES.items():
        value = os.getenv(var)
        if value:
            data.setdefault(section, {})[key] = int(value)
    return data


@lru_cache(maxsize=8)
def _settings_for(path: str) -> Settings:
    data = load_config(path) if os.path.exists(path) else {}
    settings = Settings.model_validate(_apply_env_overrides(data))
    configure_logging(settings.logging.level, settings.logging.log_dir)
    return settings


def get_settings(config_path: Optional[str] = None) -> Settings:
    """
    Return settings from `config_path`, `$SIF_CONFIG`, or the packaged `app/config.json`.

    Environment overrides (`SIF_THREADS`, `SIF_QUAD_LEVEL`, `SIF_DENSE_CAP`,
    `SIF_BLOCK_CAP`) are applied on top of the file. Loading a file also
    hands its `logging` section to the loggers. A missing default file
    yields the built-in defaults; a missing explicit file is an error.
    """
    load_dotenv()
    path = config_path or os.getenv("SIF_CONFIG")
    if path is None:
        return _settings_for(str(DEFAULT_CONFIG_PATH))
    if not os.path.exists(path):
        logger.error(f"Configuration file {path} not found.")
        raise FileNotFoundError(f"{path} does not exist.")
    return _settings_for(str(Path(path).resolve()))


def reload_settings() -> None:
    """Forget cached settings so changed environment overrides take effect."""
    _settings_for.cache_clear()
