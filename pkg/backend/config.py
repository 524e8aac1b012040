import json
import logging
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from constants import API_HOST, API_PORT
from models import ExperimentConfig

# Load environment variables - try both backend/.env and project_root/.env
backend_env_path = Path(__file__).parent / '.env'
project_env_path = Path(__file__).parent.parent / '.env'

if backend_env_path.exists():
    load_dotenv(backend_env_path)
elif project_env_path.exists():
    load_dotenv(project_env_path)
else:
    load_dotenv()


def _env_flag(name: str, default: bool) -> bool:
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


def _env_int(name: str, default: int) -> int:
    try:
        return int(os.getenv(name, default))
    except ValueError:
        print(f"⚠️  Ignoring non-integer {name}={os.getenv(name)!r}")
        return default


class Settings:
    # Server
    API_HOST: str = os.getenv("SOOT_API_HOST", API_HOST)
    API_PORT: int = _env_int("SOOT_API_PORT", API_PORT)

    # Logging
    LOG_DIR: str = os.getenv("SOOT_LOG_DIR", "logs")
    LOG_TO_FILE: bool = _env_flag("SOOT_LOG_TO_FILE", True)
    LOG_LEVEL: str = os.getenv("SOOT_LOG_LEVEL", "INFO").upper()

    # Studies
    RESULTS_DIR: str = os.getenv("SOOT_RESULTS_DIR", "results")
    WORKERS: int = max(1, _env_int("SOOT_WORKERS", 1))

    # Run registry; None falls back to a SQLite file next to the backend package
    DATABASE_URL: Optional[str] = os.getenv("SOOT_DATABASE_URL")

    def validate_config(self) -> bool:
        """Validate environment-derived settings"""
        if self.LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            print(f"⚠️  Unknown SOOT_LOG_LEVEL '{self.LOG_LEVEL}', falling back to INFO")
            self.LOG_LEVEL = "INFO"
            return False
        return True


# Create global settings instance
settings = Settings()


class ConfigFileError(Exception):
    """The study configuration file is missing, unreadable or invalid"""


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Read a JSON study configuration whose keys mirror ExperimentConfig fields

    Raises:
        OSError: the file cannot be read
        ConfigFileError: the content is not a JSON object
    """
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigFileError(f"{path}: invalid JSON ({e})")
    if not isinstance(data, dict):
        raise ConfigFileError(f"{path}: top level must be an object")
    unknown = sorted(set(data) - set(ExperimentConfig.model_fields))
    if unknown:
        raise ConfigFileError(f"{path}: unknown keys {unknown}")
    return data


def build_experiment_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """File values first, then non-None overrides, then the SOOT_WORKERS default"""
    values: Dict[str, Any] = {"workers": settings.WORKERS}
    if path:
        values.update(load_config_file(path))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return ExperimentConfig(**values)
    except ValidationError as e:
        raise ConfigFileError(f"invalid configuration: {e}")


def setup_logging(level: Optional[str] = None, log_to_file: Optional[bool] = None):
    """Configure logging for the library, the CLI and the API"""
    detailed_formatter = logging.Formatter(
        fmt='%(asctime)s | %(levelname)-8s | %(name)-20s | %(funcName)-20s | LINE:%(lineno)-4d | %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    console_formatter = logging.Formatter(
        fmt='%(asctime)s | %(levelname)-5s | %(name)-15s | %(message)s',
        datefmt='%H:%M:%S'
    )

    console_level = getattr(logging, (level or settings.LOG_LEVEL).upper(), logging.INFO)
    log_to_file = settings.LOG_TO_FILE if log_to_file is None else log_to_file

    handlers = []
    log_dir = None
    if log_to_file:
        try:
            log_dir = settings.LOG_DIR
            if not os.path.exists(log_dir):
                os.makedirs(log_dir)
            file_handler = logging.FileHandler(
                f"{log_dir}/soot_{datetime.now().strftime('%Y%m%d')}.log",
                encoding='utf-8'
            )
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(detailed_formatter)
            handlers.append(file_handler)
        except OSError as e:
            print(f"Warning: Could not create logs directory - {str(e)}")
            log_dir = None

    # Console goes to stderr so CLI output on stdout stays machine-readable
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(console_level)
    console_handler.setFormatter(console_formatter)
    handlers.append(console_handler)

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    root_logger.handlers.clear()
    for handler in handlers:
        root_logger.addHandler(handler)

    loggers_config = {
        'services.soot_solver': logging.DEBUG,
        'services.baseline_solver': logging.DEBUG,
        'services.prox_geometry': logging.DEBUG,
        'services.experiment_runner': logging.DEBUG,
        'sqlalchemy.engine': logging.WARNING,
        'uvicorn.access': logging.WARNING,
        'uvicorn.error': logging.INFO,
    }
    for logger_name, logger_level in loggers_config.items():
        logging.getLogger(logger_name).setLevel(logger_level)

    logger = logging.getLogger(__name__)
    logger.debug("=== LOGGING SYSTEM INITIALIZED ===")
    if log_dir and os.path.exists(log_dir):
        logger.debug(f"Log files created in: {os.path.abspath(log_dir)}")

    return True
