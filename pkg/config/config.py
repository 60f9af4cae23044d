from pathlib import Path
from pydantic import ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from utils.constants import DEFAULT_SEED
from utils.exceptions import ConfigurationError
from utils.validators import validate_log_level

BASE_DIR = Path(__file__).resolve().parent.parent
ENV_FILE = BASE_DIR / ".env"

class LabSettings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=str(ENV_FILE),
        env_file_encoding="utf-8",
        env_prefix="MIMOLAB_",
        extra="ignore",
        case_sensitive=False,
    )

    LOG_LEVEL: str = "INFO"
    LOG_DIR: Path = BASE_DIR / "logs"
    OUTPUT_DIR: Path = BASE_DIR / "results"
    THREADS: int = 1
    SEED: int = DEFAULT_SEED

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level is one of the allowed values"""
        return validate_log_level(v)

    @field_validator("THREADS")
    @classmethod
    def positive_threads(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"THREADS must be at least 1, got {v}")
        return v

    @field_validator("SEED")
    @classmethod
    def seed_fits_u64(cls, v: int) -> int:
        if not 0 <= v < 2**64:
            raise ValueError(f"SEED must fit in an unsigned 64-bit integer, got {v}")
        return v

try:
    settings = LabSettings()
except ValidationError as e:
    raise ConfigurationError("Invalid .env file configuration", context={"errors": e.errors()}) from e
