# app/config.py

from pathlib import Path
from typing import Literal, Optional

from pydantic_settings import BaseSettings, SettingsConfigDict

from app.constants import (
    DEFAULT_MAX_PARALLELISM,
    DEFAULT_POLICY_MAX_IN_FLIGHT,
    DEFAULT_POLICY_TIMEOUT_SECONDS,
    DEFAULT_TRAJECTORY_TAIL,
    PROJECT_NAME,
)


class Settings(BaseSettings):
    PROJECT_NAME: str = PROJECT_NAME
    LOG_LEVEL: str = "INFO"
    PYTHON_ENV: str = "dev"

    # Remote policies
    BEAP_POLICY_ENDPOINT: Optional[str] = None
    POLICY_TIMEOUT_SECONDS: float = DEFAULT_POLICY_TIMEOUT_SECONDS
    POLICY_MAX_IN_FLIGHT: int = DEFAULT_POLICY_MAX_IN_FLIGHT
    POLICY_TRAJECTORY_TAIL: int = DEFAULT_TRAJECTORY_TAIL

    # Harness
    WORLD_DIR: Path = Path("worlds")
    OUTPUT_DIR: Path = Path("runs")
    MAX_PARALLELISM: int = DEFAULT_MAX_PARALLELISM

    # Policy server
    SERVER_POLICY: Literal["oracle", "scripted"] = "scripted"

    model_config = SettingsConfigDict(env_file=".env", extra="ignore")


settings = Settings()
