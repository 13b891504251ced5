"""
Application Configuration Module

This module handles all configuration settings using Pydantic Settings.
Settings are loaded from environment variables (prefix ``EVSP_``) and the
project's .env file.
"""

from pydantic_settings import BaseSettings
from pydantic import Field
from functools import lru_cache
from typing import Literal, Optional
from pathlib import Path

# Get the project root directory (parent of app/)
PROJECT_ROOT = Path(__file__).parent.parent
ENV_FILE_PATH = PROJECT_ROOT / ".env"

KNOWN_BACKENDS = ("highs",)


class Settings(BaseSettings):
    """
    Application settings loaded from environment variables.

    All settings can be overridden by setting the corresponding
    environment variable, e.g. ``EVSP_TIME_LIMIT_SECONDS=600``
    (case-insensitive).
    """

    # ===========================================
    # Application Settings
    # ===========================================
    debug: bool = Field(
        default=True,
        description="Enable debug mode (disables the rotating log file)"
    )
    log_level: str = Field(
        default="INFO",
        description="Logging level"
    )
    log_file: Optional[str] = Field(
        default="logs/evsp.log",
        description="Rotating log file used when debug is off"
    )

    # ===========================================
    # Solver Configuration
    # ===========================================
    milp_backend: str = Field(
        default="highs",
        description="MILP backend used by every model build"
    )
    time_limit_seconds: float = Field(
        default=3600.0,
        gt=0,
        description="Time limit for a full solve"
    )
    threads: int = Field(
        default=1,
        ge=1,
        description="Solver threads per session"
    )
    maxrun_seconds: float = Field(
        default=720.0,
        gt=0,
        description="Budget of the bounded incumbent solve inside RCBVF"
    )
    solver_output: bool = Field(
        default=False,
        description="Forward the backend's own console log"
    )
    evsp3_greedy_warm_start: bool = Field(
        default=True,
        description="Warm-start plain EVSP3 runs with the greedy construction"
    )
    presolve: Literal["choose", "on", "off"] = Field(
        default="choose",
        description="Backend presolve; off sidesteps presolve defects of newer highspy releases"
    )

    # ===========================================
    # Numerical Tolerances
    # ===========================================
    zero_tolerance: float = Field(
        default=1e-9,
        description="LP values at or below this are treated as zero when fixing"
    )
    integrality_tolerance: float = Field(
        default=1e-6,
        description="Allowed distance of implicit binaries from {0, 1}"
    )
    energy_tolerance: float = Field(
        default=1e-6,
        description="Energy comparison tolerance in battery-capacity units"
    )
    reduced_cost_margin: float = Field(
        default=1e-6,
        description="Relative safety margin for reduced-cost fixing"
    )

    # ===========================================
    # Instance Generator Defaults
    # ===========================================
    grid_vehicle_percent: int = Field(
        default=50,
        ge=0,
        le=100,
        description="Vehicles per station as a percentage of capacity (rounded up)"
    )
    grid_charger_percent: int = Field(
        default=50,
        ge=0,
        le=100,
        description="Charging spaces per station as a percentage of capacity (rounded up)"
    )

    # ===========================================
    # Oracle Limits
    # ===========================================
    oracle_max_customers: int = Field(default=8, description="Oracle customer cap")
    oracle_max_vehicles: int = Field(default=3, description="Oracle vehicle cap")
    oracle_max_demands: int = Field(default=12, description="Oracle demand cap")

    # ===========================================
    # Benchmark Settings
    # ===========================================
    bench_workers: int = Field(
        default=1,
        ge=1,
        description="Worker processes for batch runs"
    )

    class Config:
        """Pydantic configuration"""
        env_file = str(ENV_FILE_PATH)
        env_file_encoding = "utf-8"
        env_prefix = "EVSP_"
        case_sensitive = False


@lru_cache()
def get_settings() -> Settings:
    """
    Get cached settings instance.

    Uses lru_cache to ensure settings are only loaded once
    and reused across the application.

    Returns:
        Settings: Application settings instance
    """
    return Settings()


def validate_settings() -> dict:
    """
    Validate that the configured settings are usable.

    Returns:
        dict: Validation results with status, issues and warnings
    """
    settings = get_settings()
    issues = []
    warnings = []

    if settings.milp_backend.lower() not in KNOWN_BACKENDS:
        issues.append(f"EVSP_MILP_BACKEND={settings.milp_backend!r} (known: {', '.join(KNOWN_BACKENDS)})")

    if settings.maxrun_seconds > settings.time_limit_seconds:
        warnings.append("EVSP_MAXRUN_SECONDS exceeds EVSP_TIME_LIMIT_SECONDS")
    if settings.threads != 1:
        warnings.append("EVSP_THREADS != 1 (benchmark protocol expects a single thread)")

    return {
        "valid": len(issues) == 0,
        "issues": issues,
        "warnings": warnings
    }
