import logging
import os
import sys
from pathlib import Path
from typing import Dict, Optional

from pydantic import BaseModel, ValidationError

from singlet.domain import value

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class InvalidConfigError(ValueError):
    pass


# ---- Settings ----
class Settings(BaseModel):
    series_tail_tol: float = value.EvalContext.DEFAULT_TAIL_TOL
    quad_abs_tol: float = value.EvalContext.DEFAULT_QUAD_TOL
    precision_digits: int = value.EvalContext.DEFAULT_PRECISION
    max_terms: int = value.EvalContext.DEFAULT_MAX_TERMS
    log_level: str = "WARNING"

    def updated(self, overrides: Dict[str, object]) -> "Settings":
        """A copy with `overrides` applied; None entries are ignored."""
        merged = self.model_dump()
        merged.update({key: item for key, item in overrides.items() if item is not None})
        try:
            settings = Settings(**merged)
        except ValidationError as error:
            raise InvalidConfigError(f"Invalid configuration: {error}") from error
        if settings.log_level.upper() not in LOG_LEVELS:
            raise InvalidConfigError(f"Unknown log level {settings.log_level!r}; choose from {LOG_LEVELS}")
        return settings


# Configuration
def from_environment(base: Optional[Settings] = None) -> Settings:
    return (base or Settings()).updated(
        {
            "precision_digits": os.getenv("SINGLET_PRECISION"),
            "log_level": os.getenv("SINGLET_LOG_LEVEL"),
        }
    )


def from_config_file(path: str, base: Settings) -> Settings:
    """key=value lines; blank lines and # comments are skipped."""
    try:
        text = Path(path).read_text()
    except OSError as error:
        raise InvalidConfigError(f"Cannot read config file {path}: {error}") from error
    entries: Dict[str, object] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidConfigError(f"{path}:{number}: expected key=value, but was given: {line!r}")
        key, item = (part.strip() for part in line.split("=", 1))
        if key not in Settings.model_fields:
            raise InvalidConfigError(f"{path}:{number}: unknown key {key!r}")
        entries[key] = item
    return base.updated(entries)


def configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main() -> None:
    from singlet.adapters import cli

    sys.exit(cli.run(sys.argv[1:]))


if __name__ == "__main__":
    main()
