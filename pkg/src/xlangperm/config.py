"""Run configuration shared by the command-line driver and scripts."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from .appscan import DEFAULT_REACH_BUDGET_SECONDS
from .cfg import CfgConfig
from .guards import DEFAULT_CHECK_FUNCTIONS, DEFAULT_DENIAL_CONSTANTS, DEFAULT_SECURITY_EXCEPTIONS, GuardConfig
from .mapping import DEFAULT_PATH_BUDGET

FORMATS = ("json", "csv")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    corpus_dirs: Tuple[str, ...] = ()
    app_dirs: Tuple[str, ...] = ()
    map_path: Optional[str] = None
    permdb_path: Optional[str] = None
    output_path: Optional[str] = None
    format: str = "json"
    api_package_prefixes: Tuple[str, ...] = ("android.",)
    denial_constants: Tuple[str, ...] = DEFAULT_DENIAL_CONSTANTS
    check_function_names: Tuple[str, ...] = DEFAULT_CHECK_FUNCTIONS
    security_exceptions: Tuple[str, ...] = DEFAULT_SECURITY_EXCEPTIONS
    path_budget: int = DEFAULT_PATH_BUDGET
    reach_budget_seconds: float = DEFAULT_REACH_BUDGET_SECONDS
    per_path: bool = False
    debug_dump: Optional[str] = None
    fail_on_findings: bool = False

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}, not {self.format!r}")
        if self.path_budget < 1:
            raise ConfigError("path_budget must be positive")
        if self.reach_budget_seconds <= 0:
            raise ConfigError("reach_budget_seconds must be positive")

    @property
    def cfg(self) -> CfgConfig:
        return CfgConfig(
            tuple(self.api_package_prefixes),
            GuardConfig(tuple(self.denial_constants), tuple(self.check_function_names), tuple(self.security_exceptions)),
        )

    def to_json(self) -> Dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(self).items()}

    @classmethod
    def from_json(cls, data: Dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        known = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        values = {}
        for k, v in data.items():
            default = known[k].default
            values[k] = tuple(v) if isinstance(default, tuple) and isinstance(v, list) else v
        return cls(**values)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


def load_config(path: Union[str, Path]) -> RunConfig:
    return RunConfig.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
