"""Settings from the environment and the key=value simulation config format.

Environment variables:
    GTHYP_ENUMERATION_CAP  Max subset evaluations for exact mode (default: 10^8)
    GTHYP_THREADS          Worker threads (default: 1)
    GTHYP_OUTPUT_DIR       Directory for results and manifests (default: ./results)

Config files are flat `key = value` lines; `#` starts a comment. Lists are
comma-separated and `a..b` is an inclusive integer range, so
`weights = 1..3, 5` means [1, 2, 3, 5].
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from gthyp.core import DEFAULT_ENUMERATION_CAP
from gthyp.errors import InputError, ParseError
from gthyp.harness import SearchConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Settings:
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    threads: int = 1
    output_dir: Path = Path("results")


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{name} must be an integer, got {raw!r}") from None
    if value < 1:
        raise InputError(f"{name} must be >= 1, got {value}")
    return value


def load_settings() -> Settings:
    return Settings(
        enumeration_cap=_env_int("GTHYP_ENUMERATION_CAP", DEFAULT_ENUMERATION_CAP),
        threads=_env_int("GTHYP_THREADS", 1),
        output_dir=Path(os.environ.get("GTHYP_OUTPUT_DIR", "results")),
    )


# ── key=value parsing ──────────────────────────────────────────────


def parse_key_values(text: str, path: str | None = None) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", line=lineno, path=path)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ParseError("missing key before '='", line=lineno, path=path)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", line=lineno, path=path)
        values[key] = value
    return values


def parse_int_list(value: str) -> list[int]:
    """Parse '1..3, 5' into [1, 2, 3, 5]."""
    items: list[int] = []
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = (int(p) for p in part.split("..", 1))
                if hi < lo:
                    raise InputError(f"empty range {part!r}")
                items.extend(range(lo, hi + 1))
            else:
                items.append(int(part))
        except ValueError:
            raise InputError(f"not an integer or range: {part!r}") from None
    return items


class SimulationConfig(BaseModel):
    """Validated contents of a simulation config file."""

    model_config = ConfigDict(extra="forbid")

    s: int = Field(ge=1)
    t: int = Field(ge=2)
    N: list[int] = Field(min_length=1)
    rules: list[Literal["WDR", "COMP"]] = Field(default=["WDR", "COMP"], min_length=1)
    weights: list[int] | None = None
    thresholds: list[int] | None = None
    repeats: int = Field(default=1000, ge=1)
    master_seed: int = Field(ge=0, lt=2**64)
    method: Literal["exact", "monte-carlo"] = "exact"
    trials: int | None = Field(default=None, ge=1)
    cap: int | None = Field(default=None, ge=1)

    @field_validator("N", "weights", "thresholds", mode="before")
    @classmethod
    def _split_ints(cls, value):
        if isinstance(value, str):
            return parse_int_list(value)
        return value

    @field_validator("rules", mode="before")
    @classmethod
    def _split_rules(cls, value):
        if isinstance(value, str):
            return [part.strip().upper() for part in value.split(",") if part.strip()]
        return value

    @field_validator("N")
    @classmethod
    def _positive_sizes(cls, value: list[int]) -> list[int]:
        if any(n < 1 for n in value):
            raise ValueError("every N must be >= 1")
        return value

    @model_validator(mode="after")
    def _check_method(self):
        if self.method == "monte-carlo" and self.trials is None:
            raise ValueError("method = monte-carlo needs trials")
        if self.s + 1 > self.t:
            raise ValueError(f"need s + 1 <= t, got s={self.s}, t={self.t}")
        return self

    def scenarios(self, cap: int | None = None) -> list[SearchConfig]:
        """One SearchConfig per (N, rule), in file order."""
        configs = []
        for n in self.N:
            weights = tuple(w for w in (self.weights or range(1, n + 1)) if 1 <= w <= n)
            thresholds = tuple(T for T in (self.thresholds or range(n + 1)) if 0 <= T <= n)
            for rule in self.rules:
                configs.append(SearchConfig(
                    s=self.s,
                    t=self.t,
                    N=n,
                    rule=rule,
                    weights=weights,
                    thresholds=thresholds if rule == "WDR" else (),
                    repeats=self.repeats,
                    master_seed=self.master_seed,
                    method=self.method,
                    trials=self.trials,
                    cap=self.cap if self.cap is not None else cap,
                ))
        return configs


def load_simulation_config(path: str | Path) -> SimulationConfig:
    path = Path(path)
    values = parse_key_values(path.read_text(encoding="utf-8"), path=str(path))
    try:
        return SimulationConfig.model_validate(values)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        raise InputError(f"{path}: invalid config: {problems}") from None
