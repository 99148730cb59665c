"""Run configuration: config file, command-line flags and environment fallbacks."""
import json
import math
import os
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from entities.decoder import (
    BOXPLUS_EXACT,
    BOXPLUS_MIN,
    PATH_METRIC_APPROX,
    PATH_METRIC_EXACT,
    STOP_FIXED,
    STOP_GMATRIX,
    DecoderConfig,
    SclConfig,
)
from entities.errors import ParameterError
from entities.reports import StopRule

SEED_ENV = "POLARFLOOR_SEED"
WORKERS_ENV = "POLARFLOOR_WORKERS"

BOXPLUS_FLAGS = {"exact": BOXPLUS_EXACT, "min": BOXPLUS_MIN}
STOPPING_FLAGS = {"fixed": STOP_FIXED, "gmatrix": STOP_GMATRIX}
PATH_METRIC_FLAGS = {"exact": PATH_METRIC_EXACT, "approx": PATH_METRIC_APPROX}


def parse_grid(text: str) -> List[float]:
    """``start:step:stop`` (inclusive) or a single value, in dB."""
    parts = [p.strip() for p in str(text).split(":")]
    try:
        values = [float(p) for p in parts]
    except ValueError as e:
        raise ParameterError(f"Invalid SNR grid '{text}'") from e
    if not all(math.isfinite(v) for v in values):
        raise ParameterError(f"SNR grid '{text}' must be finite")
    if len(values) == 1:
        return values
    if len(values) != 3:
        raise ParameterError(f"SNR grid must be start:step:stop, got '{text}'")
    start, step, stop = values
    if step <= 0 or stop < start:
        raise ParameterError(f"SNR grid '{text}' must be strictly increasing")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]


def parse_int_list(text: str) -> List[int]:
    """Comma-separated integers such as ``0,16``."""
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as e:
        raise ParameterError(f"Expected a comma-separated list of integers, got '{text}'") from e


class RunConfig(BaseModel):
    """Every knob a simulation command reads, from any source."""

    model_config = ConfigDict(extra="forbid")

    code: Optional[str] = None
    snr: Optional[str] = None
    decoder: Literal["bp", "sc", "scl"] = "bp"
    llr_max: float = Field(20.0, gt=0)
    max_iters: int = Field(200, ge=1)
    boxplus: Literal["exact", "min"] = "min"
    alpha: float = Field(1.0, gt=0, le=1)
    stopping: Literal["fixed", "gmatrix"] = "gmatrix"
    precision: Literal["f32", "f64"] = "f32"
    list_size: int = Field(32, ge=1)
    path_metric: Literal["exact", "approx"] = "exact"
    all_zero: bool = False
    min_frames: int = Field(1000, ge=0)
    min_block_errors: int = Field(100, ge=0)
    max_frames: int = Field(1_000_000, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    workers: int = Field(1, ge=1)
    chunk_frames: int = Field(256, ge=1)
    out: Optional[str] = None
    # collect and mitigate
    testset: Optional[str] = None
    count: Optional[int] = Field(None, ge=1)
    llr_max_pass: float = Field(100.0, gt=0)
    llr_max_fail: float = Field(20.0, gt=0)
    strategy: Optional[str] = None
    genie: bool = False
    sigma_v2: float = Field(0.36, ge=0)
    attempts: int = Field(5, ge=1)
    perms: Optional[int] = Field(None, ge=1)

    @field_validator("snr")
    @classmethod
    def _check_grid(cls, value: Optional[str]) -> Optional[str]:
        if value is not None:
            parse_grid(value)
        return value

    def value_or(self, key: str, default: Any) -> Any:
        """The value of ``key`` if a flag or the config file set it, else ``default``."""
        return getattr(self, key) if key in self.model_fields_set else default

    @property
    def grid(self) -> List[float]:
        if self.snr is None:
            raise ParameterError("An SNR grid is required (--snr start:step:stop)")
        return parse_grid(self.snr)

    def decoder_config(self, llr_max: Optional[float] = None) -> Union[DecoderConfig, SclConfig]:
        """Decoder for the selected family; ``llr_max`` overrides the clipping value."""
        if self.decoder == "sc":
            return SclConfig(list_size=1, path_metric=PATH_METRIC_FLAGS[self.path_metric])
        if self.decoder == "scl":
            return SclConfig(list_size=self.list_size, path_metric=PATH_METRIC_FLAGS[self.path_metric])
        return DecoderConfig(
            llr_max=self.llr_max if llr_max is None else llr_max,
            max_iters=self.max_iters,
            boxplus_mode=BOXPLUS_FLAGS[self.boxplus],
            alpha=self.alpha,
            stopping=STOPPING_FLAGS[self.stopping],
            precision=self.precision,
        )

    def stop_rule(self) -> StopRule:
        return StopRule(
            min_frames=self.min_frames,
            min_block_errors=self.min_block_errors,
            max_frames=self.max_frames,
        )


def read_config_file(path: Optional[str]) -> Dict[str, Any]:
    """JSON object from ``path``, or an empty dict when no path is given."""
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ParameterError(f"Cannot read config file '{path}': {e}") from e
    if not isinstance(data, dict):
        raise ParameterError(f"Config file '{path}' must hold a JSON object")
    return data


def resolve_config(config_path: Optional[str] = None, **flags: Any) -> RunConfig:
    """Merge config file and flags (flags win), then fill seed and workers from the environment."""
    merged = read_config_file(config_path)
    merged.update({key: value for key, value in flags.items() if value is not None})
    for key, env in (("seed", SEED_ENV), ("workers", WORKERS_ENV)):
        if key not in merged and os.getenv(env):
            merged[key] = os.getenv(env)
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        raise ParameterError(f"Invalid configuration: {e}") from e
