"""Scenario configuration: a YAML document validated into typed, fully-defaulted models.

All times are integer nanoseconds, sizes are bytes, distances are meters.
"""

from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import Any, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator


class Scheme(str, Enum):
    SEPARATED = "separated"
    SDU = "sdu"
    CE = "ce"
    HYBRID = "hybrid"


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class ChannelConfig(_Model):
    dl_delay_ns: int = Field(5_000, ge=0)
    ul_delay_ns: int = Field(5_000, ge=0)
    asymmetry_ns: int = 0
    jitter: Literal["none", "uniform", "normal"] = "none"
    jitter_a: float = 0.0
    jitter_b: float = 0.0
    loss_prob: float = Field(0.0, ge=0.0, le=1.0)
    ns_per_byte: float = Field(0.0, ge=0.0)


class ClockConfig(_Model):
    offset_range_ns: float = Field(1_000_000.0, ge=0)
    skew_range_ppm: float = Field(10.0, ge=0)
    rw_sigma: float = Field(10.0, ge=0, description="random-walk noise, ns per sqrt(s)")
    max_skew_ppm: float = Field(1000.0, gt=0)

    @model_validator(mode="after")
    def _skew_within_bound(self):
        if self.skew_range_ppm > self.max_skew_ppm:
            raise ValueError("skew_range_ppm exceeds max_skew_ppm")
        return self


class SyncConfig(_Model):
    precision_target_ns: int = Field(2_000, gt=0)
    timeliness_target_ns: int = Field(20_000_000, gt=0)
    base_period_ns: int = Field(100_000_000, gt=0)
    sqi_scaling: List[Tuple[int, float]] = [(85, 1.0), (170, 0.5), (255, 0.25)]
    phy_timestamping: bool = True
    timestamp_error_ns: int = Field(500, ge=0)
    s3_hold_ns: int = Field(5_000_000, ge=0)
    msg_budget_ns: int = Field(2_000_000, gt=0)
    session_timeout_ns: int = Field(40_000_000, gt=0)
    first_sync_window_ns: int = Field(100_000_000, gt=0)
    baseline_period_ns: int = Field(100_000_000, gt=0)
    h_base: int = Field(40, ge=0)


class CommConfig(_Model):
    packet_bytes: int = Field(100, gt=0, le=1400)
    period_ns: int = Field(20_000_000, gt=0)
    max_latency_ns: int = Field(10_000_000, gt=0)
    throughput_fraction: float = Field(0.95, ge=0.0, le=1.0)


class GridConfig(_Model):
    tti_ns: int = Field(500_000, gt=0)
    n_blocks: int = Field(16, gt=0)
    block_bytes: int = Field(128, gt=0)
    capacity_multiplier: int = Field(1, ge=1)
    urgency_ttis: float = Field(2.0, gt=0)
    upper_header_bytes: int = Field(4, ge=0)
    piggyback: bool = True


class ClusterConfig(_Model):
    ce_budget: int = Field(16, ge=0)
    max_radius_m: float = Field(25.0, gt=0)
    max_cluster_size: int = Field(32, ge=1, le=63)
    area_m: float = Field(150.0, gt=0)
    p_ref_ns: float = Field(100.0, gt=0)
    l_ref_ns: float = Field(1_000_000.0, gt=0)


class MetricsConfig(_Model):
    lam: float = Field(0.5, ge=0.0, le=1.0)
    percentile: float = Field(95.0, gt=0.0, le=100.0)
    sample_period_ns: int = Field(10_000_000, gt=0)


class GridSweep(_Model):
    precision_targets_ns: List[int] = Field(min_length=1)
    comm_latencies_ns: List[int] = Field(min_length=1)

    @field_validator("precision_targets_ns", "comm_latencies_ns")
    @classmethod
    def _positive(cls, v):
        if any(x <= 0 for x in v):
            raise ValueError("requirement values must be positive")
        return v


class AxisSweep(_Model):
    axis: str
    values: List[float] = Field(min_length=1)


class ExperimentConfig(_Model):
    kind: Literal["run", "grid", "sweep"] = "run"
    schemes: List[Scheme] = [Scheme.SEPARATED, Scheme.HYBRID]
    grid: Optional[GridSweep] = None
    sweep: Optional[AxisSweep] = None

    @model_validator(mode="after")
    def _consistent(self):
        if self.kind == "grid" and self.grid is None:
            raise ValueError("kind 'grid' needs a 'grid' section")
        if self.kind == "sweep" and self.sweep is None:
            raise ValueError("kind 'sweep' needs a 'sweep' section")
        if self.kind == "sweep":
            check_axis(self.sweep.axis)
        return self


class ScenarioConfig(_Model):
    seed: int = Field(1, ge=0)
    n_ues: int = Field(50, ge=1, le=65535)
    scheme: Scheme = Scheme.HYBRID
    duration_ns: int = Field(1_150_000_000, gt=0)
    warmup_ns: int = Field(150_000_000, ge=0)
    channel: ChannelConfig = ChannelConfig()
    clock: ClockConfig = ClockConfig()
    sync: SyncConfig = SyncConfig()
    comm: CommConfig = CommConfig()
    grid: GridConfig = GridConfig()
    cluster: ClusterConfig = ClusterConfig()
    metrics: MetricsConfig = MetricsConfig()
    experiment: ExperimentConfig = ExperimentConfig()

    @model_validator(mode="after")
    def _window(self):
        if self.warmup_ns >= self.duration_ns:
            raise ValueError("warmup_ns must be shorter than duration_ns")
        return self


class ConfigError(ValueError):
    """Raised with field-level diagnostics when a scenario does not validate."""

    def __init__(self, problems: list):
        self.problems = problems
        super().__init__("; ".join(problems))


SWEEPABLE = {
    "seed", "n_ues", "duration_ns", "warmup_ns",
    "channel.dl_delay_ns", "channel.ul_delay_ns", "channel.asymmetry_ns", "channel.loss_prob",
    "clock.offset_range_ns", "clock.skew_range_ppm", "clock.rw_sigma",
    "sync.precision_target_ns", "sync.timeliness_target_ns", "sync.base_period_ns",
    "sync.s3_hold_ns", "sync.msg_budget_ns", "sync.h_base", "sync.baseline_period_ns",
    "comm.packet_bytes", "comm.period_ns", "comm.max_latency_ns",
    "grid.n_blocks", "grid.block_bytes", "grid.tti_ns", "grid.upper_header_bytes",
    "cluster.ce_budget", "cluster.max_radius_m", "cluster.max_cluster_size", "cluster.area_m",
    "metrics.lam",
}


def check_axis(axis: str) -> str:
    if axis not in SWEEPABLE:
        raise ValueError(f"unknown sweep axis {axis!r}; sweepable: {', '.join(sorted(SWEEPABLE))}")
    return axis


def _diagnostics(err: ValidationError) -> list:
    out = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        out.append(f"{loc}: {e['msg']}")
    return out


def parse_config(data: Any) -> ScenarioConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(["<root>: expected a mapping"])
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_diagnostics(err)) from None


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"<file>: {exc}"]) from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"<yaml>: {exc}"]) from None
    return parse_config(data)


def to_dict(cfg: ScenarioConfig) -> dict:
    return cfg.model_dump(mode="json")


def dump_config(cfg: ScenarioConfig) -> str:
    """YAML with every default materialised."""
    return yaml.safe_dump(to_dict(cfg), sort_keys=False)


def with_value(cfg: ScenarioConfig, dotted: str, value) -> ScenarioConfig:
    """Copy of ``cfg`` with one dotted field replaced (and re-validated)."""
    data = to_dict(cfg)
    node = data
    parts = dotted.split(".")
    for p in parts[:-1]:
        node = node[p]
    old = node[parts[-1]]
    if (isinstance(old, int) and not isinstance(old, bool) and isinstance(value, (int, float))
            and float(value).is_integer()):
        value = int(value)
    node[parts[-1]] = value
    return parse_config(data)
