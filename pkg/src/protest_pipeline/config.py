"""Key=value configuration for the pipeline and its services."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .crawler import DEFAULT_USER_AGENT


class ConfigError(ValueError):
    pass


@dataclass
class PipelineConfig:
    # fetch policy
    per_host_delay: float = 2.0
    timeout: float = 20.0
    max_pages_per_source: int = 50
    max_parallel_hosts: int = 8
    user_agent: str = DEFAULT_USER_AGENT
    respect_robots: bool = True
    # signatures
    shingle_w: int = 5
    minhash_k: int = 256
    minhash_seed: int = 0x5EED_C0DE
    # association thresholds
    j_min: float = 0.8
    r_max: float = 0.1
    nilsimsa_hint: int = 54
    # queue grouping
    group_cut: float = 0.5
    diff_floor: float = 0.5
    # models
    hash_dim: int = 2**18
    learning_rate: float = 1e-3
    l2: float = 1e-5
    batch_size: int = 12
    iterations: int = 10_000
    eval_every: int = 500
    max_fpr: float = 0.017
    skip_threshold: float | None = None
    top_k_tags: int = 10
    # duplicates
    dup_radius_km: float = 25.0
    # paths
    source_list: str = ""
    model_dir: str = ""
    seed: int = 0

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        values: dict[str, str] = {}
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"bad config line (expected key=value): {line!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
        return cls.from_dict(values)

    @classmethod
    def from_dict(cls, values: dict[str, str]) -> "PipelineConfig":
        config = cls()
        fields = {f.name: f for f in dataclasses.fields(cls)}
        for key, raw in values.items():
            if key not in fields:
                raise ConfigError(f"unknown config key {key!r}")
            current = getattr(config, key)
            target = fields[key].type
            try:
                if target == "bool" or isinstance(current, bool):
                    parsed: object = raw.lower() in ("1", "true", "yes", "on")
                elif isinstance(current, int) and current is not None:
                    parsed = int(raw, 0)
                elif isinstance(current, float) or key == "skip_threshold":
                    parsed = float(raw)
                else:
                    parsed = raw
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
            setattr(config, key, parsed)
        return config
