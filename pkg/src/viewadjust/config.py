"""Pipeline configuration: one JSON file with typed sections, overridable
per-run by CLI flags. Unknown keys are rejected to catch typos early.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .adjuster import AdjusterTrainConfig
from .nn import TrunkSpec
from .pseudo import PseudoLabelConfig
from .scorer import ScorerTrainConfig


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8330
    max_image_bytes: int = 16 * 1024 * 1024
    source_cache_size: int = 32

    def __post_init__(self):
        if self.max_image_bytes <= 0 or self.source_cache_size <= 0:
            raise ValueError("service limits must be positive")


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    trunk: TrunkSpec = field(default_factory=TrunkSpec)
    scorer: ScorerTrainConfig = field(default_factory=ScorerTrainConfig)
    pseudo: PseudoLabelConfig = field(default_factory=PseudoLabelConfig)
    adjuster: AdjusterTrainConfig = field(default_factory=AdjusterTrainConfig)
    evaluation_fpr: float = 0.3
    sample_size: int = 64
    service: ServiceConfig = field(default_factory=ServiceConfig)

    def __post_init__(self):
        if not 0.0 < self.evaluation_fpr <= 1.0:
            raise ValueError(f"evaluation fpr must be in (0, 1], got {self.evaluation_fpr}")
        if self.sample_size <= 0:
            raise ValueError("sample_size must be positive")


_SECTION_KEYS = {
    "seed", "trunk", "scorer", "pseudo", "adjuster", "evaluation_fpr", "sample_size", "service",
}


def config_from_json(obj: dict) -> PipelineConfig:
    unknown = set(obj) - _SECTION_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")

    def section(name, cls, **extra):
        data = dict(obj.get(name, {}))
        data.update(extra)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ValueError(f"bad {name} section: {exc}") from exc

    trunk = TrunkSpec.from_json(obj["trunk"]) if "trunk" in obj else TrunkSpec()
    pseudo_raw = dict(obj.get("pseudo", {}))
    if "grid" in pseudo_raw:
        raise ValueError("pseudo.grid is not configurable from file")
    return PipelineConfig(
        seed=int(obj.get("seed", 0)),
        trunk=trunk,
        scorer=section("scorer", ScorerTrainConfig),
        pseudo=PseudoLabelConfig(margin=float(pseudo_raw.get("margin", 0.2))),
        adjuster=section("adjuster", AdjusterTrainConfig),
        evaluation_fpr=float(obj.get("evaluation_fpr", 0.3)),
        sample_size=int(obj.get("sample_size", 64)),
        service=section("service", ServiceConfig),
    )


def load_config(path=None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    with open(path) as f:
        return config_from_json(json.load(f))
