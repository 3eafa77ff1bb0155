"""Pipeline configuration: one frozen dataclass tree, loadable from TOML."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .engine import GridConfig
from .gripper import GripperModel
from .quality import QualityConfig
from .sampling import SamplingConfig


@dataclass(frozen=True)
class EngineConfig:
    """Landscape/projection knobs plus the cylinder-grouping defaults."""

    aggregation: str = "feasible-ratio"
    projection_cutoff: float = 0.01
    voxel_size: float = 0.005
    spacing: float = 0.005
    group_radius: float = 0.05
    group_height: tuple[float, float] = (-0.02, 0.04)
    group_count: int = 16

    def __post_init__(self):
        if self.projection_cutoff <= 0 or self.voxel_size <= 0 or self.spacing <= 0:
            raise ValueError("cutoff, voxel size and spacing must be positive")
        if self.group_radius <= 0 or self.group_count < 1:
            raise ValueError("invalid grouping parameters")
        if not self.group_height[0] < self.group_height[1]:
            raise ValueError("group height range must be increasing")


@dataclass(frozen=True)
class Config:
    grid: GridConfig = GridConfig()
    gripper: GripperModel = GripperModel()
    quality: QualityConfig = QualityConfig()
    sampling: SamplingConfig = SamplingConfig()
    engine: EngineConfig = EngineConfig()
    seed: int = 0


_SECTIONS = {
    "grid": GridConfig,
    "gripper": GripperModel,
    "quality": QualityConfig,
    "sampling": SamplingConfig,
    "engine": EngineConfig,
}


def _build_section(cls, values: dict, section: str):
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(values) - allowed)
    if unknown:
        raise ValueError(f"unknown key(s) in [{section}]: {', '.join(unknown)}")
    kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in values.items()}
    return cls(**kwargs)


def config_from_dict(data: dict) -> Config:
    """Build a Config from nested dicts; unknown sections or keys are errors."""
    unknown = sorted(set(data) - set(_SECTIONS) - {"seed"})
    if unknown:
        raise ValueError(f"unknown config section(s): {', '.join(unknown)}")
    kwargs = {}
    for name, cls in _SECTIONS.items():
        if name in data:
            if not isinstance(data[name], dict):
                raise ValueError(f"[{name}] must be a table")
            kwargs[name] = _build_section(cls, data[name], name)
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ValueError("seed must be a non-negative integer")
    return Config(seed=seed, **kwargs)


def config_to_dict(config: Config) -> dict:
    out = {name: dataclasses.asdict(getattr(config, name))
           for name in _SECTIONS}
    for section in out.values():
        for key, val in section.items():
            if isinstance(val, tuple):
                section[key] = list(val)
    out["seed"] = config.seed
    return out


def load_config(path) -> Config:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return config_from_dict(data)
