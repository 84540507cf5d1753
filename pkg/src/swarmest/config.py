"""Experiment configuration: defaults, validation and flat-file round trip.

The file format is a flat TOML document; section headers are allowed and
ignored (keys are global). Precedence is command line > file > defaults.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .consensus import ConsensusParams
from .dispersion import DispersionParams
from .environment import FieldKind, ReferenceRegion, RegionShape, ScalarField, load_grid_field
from .errors import ConfigError
from .swarm import MotionParams


class Scenario(str, enum.Enum):
    DISPERSE = "disperse"
    CONSENSUS_STATIC = "consensus-static"
    FULL = "full"
    CONTROL = "control"


@dataclass
class ExperimentConfig:
    scenario: str = "full"
    n: int = 40
    # environment
    field: str = "radial_cone"
    field_center_x: float = 0.0
    field_center_y: float = 0.0
    field_slope: float = 1.0
    field_offset: float = 0.0
    grid_file: str = ""
    region_shape: str = "disk"
    region_size: float = 30.0
    noise_fraction: float = 0.02  # sensor noise sd = fraction * slope * region radius
    gt_resolution: float = 0.25
    # network / sensing
    r_comm: float = 10.0
    r_cover: float = 5.0
    cell: float = 0.25
    range_noise: float = 0.1
    # motion
    speed: float = 1.0
    turn_rate: float = math.pi / 4
    dt: float = 1.0
    heading_noise: float = 0.05
    init_radius: float = 10.0
    # dispersion
    d_thr: float = 7.0
    hysteresis: float = 2.0
    straight_run: int = 5
    tumble_prob: float = 0.1
    max_turn_ticks: int = 4
    stop_below: bool = False
    tether: float | None = 8.5
    tether_degree: int = 0
    avoid_approach: bool = True
    approach_margin: float = 0.7
    algorithm: str = "connected"  # dispersion walk: connected | diffusion
    wait_timeout: int = 50
    # consensus
    alpha: float = 0.5
    t_comm: int = 100
    delta: float = 1e-4
    freeze_samples: bool = False
    raw_passage: bool = False
    cbpt_fresh_samples: bool = False  # feed samples taken while moving into the consensus update
    # CBPT; None means "sensor noise sd"
    cbpt_tol: float | None = None
    stop_band: float | None = None
    patience_limit: int = 5
    # control experiment
    t_sw: int = 20
    # run control
    ticks: int = 900
    seed: int = 0
    seeds: int = 1
    mc: int = 200
    sweep_range: str = "0.05:0.5:20"
    workers: int = 1
    trajectory: bool = False
    out: str = ""

    def __post_init__(self):
        self._coerce()

    # -- construction --------------------------------------------------
    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_mapping(cls, data: dict, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        known = set(cls.field_names())
        unknown = sorted(k for k in data if k not in known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}", unknown[0])
        current = dataclasses.asdict(base) if base is not None else {}
        current.update(data)
        return cls(**current)

    @classmethod
    def from_file(cls, path, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        raw = tomllib.loads(Path(path).read_text())
        flat: dict = {}
        for key, value in raw.items():
            if isinstance(value, dict):  # section header; keys stay global
                for k, v in value.items():
                    flat[k] = v
            else:
                flat[key] = value
        return cls.from_mapping(flat, base)

    def to_toml(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:  # dropping the key would bring back a non-None default
                lines.append(f'{f.name} = "none"')
            elif isinstance(v, bool):
                lines.append(f"{f.name} = {'true' if v else 'false'}")
            elif isinstance(v, (int, float)):
                lines.append(f"{f.name} = {v!r}")
            else:
                lines.append(f'{f.name} = "{v}"')
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def _coerce(self):
        for f in fields(self):
            v = getattr(self, f.name)
            typ = f.type
            try:
                if typ == "bool":
                    if isinstance(v, str):
                        if v.lower() not in ("true", "false", "1", "0", "yes", "no"):
                            raise ValueError(v)
                        v = v.lower() in ("true", "1", "yes")
                    v = bool(v)
                elif typ == "int":
                    if isinstance(v, float) and not v.is_integer():
                        raise ValueError(v)
                    v = int(v)
                elif typ == "float":
                    v = float(v)
                elif typ == "float | None":
                    if isinstance(v, str) and v.lower() in ("none", "auto", ""):
                        v = None
                    v = None if v is None else float(v)
                elif typ == "str":
                    v = str(v)
            except (TypeError, ValueError):
                raise ConfigError(f"cannot interpret {v!r} as {typ}", f.name) from None
            setattr(self, f.name, v)

    # -- validation ----------------------------------------------------
    def validate(self) -> "ExperimentConfig":
        def bound(name, ok, desc):
            if not ok:
                raise ConfigError(f"value {getattr(self, name)!r} violates {desc}", name)

        try:
            Scenario(self.scenario)
        except ValueError:
            raise ConfigError(f"unknown scenario {self.scenario!r}", "scenario") from None
        try:
            FieldKind(self.field)
        except ValueError:
            raise ConfigError(f"unknown field kind {self.field!r}", "field") from None
        try:
            RegionShape(self.region_shape)
        except ValueError:
            raise ConfigError(f"unknown region shape {self.region_shape!r}", "region_shape") from None
        bound("field", self.field != "grid" or self.grid_file, "grid fields need grid_file")
        bound("algorithm", self.algorithm in ("connected", "diffusion"), "one of connected|diffusion")
        bound("n", self.n >= 1, "n >= 1")
        bound("region_size", self.region_size > 0, "region_size > 0")
        bound("noise_fraction", self.noise_fraction >= 0, "noise_fraction >= 0")
        bound("gt_resolution", 0 < self.gt_resolution, "gt_resolution > 0")
        bound("r_comm", self.r_comm > 0, "r_comm > 0")
        bound("r_cover", self.r_cover > 0, "r_cover > 0")
        bound("cell", 0 < self.cell <= self.r_cover / 5, "0 < cell <= r_cover / 5")
        bound("range_noise", self.range_noise >= 0, "range_noise >= 0")
        bound("init_radius", self.init_radius >= 0, "init_radius >= 0")
        bound("wait_timeout", self.wait_timeout >= 1, "wait_timeout >= 1")
        bound("patience_limit", self.patience_limit >= 1, "patience_limit >= 1")
        bound("cbpt_tol", self.cbpt_tol is None or self.cbpt_tol >= 0, "cbpt_tol >= 0")
        bound("stop_band", self.stop_band is None or self.stop_band >= 0, "stop_band >= 0")
        bound("t_sw", self.t_sw >= 1, "t_sw >= 1")
        bound("ticks", self.ticks >= 0, "ticks >= 0")
        bound("seeds", self.seeds >= 1, "seeds >= 1")
        bound("mc", self.mc >= 1, "mc >= 1")
        bound("workers", self.workers >= 1, "workers >= 1")
        bound("ticks", self.scenario != "full" or self.ticks >= self.t_comm, "ticks >= t_comm")
        self.sweep_ratios()
        self.motion_params()
        self.dispersion_params().validate(self.r_comm, self.speed * self.dt)
        self.consensus_params()
        if self.field != "grid":
            ReferenceRegion(RegionShape(self.region_shape), self.region_size)
        return self

    # -- component views ----------------------------------------------
    def build_field(self) -> ScalarField:
        if self.field == FieldKind.GRID.value:
            return load_grid_field(self.grid_file)
        return ScalarField(
            FieldKind(self.field),
            center=(self.field_center_x, self.field_center_y),
            slope=self.field_slope,
            offset=self.field_offset,
        )

    def build_region(self) -> ReferenceRegion:
        return ReferenceRegion(
            RegionShape(self.region_shape), self.region_size, (self.field_center_x, self.field_center_y)
        )

    def sensor_noise_sd(self) -> float:
        return self.noise_fraction * abs(self.field_slope) * self.build_region().characteristic_radius

    def motion_params(self) -> MotionParams:
        return MotionParams(self.speed, self.turn_rate, self.dt, self.heading_noise)

    def dispersion_params(self) -> DispersionParams:
        return DispersionParams(
            threshold=self.d_thr,
            hysteresis=self.hysteresis,
            straight_run=self.straight_run,
            tumble_prob=self.tumble_prob,
            max_turn_ticks=self.max_turn_ticks,
            stop_below=self.stop_below,
            tether=self.tether,
            tether_degree=self.tether_degree,
            avoid_approach=self.avoid_approach,
            approach_margin=self.approach_margin,
        )

    def consensus_params(self) -> ConsensusParams:
        return ConsensusParams(self.alpha, self.t_comm, self.delta)

    def sweep_ratios(self) -> list[float]:
        parts = self.sweep_range.split(":")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except (IndexError, ValueError):
            raise ConfigError("expected 'start:stop:count'", "sweep_range") from None
        if len(parts) != 3 or count < 1 or not 0 < lo <= hi <= math.sqrt(2):
            raise ConfigError("expected 'start:stop:count' with 0 < start <= stop <= sqrt(2)", "sweep_range")
        if count == 1:
            return [lo]
        return [float(v) for v in (lo + (hi - lo) * i / (count - 1) for i in range(count))]

    def seed_list(self) -> list[int]:
        return [self.seed + i for i in range(self.seeds)]
