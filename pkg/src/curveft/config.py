"""Experiment configs: one dataclass per command, loaded from JSON with unknown keys rejected."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class ConfigError(ValueError):
    pass


class _Loadable:
    @classmethod
    def from_dict(cls, data: dict):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys for {cls.__name__}: {unknown}")
        cfg = cls(**data)
        cfg.check()
        return cfg

    def check(self):
        pass

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def sha256(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class BaseConfig(_Loadable):
    surface: dict = field(default_factory=dict)
    window: Optional[dict] = None
    seed: int = 0
    c_nyq: float = 6.0
    atol: Optional[float] = None

    def check(self):
        if not self.surface:
            raise ConfigError("config needs a 'surface' entry")
        if self.c_nyq <= 0:
            raise ConfigError("c_nyq must be positive")

    @property
    def ft_options(self) -> dict:
        return {"c_nyq": self.c_nyq, "atol": self.atol}


@dataclass
class SurfaceInfoConfig(BaseConfig):
    samples_per_axis: int = 64


@dataclass
class FTScanConfig(BaseConfig):
    scan: dict = field(default_factory=dict)
    max_norm: float = 1000.0

    def check(self):
        super().check()
        if not self.scan:
            raise ConfigError("ft-scan needs a 'scan' entry (ray, grid or points)")


@dataclass
class SPCompareConfig(BaseConfig):
    direction: list = field(default_factory=list)
    radii: object = field(default_factory=lambda: {"start": 10.0, "stop": 100.0, "num": 12, "spacing": "geometric"})
    relative: bool = True
    xi_min: float = 5.0

    def check(self):
        super().check()
        if not self.direction:
            raise ConfigError("sp-compare needs a 'direction'")

    def radius_list(self):
        r = self.radii
        if isinstance(r, dict):
            unknown = set(r) - {"start", "stop", "num", "spacing"}
            if unknown:
                raise ConfigError(f"unknown radii keys {sorted(unknown)}")
            make = np.geomspace if r.get("spacing", "geometric") == "geometric" else np.linspace
            return make(float(r["start"]), float(r["stop"]), int(r["num"]))
        return np.asarray(r, dtype=float)


@dataclass
class HemisphereConfig(_Loadable):
    d: int = 4
    xi: object = field(default_factory=lambda: {"start": 10.0, "stop": 100.0, "num": 901})
    symmetry_samples: int = 0
    symmetry_radius: float = 20.0
    seed: int = 0

    def check(self):
        if self.d < 2:
            raise ConfigError("d must be at least 2")

    def xi_list(self):
        if isinstance(self.xi, dict):
            return np.linspace(float(self.xi["start"]), float(self.xi["stop"]), int(self.xi["num"]))
        return np.asarray(self.xi, dtype=float)


@dataclass
class CoverageConfig(BaseConfig):
    region: Optional[str] = None  # None: whole surface; "window": superlevel set of the window
    angular_resolution: float = math.pi / 64
    angular_tol: float = 1e-3

    def check(self):
        super().check()
        if self.region not in (None, "window"):
            raise ConfigError("region must be null or 'window'")


@dataclass
class FrameConfig(BaseConfig):
    spectrum: dict = field(default_factory=dict)
    H: dict = field(default_factory=dict)
    max_cond: float = 1e12
    partial_sum_radii: Optional[list] = None

    def check(self):
        super().check()
        if not self.spectrum or not self.H:
            raise ConfigError("frame needs 'spectrum' and 'H' spectrum specs")


COMMAND_CONFIGS = {
    "surface-info": SurfaceInfoConfig,
    "ft-scan": FTScanConfig,
    "sp-compare": SPCompareConfig,
    "hemisphere": HemisphereConfig,
    "coverage": CoverageConfig,
    "frame": FrameConfig,
}


def load_config(command: str, path: str):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        return COMMAND_CONFIGS[command].from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
