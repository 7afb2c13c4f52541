"""Scenario configuration: defaults, YAML loading, validation and hashing.

Files are YAML mappings with the sections listed in ``SCHEMA``. Angles are
given in degrees and converted to radians on load. Every key is optional;
missing keys take the defaults below, unknown keys are rejected.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import yaml

from .channel import ChannelParams, TurbulenceParams
from .energy_rate import EhParams
from .errors import ConfigError
from .geometry import AttitudeModel
from .sensing import CONDITION_LIMIT, CameraArray

ATTITUDE_DRAWS = ("shared", "independent")
ANGLE_METHODS = ("windowed", "full")

# section -> key -> default. Keys ending in _deg are angles in degrees.
SCHEMA: dict[str, dict[str, object]] = {
    "positions": {
        "access_point": [0.0, 0.0, 10.0],
        "target": [2.0, 2.0, 0.0],
        "eh_sensor": [-2.0, -2.0, 0.0],
    },
    "attitude": {
        "roll_std_deg": 10.0,
        "pitch_std_deg": 10.0,
        "yaw_std_deg": 10.0,
        "roll_mean_deg": 0.0,
        "pitch_mean_deg": 0.0,
        "yaw_mean_deg": 0.0,
    },
    "channel": {
        "half_power_angle_deg": 60.0,
        "aperture_area": 1e-3,
        "tia_gain": 1.0,
        "refractive_index": 1.33,
        "fov_deg": 90.0,
        "attenuation_coeff": 0.1,
    },
    "reflection": {
        "half_power_angle_deg": 20.0,
    },
    "turbulence": {
        "sigma_x2": 0.1,
        "mu_x": -0.1,
    },
    "camera": {
        "grid_side": 3,
        "spacing_x": 2.0,
        "spacing_y": 2.0,
        "focal_x": 0.05,
        "focal_y": 0.05,
        "cam_area": 1e-3,
        "eta": 1.5e-10,
        "pixel_noise_variance_base": 1e-6,
        "target_reflectivity": 0.5,
    },
    "eh": {
        "fill_factor": 0.9,
        "thermal_voltage": 0.025,
        "pv_responsivity": 0.9,
        "dark_current": 1e-9,
        "pd_responsivity": 0.5,
        "noise_var": 1e-27,
        "frame_duration": 1.0,
        "alpha": 0.5,
        "p_dl": 1.0,
    },
    "simulation": {
        "seed": 0,
        "mse_trials": 100_000,
        "rate_trials": 10_000,
        "quadrature_orders": [30, 40, 40],
        "angle_quadrature": "windowed",
        "attitude_draws": "shared",
        "condition_limit": CONDITION_LIMIT,
        "workers": 1,
    },
}

_INT_KEYS = {"grid_side", "seed", "mse_trials", "rate_trials", "workers"}
_STR_KEYS = {"angle_quadrature", "attitude_draws"}
_VEC_KEYS = {"access_point", "target", "eh_sensor"}


def default_dict() -> dict:
    return json.loads(json.dumps(SCHEMA))


def _coerce(section, key, value):
    where = f"{section}.{key}"
    if key in _VEC_KEYS:
        try:
            v = [float(x) for x in value]
        except (TypeError, ValueError):
            raise ConfigError("expected a list of 3 numbers", where) from None
        if len(v) != 3 or not all(np.isfinite(v)):
            raise ConfigError("expected a list of 3 finite numbers", where)
        return v
    if key == "quadrature_orders":
        if isinstance(value, str):
            value = value.split(",")
        try:
            v = [int(x) for x in value]
        except (TypeError, ValueError):
            raise ConfigError("expected three integers N1,N2,N3", where) from None
        if len(v) != 3 or min(v) < 1:
            raise ConfigError("expected three integers >= 1", where)
        return v
    if key in _STR_KEYS:
        return str(value)
    if isinstance(value, bool):
        raise ConfigError("expected a number", where)
    if key in _INT_KEYS:
        try:
            iv = int(value)
        except (TypeError, ValueError):
            raise ConfigError("expected an integer", where) from None
        if iv != float(value):
            raise ConfigError("expected an integer", where)
        return iv
    try:
        # PyYAML reads "1e-3" as a string, so go through float()
        fv = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {value!r}", where) from None
    if not np.isfinite(fv):
        raise ConfigError("must be finite", where)
    return fv


def merge_overrides(overrides: dict | None) -> dict:
    """Defaults updated with ``overrides``; unknown sections/keys raise."""
    data = default_dict()
    if overrides is None:
        return data
    if not isinstance(overrides, dict):
        raise ConfigError("top level must be a mapping")
    for section, values in overrides.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section (allowed: {', '.join(SCHEMA)})", section)
        if values is None:
            continue
        if not isinstance(values, dict):
            raise ConfigError("section must be a mapping", section)
        for key, value in values.items():
            if key not in SCHEMA[section]:
                raise ConfigError("unknown key", f"{section}.{key}")
            data[section][key] = _coerce(section, key, value)
    return data


@dataclass(frozen=True)
class SystemConfig:
    """A fully resolved scenario. Build with :func:`from_dict` or :func:`load_config`."""

    data: dict = field(repr=False)

    def __post_init__(self):
        # touch every derived object so invalid values fail at construction
        self.attitude, self.channel, self.reflection, self.turbulence
        self.camera, self.eh
        sim = self.data["simulation"]
        if sim["attitude_draws"] not in ATTITUDE_DRAWS:
            raise ConfigError(f"must be one of {ATTITUDE_DRAWS}", "simulation.attitude_draws")
        if sim["angle_quadrature"] not in ANGLE_METHODS:
            raise ConfigError(f"must be one of {ANGLE_METHODS}", "simulation.angle_quadrature")
        for key in ("mse_trials", "rate_trials", "workers"):
            if sim[key] < 1:
                raise ConfigError("must be >= 1", f"simulation.{key}")
        if not 0 <= sim["seed"] < 2 ** 64:
            raise ConfigError("must be an unsigned 64-bit integer", "simulation.seed")
        if not sim["condition_limit"] > 1:
            raise ConfigError("must be > 1", "simulation.condition_limit")
        if not 0 < self.target_reflectivity <= 1:
            raise ConfigError("must lie in (0, 1]", "camera.target_reflectivity")
        pos = self.data["positions"]
        for a, b in (("access_point", "target"), ("access_point", "eh_sensor")):
            if pos[a] == pos[b]:
                raise ConfigError(f"coincides with {a}", f"positions.{b}")

    @classmethod
    def from_dict(cls, overrides: dict | None = None) -> "SystemConfig":
        return cls(merge_overrides(overrides))

    def to_dict(self) -> dict:
        return json.loads(json.dumps(self.data))

    def replace(self, **changes) -> "SystemConfig":
        """Copy with ``section__key=value`` style changes, e.g. ``eh__alpha=0.3``."""
        data = self.to_dict()
        for name, value in changes.items():
            section, _, key = name.partition("__")
            if section not in SCHEMA or key not in SCHEMA[section]:
                raise ConfigError("unknown key", f"{section}.{key}")
            data[section][key] = _coerce(section, key, value)
        return SystemConfig(data)

    def config_hash(self) -> str:
        blob = json.dumps(self.data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    # -- derived domain objects -------------------------------------------
    @cached_property
    def p_ap(self) -> np.ndarray:
        return np.array(self.data["positions"]["access_point"])

    @cached_property
    def p_target(self) -> np.ndarray:
        return np.array(self.data["positions"]["target"])

    @cached_property
    def p_eh(self) -> np.ndarray:
        return np.array(self.data["positions"]["eh_sensor"])

    @cached_property
    def attitude(self) -> AttitudeModel:
        a = self.data["attitude"]
        for k in ("roll_std_deg", "pitch_std_deg", "yaw_std_deg"):
            if a[k] < 0:
                raise ConfigError("must be >= 0", f"attitude.{k}")
        r = np.deg2rad
        return AttitudeModel(
            mean_roll=float(r(a["roll_mean_deg"])), mean_pitch=float(r(a["pitch_mean_deg"])),
            mean_yaw=float(r(a["yaw_mean_deg"])),
            var_roll=float(r(a["roll_std_deg"]) ** 2), var_pitch=float(r(a["pitch_std_deg"]) ** 2),
            var_yaw=float(r(a["yaw_std_deg"]) ** 2))

    def _channel(self, section, **override) -> ChannelParams:
        c = dict(self.data["channel"], **override)
        try:
            return ChannelParams(
                half_power_angle=float(np.deg2rad(c["half_power_angle_deg"])),
                aperture_area=c["aperture_area"], tia_gain=c["tia_gain"],
                refractive_index=c["refractive_index"], fov=float(np.deg2rad(c["fov_deg"])),
                attenuation_coeff=c["attenuation_coeff"])
        except ConfigError as exc:
            raise ConfigError(str(exc).split(": ", 1)[-1], f"{section}.{exc.field}") from None

    @cached_property
    def channel(self) -> ChannelParams:
        """LED and photodiode links (AP <-> target, AP <-> EH sensor)."""
        return self._channel("channel")

    @cached_property
    def reflection(self) -> ChannelParams:
        """Target-to-camera path: the channel constants with the reflector's own beam width."""
        return self._channel(
            "reflection", half_power_angle_deg=self.data["reflection"]["half_power_angle_deg"])

    @cached_property
    def turbulence(self) -> TurbulenceParams:
        t = self.data["turbulence"]
        try:
            return TurbulenceParams(mu_x=t["mu_x"], sigma_x2=t["sigma_x2"])
        except ConfigError as exc:
            raise ConfigError(str(exc).split(": ", 1)[-1], f"turbulence.{exc.field}") from None

    @cached_property
    def camera(self) -> CameraArray:
        c = self.data["camera"]
        try:
            return CameraArray.grid(
                c["grid_side"], c["spacing_x"], c["spacing_y"], focal_x=c["focal_x"],
                focal_y=c["focal_y"], cam_area=c["cam_area"], eta=c["eta"],
                pixel_noise_base=c["pixel_noise_variance_base"])
        except ConfigError as exc:
            raise ConfigError(str(exc).split(": ", 1)[-1], f"camera.{exc.field}") from None

    @cached_property
    def eh(self) -> EhParams:
        try:
            return EhParams(**self.data["eh"])
        except ConfigError as exc:
            raise ConfigError(str(exc).split(": ", 1)[-1], f"eh.{exc.field}") from None

    @property
    def target_reflectivity(self) -> float:
        return self.data["camera"]["target_reflectivity"]

    @property
    def seed(self) -> int:
        return self.data["simulation"]["seed"]

    @property
    def mse_trials(self) -> int:
        return self.data["simulation"]["mse_trials"]

    @property
    def rate_trials(self) -> int:
        return self.data["simulation"]["rate_trials"]

    @property
    def quadrature_orders(self) -> tuple[int, int, int]:
        return tuple(self.data["simulation"]["quadrature_orders"])

    @property
    def angle_quadrature(self) -> str:
        return self.data["simulation"]["angle_quadrature"]

    @property
    def attitude_draws(self) -> str:
        return self.data["simulation"]["attitude_draws"]

    @property
    def condition_limit(self) -> float:
        return self.data["simulation"]["condition_limit"]

    @property
    def workers(self) -> int:
        return self.data["simulation"]["workers"]


def load_config(path) -> SystemConfig:
    """Read a YAML scenario file; an empty file gives the defaults."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}", str(path)) from None
    try:
        overrides = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}", str(path)) from None
    return SystemConfig.from_dict(overrides or {})
