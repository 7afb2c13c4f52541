"""Coordinates, ship attitude sampling, rotations and direction cosines.

All angles are radians. Positions are float arrays of shape ``(3,)`` in the
global frame (metres), with ``z`` pointing up out of the water. The ship frame
carries the LED, photodiode and cameras; their common boresight is the
ship-frame ``-z`` axis, so a level ship looks straight down at the seabed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DomainError

BORESIGHT = np.array([0.0, 0.0, -1.0])


def vec3(x, y=None, z=None) -> np.ndarray:
    """Build a length-3 float array from a sequence or three scalars."""
    if y is None and z is None:
        v = np.asarray(x, dtype=float)
    else:
        v = np.array([x, y, z], dtype=float)
    if v.shape[-1:] != (3,):
        raise DomainError(f"expected a 3-vector, got shape {v.shape}")
    return v


def unit_between(frm, to) -> np.ndarray:
    """Unit vector pointing from ``frm`` to ``to`` (broadcasts over leading axes)."""
    d = np.asarray(to, dtype=float) - np.asarray(frm, dtype=float)
    n = np.linalg.norm(d, axis=-1, keepdims=True)
    if np.any(n == 0.0):
        raise DomainError("coincident points have no direction")
    return d / n


@dataclass(frozen=True)
class AttitudeModel:
    """Independent Gaussian roll/pitch/yaw with means and variances in rad / rad^2."""

    mean_roll: float = 0.0
    mean_pitch: float = 0.0
    mean_yaw: float = 0.0
    var_roll: float = 0.0
    var_pitch: float = 0.0
    var_yaw: float = 0.0

    def __post_init__(self):
        for name in ("var_roll", "var_pitch", "var_yaw"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ConfigError(f"variance must be finite and >= 0, got {v}", name)

    @classmethod
    def from_degrees(cls, std_deg=0.0, yaw_mean_deg=0.0) -> "AttitudeModel":
        """Equal spread on all three angles, given as a standard deviation in degrees."""
        var = np.deg2rad(std_deg) ** 2
        return cls(mean_yaw=float(np.deg2rad(yaw_mean_deg)),
                   var_roll=var, var_pitch=var, var_yaw=var)

    @property
    def means(self) -> np.ndarray:
        return np.array([self.mean_roll, self.mean_pitch, self.mean_yaw])

    @property
    def stds(self) -> np.ndarray:
        return np.sqrt([self.var_roll, self.var_pitch, self.var_yaw])

    @property
    def mean_attitude(self) -> "Attitude":
        return Attitude(self.mean_roll, self.mean_pitch, self.mean_yaw)


class Attitude(NamedTuple):
    """Roll, pitch and yaw in radians. Fields may be scalars or equal-shape arrays."""

    roll: float
    pitch: float
    yaw: float


def sample_attitude(model: AttitudeModel, rng: np.random.Generator, size=None) -> Attitude:
    """Draw roll, pitch, yaw independently from their Gaussians.

    Draw order is fixed (roll, pitch, yaw), so a given generator state always
    produces the same attitude. With ``size`` the fields are arrays.
    """
    z = rng.standard_normal((3,) if size is None else (3, size))
    m = model.means
    s = model.stds
    if size is None:
        vals = m + s * z
        return Attitude(float(vals[0]), float(vals[1]), float(vals[2]))
    vals = m[:, None] + s[:, None] * z
    return Attitude(vals[0], vals[1], vals[2])


def rotation_matrix(a: Attitude) -> np.ndarray:
    """Ship-to-world rotation ``Rz(yaw) @ Ry(pitch) @ Rx(roll)`` written out entrywise.

    Array-valued attitudes give a stack of shape ``(..., 3, 3)``.
    """
    r, p, y = (np.asarray(v, dtype=float) for v in a)
    cr, sr = np.cos(r), np.sin(r)
    cp, sp = np.cos(p), np.sin(p)
    cy, sy = np.cos(y), np.sin(y)
    q = np.stack([
        np.stack([cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr], axis=-1),
        np.stack([sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr], axis=-1),
        np.stack([-sp, cp * sr, cp * cr], axis=-1),
    ], axis=-2)
    return q


def boresight(q: np.ndarray) -> np.ndarray:
    """World-frame boresight for rotation(s) ``q``: minus the third column."""
    return -np.asarray(q)[..., :, 2]


def direction_cosine(q: np.ndarray, frm, to) -> np.ndarray | float:
    """Cosine between the rotated boresight at ``frm`` and the line ``frm -> to``.

    Level ship with the node straight below gives 1. Broadcasts over a stack
    of rotations and/or endpoint arrays.
    """
    u = unit_between(frm, to)
    c = np.einsum("...i,...i->...", boresight(q), u)
    c = np.clip(c, -1.0, 1.0)
    return float(c) if np.ndim(c) == 0 else c


def cosine_coefficients(unit_disp, yaw_mean: float) -> tuple[float, float, float]:
    """Small-angle coefficients ``(alpha_roll, alpha_pitch, c_bar)`` of the cosine.

    ``unit_disp`` points from the ship-mounted end to the far node. With a
    downward boresight the cosine is ``-(Q[:, 2] . u)``, so the standard
    coefficients are taken on the reversed vector ``w = -u``:
    ``alpha_roll = sin(yd) w_x - cos(yd) w_y``,
    ``alpha_pitch = cos(yd) w_x + sin(yd) w_y``, ``c_bar = w_z``.
    The yaw coefficient is identically zero.
    """
    w = -np.asarray(unit_disp, dtype=float)
    sd, cd = np.sin(yaw_mean), np.cos(yaw_mean)
    alpha_r = sd * w[..., 0] - cd * w[..., 1]
    alpha_p = cd * w[..., 0] + sd * w[..., 1]
    return alpha_r, alpha_p, w[..., 2]


def linearized_cosine(a: Attitude, unit_disp, yaw_mean: float):
    """First-order approximation of :func:`direction_cosine` in roll and pitch."""
    alpha_r, alpha_p, c_bar = cosine_coefficients(unit_disp, yaw_mean)
    return alpha_r * a.roll + alpha_p * a.pitch + c_bar


def cosine_moments(model: AttitudeModel, frm, to) -> tuple[float, float]:
    """Mean and variance of the linearized cosine under ``model``."""
    u = unit_between(frm, to)
    alpha_r, alpha_p, c_bar = cosine_coefficients(u, model.mean_yaw)
    mean = alpha_r * model.mean_roll + alpha_p * model.mean_pitch + c_bar
    var = alpha_r ** 2 * model.var_roll + alpha_p ** 2 * model.var_pitch
    return float(mean), float(var)
