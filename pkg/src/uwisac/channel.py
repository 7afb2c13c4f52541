"""Optical link gains: Lambertian geometric loss, concentrator, Beer's law, turbulence.

Seabed nodes (target, energy-harvesting sensor) face straight up. Ship-mounted
optics share the ship boresight from :mod:`uwisac.geometry`.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import ConfigError, DomainError

_UP = np.array([0.0, 0.0, 1.0])
_FOV_SLACK = 1e-12


class LinkRole(enum.Enum):
    """Which end of a link rides on the ship, and how the far end radiates.

    DOWNLINK: ship LED -> upward-facing seabed receiver.
    UPLINK: seabed LED aimed at the ship -> ship photodiode.
    REFLECTION: upward-facing Lambertian reflector -> ship camera.
    """

    DOWNLINK = "downlink"
    UPLINK = "uplink"
    REFLECTION = "reflection"


@dataclass(frozen=True)
class ChannelParams:
    half_power_angle: float = np.deg2rad(60.0)
    aperture_area: float = 1e-3
    tia_gain: float = 1.0
    refractive_index: float = 1.33
    fov: float = np.pi / 2
    attenuation_coeff: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.half_power_angle < np.pi / 2:
            raise ConfigError("must lie in (0, 90) degrees", "half_power_angle")
        if not 0.0 < self.fov <= np.pi / 2 + 1e-15:
            raise ConfigError("must lie in (0, 90] degrees", "fov")
        if self.aperture_area <= 0:
            raise ConfigError("must be > 0", "aperture_area")
        if self.attenuation_coeff < 0:
            raise ConfigError("must be >= 0", "attenuation_coeff")
        if self.tia_gain <= 0:
            raise ConfigError("must be > 0", "tia_gain")
        if self.refractive_index <= 0:
            raise ConfigError("must be > 0", "refractive_index")

    @property
    def lambertian_order(self) -> float:
        return -np.log(2.0) / np.log(np.cos(self.half_power_angle))


@dataclass(frozen=True)
class TurbulenceParams:
    """Log-normal fading ``h_t = exp(2X)``, ``X ~ N(mu_x, sigma_x2)``."""

    mu_x: float = -0.1
    sigma_x2: float = 0.1

    def __post_init__(self):
        if not self.sigma_x2 > 0:
            raise ConfigError("must be > 0", "sigma_x2")
        if self.scintillation_index >= 1.0:
            warnings.warn(
                f"scintillation index {self.scintillation_index:.3g} >= 1 is outside "
                "the weak-turbulence regime of the log-normal model",
                RuntimeWarning, stacklevel=3)

    @classmethod
    def normalized(cls, sigma_x2: float) -> "TurbulenceParams":
        """Unit-mean fading: ``mu_x = -sigma_x2``."""
        return cls(mu_x=-sigma_x2, sigma_x2=sigma_x2)

    @classmethod
    def from_scintillation(cls, scintillation_index: float) -> "TurbulenceParams":
        return cls.normalized(0.25 * np.log1p(scintillation_index))

    @property
    def scintillation_index(self) -> float:
        return float(np.expm1(4.0 * self.sigma_x2))

    @property
    def is_normalized(self) -> bool:
        return bool(np.isclose(self.mu_x, -self.sigma_x2, rtol=0, atol=1e-15))


def concentrator_gain(p: ChannelParams, cos_inc):
    """``n^2 / sin^2(FoV)`` inside the field of view (boundary included), else 0."""
    cos_inc = np.asarray(cos_inc, dtype=float)
    inside = cos_inc >= np.cos(p.fov) - _FOV_SLACK
    g = np.where(inside, p.refractive_index ** 2 / np.sin(p.fov) ** 2, 0.0)
    return float(g) if g.ndim == 0 else g


def geometric_loss(p: ChannelParams, cos_irr, cos_inc, d):
    """Line-of-sight Lambertian gain; 0 behind the source or outside the receiver FoV."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise DomainError("link distance must be > 0")
    cos_irr = np.asarray(cos_irr, dtype=float)
    cos_inc = np.asarray(cos_inc, dtype=float)
    m1 = p.lambertian_order
    lit = cos_irr > 0.0
    g = ((m1 + 1.0) * p.aperture_area / (2.0 * np.pi * d ** 2)
         * np.where(lit, np.abs(cos_irr), 0.0) ** m1
         * np.clip(cos_inc, 0.0, None) * p.tia_gain * concentrator_gain(p, cos_inc))
    g = np.where(lit, g, 0.0)
    return float(g) if g.ndim == 0 else g


def path_loss(attenuation_coeff: float, d):
    """Beer's law ``exp(-c d)``."""
    out = np.exp(-attenuation_coeff * np.asarray(d, dtype=float))
    return float(out) if out.ndim == 0 else out


def link_cosines(q, tx, rx, role: LinkRole):
    """Irradiance and incidence cosines of one link (broadcasts over stacked ``q``)."""
    tx = np.asarray(tx, dtype=float)
    rx = np.asarray(rx, dtype=float)
    if role is LinkRole.DOWNLINK:
        cos_irr = geometry.direction_cosine(q, tx, rx)
        cos_inc = geometry.unit_between(rx, tx) @ _UP
    elif role is LinkRole.UPLINK:
        cos_irr = np.ones(np.shape(geometry.direction_cosine(q, rx, tx)))
        cos_inc = geometry.direction_cosine(q, rx, tx)
    elif role is LinkRole.REFLECTION:
        cos_irr = geometry.unit_between(tx, rx) @ _UP
        cos_inc = geometry.direction_cosine(q, rx, tx)
    else:
        raise DomainError(f"unknown link role {role!r}")
    return cos_irr, cos_inc


def link_constant(p: ChannelParams, tx, rx, role: LinkRole) -> float:
    """Attitude-free factor of the deterministic gain.

    The gain equals ``constant * c**m1`` on the downlink (``c`` the LED
    irradiance cosine) and ``constant * c`` on the uplink and reflection paths
    (``c`` the ship-side incidence cosine), as long as the link stays lit and
    within the field of view.
    """
    tx = np.asarray(tx, dtype=float)
    rx = np.asarray(rx, dtype=float)
    d = float(np.linalg.norm(rx - tx))
    m1 = p.lambertian_order
    base = ((m1 + 1.0) * p.aperture_area / (2.0 * np.pi * d ** 2)
            * p.tia_gain * p.refractive_index ** 2 / np.sin(p.fov) ** 2
            * path_loss(p.attenuation_coeff, d))
    if role is LinkRole.DOWNLINK:
        return base * float(geometry.unit_between(rx, tx) @ _UP)
    if role is LinkRole.UPLINK:
        return base
    return base * float(geometry.unit_between(tx, rx) @ _UP) ** m1


def deterministic_gain(p: ChannelParams, q, tx, rx, role: LinkRole):
    """Geometric loss times Beer's-law path loss for the attitude(s) ``q``."""
    tx = np.asarray(tx, dtype=float)
    rx = np.asarray(rx, dtype=float)
    d = np.linalg.norm(rx - tx, axis=-1)
    if np.any(d == 0):
        raise DomainError("transmitter and receiver coincide")
    cos_irr, cos_inc = link_cosines(q, tx, rx, role)
    return geometric_loss(p, cos_irr, cos_inc, d) * path_loss(p.attenuation_coeff, d)


def sample_turbulence(t: TurbulenceParams, rng: np.random.Generator, size=None):
    """Log-normal fading coefficient(s) ``exp(2X)``."""
    x = rng.normal(t.mu_x, np.sqrt(t.sigma_x2), size)
    return np.exp(2.0 * x)


def turbulence_pdf(h, t: TurbulenceParams):
    h = np.asarray(h, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (np.exp(-(np.log(h) - 2.0 * t.mu_x) ** 2 / (8.0 * t.sigma_x2))
             / (2.0 * h * np.sqrt(2.0 * np.pi * t.sigma_x2)))
    return np.where(h > 0, f, 0.0)


def reciprocal_turbulence_moment(t: TurbulenceParams) -> float:
    """``E[1/h_t] = exp(-2 mu_x + 2 sigma_x2)``."""
    return float(np.exp(-2.0 * t.mu_x + 2.0 * t.sigma_x2))


def pdf_cos_theta(x, theta_bar: float, sigma_eff2: float):
    """Density of ``cos(theta)`` with ``theta ~ N(theta_bar, sigma_eff2)``.

    Zero outside the open interval (-1, 1), where the ``1/sqrt(1-x^2)`` factor blows up.
    """
    if sigma_eff2 <= 0:
        raise DomainError("sigma_eff2 must be > 0")
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    xs = np.where(inside, x, 0.0)
    s = np.sqrt(sigma_eff2)
    f = (np.exp(-(np.arccos(xs) - theta_bar) ** 2 / (2.0 * sigma_eff2))
         / (np.sqrt(2.0 * np.pi) * s * np.sqrt(1.0 - xs ** 2)))
    f = np.where(inside, f, 0.0)
    return float(f) if f.ndim == 0 else f


def pdf_g_downlink(g, K: float, m1: float, theta_bar: float, sigma_eff2: float):
    """Density of ``G = K cos(theta)**m1`` on (0, K)."""
    g = np.asarray(g, dtype=float)
    inside = (g > 0) & (g < K)
    gs = np.where(inside, g, 0.5 * K)
    ratio = (gs / K) ** (1.0 / m1)
    f = (pdf_cos_theta(ratio, theta_bar, sigma_eff2)
         / (m1 * K ** (1.0 / m1) * gs ** (1.0 - 1.0 / m1)))
    f = np.where(inside, f, 0.0)
    return float(f) if f.ndim == 0 else f


def pdf_g_uplink(g, K1: float, theta_bar: float, sigma_eff2: float):
    """Density of ``G = K1 cos(theta)`` on (0, K1)."""
    return pdf_g_downlink(g, K1, 1.0, theta_bar, sigma_eff2)
