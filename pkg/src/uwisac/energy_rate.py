"""Harvest-use energy accounting and the uplink achievable rate."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import channel, geometry
from . import rng as rng_mod
from .errors import ConfigError, DomainError, QuadratureError
from .quadrature import gauss_hermite, gauss_legendre


@dataclass(frozen=True)
class EhParams:
    """PV harvester, uplink photodiode and frame timing.

    ``noise_var`` is the receiver AWGN variance in A^2. ``alpha`` is the fraction
    of each frame spent on downlink power transfer and sensing.
    """

    fill_factor: float = 0.9
    thermal_voltage: float = 0.025
    pv_responsivity: float = 0.9
    dark_current: float = 1e-9
    pd_responsivity: float = 0.5
    noise_var: float = 1e-27
    frame_duration: float = 1.0
    alpha: float = 0.5
    p_dl: float = 1.0

    def __post_init__(self):
        for name in ("fill_factor", "thermal_voltage", "pv_responsivity", "dark_current",
                     "pd_responsivity", "noise_var", "frame_duration"):
            if not getattr(self, name) > 0:
                raise ConfigError("must be > 0", name)
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"must lie in (0, 1], got {self.alpha}", "alpha")
        if self.p_dl < 0:
            raise ConfigError("must be >= 0", "p_dl")


def harvested_energy(p: EhParams, h_ae, p_dl=None, alpha=None):
    """Energy collected by the PV cell during the ``alpha T`` slot (joules)."""
    p_dl = p.p_dl if p_dl is None else p_dl
    alpha = p.alpha if alpha is None else alpha
    h_ae = np.asarray(h_ae, dtype=float)
    if np.any(h_ae < 0):
        raise DomainError("channel gain must be >= 0")
    i_ph = p.pv_responsivity * h_ae * p_dl
    e = (p.fill_factor * p.thermal_voltage * alpha * p.frame_duration
         * i_ph * np.log1p(i_ph / p.dark_current))
    return float(e) if e.ndim == 0 else e


def uplink_power(p: EhParams, e_h, alpha=None):
    """Harvested energy spread over the ``(1 - alpha) T`` uplink slot (watts)."""
    alpha = p.alpha if alpha is None else alpha
    if alpha >= 1.0:
        raise ConfigError("alpha = 1 leaves no uplink slot", "alpha")
    out = np.asarray(e_h, dtype=float) / ((1.0 - alpha) * p.frame_duration)
    return float(out) if out.ndim == 0 else out


def instantaneous_rate(p: EhParams, h_ea, p_ul, alpha=None):
    """Lower bound on the uplink rate for an intensity-modulated channel (bit/s/Hz)."""
    alpha = p.alpha if alpha is None else alpha
    h_ea = np.asarray(h_ea, dtype=float)
    if np.any(h_ea < 0):
        raise DomainError("channel gain must be >= 0")
    snr = np.e / (2.0 * np.pi) * (p.pd_responsivity * h_ea * np.asarray(p_ul)) ** 2 / p.noise_var
    r = 0.5 * (1.0 - alpha) * np.log2(1.0 + snr)
    return float(r) if np.ndim(r) == 0 else r


def rate_constants(p: EhParams, alpha=None, p_dl=None) -> tuple[float, float]:
    """``(kappa1, kappa2)`` such that the instantaneous SNR is

    ``kappa1 * h^4 * g_ea^2 * g_ae^2 * ln(1 + kappa2 * h * g_ae)^2``

    for a common fading draw ``h`` and deterministic gains ``g_ae``, ``g_ea``.
    """
    alpha = p.alpha if alpha is None else alpha
    p_dl = p.p_dl if p_dl is None else p_dl
    kappa1 = (np.e * (p.pd_responsivity * p.pv_responsivity * p.fill_factor
                      * p.thermal_voltage * alpha * p_dl) ** 2
              / (2.0 * np.pi * (1.0 - alpha) ** 2 * p.noise_var))
    kappa2 = p.pv_responsivity * p_dl / p.dark_current
    return float(kappa1), float(kappa2)


def rate_from_gains(p: EhParams, h_ae, h_ea, alpha=None, p_dl=None):
    """Compose harvested energy, uplink power and rate for given channel gains."""
    alpha = p.alpha if alpha is None else alpha
    if alpha >= 1.0:
        # no uplink slot; the (1 - alpha) prefactor wins over the growing power
        return 0.0 if np.ndim(h_ea) == 0 else np.zeros(np.shape(h_ea))
    e_h = harvested_energy(p, h_ae, p_dl=p_dl, alpha=alpha)
    return instantaneous_rate(p, h_ea, uplink_power(p, e_h, alpha=alpha), alpha=alpha)


def rate_trials(cfg, rng: np.random.Generator, n: int, alpha: float, p_dl: float):
    """Per-frame uplink rates from exact geometry and one fading draw per frame."""
    # fixed draw order: attitude, fading, optional second attitude for the uplink
    att = geometry.sample_attitude(cfg.attitude, rng, n)
    fade = channel.sample_turbulence(cfg.turbulence, rng, n)
    q_dl = geometry.rotation_matrix(att)
    if cfg.attitude_draws == "independent":
        q_ul = geometry.rotation_matrix(geometry.sample_attitude(cfg.attitude, rng, n))
    else:
        q_ul = q_dl
    g_ae = channel.deterministic_gain(cfg.channel, q_dl, cfg.p_ap, cfg.p_eh, channel.LinkRole.DOWNLINK)
    g_ea = channel.deterministic_gain(cfg.channel, q_ul, cfg.p_eh, cfg.p_ap, channel.LinkRole.UPLINK)
    return rate_from_gains(cfg.eh, g_ae * fade, g_ea * fade, alpha=alpha, p_dl=p_dl)


def _rate_block(cfg, rng, n, alpha, p_dl):
    r = rate_trials(cfg, rng, n, alpha, p_dl)
    return n, math.fsum(r), math.fsum(r * r)


def monte_carlo_rate(cfg, trials: int | None = None, point: int = 0):
    """Average uplink rate over attitude and fading; returns a ``MonteCarloEstimate``."""
    from .sensing import _combine

    trials = cfg.rate_trials if trials is None else trials
    parts = rng_mod.run_blocks(_rate_block, cfg, rng_mod.RATE, point, trials,
                               cfg.workers, cfg.eh.alpha, cfg.eh.p_dl)
    return _combine(parts, trials)


def _angle_rule(n, theta_bar, sigma, method):
    """Gauss-Legendre nodes/weights for an angle integral over (0, pi/2).

    ``"full"`` spreads the nodes over the whole quarter circle; ``"windowed"``
    restricts them to ``theta_bar +- 8 sigma`` (clipped to the quarter circle),
    outside which the Gaussian weight is below ``exp(-32)``.
    """
    lo, hi = 0.0, 0.5 * np.pi
    if method == "windowed":
        lo = max(lo, theta_bar - 8.0 * sigma)
        hi = min(hi, theta_bar + 8.0 * sigma)
        if hi <= lo:
            raise QuadratureError("mean irradiance angle lies outside (0, pi/2)")
    return gauss_legendre(n).mapped(lo, hi)


def analytic_rate(cfg, orders=None, alpha=None, p_dl=None, angle_method=None) -> float:
    """Average uplink rate by nested Gauss quadrature.

    Hermite over the log-fading, Legendre over the irradiance angles of the
    uplink (order ``N2``) and downlink (order ``N3``), each weighted by the
    sine-weighted Gaussian gain densities and their Jacobians.
    """
    n1, n2, n3 = cfg.quadrature_orders if orders is None else orders
    alpha = cfg.eh.alpha if alpha is None else alpha
    p_dl = cfg.eh.p_dl if p_dl is None else p_dl
    angle_method = cfg.angle_quadrature if angle_method is None else angle_method
    if not 0.0 < alpha < 1.0:
        raise ConfigError("must lie in (0, 1)", "alpha")
    kappa1, kappa2 = rate_constants(cfg.eh, alpha=alpha, p_dl=p_dl)
    m1 = cfg.channel.lambertian_order
    K = channel.link_constant(cfg.channel, cfg.p_ap, cfg.p_eh, channel.LinkRole.DOWNLINK)
    K1 = channel.link_constant(cfg.channel, cfg.p_eh, cfg.p_ap, channel.LinkRole.UPLINK)

    # both links see the ship-side attitude cosine toward the harvester
    mu, var = geometry.cosine_moments(cfg.attitude, cfg.p_ap, cfg.p_eh)
    if not (np.isfinite(var) and var > 0):
        raise QuadratureError("effective angle variance must be > 0")
    if not 0.0 < mu < 1.0:
        raise QuadratureError("mean direction cosine must lie in (0, 1)")
    tb_dl = tb_ul = float(np.arccos(mu))
    var_dl = var_ul = var

    turb = cfg.turbulence
    x, wx = gauss_hermite(n1).gaussian(2.0 * turb.mu_x, 2.0 * np.sqrt(turb.sigma_x2))

    th1, w1 = _angle_rule(n2, tb_ul, np.sqrt(var_ul), angle_method)
    g_ea = K1 * np.cos(th1)
    w1 = w1 * channel.pdf_g_uplink(g_ea, K1, tb_ul, var_ul) * K1 * np.sin(th1)

    th, w = _angle_rule(n3, tb_dl, np.sqrt(var_dl), angle_method)
    g_ae = K * np.cos(th) ** m1
    w = w * channel.pdf_g_downlink(g_ae, K, m1, tb_dl, var_dl) * K * m1 * np.cos(th) ** (m1 - 1) * np.sin(th)

    h = np.exp(x)[:, None, None]
    ge = g_ea[None, :, None]
    ga = g_ae[None, None, :]
    snr = kappa1 * h ** 4 * ge ** 2 * ga ** 2 * np.log1p(kappa2 * h * ga) ** 2
    vals = np.log2(1.0 + snr)
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(w)) and np.all(np.isfinite(w1))):
        raise QuadratureError("non-finite integrand; check quadrature orders and geometry")
    total = np.einsum("i,k,j,ikj->", wx, w1, w, vals)
    return float(0.5 * (1.0 - alpha) * total)
