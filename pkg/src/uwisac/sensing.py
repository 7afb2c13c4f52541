"""Pinhole-camera sensing: projection, pixel noise, least-squares localization, MSE."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import channel, geometry
from . import rng as rng_mod
from .errors import (BlockedLinkError, ConfigError, DegenerateGeometryError, DomainError,
                     EstimationError, InvalidRegimeError)

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class CameraArray:
    """Cameras sharing intrinsics, rigidly mounted on one plane of the ship.

    ``mounts[m]`` is the (x, y) position of camera ``m`` in the ship frame,
    relative to the AP; index 0 is camera 1, whose frame anchors the
    estimate. The offsets used by the estimator follow from the mounts:
    ``offsets[m] = mounts[0] - mounts[m]`` (the target's camera-frame
    coordinates shift by this amount from camera 1 to camera ``m``).
    """

    mounts: np.ndarray
    focal_x: float = 0.05
    focal_y: float = 0.05
    cam_area: float = 1e-3
    eta: float = 1.0
    pixel_noise_base: float = 1e-6

    def __post_init__(self):
        mounts = np.array(self.mounts, dtype=float).reshape(-1, 2)
        mounts.setflags(write=False)
        object.__setattr__(self, "mounts", mounts)
        if mounts.shape[0] < 2:
            raise ConfigError("need at least 2 cameras", "camera")
        if np.all(mounts == mounts[0]):
            raise ConfigError("camera positions give no baseline", "camera")
        if self.focal_x <= 0 or self.focal_y <= 0:
            raise ConfigError("focal lengths must be > 0", "focal_x")
        if self.cam_area <= 0:
            raise ConfigError("must be > 0", "cam_area")
        if self.eta < 0:
            raise ConfigError("must be >= 0", "eta")
        if self.pixel_noise_base < 0:
            raise ConfigError("must be >= 0", "pixel_noise_variance_base")

    @classmethod
    def from_offsets(cls, offsets, **kw) -> "CameraArray":
        """Array with camera 1 at the AP and the given estimator offsets."""
        off = np.asarray(offsets, dtype=float).reshape(-1, 2)
        if np.any(off[0] != 0.0):
            raise ConfigError("camera 1 must have offset (0, 0)", "camera")
        return cls(mounts=-off, **kw)

    @classmethod
    def grid(cls, n_side: int, spacing_x: float, spacing_y: float | None = None, **kw):
        """``n_side x n_side`` grid centred on the AP.

        Camera 1 is the grid point nearest the AP (the AP itself for odd
        ``n_side``); the rest follow in row-major order.
        """
        if n_side < 1:
            raise ConfigError("must be >= 1", "grid_side")
        spacing_y = spacing_x if spacing_y is None else spacing_y
        if spacing_x <= 0 or spacing_y <= 0:
            raise ConfigError("must be > 0", "spacing")
        idx = np.arange(n_side) - 0.5 * (n_side - 1)
        ix, iy = np.meshgrid(idx, idx, indexing="ij")
        pts = np.column_stack([ix.ravel() * spacing_x, iy.ravel() * spacing_y])
        first = int(np.argmin(np.hypot(pts[:, 0], pts[:, 1])))
        order = [first] + [i for i in range(len(pts)) if i != first]
        return cls(mounts=pts[order], **kw)

    @property
    def M(self) -> int:
        return self.mounts.shape[0]

    @property
    def offsets(self) -> np.ndarray:
        return self.mounts[0] - self.mounts

    def mount_points(self) -> np.ndarray:
        """Camera centres in the ship frame, shape (M, 3)."""
        return np.column_stack([self.mounts, np.zeros(self.M)])

    def positions(self, q: np.ndarray, p_ap) -> np.ndarray:
        """World positions ``p_A + Q @ mount`` for rotation(s) ``q``: shape (..., M, 3)."""
        return np.asarray(p_ap, dtype=float) + np.einsum("...ij,mj->...mi", q, self.mount_points())


@dataclass(frozen=True)
class PixelObservation:
    cam_index: int
    x: float
    y: float
    noise_var_x: float = 0.0
    noise_var_y: float = 0.0


@dataclass(frozen=True)
class LocalizationResult:
    p_c1: np.ndarray
    p_world: np.ndarray
    condition_ok: bool
    condition: float = field(default=np.nan)


def world_to_camera(q, t, p_world):
    """``Q^T (p - t)``; broadcasts over stacked rotations."""
    d = np.asarray(p_world, dtype=float) - np.asarray(t, dtype=float)
    return np.einsum("...ji,...j->...i", q, d)


def camera_to_world(q, t, p_cam):
    return np.einsum("...ij,...j->...i", q, np.asarray(p_cam, dtype=float)) + np.asarray(t, dtype=float)


def project(cam: CameraArray, m: int, p_c1):
    """Film-plane coordinates of the target in camera ``m`` (0-based)."""
    p_c1 = np.asarray(p_c1, dtype=float)
    z = p_c1[..., 2]
    if np.any(z == 0):
        raise DegenerateGeometryError("target lies in the camera plane")
    dx, dy = cam.offsets[m]
    return cam.focal_x * (p_c1[..., 0] + dx) / z, cam.focal_y * (p_c1[..., 1] + dy) / z


def project_all(cam: CameraArray, p_c1) -> np.ndarray:
    """Projections for every camera, shape (..., M, 2)."""
    p_c1 = np.asarray(p_c1, dtype=float)
    z = p_c1[..., 2:3]
    if np.any(z == 0):
        raise DegenerateGeometryError("target lies in the camera plane")
    f = np.array([cam.focal_x, cam.focal_y])
    return f * (p_c1[..., None, :2] + cam.offsets) / z[..., None]


def reflected_intensity(rho_s, h_sa, h_as, p_dl, cam_area):
    """Light intensity reflected by the target into one camera."""
    return rho_s * np.asarray(h_sa) * np.asarray(h_as) * p_dl / cam_area


def pixel_noise_variance(cam: CameraArray, alpha: float, i_ref):
    """Film-plane error variance ``eta sigma_I^2 / (alpha I_ref)`` per axis."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError("alpha must lie in (0, 1]")
    i_ref = np.asarray(i_ref, dtype=float)
    if np.any(i_ref <= 0):
        raise BlockedLinkError("no reflected light reaches the camera")
    v = cam.eta * cam.pixel_noise_base / (alpha * i_ref)
    return float(v) if v.ndim == 0 else v


def design_matrix(cam: CameraArray, pix) -> tuple[np.ndarray, np.ndarray]:
    """Stacked system ``Sigma p_c1 = gamma`` from film coordinates ``pix`` (..., M, 2).

    Rows alternate x/y per camera: ``[f_x, 0, -x_m]`` and ``[0, f_y, -y_m]``.
    """
    pix = np.asarray(pix, dtype=float)
    lead = pix.shape[:-2]
    M = cam.M
    sig = np.zeros(lead + (2 * M, 3))
    sig[..., 0::2, 0] = cam.focal_x
    sig[..., 1::2, 1] = cam.focal_y
    sig[..., 0::2, 2] = -pix[..., 0]
    sig[..., 1::2, 2] = -pix[..., 1]
    gamma = np.empty(2 * M)
    gamma[0::2] = -cam.focal_x * cam.offsets[:, 0]
    gamma[1::2] = -cam.focal_y * cam.offsets[:, 1]
    return sig, gamma


def solve_positions(cam: CameraArray, pix, condition_limit=CONDITION_LIMIT):
    """Batched least squares via SVD.

    Returns ``(p_c1, ok, cond)`` where ``cond`` is the condition number of
    ``Sigma^T Sigma`` (the squared singular-value ratio of ``Sigma``).
    """
    sig, gamma = design_matrix(cam, pix)
    u, s, vt = np.linalg.svd(sig, full_matrices=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = (s[..., 0] / s[..., -1]) ** 2
        coef = np.einsum("...ki,k->...i", u, gamma) / s
    p = np.einsum("...ij,...i->...j", vt, coef)
    ok = np.isfinite(cond) & (cond <= condition_limit) & np.all(np.isfinite(p), axis=-1)
    return p, ok, cond


def localize(cam: CameraArray, obs, q=None, t=None, condition_limit=CONDITION_LIMIT) -> LocalizationResult:
    """Least-squares target position from one observation per camera.

    ``obs`` is a sequence of :class:`PixelObservation` or an (M, 2) array.
    ``q``/``t`` map the camera-1 estimate into the world (identity/zero by default).
    """
    if len(obs) and isinstance(obs[0], PixelObservation):
        if len(obs) != cam.M:
            raise DomainError(f"need one observation per camera ({cam.M}), got {len(obs)}")
        pix = np.zeros((cam.M, 2))
        for o in obs:
            pix[o.cam_index] = (o.x, o.y)
    else:
        pix = np.asarray(obs, dtype=float)
        if pix.shape != (cam.M, 2):
            raise DomainError(f"expected observations of shape ({cam.M}, 2)")
    p, ok, cond = solve_positions(cam, pix, condition_limit)
    q = np.eye(3) if q is None else np.asarray(q)
    t = np.zeros(3) if t is None else np.asarray(t)
    return LocalizationResult(p_c1=p, p_world=camera_to_world(q, t, p),
                              condition_ok=bool(ok), condition=float(cond))


def pseudo_inverse_solution(cam: CameraArray, pix) -> np.ndarray:
    """Explicit normal-equation solve ``(S^T S)^-1 S^T gamma``; reference for small M."""
    sig, gamma = design_matrix(cam, pix)
    return np.linalg.inv(sig.T @ sig) @ sig.T @ gamma


# -- Monte Carlo ---------------------------------------------------------------

@dataclass(frozen=True)
class MonteCarloEstimate:
    """Sample mean over successful trials, its standard error, and the failure count."""

    mean: float
    stderr: float
    n_ok: int
    n_trials: int

    @property
    def failure_rate(self) -> float:
        return 1.0 - self.n_ok / self.n_trials


def _combine(parts, n_trials) -> MonteCarloEstimate:
    n_ok = sum(p[0] for p in parts)
    s1 = math.fsum(p[1] for p in parts)
    s2 = math.fsum(p[2] for p in parts)
    if n_ok == 0:
        return MonteCarloEstimate(np.nan, np.nan, 0, n_trials)
    mean = s1 / n_ok
    var = max(s2 / n_ok - mean * mean, 0.0) * n_ok / max(n_ok - 1, 1)
    return MonteCarloEstimate(mean, math.sqrt(var / n_ok), n_ok, n_trials)


def sensing_trials(cfg, rng: np.random.Generator, n: int, p_dl: float, alpha: float):
    """Squared world-frame localization errors for ``n`` trials plus a success mask."""
    cam = cfg.camera
    M = cam.M
    # fixed draw order: attitude, downlink fading, per-camera fading, pixel noise
    att = geometry.sample_attitude(cfg.attitude, rng, n)
    fade_dl = channel.sample_turbulence(cfg.turbulence, rng, n)
    fade_ref = channel.sample_turbulence(cfg.turbulence, rng, (n, M))
    z = rng.standard_normal((n, M, 2))

    q = geometry.rotation_matrix(att)
    h_as = channel.deterministic_gain(cfg.channel, q, cfg.p_ap, cfg.p_target,
                                      channel.LinkRole.DOWNLINK) * fade_dl
    cams = cam.positions(q, cfg.p_ap)
    h_sa = channel.deterministic_gain(cfg.reflection, q[:, None], cfg.p_target, cams,
                                      channel.LinkRole.REFLECTION) * fade_ref
    i_ref = reflected_intensity(cfg.target_reflectivity, h_sa, h_as[:, None], p_dl, cam.cam_area)
    lit = np.all(i_ref > 0, axis=1)
    with np.errstate(divide="ignore"):
        var = np.where(i_ref > 0, cam.eta * cam.pixel_noise_base / (alpha * np.where(i_ref > 0, i_ref, 1.0)), 0.0)

    origin = cams[:, 0]
    p_c1 = world_to_camera(q, origin, cfg.p_target)
    pix = project_all(cam, p_c1) + np.sqrt(var)[..., None] * z
    p_hat, ok, _ = solve_positions(cam, pix, cfg.condition_limit)
    err = np.sum((camera_to_world(q, origin, p_hat) - cfg.p_target) ** 2, axis=-1)
    return err, ok & lit


def _sensing_block(cfg, rng, n, p_dl, alpha):
    err, ok = sensing_trials(cfg, rng, n, p_dl, alpha)
    e = err[ok]
    return int(ok.sum()), math.fsum(e), math.fsum(e * e)


def monte_carlo_mse(cfg, trials: int | None = None, point: int = 0) -> MonteCarloEstimate:
    """Average squared localization error over independent frames.

    Trials with a blocked reflection path or an ill-conditioned system are
    excluded from the mean and counted in ``failure_rate``. Random streams are
    keyed by ``(cfg.seed, point, block)``; see :mod:`uwisac.rng`.
    """
    trials = cfg.mse_trials if trials is None else trials
    parts = rng_mod.run_blocks(_sensing_block, cfg, rng_mod.SENSING, point, trials,
                               cfg.workers, cfg.eh.p_dl, cfg.eh.alpha)
    est = _combine(parts, trials)
    if est.n_ok == 0:
        raise EstimationError(f"all {trials} sensing trials failed")
    return est


# -- closed form ---------------------------------------------------------------

@dataclass(frozen=True)
class NoiseExpectation:
    """Attitude- and fading-averaged pixel-noise variance per camera, with its ingredients."""

    variances: np.ndarray
    k1: float
    turbulence_factor: float
    downlink_mean_cos: float
    downlink_var_cos: float
    inv_downlink_gain: float
    camera_mean_cos: np.ndarray
    camera_var_cos: np.ndarray
    inv_reflection_gain: np.ndarray


def expected_noise(cfg) -> NoiseExpectation:
    """Per-camera ``E[sigma_i^2]`` by reciprocal moments and second-order Taylor terms.

    Each factor of the reflected intensity is averaged independently: the
    fading of the downlink and of each reflection path (two independent
    log-normal draws), the LED irradiance cosine (power ``m1``) and the
    camera incidence cosine (power 1).
    """
    cam = cfg.camera
    att = cfg.attitude
    if max(att.stds) > np.deg2rad(20.0):
        warnings.warn("attitude spread above 20 deg: small-angle expansion is unreliable",
                      RuntimeWarning, stacklevel=2)
    m1 = cfg.channel.lambertian_order
    mu_c, var_c = geometry.cosine_moments(att, cfg.p_ap, cfg.p_target)
    if mu_c <= 0:
        raise InvalidRegimeError("mean LED boresight points away from the target")
    k2 = channel.link_constant(cfg.channel, cfg.p_ap, cfg.p_target, channel.LinkRole.DOWNLINK)
    inv_g_as = (mu_c ** -m1 + 0.5 * m1 * (m1 + 1) * mu_c ** (-m1 - 2) * var_c) / k2

    q_bar = geometry.rotation_matrix(att.mean_attitude)
    cams = cam.positions(q_bar, cfg.p_ap)
    mu_i = np.empty(cam.M)
    var_i = np.empty(cam.M)
    inv_g_sa = np.empty(cam.M)
    for i, pos in enumerate(cams):
        mu_i[i], var_i[i] = geometry.cosine_moments(att, pos, cfg.p_target)
        if mu_i[i] <= 0:
            raise InvalidRegimeError(f"camera {i + 1} faces away from the target")
        k3 = channel.link_constant(cfg.reflection, cfg.p_target, pos, channel.LinkRole.REFLECTION)
        inv_g_sa[i] = (1.0 / mu_i[i] + var_i[i] / mu_i[i] ** 3) / k3

    k1 = (cam.eta * cam.pixel_noise_base * cam.cam_area
          / (cfg.eh.alpha * cfg.target_reflectivity * cfg.eh.p_dl))
    turb = channel.reciprocal_turbulence_moment(cfg.turbulence) ** 2
    return NoiseExpectation(
        variances=k1 * turb * inv_g_as * inv_g_sa, k1=k1, turbulence_factor=turb,
        downlink_mean_cos=mu_c, downlink_var_cos=var_c, inv_downlink_gain=inv_g_as,
        camera_mean_cos=mu_i, camera_var_cos=var_i, inv_reflection_gain=inv_g_sa)


def mean_camera_coordinates(cfg) -> np.ndarray:
    """Target position in the camera-1 frame at the mean attitude."""
    q_bar = geometry.rotation_matrix(cfg.attitude.mean_attitude)
    origin = cfg.camera.positions(q_bar, cfg.p_ap)[0]
    return world_to_camera(q_bar, origin, cfg.p_target)


def delta1_expected(cam: CameraArray, p_c1, noise_vars) -> float:
    """Expected determinant of ``Sigma^T Sigma`` with per-camera noise variances.

    ``noise_vars`` is (M,) for equal x/y variance or (M, 2) for separate axes.
    """
    p_c1 = np.asarray(p_c1, dtype=float)
    nv = np.asarray(noise_vars, dtype=float)
    nv = np.column_stack([nv, nv]) if nv.ndim == 1 else nv
    M = cam.M
    fx, fy = cam.focal_x, cam.focal_y
    z = p_c1[2]
    a = fx * (p_c1[0] + cam.offsets[:, 0]) / z
    b = fy * (p_c1[1] + cam.offsets[:, 1]) / z
    # sum_{i<j} a_i a_j = ((sum a)^2 - sum a^2) / 2
    cross = 0.5 * ((a.sum() ** 2 - (a * a).sum()) + (b.sum() ** 2 - (b * b).sum()))
    return float(M * fx ** 2 * fy ** 2
                 * ((M - 1) * np.sum(a * a + b * b + nv[:, 0] + nv[:, 1]) - 2.0 * cross))


def linearized_mse(cam: CameraArray, p_c1, noise_vars) -> float:
    """First-order MSE of the least-squares estimate.

    Perturbing the film coordinates by ``e`` moves the solution by
    ``z Sigma^+ e``, so the MSE is ``z^2 tr(Sigma^+ D Sigma^+T)`` with
    ``D`` the diagonal of per-row noise variances.
    """
    p_c1 = np.asarray(p_c1, dtype=float)
    nv = np.asarray(noise_vars, dtype=float)
    nv = np.column_stack([nv, nv]) if nv.ndim == 1 else nv
    sig, _ = design_matrix(cam, project_all(cam, p_c1))
    pinv = np.linalg.pinv(sig)
    return float(p_c1[2] ** 2 * np.sum(pinv ** 2 * nv.reshape(-1)))


def determinant_form_mse(cam: CameraArray, p_c1, noise_vars) -> float:
    """Averaged-determinant approximation keeping only the offset-weighted noise terms.

    ``|v|^2 / Delta1^2 * sum_i (f_x^2 dx_i^2 s_xi + f_y^2 dy_i^2 s_yi)`` with
    ``v = (B1 C1, A1 D1, A1 B1)`` and ``Delta1`` from :func:`delta1_expected`.
    """
    p_c1 = np.asarray(p_c1, dtype=float)
    nv = np.asarray(noise_vars, dtype=float)
    nv = np.column_stack([nv, nv]) if nv.ndim == 1 else nv
    M = cam.M
    fx, fy = cam.focal_x, cam.focal_y
    z = p_c1[2]
    a1 = M * fx ** 2
    b1 = M * fy ** 2
    c1 = fx ** 2 * np.sum(p_c1[0] + cam.offsets[:, 0]) / z
    d1 = fy ** 2 * np.sum(p_c1[1] + cam.offsets[:, 1]) / z
    v2 = (b1 * c1) ** 2 + (a1 * d1) ** 2 + (a1 * b1) ** 2
    delta1 = delta1_expected(cam, p_c1, nv)
    s = np.sum(fx ** 2 * cam.offsets[:, 0] ** 2 * nv[:, 0] + fy ** 2 * cam.offsets[:, 1] ** 2 * nv[:, 1])
    return float(v2 / delta1 ** 2 * s)


def analytic_mse(cfg, method: str = "linearized") -> float:
    """Closed-form average MSE.

    ``method="linearized"`` propagates the expected noise through the exact
    first-order sensitivity of the least-squares solve; ``method="determinant"``
    uses the averaged-determinant form of :func:`determinant_form_mse`.
    """
    noise = expected_noise(cfg).variances
    p_c1 = mean_camera_coordinates(cfg)
    if method == "linearized":
        return linearized_mse(cfg.camera, p_c1, noise)
    if method == "determinant":
        return determinant_form_mse(cfg.camera, p_c1, noise)
    raise ValueError(f"unknown method {method!r}")
