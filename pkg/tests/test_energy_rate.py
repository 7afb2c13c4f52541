import numpy as np
import pytest

from uwisac import channel as ch
from uwisac import energy_rate as er
from uwisac.errors import ConfigError, QuadratureError
from uwisac.quadrature import gauss_hermite

P = er.EhParams()
ALPHAS = np.round(np.arange(0.05, 0.951, 0.05), 2)

# adaptive-quadrature evaluation of the same triple integral, computed independently
RATE_ORACLE = {0.2: 0.5983047297674166, 0.5: 0.9735162722182507, 0.8: 0.7334878977029827}


def _attitude(cfg, std):
    return cfg.replace(attitude__roll_std_deg=std, attitude__pitch_std_deg=std,
                       attitude__yaw_std_deg=std)


def _fading_average_at_mean_geometry(cfg, alpha):
    """Rate averaged over fading only, with the level-ship gains."""
    g_ae = ch.deterministic_gain(cfg.channel, np.eye(3), cfg.p_ap, cfg.p_eh, ch.LinkRole.DOWNLINK)
    g_ea = ch.deterministic_gain(cfg.channel, np.eye(3), cfg.p_eh, cfg.p_ap, ch.LinkRole.UPLINK)
    x, w = gauss_hermite(60).gaussian(2 * cfg.turbulence.mu_x, 2 * np.sqrt(cfg.turbulence.sigma_x2))
    h = np.exp(x)
    return float(np.sum(w * er.rate_from_gains(cfg.eh, g_ae * h, g_ea * h, alpha=alpha)))


def test_harvested_energy_value():
    e = er.harvested_energy(P, 1e-5, p_dl=10.0, alpha=0.5)
    assert e == pytest.approx(1.1550170761116308e-05, rel=1e-12)


def test_harvested_energy_zero_and_monotone():
    assert er.harvested_energy(P, 1e-5, p_dl=0.0) == 0.0
    grid = np.logspace(-8, -3, 30)
    assert np.all(np.diff(er.harvested_energy(P, grid)) > 0)
    powers = [er.harvested_energy(P, 1e-5, p_dl=x) for x in np.logspace(-2, 3, 30)]
    assert np.all(np.diff(powers) > 0)
    alphas = [er.harvested_energy(P, 1e-5, alpha=a) for a in ALPHAS]
    assert np.all(np.diff(alphas) > 0)


def test_uplink_power():
    assert er.uplink_power(P, 0.0) == 0.0
    assert er.uplink_power(P, 2.0, alpha=0.5) == pytest.approx(4.0)
    e = np.array([1e-6, 3e-3])
    np.testing.assert_allclose(er.uplink_power(P, e, alpha=0.3) * 0.7 * P.frame_duration, e)
    with pytest.raises(ConfigError, match="alpha"):
        er.uplink_power(P, 1.0, alpha=1.0)


def test_instantaneous_rate():
    p = er.EhParams(noise_var=1e-14)
    assert er.instantaneous_rate(p, 1e-5, 0.0) == 0.0
    assert er.instantaneous_rate(p, 1e-5, 1.0, alpha=0.5) == pytest.approx(2.5200611410984335, rel=1e-13)
    assert er.instantaneous_rate(p, 1e-2, 1e3, alpha=1.0) == 0.0


def test_rate_zero_at_full_harvest():
    assert er.rate_from_gains(P, 1e-6, 1e-6, alpha=1.0) == 0.0


def test_rate_constants_reproduce_composition():
    g_ae, g_ea, h = 3e-6, 2e-6, np.array([0.4, 1.0, 2.5])
    for alpha in (0.1, 0.55, 0.9):
        k1, k2 = er.rate_constants(P, alpha=alpha, p_dl=3.0)
        snr = k1 * h ** 4 * g_ea ** 2 * g_ae ** 2 * np.log1p(k2 * h * g_ae) ** 2
        expected = 0.5 * (1 - alpha) * np.log2(1 + snr)
        got = er.rate_from_gains(P, g_ae * h, g_ea * h, alpha=alpha, p_dl=3.0)
        np.testing.assert_allclose(got, expected, rtol=1e-12)


def test_frame_duration_cancels():
    a = er.rate_from_gains(er.EhParams(frame_duration=1.0), 3e-6, 2e-6)
    b = er.rate_from_gains(er.EhParams(frame_duration=7.0), 3e-6, 2e-6)
    assert a == pytest.approx(b, rel=1e-12)


def test_rate_never_negative():
    g = np.logspace(-12, -2, 40)
    assert np.all(er.rate_from_gains(P, g, g[::-1]) >= 0)


def test_invalid_eh_params():
    with pytest.raises(ConfigError, match="alpha"):
        er.EhParams(alpha=1.2)
    with pytest.raises(ConfigError, match="noise_var"):
        er.EhParams(noise_var=0.0)


def test_monte_carlo_rate_without_attitude_spread(cfg):
    c = _attitude(cfg, 0.0)
    est = er.monte_carlo_rate(c, trials=20_000)
    ref = _fading_average_at_mean_geometry(c, c.eh.alpha)
    assert abs(est.mean - ref) < 4 * est.stderr


def test_monte_carlo_rate_reproducible(cfg):
    a = er.monte_carlo_rate(cfg, trials=5000)
    assert a == er.monte_carlo_rate(cfg, trials=5000)
    assert a == er.monte_carlo_rate(cfg.replace(simulation__workers=2), trials=5000)


def test_independent_attitude_draws_run(cfg):
    est = er.monte_carlo_rate(cfg.replace(simulation__attitude_draws="independent"), trials=5000)
    assert 0 < est.mean < 2


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_analytic_rate_oracle(cfg, alpha):
    assert er.analytic_rate(cfg, alpha=alpha) == pytest.approx(RATE_ORACLE[alpha], rel=5e-6)
    fine = er.analytic_rate(cfg, alpha=alpha, orders=(100, 300, 300))
    assert fine == pytest.approx(RATE_ORACLE[alpha], rel=1e-8)


def test_analytic_rate_converges(cfg):
    lo = er.analytic_rate(cfg, orders=(30, 40, 40))
    hi = er.analytic_rate(cfg, orders=(60, 80, 80))
    assert abs(hi - lo) / hi < 1e-4


def test_analytic_rate_deterministic(cfg):
    assert er.analytic_rate(cfg) == er.analytic_rate(cfg)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_analytic_rate_tracks_monte_carlo(cfg, alpha):
    c = cfg.replace(eh__alpha=alpha)
    est = er.monte_carlo_rate(c)
    assert abs(er.analytic_rate(c) - est.mean) <= 0.10 * est.mean + 2 * est.stderr


def test_small_spread_approaches_fixed_geometry(cfg):
    c = _attitude(cfg, 0.05)
    assert er.analytic_rate(c) == pytest.approx(_fading_average_at_mean_geometry(c, 0.5), rel=1e-3)


def test_angle_maps_agree_for_wide_spread(cfg):
    a = er.analytic_rate(cfg, orders=(60, 80, 80), angle_method="windowed")
    b = er.analytic_rate(cfg, orders=(60, 80, 80), angle_method="full")
    assert a == pytest.approx(b, rel=1e-6)


def test_zero_spread_is_rejected(cfg):
    with pytest.raises(QuadratureError):
        er.analytic_rate(_attitude(cfg, 0.0))


def test_rate_has_interior_maximum(cfg):
    r = np.array([er.analytic_rate(cfg, alpha=a) for a in ALPHAS])
    k = int(np.argmax(r))
    assert 0 < k < len(r) - 1
    assert np.all(np.diff(r[:k + 1]) > 0) and np.all(np.diff(r[k:]) < 0)
    assert 0.40 <= ALPHAS[k] <= 0.70
