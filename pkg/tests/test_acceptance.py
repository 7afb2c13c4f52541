"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are printed even
under output capture) or directly with ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import sys
import time
import warnings

import numpy as np
import pytest
from scipy import integrate, optimize

from uwisac import channel, geometry, harness, sensing
from uwisac.config import SystemConfig
from uwisac.energy_rate import analytic_rate, monte_carlo_rate
from uwisac.quadrature import gauss_hermite, gauss_legendre

BASE = SystemConfig.from_dict()
ALPHAS = harness.DEFAULT_ALPHA_GRID
SPACINGS = harness.DEFAULT_SPACING_GRID
POWERS = harness.DEFAULT_POWER_GRID


def spread(cfg, std_deg):
    return cfg.replace(attitude__roll_std_deg=std_deg, attitude__pitch_std_deg=std_deg,
                       attitude__yaw_std_deg=std_deg)


_capture = None


@pytest.fixture(autouse=True)
def _uncaptured(capsys):
    global _capture
    _capture = capsys
    yield
    _capture = None


def emit(line):
    # criterion lines go straight to the terminal, also under output capture
    if _capture is None:
        print(line, flush=True)
        return
    with _capture.disabled():
        print("\n" + line, flush=True)


def verdict(number, title, ok, detail, elapsed, limit):
    ok = bool(ok) and elapsed < limit
    emit(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail} "
         f"| {elapsed:.1f} s (limit {limit} s)")
    assert ok, detail


def test_c1_noiseless_localization_is_exact():
    t0 = time.perf_counter()
    worst = {}
    for side in (2, 3):
        cfg = spread(BASE, 10.0).replace(camera__grid_side=side, camera__eta=0.0)
        err, ok = sensing.sensing_trials(cfg, np.random.default_rng(side), 1000,
                                         cfg.eh.p_dl, cfg.eh.alpha)
        worst[side ** 2] = float(err.max()) if ok.all() else np.inf
    elapsed = time.perf_counter() - t0
    detail = ", ".join(f"M={m}: max err^2 {v:.2e} m^2" for m, v in worst.items())
    verdict(1, "noiseless exactness", max(worst.values()) < 1e-18, detail, elapsed, 5)


def test_c2_closed_form_mse_matches_monte_carlo():
    t0 = time.perf_counter()
    cfg = spread(BASE, 5.0).replace(camera__grid_side=2, simulation__mse_trials=100_000)
    r = harness.sweep_power(cfg, POWERS, rates=False)
    ratio = np.asarray(r.analytic_mse) / np.asarray(r.mc_mse)
    elapsed = time.perf_counter() - t0
    ok = np.all(np.abs(ratio - 1) <= 0.25)
    detail = f"analytic/MC ratio in [{ratio.min():.3f}, {ratio.max():.3f}] over {len(ratio)} powers (allowed 0.75..1.25)"
    verdict(2, "MSE oracle agreement", ok, detail, elapsed, 120)


def test_c3_quadrature_rate_matches_monte_carlo():
    t0 = time.perf_counter()
    worst = 0.0
    ok = True
    for std in (1.0, 5.0, 10.0):
        for alpha in (0.2, 0.5, 0.8):
            cfg = spread(BASE, std).replace(eh__alpha=alpha, simulation__rate_trials=10_000)
            est = monte_carlo_rate(cfg)
            a = analytic_rate(cfg, orders=(30, 40, 40))
            rel = abs(a - est.mean) / est.mean
            worst = max(worst, rel)
            ok &= abs(a - est.mean) <= 0.10 * est.mean + 2 * est.stderr
    elapsed = time.perf_counter() - t0
    verdict(3, "rate oracle agreement", ok,
            f"worst |analytic-MC|/MC = {worst:.3f} over spread {{1,5,10}} deg x alpha {{0.2,0.5,0.8}} (allowed 0.10 + 2 stderr)",
            elapsed, 120)


def test_c4_rate_quadrature_converges():
    t0 = time.perf_counter()
    worst = 0.0
    for std in (1.0, 5.0, 10.0):
        for alpha in (0.2, 0.5, 0.8):
            cfg = spread(BASE, std).replace(eh__alpha=alpha)
            lo = analytic_rate(cfg, orders=(30, 40, 40))
            hi = analytic_rate(cfg, orders=(60, 80, 80))
            worst = max(worst, abs(hi - lo) / hi)
    elapsed = time.perf_counter() - t0
    verdict(4, "quadrature convergence", worst < 1e-4,
            f"max |R(60,80,80)-R(30,40,40)|/R = {worst:.1e}", elapsed, 10)


def _slope(x, y):
    return float(np.polyfit(np.log10(x), np.log10(y), 1)[0])


def test_c5_power_sweep_trends():
    t0 = time.perf_counter()
    cfg = BASE.replace(simulation__mse_trials=100_000)
    calm = harness.sweep_power(spread(cfg, 0.01), POWERS, rates=False)
    rough9 = harness.sweep_power(cfg, POWERS, rates=False)
    rough4 = harness.sweep_power(cfg.replace(camera__grid_side=2), POWERS, rates=False)
    elapsed = time.perf_counter() - t0

    slope = _slope(POWERS, calm.mc_mse)
    slope_an = _slope(POWERS, calm.analytic_mse)
    ok_a = abs(slope + 1) <= 0.1
    floor = rough9.mc_mse[-1] / rough9.mc_mse[-2]
    ok_b = floor > 0.8
    m9, m4 = np.asarray(rough9.mc_mse), np.asarray(rough4.mc_mse)
    ok_c = np.all(m9 < m4)
    gain_db = 10 * np.log10(m4 / m9)

    emit(f"    5a log-log slope at 0.01 deg spread: MC {slope:.3f}, analytic {slope_an:.3f} (target -1 +- 0.1)")
    emit(f"    5b last-two-point MSE ratio at 10 deg: {floor:.3f} (target > 0.8 for an error floor)")
    emit(f"    5c M=9 vs M=4 improvement: {gain_db.min():.1f}..{gain_db.max():.1f} dB "
         f"(mean {gain_db.mean():.1f} dB; reported value to compare: 10 dB)")
    detail = f"(a) {'ok' if ok_a else 'fail'}, (b) {'ok' if ok_b else 'fail'}, (c) {'ok' if ok_c else 'fail'}"
    verdict(5, "power-sweep trends", ok_a and ok_b and ok_c, detail, elapsed, 300)


def _continuous_argmin(cfg, grid, values):
    k = int(np.argmin(values))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(
        lambda rho: sensing.analytic_mse(cfg.replace(camera__spacing_x=rho, camera__spacing_y=rho)),
        bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
    return float(res.x)


def test_c6_optimal_spacing():
    t0 = time.perf_counter()
    cfg = BASE.replace(simulation__mse_trials=20_000)
    out = {}
    ok = True
    for std in (0.0, 10.0):
        c = spread(cfg, std)
        r = harness.sweep_spacing(c, SPACINGS, rates=False)
        an, mc = np.asarray(r.analytic_mse), np.asarray(r.mc_mse)
        ka, km = int(np.argmin(an)), int(np.argmin(mc))
        interior = 0 < ka < len(SPACINGS) - 1 and 0 < km < len(SPACINGS) - 1
        ok &= interior
        out[std] = (SPACINGS[ka], SPACINGS[km], _continuous_argmin(c, SPACINGS, an), interior)
    elapsed = time.perf_counter() - t0
    ordering = out[10.0][2] < out[0.0][2]
    for std, (ga, gm, cont, interior) in out.items():
        emit(f"    6 spread {std:g} deg: grid argmin analytic {ga:g} m, MC {gm:g} m, "
             f"continuous analytic {cont:.4f} m, interior={interior}")
    emit("    6 reported values to compare: about 2.6 m (level ship) and 1.2 m (10 deg)")
    detail = (f"interior minima {'ok' if ok else 'missing'}; argmin(10 deg) {out[10.0][2]:.4f} "
              f"< argmin(0 deg) {out[0.0][2]:.4f}: {ordering}")
    verdict(6, "spacing-sweep optimum", ok and ordering, detail, elapsed, 300)


def test_c7_harvest_fraction_tradeoff():
    t0 = time.perf_counter()
    cfg = BASE.replace(simulation__mse_trials=100_000, simulation__rate_trials=10_000)
    r = harness.sweep_alpha(cfg, ALPHAS)
    elapsed = time.perf_counter() - t0
    rate = np.asarray(r.analytic_rate)
    k = int(np.argmax(rate))
    unimodal = 0 < k < len(rate) - 1 and np.all(np.diff(rate[:k + 1]) > 0) and np.all(np.diff(rate[k:]) < 0)
    in_band = 0.40 <= ALPHAS[k] <= 0.70
    mse_an = np.asarray(r.analytic_mse)
    mse_mc, se = np.asarray(r.mc_mse), np.asarray(r.mc_mse_stderr)
    mono_an = np.all(np.diff(mse_an) <= 0)
    mono_mc = np.all(np.diff(mse_mc) <= 3 * np.hypot(se[1:], se[:-1]))
    k_mc = int(np.argmax(r.mc_rate))
    emit(f"    7 rate argmax: analytic {ALPHAS[k]:g}, MC {ALPHAS[k_mc]:g} (reported value to compare: 0.55)")
    detail = (f"unimodal={unimodal}, argmax {ALPHAS[k]:g} in [0.40, 0.70]={in_band}, "
              f"MSE non-increasing analytic={mono_an} MC={mono_mc}")
    verdict(7, "harvest-fraction tradeoff", unimodal and in_band and mono_an and mono_mc,
            detail, elapsed, 300)


def test_c8_minimum_mse_magnitude():
    t0 = time.perf_counter()
    r = harness.sweep_spacing(BASE, SPACINGS, montecarlo=False, rates=False)
    best = float(np.nanmin(r.analytic_mse))
    elapsed = time.perf_counter() - t0
    verdict(8, "minimum MSE magnitude", 1e-3 <= best <= 1e-1,
            f"min analytic MSE (M=9, 10 deg, P_DL={BASE.eh.p_dl:g} W) = {best:.3e} m^2 (target 1e-2 within a decade)",
            elapsed, 60)


def test_c9_invariant_suite(tmp_path):
    t0 = time.perf_counter()
    checks = {}
    rng = np.random.default_rng(2024)

    q = geometry.rotation_matrix(geometry.sample_attitude(geometry.AttitudeModel.from_degrees(60), rng, 10_000))
    dev = np.abs(np.einsum("nji,njk->nik", q, q) - np.eye(3)).max()
    checks["rotation orthonormality"] = (dev < 1e-12, f"{dev:.1e}")

    turb = channel.TurbulenceParams.normalized(0.1)
    h = channel.sample_turbulence(turb, rng, 1_000_000)
    checks["E[h]=1"] = (abs(h.mean() - 1) < 0.01, f"{h.mean():.4f}")
    t2 = channel.TurbulenceParams()
    h2 = channel.sample_turbulence(t2, rng, 1_000_000)
    rel = np.mean(1 / h2) / channel.reciprocal_turbulence_moment(t2) - 1
    checks["reciprocal moment"] = (abs(rel) < 0.01, f"{rel:+.4f}")

    mu, var = geometry.cosine_moments(BASE.attitude, BASE.p_ap, BASE.p_eh)
    tb = float(np.arccos(mu))
    K = 1e-5
    n_cos = integrate.quad(lambda x: channel.pdf_cos_theta(x, tb, var), -1, 1, points=[mu], limit=400)[0]
    n_dl = integrate.quad(lambda g: channel.pdf_g_downlink(g, K, 3.0, tb, var), 0, K,
                          points=[K * mu ** 3], limit=400)[0]
    n_ul = integrate.quad(lambda g: channel.pdf_g_uplink(g, K, tb, var), 0, K, points=[K * mu], limit=400)[0]
    for name, v in (("cosine pdf", n_cos), ("downlink gain pdf", n_dl), ("uplink gain pdf", n_ul)):
        checks[f"{name} normalization"] = (abs(v - 1) < 0.01, f"{v:.4f}")

    hr = gauss_hermite(20)
    lr = gauss_legendre(10)
    x, w = gauss_hermite(30).gaussian(-0.1, np.sqrt(0.1))
    errs = [abs(np.sum(hr.weights * hr.nodes ** 2) - np.sqrt(np.pi) / 2),
            abs(np.sum(lr.weights * lr.nodes ** 8) - 2 / 9),
            abs(np.sum(w * np.exp(2 * x)) - 1.0)]
    checks["Gauss moment oracles"] = (max(errs) < 1e-10, f"{max(errs):.1e}")

    cfg = BASE.replace(simulation__mse_trials=5000, simulation__rate_trials=5000)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = harness.emit_results(harness.sweep_alpha(cfg, (0.3, 0.6)), tmp_path / "a.csv").read_bytes()
        b = harness.emit_results(harness.sweep_alpha(cfg, (0.3, 0.6)), tmp_path / "b.csv").read_bytes()
    checks["byte-identical rerun"] = (a == b, str(a == b))

    elapsed = time.perf_counter() - t0
    failed = [k for k, (ok, _) in checks.items() if not ok]
    detail = "; ".join(f"{k}: {v}" for k, (_, v) in checks.items())
    verdict(9, "invariant suite", not failed, detail, elapsed, 60)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
