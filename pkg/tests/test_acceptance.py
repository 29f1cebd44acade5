"""Acceptance suite: ten numbered criteria covering the physics kernels, the
two regime sweeps, runtime behaviour, and reproducibility.

Each test prints a single PASS/FAIL line (visible with `pytest -s` or in the
captured output of failing tests). The sweep-backed criteria (4-10) share two
session fixtures: the kinetic-limit sweep at 10^7 particles and the
diffusive-limit sweep at 10^6 particles; the full suite takes on the order of
ten minutes on one core, dominated by the high-collision-rate kinetic
reference runs.
"""

import dataclasses
import math

import mpmath as mp
import numpy as np
import pytest

from kdmc2d import (Background, Domain, Maxwellian, RunConfig, SourceSpec,
                    StepConfig, Vec2, diffusive_moments, run_simulation)
from kdmc2d import _kernels as k
from kdmc2d.harness import (diffusive_case_config, estimate_order,
                            kinetic_case_config, run_simulation_detailed,
                            sweep_diffusive_limit, sweep_kinetic_limit)
from kdmc2d.tally import folded_profile, reduce_x_average, write_histogram

SEED = 2026


def _report(num, desc, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f"  [{detail}]" if detail else ""
    print(f"\n[criterion {num:2d}] {status}: {desc}{suffix}")
    assert ok, f"criterion {num} failed: {desc}{suffix}"


def _base(particles):
    dom = Domain()
    return RunConfig(
        mode="kinetic", particles=particles, seed=SEED, workers=1,
        step=StepConfig(dt=1.0, t_end=1.0),
        source=SourceSpec(Vec2(0.5, 0.5), Maxwellian(0.01)),
        background=Background.homogeneous(1.0, Maxwellian(0.001), dom),
        domain=dom)


def _near(mapping, value):
    """Fetch the entry whose float key is closest to `value` (the sweep keys
    carry roundoff from the eps -> rate conversion)."""
    key = min(mapping, key=lambda kk: abs(kk - value))
    assert abs(key - value) <= 1e-9 * max(1.0, abs(value))
    return mapping[key]


def _mp_moments(v, temp, u, rate, theta):
    """Extended-precision mean and covariance of the diffusive increment."""
    with mp.workdps(50):
        rate = mp.mpf(rate)
        theta = mp.mpf(theta)
        x = theta * rate
        w = [(mp.mpf(v[0]) - u[0]) / rate, (mp.mpf(v[1]) - u[1]) / rate]
        g = 1 - mp.exp(-x)
        mu = [u[0] * theta + w[0] * g, u[1] * theta + w[1] * g]
        a = (2 * mp.mpf(temp) / rate ** 2) * \
            (2 * mp.exp(-x) + x * (1 + mp.exp(-x)) - 2)
        b = 1 - 2 * x * mp.exp(-x) - mp.exp(-2 * x)
        cov = [[float(a + b * w[0] * w[0]), float(b * w[0] * w[1])],
               [float(b * w[0] * w[1]), float(a + b * w[1] * w[1])]]
        return [float(m) for m in mu], cov


@pytest.fixture(scope="session")
def kinetic_sweep():
    hists = {}
    rows = sweep_kinetic_limit(_base(10 ** 7), histograms=hists)
    return rows, hists


@pytest.fixture(scope="session")
def diffusive_sweep():
    hists = {}
    rows, profiles = sweep_diffusive_limit(_base(10 ** 6), histograms=hists)
    return rows, profiles, hists


def test_criterion_01_moment_oracle():
    rng = np.random.default_rng(11)
    n = 10 ** 6
    out = np.empty((n, 2))
    worst = 0.0
    for trial in range(20):
        theta = 10.0 ** rng.uniform(-3.0, 1.0)
        rate = 10.0 ** rng.uniform(-2.0, 3.0)
        temp = 10.0 ** rng.uniform(-5.0, 0.0)
        v = Vec2(*rng.normal(0.0, 1.0, 2))
        u = Vec2(*rng.normal(0.0, 0.3, 2))
        dm = diffusive_moments(v, Maxwellian(temp, u), rate, theta)
        mu_ref, cov_ref = _mp_moments(tuple(v), temp, tuple(u), rate, theta)
        k.sample_increments(np.uint64(SEED), np.uint64(trial),
                            dm.mu.x, dm.mu.y, dm.a, dm.b, dm.w.x, dm.w.y,
                            out)
        cov = np.cov(out.T)
        for i in range(2):
            z = abs(out[:, i].mean() - mu_ref[i]) / \
                math.sqrt(cov_ref[i][i] / n)
            worst = max(worst, z / 4.0)
            for j in range(2):
                se = math.sqrt(
                    (cov_ref[i][i] * cov_ref[j][j] + cov_ref[i][j] ** 2) / n)
                worst = max(worst, abs(cov[i, j] - cov_ref[i][j]) / (4 * se))
    _report(1, "sampled mean/cov match the analytic moments (20 parameter "
               "sets, 1e6 draws, 4 SE)", worst < 1.0,
            f"worst deviation {worst:.2f} of allowance")


def test_criterion_02_psd_and_series():
    rng = np.random.default_rng(22)
    n = 10 ** 5
    thetas = 10.0 ** rng.uniform(-3.0, 1.0, n)
    rates = 10.0 ** rng.uniform(-2.0, 3.0, n)
    temps = 10.0 ** rng.uniform(-5.0, 0.0, n)
    vs = rng.normal(0.0, 1.0, (n, 2))
    us = rng.normal(0.0, 0.3, (n, 2))
    n_series = 0
    worst_rel = 0.0
    psd_ok = True
    for i in range(n):
        _, _, a, b, _, _ = k.moments(vs[i, 0], vs[i, 1], temps[i],
                                     us[i, 0], us[i, 1], rates[i], thetas[i])
        psd_ok = psd_ok and a >= 0.0 and b >= 0.0
        x = thetas[i] * rates[i]
        if x < 1.0e-3:
            n_series += 1
            with mp.workdps(40):
                xm = mp.mpf(thetas[i]) * mp.mpf(rates[i])
                a_ref = float((2 * mp.mpf(temps[i]) / mp.mpf(rates[i]) ** 2)
                              * (2 * mp.exp(-xm) + xm * (1 + mp.exp(-xm))
                                 - 2))
                b_ref = float(1 - 2 * xm * mp.exp(-xm) - mp.exp(-2 * xm))
            worst_rel = max(worst_rel, abs(a - a_ref) / a_ref,
                            abs(b - b_ref) / b_ref)
    _report(2, "a,b >= 0 over 1e5 draws; series matches extended precision "
               "to 6 digits for x < 1e-3",
            psd_ok and worst_rel < 1.0e-6,
            f"{n_series} series checks, worst rel {worst_rel:.2e}")


def test_criterion_03_collision_count_law():
    dom = Domain()
    cfg = RunConfig(
        mode="kinetic", particles=10 ** 4, seed=SEED, workers=1,
        step=StepConfig(dt=1.0, t_end=4.0),
        source=SourceSpec(Vec2(0.5, 0.5), Maxwellian(0.0)),
        background=Background.homogeneous(256.0, Maxwellian(1e-12), dom),
        domain=dom)
    res = run_simulation_detailed(cfg)
    mean = res.collisions / cfg.particles
    _report(3, "mean collision count = R*t_end within 4 SE "
               "(1024 +/- 1.28, unreachable boundaries)",
            res.absorbed == 0 and abs(mean - 1024.0) < 1.28,
            f"mean {mean:.3f}")


def test_criterion_04_kinetic_limit_convergence(kinetic_sweep):
    rows, _ = kinetic_sweep
    dts = [r.parameter for r in rows]
    errs = [r.error for r in rows]
    i_min = int(np.argmin(errs))
    monotone = all(errs[i + 1] < errs[i] for i in range(i_min))
    order = estimate_order(dts[:3], errs[:3])
    _report(4, "error decreases to the sampling plateau and the 3-coarsest-dt "
               "order is in [2, 4]",
            monotone and 2.0 <= order <= 4.0,
            f"errors {['%.3e' % e for e in errs]}, order {order:.2f}")


def test_criterion_05_kinetic_runtime_parity(kinetic_sweep):
    rows, _ = kinetic_sweep
    ratios = [r.time_kdmc / r.time_kinetic for r in rows]
    _report(5, "KDMC wall time <= 1.5x kinetic at every dt",
            max(ratios) <= 1.5,
            "ratios " + ", ".join(f"{x:.2f}" for x in ratios))


def test_criterion_06_diffusive_limit_convergence(diffusive_sweep):
    rows, _, _ = diffusive_sweep
    sel = [r for r in rows if 16.0 - 1e-6 <= r.parameter <= 256.0 + 1e-6]
    order = estimate_order([r.parameter for r in sel],
                           [r.error for r in sel])
    _report(6, "fitted error order vs R over the diffusive branch [16, 256] "
               "is in [-1.5, -0.5]",
            -1.5 <= order <= -0.5,
            f"errors {['%.3e' % r.error for r in sel]}, order {order:.2f}")


def test_criterion_07_error_sign_transition(diffusive_sweep):
    rows, profiles, _ = diffusive_sweep
    # the sweep grid holds powers of two; 16 is the on-grid diffusive-side
    # point nearest the nominal 11.314 = 2^3.5
    center_lo = float(np.mean(_near(profiles, 2.0).values[:10]))
    center_hi = float(np.mean(_near(profiles, 16.0).values[:10]))
    err = {round(r.parameter, 6): r.error for r in rows}
    dip = min(err[4.0], err[8.0]) < min(err[2.0], err[16.0])
    _report(7, "near-center difference changes sign between R=2 and R=16 "
               "with an error dip strictly between",
            center_lo * center_hi < 0.0 and dip,
            f"center means {center_lo:+.2e} / {center_hi:+.2e}, "
            f"errors 2..16: " +
            ", ".join(f"{err[x]:.2e}" for x in (2.0, 4.0, 8.0, 16.0)))


def test_criterion_08_diffusive_speedup(diffusive_sweep):
    rows, _, _ = diffusive_sweep
    by_rate = {round(r.parameter, 6): r for r in rows}
    top = by_rate[256.0]
    bottom = by_rate[0.007812]
    ratio_modes = top.time_kinetic / top.time_kdmc
    kdmc_times = [r.time_kdmc for r in rows]
    kdmc_spread = max(kdmc_times) / min(kdmc_times)
    kin_growth = top.time_kinetic / bottom.time_kinetic
    _report(8, "kinetic/KDMC >= 50x at R=256; KDMC spread < 2x over sweep; "
               "kinetic grows >= 100x across sweep",
            ratio_modes >= 50.0 and kdmc_spread < 2.0 and kin_growth >= 100.0,
            f"mode ratio {ratio_modes:.1f}x, KDMC spread {kdmc_spread:.1f}x, "
            f"kinetic growth {kin_growth:.1f}x")


def test_criterion_09_conservation_and_determinism(kinetic_sweep,
                                                   diffusive_sweep,
                                                   tmp_path):
    _, kin_hists = kinetic_sweep
    _, _, diff_hists = diffusive_sweep
    # the harness raises on any integer mass-conservation violation, so every
    # fixture run already proved deposited + absorbed == N; re-assert the
    # normalized invariant on the stored histograms
    conserved = all(
        abs(h.mass.sum() + h.absorbed_mass - 1.0) < 1e-12
        for h in list(kin_hists.values()) + list(diff_hists.values()))

    # worker-count byte-identity, representative configs at reduced N
    configs = [
        kinetic_case_config(_base(10 ** 5), "kinetic", 1.0),
        kinetic_case_config(_base(10 ** 5), "kdmc", 0.25),
        diffusive_case_config(_base(10 ** 5), "kdmc", 2.0 ** -7.5),
    ]
    identical = True
    for ci, cfg in enumerate(configs):
        blobs = []
        for workers in (1, 4, 8):
            run = dataclasses.replace(cfg, workers=workers, block_size=4096)
            hist, _ = run_simulation(run)
            path = tmp_path / f"h_{ci}_{workers}.csv"
            write_histogram(path, hist)
            blobs.append(path.read_bytes())
        identical = identical and blobs[0] == blobs[1] == blobs[2]
    _report(9, "mass conserved in every sweep run; histogram files "
               "byte-identical for workers 1/4/8",
            conserved and identical)


def test_criterion_10_shape_checks(kinetic_sweep, diffusive_sweep):
    _, kin_hists = kinetic_sweep
    _, _, diff_hists = diffusive_sweep
    # kinetic-regime histogram: exponential-like monotone decay from center
    f = folded_profile(kin_hists[("kinetic", None)]).values
    kinetic_ok = bool(np.all(np.diff(f[:20]) < 0.0))

    # diffusive-regime histogram at R=256: bell-shaped x-averaged profile
    key = min((kk for kk in diff_hists if kk[0] == "kinetic"),
              key=lambda kk: abs(kk[1] - 256.0))
    p = reduce_x_average(diff_hists[key]).values
    peak = int(np.argmax(p))
    sm = np.convolve(p, np.ones(5) / 5.0, mode="valid")
    d2 = np.diff(sm, 2)
    c = len(d2) // 2
    bell_ok = (peak in (63, 64)
               and d2[c] < 0.0
               and np.any(d2[:c - 5] > 0.0)
               and np.any(d2[c + 5:] > 0.0))
    _report(10, "kinetic histogram decays monotonically over 20 folded "
                "cells; diffusive histogram is bell-shaped with inflection",
            kinetic_ok and bell_ok,
            f"peak cell {peak}, center curvature {d2[c]:.2e}")
