"""The thirteen acceptance criteria, each at its stated tolerance and time budget.

Every test records one PASS/FAIL line through the ``criterion`` fixture;
the lines are repeated in an "acceptance criteria" section at the end of
the pytest run.
"""

import math
import time
import timeit

import numpy as np
import pytest
from scipy.integrate import trapezoid

from bmchannel import (
    EmVariant,
    Message,
    OUParams,
    RngStream,
    bandlimited_capacity,
    bc_region,
    bpsk_mi,
    clamped_feedback_policy,
    degraded_bc_feedback_region,
    directed_info_grid,
    i_mmse_check,
    mac_ou_mi_table,
    mac_region,
    make_grid,
    message_policy,
    mi_duncan,
    mi_grid_density,
    mmse_from_samples,
    modulated_feedback_policy,
    riccati_ou,
    rho_star,
    rho_star_residual,
    sinusoidal_feedback_policy,
    sk_bc_report,
    sk_rate_series,
)
from bmchannel import experiments as ex
from bmchannel.cli import render
from bmchannel.experiments import effective_power

TRIALS = 20_000
SEED = 42
GRID_256 = make_grid(1.0, kind="dyadic", level=8)


def best_time(fn, repeat=5):
    """Best wall time of ``repeat`` warm calls, in seconds."""
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def converse_ok(est, policy, T=1.0):
    return est.value <= effective_power(policy) * T / 2 + 2 * est.stderr


# Suites shared between several criteria are computed once per session.
SUITE_CONFIGS = {
    "sampling": ("sampling", {}),
    "sampling_ramp": ("sampling", {"policy": "ramp"}),
    "approx_clamped": ("approx", {"policy": "clamped", "grid_sizes": "32,64,128,256"}),
    "approx_modulated": ("approx", {"policy": "modulated", "grid_sizes": "32,64,128,256"}),
    "approx_sinusoidal": ("approx", {"policy": "sinusoidal", "grid_sizes": "32,64,128,256"}),
    "approx_message": ("approx", {"policy": "message", "grid_sizes": "32,64,128,256"}),
    "mmse": ("mmse", {}),
}


@pytest.fixture(scope="session")
def suites():
    out = {}
    for key, (suite, overrides) in SUITE_CONFIGS.items():
        cfg = ex.make_config({}, {"trials": TRIALS, "seed": SEED, "workers": 1, **overrides})
        table, seconds = timed(lambda: ex.SUITES[suite](cfg))
        out[key] = (table, seconds)
    return out


@pytest.fixture(scope="session")
def estimator_triple():
    msg, pol = Message(2), message_policy(1.0)
    dens, t1 = timed(lambda: mi_grid_density(msg, pol, GRID_256, "sampled_exact", TRIALS, RngStream(SEED)))
    curve, t2 = timed(lambda: mmse_from_samples(msg, pol, GRID_256, trials=TRIALS, rng=RngStream(SEED, 1)))
    return dens, curve, t1 + t2


@pytest.fixture(scope="session")
def directed_pairs():
    cases = [
        ("message", Message(2), message_policy(1.0), "sampled_exact", GRID_256),
        ("clamped", Message(2), clamped_feedback_policy(), EmVariant.FROZEN_HISTORY,
         make_grid(1.0, kind="dyadic", level=7)),
        ("modulated", Message(2), modulated_feedback_policy(), EmVariant.FROZEN_HISTORY,
         make_grid(1.0, kind="dyadic", level=7)),
        ("sinusoidal", Message(2), sinusoidal_feedback_policy(), EmVariant.FROZEN_TIME,
         make_grid(1.0, kind="dyadic", level=7)),
    ]
    out = []
    start = time.perf_counter()
    for name, msg, pol, variant, grid in cases:
        dens = mi_grid_density(msg, pol, grid, variant, TRIALS, RngStream(SEED))
        dirs = directed_info_grid(msg, pol, grid, TRIALS, RngStream(SEED), variant=variant)
        out.append((name, pol, dens, dirs))
    return out, time.perf_counter() - start


def test_criterion_01_bandlimited_capacity(criterion):
    omegas = np.logspace(0, 4, 40)

    def run():
        return [bandlimited_capacity(2.0, w) for w in omegas]

    vals = run()
    increasing = bool(np.all(np.diff(vals) > 0))
    near = abs(bandlimited_capacity(2.0, 1e4) - 1.0) <= 1e-4
    seconds = best_time(run)
    ok = increasing and near and seconds < 1e-3
    criterion(1, ok, f"increasing={increasing} |C(1e4)-1|={abs(vals[-1] - 1):.2e} time={seconds * 1e3:.3f} ms")
    assert ok


def test_criterion_02_riccati_golden_value(criterion):
    params = OUParams(4.0, 2.0)

    def run():
        sol = riccati_ou(params, 1.0, 20.0)
        dt = min(20.0 / 1e4, 0.1 / (4.0 * 2.0))
        half = riccati_ou(params, 1.0, 20.0, dt=dt / 2)
        return sol, half

    (sol, half), seconds = timed(run)
    golden = 4 * math.sqrt(2) - 4
    rel_ss = abs(sol.steady_state - golden) / golden
    rel_end = abs(sol.sigma[-1] - golden) / golden
    rel_dt = abs(half.mi_integral - sol.mi_integral) / sol.mi_integral
    ok = rel_ss <= 1e-8 and rel_end <= 1e-8 and rel_dt < 1e-8 and seconds < 1.0
    criterion(2, ok, f"Sigma*={sol.sigma[-1]:.15f} rel={rel_end:.1e} dt-halving rel={rel_dt:.1e} "
                     f"time={seconds:.3f} s")
    assert ok


def test_criterion_03_capacity_approach(criterion):
    def run():
        sol = riccati_ou(OUParams(50.0, 2.0), 1.0, 5.0)
        return mi_duncan(trapezoid(sol.sigma, sol.times)) / 5.0, sol.mi_integral / 5.0

    (duncan_rate, riccati_rate), seconds = timed(run)
    ok = 0.95 <= duncan_rate <= 1.0 and 0.95 <= riccati_rate <= 1.0 and seconds < 1.0
    criterion(3, ok, f"I_T/T={riccati_rate:.5f} (Duncan {duncan_rate:.5f}) time={seconds:.3f} s")
    assert ok


def test_criterion_04_estimator_cross_validation(criterion, estimator_triple):
    dens, curve, seconds = estimator_triple
    oracle = bpsk_mi(1.0)
    duncan = mi_duncan(curve.causal_integral)
    duncan_se = 0.5 * curve.causal_integral_se
    agree = (
        abs(dens.value - oracle) <= 3 * dens.stderr
        and abs(duncan - oracle) <= 3 * duncan_se
        and abs(dens.value - duncan) <= 3 * math.hypot(dens.stderr, duncan_se)
    )
    small = dens.stderr <= 0.01 and duncan_se <= 0.01
    ok = agree and small and seconds < 120
    criterion(4, ok, f"grid={dens.value:.5f}±{dens.stderr:.5f} duncan={duncan:.5f}±{duncan_se:.5f} "
                     f"oracle={oracle:.5f} time={seconds:.1f} s")
    assert ok


def test_criterion_05_sampling_suite(criterion, suites):
    details, ok = [], True
    for key in ("sampling", "sampling_ramp"):
        table, seconds = suites[key]
        nondecreasing = all(r["nondecreasing"] for r in table.rows)
        stabilized = table.rows[-1]["stabilized"] is True
        good = nondecreasing and stabilized and seconds < 180
        ok &= good
        details.append(f"{key}: mi(256)={table.rows[-1]['mi']:.5f} nondecreasing={nondecreasing} "
                       f"stabilized={stabilized} {seconds:.1f} s")
    criterion(5, ok, "; ".join(details))
    assert ok


def test_criterion_06_approximation_suite(criterion, suites):
    details, ok = [], True
    for key in ("approx_clamped", "approx_modulated", "approx_sinusoidal"):
        table, seconds = suites[key]
        last = {r["variant"]: r for r in table.rows if r["n"] == 256}
        stable = all(r["stabilized"] is True for r in last.values()) and len(last) == 4
        ok &= stable and seconds < 300
        details.append(f"{key}: " + ",".join(f"{v[3:]}={r['mi']:.4f}" for v, r in last.items())
                       + f" stable={stable} {seconds:.1f} s")
    collapse_table, seconds = suites["approx_message"]
    collapse = [r["collapse_ok"] for r in collapse_table.rows if r["variant"] != "sampled_exact"]
    collapsed = len(collapse) == 16 and all(c is True for c in collapse)
    ok &= collapsed and seconds < 300
    details.append(f"no-feedback collapse bit-for-bit={collapsed}")
    criterion(6, ok, "; ".join(details))
    assert ok


def test_criterion_07_directed_information_identity(criterion, directed_pairs):
    pairs, seconds = directed_pairs
    details, ok = [], True
    for name, _, dens, dirs in pairs:
        same = abs(dirs.value - dens.value) <= 3 * math.hypot(dirs.stderr, dens.stderr)
        ok &= same
        details.append(f"{name}: {dirs.value:.5f} vs {dens.value:.5f}")
    ok &= seconds < 120
    criterion(7, ok, "; ".join(details) + f" time={seconds:.1f} s")
    assert ok


def test_criterion_08_converse_bound(criterion, suites, estimator_triple, directed_pairs):
    checked, failed = 0, []
    for key, (table, _) in suites.items():
        if key == "mmse":
            continue
        for r in table.rows:
            checked += 1
            if r["converse_ok"] is not True:
                failed.append((key, r.get("variant"), r["n"]))
    dens, curve, _ = estimator_triple
    direct = [(dens, message_policy(1.0))]
    for _, pol, d1, d2 in directed_pairs[0]:
        direct += [(d1, pol), (d2, pol)]
    for est, pol in direct:
        checked += 1
        if not converse_ok(est, pol):
            failed.append(("direct", est.method, est.n))
    ok = not failed
    criterion(8, ok, f"{checked} estimates checked against P_eff*T/2 + 2 sigma, failures={failed}")
    assert ok


def test_criterion_09_mac_other_user_as_noise(criterion):
    def run():
        return [mac_ou_mi_table(a, 1.0, 1.0, 5.0) for a in (5.0, 50.0, 500.0)]

    tables, seconds = timed(run)
    gaps = [t.gap1 for t in tables]
    ok = abs(tables[1].gap1) <= 0.01 and gaps[0] > gaps[1] > gaps[2] and seconds < 1.0
    criterion(9, ok, f"gaps={[round(g, 5) for g in gaps]} time={seconds:.3f} s")
    assert ok


def test_criterion_10_i_mmse_monotonicity(criterion):
    def run():
        ou = i_mmse_check(("ou", 10.0, 1.0), [0.5, 1, 2, 4, 8], T=5.0)
        binary = i_mmse_check(("binary", 1.0), [1.0], T=1.0, h=1e-3)
        return ou, binary

    (ou, binary), seconds = timed(run)
    row = binary.rows[0]
    slope_gap = abs(row["dI_dsnr"] - row["half_smoothed"])
    ok = ou.decreasing and slope_gap <= 1e-3 and seconds < 5.0
    ratios = [round(float(r["I_T_over_snr"]), 4) for r in ou.rows]
    criterion(10, ok, f"I_T/snr={ratios} slope gap={slope_gap:.1e} time={seconds:.2f} s")
    assert ok


def test_criterion_11_feedback_gain(criterion):
    def run():
        residuals = [abs(rho_star_residual(rho_star(P), P)) for P in (0.1, 1.0, 10.0)]
        return residuals, sk_bc_report(1.0), sk_rate_series(1.0, 1e-4, 10_000)

    (residuals, rep, series), seconds = timed(run)
    oracle = (5.5 - math.sqrt(5.5**2 - 6.0)) / 2
    ok = (
        max(residuals) <= 1e-12
        and abs(rep.rho_star - oracle) <= 1e-9
        and rep.sum_rate > rep.P / 2
        and abs(series - rep.per_user_rate) <= 1e-3
        and not bc_region(1.0, [1.0, 1.0]).contains([rep.per_user_rate] * 2)
        and seconds < 1.0
    )
    criterion(11, ok, f"rho*={rep.rho_star:.12f} max residual={max(residuals):.1e} sum={rep.sum_rate:.5f} "
                      f"series={series:.6f} time={seconds * 1e3:.2f} ms")
    assert ok


def test_criterion_12_region_algebra(criterion):
    def run():
        good = True
        for region in (mac_region([2.0, 4.0]), bc_region(2.0, [1.0, 2.0]), bc_region(2.0, [1.0, 1.0])):
            for c in region.corners():
                good &= region.contains(c)
                for k in region.tight(c):
                    normal = np.asarray(region.constraints[k][0])
                    good &= not region.contains(np.asarray(c) * (1 + 1e-6) + 1e-6 * normal)
        same = degraded_bc_feedback_region(2.0, 1.0, 1.0, feedback=True) is degraded_bc_feedback_region(2.0, 1.0, 1.0)
        return good, same

    good, same = run()
    seconds = best_time(run)
    ok = good and same and seconds < 1e-3
    criterion(12, ok, f"corners/inflation={good} degraded feedback identical object={same} "
                      f"time={seconds * 1e3:.3f} ms")
    assert ok


def test_criterion_13_worker_invariance(criterion, suites):
    mismatched = []
    for key, (suite, overrides) in SUITE_CONFIGS.items():
        table, _ = suites[key]
        cfg = ex.make_config({}, {"trials": TRIALS, "seed": SEED, "workers": 4, **overrides})
        again = ex.SUITES[suite](cfg)
        for fmt in ("csv", "json"):
            if render(table, fmt) != render(again, fmt):
                mismatched.append((key, fmt))
    ok = not mismatched
    criterion(13, ok, f"{len(SUITE_CONFIGS)} suites re-run with 4 workers vs 1, mismatches={mismatched}")
    assert ok
