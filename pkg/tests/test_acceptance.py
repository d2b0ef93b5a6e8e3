"""Acceptance gate: ten end-to-end criteria with explicit tolerances.

Each test prints one ``criterion NN: PASS/FAIL`` line with the measured
quantities next to their tolerances, then asserts.  Runtime limits are
wall-clock budgets for the computation itself; kernels are JIT-warmed once
up front so compilation is not billed to any criterion.
"""

import math
import os
import sys
import time
from dataclasses import replace

import numpy as np
import pytest

from _helpers import CONFIG_DIR, heat_problem, tight_heat_traits
from nlevo import cli, inequalities as ineq, kernels, solver as sv, spaces
from nlevo.catalog import (CATALOG_NAMES, build_named, catalog_entry,
                           taylor_green_initial, transport_term)
from nlevo.functions import ScalarFunction
from nlevo.operators import (FieldSampler, TraitFunctional, check_coercivity,
                             check_local_monotonicity, run_condition_battery)


@pytest.fixture(scope="module", autouse=True)
def _warm_kernels():
    kernels.warmup()


def _verdict(num, ok, detail):
    line = "criterion %02d: %s — %s" % (num, "PASS" if ok else "FAIL", detail)
    print(line)
    if sys.stdout is not sys.__stdout__:
        # Also emit past pytest's capture so the verdict line is visible in
        # the run log even when the test passes.
        print(line, file=sys.__stdout__)
    return line


def test_criterion_01_single_mode_decay_oracle():
    problem = heat_problem(n=1)
    t0 = time.perf_counter()
    tr = sv.solve(problem, sv.SolverConfig(T=1.0, dt=1e-4))
    wall = time.perf_counter() - t0
    err = abs(float(tr.norm_h[-1]) - math.exp(-1.0))
    ok = err < 1e-6 and wall < 1.0
    line = _verdict(1, ok, "|u(1)|_H vs e^-1 err %.3g (tol 1e-6), "
                    "%.2fs (budget 1s)" % (err, wall))
    assert ok, line


def test_criterion_02_vortex_decay_oracle():
    t0 = time.perf_counter()
    nse = build_named("nse_2d", n=8, overrides={"nu": 0.1})
    tr = sv.solve(nse, sv.SolverConfig(T=1.0, dt=1e-3))
    wall = time.perf_counter() - t0
    energy = float(tr.norm_h[-1]) ** 2
    exact = 2.0 * math.pi ** 2 * math.exp(-0.4)
    rel = abs(energy - exact) / exact
    tg = taylor_green_initial(nse.basis)
    nonlin = float(np.max(np.abs(transport_term(nse.basis, tg, tg))))
    ok = rel < 1e-4 and nonlin < 1e-10 and wall < 60.0
    line = _verdict(2, ok, "energy rel err %.3g (tol 1e-4), projected "
                    "nonlinearity %.3g (tol 1e-10), %.1fs (budget 60s)"
                    % (rel, nonlin, wall))
    assert ok, line


def test_criterion_03_quartic_interpolation_suites():
    t0 = time.perf_counter()
    two_d = (spaces.build_fourier_basis(
        spaces.Domain.torus(2 * math.pi, 2 * math.pi), 8),
        build_named("nse_2d", n=4).basis)
    three_d = (spaces.build_fourier_basis(
        spaces.Domain.torus(2 * math.pi, 2 * math.pi, 2 * math.pi), 3),
        build_named("leray_alpha_3d", n=2).basis)
    counts = {2: 0, 3: 0}
    worst = {2: math.inf, 3: math.inf}
    for dims, bases, check in ((2, two_d, ineq.ladyzhenskaya_2d),
                               (3, three_d, ineq.ladyzhenskaya_3d)):
        for bi, basis in enumerate(bases):
            sampler = FieldSampler(basis, [100 + dims, bi])
            for coeffs in sampler.sample(100):
                rep = check(spaces.Field(basis, coeffs))
                counts[dims] += 1
                worst[dims] = min(worst[dims], rep.slack)
    wall = time.perf_counter() - t0
    ok = (counts[2] >= 200 and counts[3] >= 200
          and worst[2] >= -1e-9 and worst[3] >= -1e-9 and wall < 30.0)
    line = _verdict(3, ok, "constant-2 suite min slack %.3g on %d fields, "
                    "constant-4 suite min slack %.3g on %d fields "
                    "(tol -1e-9), %.1fs (budget 30s)"
                    % (worst[2], counts[2], worst[3], counts[3], wall))
    assert ok, line


def test_criterion_04_condition_battery_over_catalog():
    t0 = time.perf_counter()
    failures = []
    for name in CATALOG_NAMES:
        reports = run_condition_battery(build_named(name), seed=0,
                                        n_samples=1000)
        for cond in ("H1", "H2", "H3", "H4"):
            rep = reports[cond]
            if not rep.passed or rep.violations:
                failures.append("%s/%s" % (name, cond))
    tight = heat_problem(n=16)
    tight = tight.with_traits(tight_heat_traits(tight))
    fitted = []
    for ri, (radius, count) in enumerate(zip((1.0, 5.0, 20.0),
                                             (333, 333, 334))):
        rep = check_coercivity(
            tight, 0.0,
            FieldSampler(tight.basis, [0, 2, ri], target_v_norm=radius),
            count)
        fitted.append(rep.fitted_constants["delta_hat"])
    delta_err = abs(min(fitted) - 2.0)
    wall = time.perf_counter() - t0
    ok = not failures and delta_err < 1e-10 and wall < 300.0
    line = _verdict(4, ok, "1000-sample battery failures %s, pure-Laplacian "
                    "delta_hat err %.3g (tol 1e-10), %.1fs (budget 300s)"
                    % (failures or "none", delta_err, wall))
    assert ok, line


def test_criterion_05_flow_monotonicity_weight():
    results = []
    for nu in (0.1, 1.0):
        problem = build_named("nse_2d", overrides={"nu": nu})
        declared = problem.traits.with_updates(c_const=0.0)
        violations, worst, samples = 0, math.inf, 0
        for ri, radius in enumerate((1.0, 5.0, 20.0)):
            sampler = FieldSampler(problem.basis, [5, 1, ri],
                                   target_v_norm=radius)
            count = 334 if ri < 2 else 332
            rep = check_local_monotonicity(problem, 0.0, sampler, count,
                                           traits=declared)
            violations += len(rep.violations)
            worst = min(worst, rep.min_slack)
            samples += rep.samples
        results.append((nu, samples, violations, worst))
    ok = all(s == 1000 and v == 0 and w > 0 for _, s, v, w in results)
    detail = "; ".join("nu=%g: %d pairs, %d violations, min slack %.3g"
                       % r for r in results)
    line = _verdict(5, ok, detail + " (require 1000 pairs, zero violations)")
    assert ok, line


def test_criterion_06_energy_ledger_sweep():
    t0 = time.perf_counter()
    worst = math.inf
    bad = []
    for i in range(100):
        name = CATALOG_NAMES[i % len(CATALOG_NAMES)]
        problem = build_named(name)
        u0 = FieldSampler(problem.basis, [60, i],
                          target_v_norm=1.0).sample(1)[0]
        problem = replace(problem, initial=u0)
        tr = sv.solve(problem, sv.SolverConfig(T=0.25, dt=2.5e-3))
        if tr.status != "ok":
            bad.append("%d:%s:%s" % (i, name, tr.status))
            continue
        ledger = sv.energy_monitor(tr, problem)
        worst = min(worst, ledger.min_slack)
        if not ledger.passed(tol=1e-8):
            bad.append("%d:%s:ledger" % (i, name))
    heat = heat_problem(n=16)
    tr = sv.solve(heat, sv.SolverConfig(T=1.0, dt=1e-3))
    led = sv.energy_monitor(tr, heat, traits=tight_heat_traits(heat))
    closed = (1.0 - np.exp(-2.0 * tr.times)) / 2.0
    heat_err = float(np.max(np.abs(led.slack - closed)))
    wall = time.perf_counter() - t0
    ok = not bad and worst >= -1e-8 and heat_err < 1e-6
    line = _verdict(6, ok, "100-run sweep min slack %.3g (tol -1e-8), "
                    "failures %s, heat slack vs (1-e^-2t)/2 err %.3g "
                    "(tol 1e-6), %.1fs" % (worst, bad or "none",
                                           heat_err, wall))
    assert ok, line


def test_criterion_07_continuous_dependence_pairs():
    heat = heat_problem(n=16)
    dep = sv.dependence_experiment(
        heat, (1.1 * heat.initial, heat.initial), (None, None),
        sv.SolverConfig(T=1.0, dt=1e-4))
    closed = 0.01 * np.exp(-2.0 * dep.times)
    heat_err = float(np.max(np.abs(dep.lhs - closed)))
    heat_ok = dep.passed() and heat_err < 1e-10

    nse = build_named("nse_2d", overrides={"nu": 1.0})
    tg = taylor_green_initial(nse.basis)
    dep2 = sv.dependence_experiment(nse, (1.01 * tg, tg), (None, None),
                                    sv.SolverConfig(T=1.0, dt=1e-3))
    factor = float(np.max(dep2.exp_factor))
    flow_ok = dep2.passed() and np.isfinite(factor)
    ok = heat_ok and flow_ok
    line = _verdict(7, ok, "pure-diffusion pair closed-form err %.3g "
                    "(tol 1e-10); near-vortex pair bound holds %s, "
                    "exponential factor %.6g (finite)"
                    % (heat_err, dep2.passed(), factor))
    assert ok, line


def test_criterion_08_galerkin_convergence():
    u0 = np.array([k ** -2.0 for k in range(1, 17)])
    heat = heat_problem(n=16, initial=u0)
    heat_study = sv.convergence_study(
        heat, sv.SolverConfig(T=1.0, dt=1e-3), [2, 4, 8])
    burgers_study = sv.convergence_study(
        build_named("burgers"), sv.SolverConfig(T=0.5, dt=1e-3), [8, 16, 32])
    final = heat_study.distances[-1]
    ok = (heat_study.decreasing and burgers_study.decreasing
          and final < 1e-3)
    line = _verdict(8, ok, "diffusion distances %s decreasing=%s, final "
                    "%.6g (tol 1e-3); conservation-law distances %s "
                    "decreasing=%s"
                    % (["%.3g" % d for d in heat_study.distances],
                       heat_study.decreasing, final,
                       ["%.3g" % d for d in burgers_study.distances],
                       burgers_study.decreasing))
    assert heat_study.decreasing and burgers_study.decreasing, line
    # The slow-decaying initial state carries ~7.0e-3 of its L2(0,T;H) mass
    # in modes 9..16, so the n=4 vs n=8 distance cannot drop below 1e-3 at
    # any time resolution; recorded as a known-failing tolerance.
    assert final < 1e-3, line


def test_criterion_09_regularized_transport_structure():
    problem = build_named("leray_alpha_3d")
    basis = problem.basis
    nu = catalog_entry("leray_alpha_3d").default_params.nu
    smooth = 1.0 / (1.0 + basis.v_weight ** 2)
    sampler = FieldSampler(basis, [9, 0], target_v_norm=5.0)
    tri_worst = 0.0
    for u, v in zip(sampler.sample(100), sampler.sample(100)):
        val = abs(float(transport_term(basis, u * smooth, v) @ v))
        tri_worst = max(tri_worst, val)

    field = spaces.Field(basis, np.random.default_rng(5).normal(
        size=basis.n_modes))
    from nlevo.catalog import helmholtz_smooth
    smoothed = helmholtz_smooth(field, 1.0)
    round_trip = float(np.max(np.abs(
        smoothed.coeffs * (1.0 + basis.v_weight ** 2) - field.coeffs)))

    # Fit the required monotonicity weight against the sampling radius with
    # the viscous term exactly cancelled; its growth exponent must not
    # exceed the declared |v|_V^{8/5} weight's.
    probe = problem.traits.with_updates(c_const=0.0,
                                        eta=TraitFunctional.zero(),
                                        margin=nu)
    radii = np.geomspace(2.0, 40.0, 8)
    required = []
    for ri, radius in enumerate(radii):
        s = FieldSampler(basis, [9, 1, ri], target_v_norm=float(radius))
        rep = check_local_monotonicity(problem, 0.0, s, 120, traits=probe)
        required.append(rep.fitted_constants["c_hat"])
    nondegenerate = all(c > 0 for c in required)
    slope = (float(np.polyfit(np.log(radii), np.log(required), 1)[0])
             if nondegenerate else math.inf)
    ok = (tri_worst < 1e-10 and round_trip <= 1e-12
          and nondegenerate and slope <= 8.0 / 5.0 + 0.1)
    line = _verdict(9, ok, "trilinear identity worst %.3g on 100 samples "
                    "(tol 1e-10), smoother round-trip %.3g (tol 1e-12), "
                    "weight-growth slope %.4g (limit %.2f)"
                    % (tri_worst, round_trip, slope, 8.0 / 5.0 + 0.1))
    assert ok, line


def test_criterion_10_determinism_and_exit_codes(tmp_path):
    heat_cfg = os.path.join(CONFIG_DIR, "heat_interval.toml")
    codes = {}
    for label, cfg in (("pass", "heat_interval.toml"),
                       ("blowup", "burgers_blowup.toml"),
                       ("violation", "heat_bad_traits.toml")):
        out = str(tmp_path / label)
        codes[label] = cli.main(["run", os.path.join(CONFIG_DIR, cfg),
                                 "--out", out])
    a, b = str(tmp_path / "rep_a"), str(tmp_path / "rep_b")
    cli.main(["run", heat_cfg, "--out", a])
    cli.main(["run", heat_cfg, "--out", b])
    identical = all(
        open(os.path.join(a, name)).read() == open(os.path.join(b,
                                                                 name)).read()
        for name in os.listdir(a) if name != "timings.csv")
    drift_free = cli.compare_runs(a, b).identical
    ok = (codes == {"pass": 0, "blowup": 2, "violation": 3}
          and identical and drift_free)
    line = _verdict(10, ok, "fixture exit codes %s (want pass=0 blowup=2 "
                    "violation=3), rerun byte-identical %s, compare drift-"
                    "free %s" % (codes, identical, drift_free))
    assert ok, line
