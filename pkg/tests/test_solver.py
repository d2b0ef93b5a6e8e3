"""Time stepping, energy ledger, residuals, convergence, dependence."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from _helpers import heat_problem, tight_heat_traits
from nlevo import solver as sv
from nlevo import spaces
from nlevo.catalog import build_named, taylor_green_initial
from nlevo.errors import ConfigurationError


@pytest.fixture(scope="module")
def heat16():
    return heat_problem(n=16)


@pytest.fixture(scope="module")
def heat16_run(heat16):
    return sv.solve(heat16, sv.SolverConfig(T=1.0, dt=1e-3))


# --- configuration ----------------------------------------------------------

def test_solver_config_validation():
    with pytest.raises(ConfigurationError):
        sv.SolverConfig(T=-1.0, dt=1e-3)
    with pytest.raises(ConfigurationError):
        sv.SolverConfig(T=1.0, dt=0.0)
    with pytest.raises(ConfigurationError):
        sv.SolverConfig(T=1.0, dt=1e-3, stepper="frobz")
    with pytest.raises(ConfigurationError):
        sv.SolverConfig(T=1.0, dt=1e-3, dt_policy="frobz")
    with pytest.raises(ConfigurationError):
        sv.SolverConfig(T=1.0, dt=1e-3, atol=-1.0)


# --- fixed-step accuracy ----------------------------------------------------

def test_heat_single_mode_matches_exponential():
    tr = sv.solve(heat_problem(n=1), sv.SolverConfig(T=1.0, dt=1e-4))
    assert tr.status == "ok"
    assert len(tr.times) == 10001
    assert abs(tr.norm_h[-1] - math.exp(-1.0)) < 1e-6


def test_heat_stepper_is_second_order():
    errs = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        tr = sv.solve(heat_problem(n=1), sv.SolverConfig(T=1.0, dt=dt))
        errs.append(abs(tr.norm_h[-1] - math.exp(-1.0)))
    assert 3.5 < errs[0] / errs[1] < 4.5
    assert 3.5 < errs[1] / errs[2] < 4.5


def test_zero_state_is_an_equilibrium():
    p = heat_problem(n=8, initial=np.zeros(8))
    tr = sv.solve(p, sv.SolverConfig(T=1.0, dt=1e-2))
    assert float(np.max(tr.norm_h)) == 0.0


def test_conservation_law_reference_value():
    tr = sv.solve(build_named("burgers"), sv.SolverConfig(T=0.5, dt=1e-3))
    assert tr.status == "ok"
    assert float(tr.norm_h[-1]) == pytest.approx(0.5943966097835095, rel=1e-9)


# --- adaptive stepping and blowup ------------------------------------------

def test_adaptive_steps_and_accuracy():
    tr = sv.solve(heat_problem(n=8),
                  sv.SolverConfig(T=1.0, dt=1e-2, dt_policy=sv.ADAPTIVE,
                                  atol=1e-10, rtol=1e-8))
    assert tr.status == "ok"
    assert len(tr.times) - 1 == 204
    assert tr.times[-1] == pytest.approx(1.0, abs=1e-12)
    assert abs(tr.norm_h[-1] - math.exp(-1.0)) < 1e-6


def test_blowup_is_reported_not_raised():
    p = build_named("burgers", initial=np.r_[40.0, np.zeros(31)])
    tr = sv.solve(p, sv.SolverConfig(T=2.0, dt=0.05, stepper=sv.SEMI_IMPLICIT))
    assert tr.status == "blowup"
    assert tr.times[-1] == pytest.approx(0.2, abs=1e-12)
    assert "blowup threshold" in tr.message
    assert np.all(np.isfinite(tr.states[:-1]))


# --- energy ledger ----------------------------------------------------------

def test_ledger_closed_form_for_diffusion(heat16, heat16_run):
    led = sv.energy_monitor(heat16_run, heat16,
                            traits=tight_heat_traits(heat16))
    closed = (1.0 - np.exp(-2.0 * heat16_run.times)) / 2.0
    assert np.max(np.abs(led.slack - closed)) < 1e-6
    assert led.min_slack == 0.0
    assert led.k_bound == 1.0
    assert led.passed()


def test_ledger_with_declared_traits(heat16, heat16_run):
    led = sv.energy_monitor(heat16_run, heat16)
    assert led.passed()
    assert led.min_slack == 0.0  # slack starts at zero at t = 0
    assert led.k_bound >= 1.0
    assert led.times.shape == led.lhs.shape == led.rhs.shape == led.slack.shape


# --- weak residual ----------------------------------------------------------

def test_weak_residual_small_on_active_mode(heat16, heat16_run):
    v = spaces.Field(heat16.basis, np.eye(16)[0])
    assert abs(sv.weak_residual(heat16_run, heat16, v, 0.5)) < 1e-12


def test_weak_residual_zero_on_inactive_mode(heat16, heat16_run):
    v = spaces.Field(heat16.basis, np.eye(16)[5])
    assert sv.weak_residual(heat16_run, heat16, v, 0.5) == 0.0


def test_weak_residual_on_vortex_run():
    nse = build_named("nse_2d", n=8, overrides={"nu": 0.1})
    tr = sv.solve(nse, sv.SolverConfig(T=1.0, dt=1e-3))
    v = spaces.Field(nse.basis, taylor_green_initial(nse.basis))
    assert abs(sv.weak_residual(tr, nse, v, 0.5)) < 1e-10


# --- convergence ------------------------------------------------------------

def test_diffusion_convergence_matches_spectral_tail():
    u0 = np.array([k ** -2.0 for k in range(1, 17)])
    p = heat_problem(n=16, initial=u0)
    study = sv.convergence_study(p, sv.SolverConfig(T=1.0, dt=1e-3), [2, 4, 8])
    assert study.decreasing

    def tail(nc, nf):
        acc = sum(k ** -4.0 * (1 - math.exp(-2 * k ** 2)) / (2 * k ** 2)
                  for k in range(nc + 1, nf + 1))
        return math.sqrt(acc)

    # L2(0,T;H) distance between truncations is carried by modes (nc, nf]
    assert study.distances[0] == pytest.approx(tail(2, 4), abs=1e-5)
    assert study.distances[1] == pytest.approx(tail(4, 8), abs=1e-5)
    assert study.distances[0] == pytest.approx(0.028424691021813702, rel=1e-9)
    assert study.distances[1] == pytest.approx(0.006991923206841757, rel=1e-9)


def test_convergence_exact_on_invariant_subspace():
    p = heat_problem(n=16, initial=np.r_[1.0, 0.5, np.zeros(14)])
    study = sv.convergence_study(p, sv.SolverConfig(T=1.0, dt=1e-2), [2, 4, 8])
    assert study.distances == [0.0, 0.0]


def test_conservation_law_convergence_is_spectral():
    study = sv.convergence_study(build_named("burgers"),
                                 sv.SolverConfig(T=0.5, dt=1e-3), [8, 16, 32])
    assert study.decreasing
    assert study.distances[0] == pytest.approx(3.123154549731446e-07, rel=1e-6)
    assert study.distances[1] < 1e-11


# --- continuous dependence --------------------------------------------------

def test_dependence_closed_form_for_diffusion(heat16):
    dep = sv.dependence_experiment(
        heat16, (1.1 * heat16.initial, heat16.initial), (None, None),
        sv.SolverConfig(T=1.0, dt=1e-4))
    closed = 0.01 * np.exp(-2.0 * dep.times)
    assert np.max(np.abs(dep.lhs - closed)) < 1e-10
    assert dep.passed()
    assert float(dep.rhs[-1]) == pytest.approx(0.01 * math.exp(2.0), rel=1e-9)


def test_dependence_is_symmetric_in_labels(heat16):
    cfg = sv.SolverConfig(T=0.25, dt=1e-3)
    a = sv.dependence_experiment(
        heat16, (1.1 * heat16.initial, heat16.initial), (None, None), cfg)
    b = sv.dependence_experiment(
        heat16, (heat16.initial, 1.1 * heat16.initial), (None, None), cfg)
    assert np.array_equal(a.lhs, b.lhs)
    assert np.array_equal(a.rhs, b.rhs)


# --- backend equivalence ----------------------------------------------------

SNIPPET = """
import numpy as np
from nlevo.catalog import build_named
from nlevo.functions import ScalarFunction
from nlevo import solver as sv
p = build_named("burgers", n=16, overrides={"F": ScalarFunction.zero(),
                                            "g": ScalarFunction.zero()})
tr = sv.solve(p, sv.SolverConfig(T=0.2, dt=1e-3))
bg = sv.solve(build_named("burgers"), sv.SolverConfig(T=0.2, dt=1e-3))
print(repr(float(tr.norm_h[-1])), repr(float(bg.norm_h[-1])), len(tr.times))
"""


def test_numpy_fallback_matches_numba_backend():
    def run(disable):
        env = dict(os.environ)
        env["NLEVO_DISABLE_NUMBA"] = "1" if disable else "0"
        out = subprocess.run([sys.executable, "-c", SNIPPET], env=env,
                             capture_output=True, text=True, check=True)
        h1, h2, steps = out.stdout.split()
        return float(h1), float(h2), int(steps)

    with_numba = run(False)
    without = run(True)
    assert with_numba[2] == without[2]
    assert with_numba[0] == pytest.approx(without[0], rel=1e-12)
    assert with_numba[1] == pytest.approx(without[1], rel=1e-12)
