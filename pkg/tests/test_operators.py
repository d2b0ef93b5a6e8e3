"""Condition checkers: samplers, fitted constants, falsifiers, the battery."""

import numpy as np
import pytest

from _helpers import heat_problem, tight_heat_traits, unit_mode
from nlevo import operators as ops
from nlevo import spaces
from nlevo.errors import ConfigurationError
from nlevo.functions import ScalarFunction
from nlevo.operators import (C3, H1, H2, H3, H4, ConditionReport,
                             FieldSampler, TraitFunctional,
                             check_coercivity, check_growth,
                             check_hemicontinuity, check_local_monotonicity,
                             check_uniqueness_growth, run_condition_battery)


@pytest.fixture(scope="module")
def heat():
    return heat_problem(n=16)


# --- samplers ---------------------------------------------------------------

def test_sampler_is_deterministic(heat):
    a = FieldSampler(heat.basis, [7, 0, 0], target_v_norm=20.0).sample(10)
    b = FieldSampler(heat.basis, [7, 0, 0], target_v_norm=20.0).sample(10)
    assert np.array_equal(a, b)
    c = FieldSampler(heat.basis, [8, 0, 0], target_v_norm=20.0).sample(10)
    assert not np.array_equal(a, c)


def test_sampler_hits_target_v_norm_exactly(heat):
    s = FieldSampler(heat.basis, [7, 0, 0], target_v_norm=20.0)
    vn = heat.basis.v_norm(s.sample(50))
    assert np.max(np.abs(vn - 20.0)) < 1e-12


def test_sampler_spectral_decay(heat):
    # sigma ~ v_weight^{-s_decay}: high modes carry visibly less variance
    s = FieldSampler(heat.basis, [9], s_decay=1.5)
    c = s.sample(4000)
    std = np.std(c, axis=0)
    assert std[0] > 10 * std[-1]


# --- coercivity and the fitted dissipation constant -------------------------

def test_laplacian_dissipation_constant_is_two(heat):
    tight = heat.with_traits(tight_heat_traits(heat))
    fitted = []
    for ri, (radius, count) in enumerate(zip((1.0, 5.0, 20.0),
                                             (333, 333, 334))):
        rep = check_coercivity(
            tight, 0.0,
            FieldSampler(tight.basis, [0, 2, ri], target_v_norm=radius),
            count)
        assert rep.passed
        fitted.append(rep.fitted_constants["delta_hat"])
    assert abs(min(fitted) - 2.0) < 1e-10


def test_coercivity_flags_overclaimed_delta(heat):
    bad = heat.with_traits(heat.traits.with_updates(delta=10.0))
    rep = check_coercivity(
        bad, 0.0, FieldSampler(heat.basis, [0, 2, 0], target_v_norm=5.0), 100)
    assert not rep.passed
    assert rep.violations and rep.min_slack < 0


# --- local monotonicity -----------------------------------------------------

def test_monotonicity_holds_for_diffusion(heat):
    rep = check_local_monotonicity(
        heat, 0.0, FieldSampler(heat.basis, [0, 1, 0], target_v_norm=5.0), 200)
    assert rep.passed and rep.samples == 200 and not rep.violations


def test_monotonicity_falsifier_overclaimed_margin(heat):
    # claiming three times the real dissipation as margin must fail loudly
    bad = heat.with_traits(heat.traits.with_updates(c_const=0.0, margin=3.0))
    rep = check_local_monotonicity(
        bad, 0.0, FieldSampler(heat.basis, [0, 1, 0], target_v_norm=5.0), 200)
    assert not rep.passed
    assert len(rep.violations) == 65  # 64 detailed + 1 summary row
    assert rep.min_slack == pytest.approx(-187.6265628696786, rel=1e-9)
    assert "pair=" in rep.extremal_sample


def test_monotonicity_fitted_constant_restores_validity(heat):
    bad = heat.with_traits(heat.traits.with_updates(c_const=0.0, margin=3.0))
    sampler = FieldSampler(heat.basis, [0, 1, 0], target_v_norm=5.0)
    c_hat = check_local_monotonicity(
        bad, 0.0, sampler, 200).fitted_constants["c_hat"]
    repaired = bad.with_traits(bad.traits.with_updates(c_const=c_hat + 1e-9))
    rep = check_local_monotonicity(
        repaired, 0.0, FieldSampler(heat.basis, [0, 1, 0], target_v_norm=5.0),
        200)
    assert rep.passed


# --- growth -----------------------------------------------------------------

def test_growth_fitted_constant(heat):
    rep = check_growth(
        heat, 0.0, FieldSampler(heat.basis, [0, 3, 0], target_v_norm=5.0), 300)
    assert rep.passed and not rep.violations
    assert rep.fitted_constants["c_hat"] == pytest.approx(
        0.5936784547064878, rel=1e-9)
    assert not rep.surrogate


# --- hemicontinuity ---------------------------------------------------------

def _sign_jump_problem(basis):
    """s -> <A(v1 + s v2), v> with a hard sign nonlinearity jumps at the
    grid zero-crossings; the refinement must report non-convergence."""
    def apply_batch(t, c):
        return basis.from_grid(np.sign(basis.to_grid(c)))

    traits = ops.OperatorTraits(
        alpha=2.0, beta=2.0, delta=2.0, c_const=1.0,
        f_profile=ScalarFunction.constant(1.0),
        rho=TraitFunctional.zero(), eta=TraitFunctional.zero())
    return ops.EvolutionProblem(
        name="sign_jump", basis=basis, traits=traits,
        apply_batch=apply_batch,
        forcing=lambda t: np.zeros(basis.n_modes),
        initial=np.zeros(basis.n_modes))


def test_hemicontinuity_passes_for_smooth_operator(heat):
    v1 = spaces.Field(heat.basis, unit_mode(16, 0))
    v2 = spaces.Field(heat.basis, -2.0 * unit_mode(16, 0))
    v = spaces.Field(heat.basis, unit_mode(16, 0))
    rep = check_hemicontinuity(heat, 0.0, v1, v2, v, np.linspace(-1, 1, 17))
    assert rep.passed
    assert rep.fitted_constants["levels_used"] == 1
    assert rep.samples == 33  # 17 grid points + 16 midpoints


def test_hemicontinuity_falsifier_detects_jump(heat):
    pb = _sign_jump_problem(heat.basis)
    v1 = spaces.Field(heat.basis, unit_mode(16, 0))
    v2 = spaces.Field(heat.basis, -2.0 * unit_mode(16, 0))
    v = spaces.Field(heat.basis, unit_mode(16, 0))
    rep = check_hemicontinuity(pb, 0.0, v1, v2, v, np.linspace(-1, 1, 17))
    assert not rep.passed
    assert rep.fitted_constants["levels_used"] == 8
    assert rep.fitted_constants["final_gap"] == pytest.approx(
        0.7979622268930313, rel=1e-9)
    assert "refinement levels" in rep.violations[0]["note"]


def test_hemicontinuity_grid_validation(heat):
    v = spaces.Field(heat.basis, unit_mode(16, 0))
    with pytest.raises(ConfigurationError):
        check_hemicontinuity(heat, 0.0, v, v, v, np.linspace(-1, 1, 5))
    with pytest.raises(ConfigurationError):
        check_hemicontinuity(heat, 0.0, v, v, v, np.zeros(20))


# --- uniqueness growth ------------------------------------------------------

def test_uniqueness_weights_vanish_for_diffusion(heat):
    rep = check_uniqueness_growth(
        heat.traits, FieldSampler(heat.basis, [0, 4, 0], target_v_norm=5.0),
        100)
    assert rep.passed
    assert rep.fitted_constants["c3_hat"] == 0.0
    assert rep.min_slack == 0.0


# --- trait functionals ------------------------------------------------------

def test_trait_functional_evaluation(heat):
    basis = heat.basis
    c = np.random.default_rng(6).normal(size=(3, 16))
    assert TraitFunctional.zero().is_zero
    assert np.allclose(TraitFunctional.constant(2.5)(basis, c), 2.5)
    got = TraitFunctional.lp_power(3.0, 4.0, 4.0)(basis, c)
    assert np.allclose(got, 3.0 * basis.lp_norm(c, 4) ** 4, rtol=1e-9)
    got = TraitFunctional.v_power(2.0, 1.6)(basis, c)
    assert np.allclose(got, 2.0 * basis.v_norm(c) ** 1.6, rtol=1e-12)
    got = TraitFunctional.h_power(0.5, 2.0)(basis, c)
    assert np.allclose(got, 0.5 * basis.h_norm(c) ** 2, rtol=1e-12)
    combo = (TraitFunctional.constant(1.0)
             + TraitFunctional.h_power(1.0, 2.0)).scaled(2.0)
    assert np.allclose(combo(basis, c), 2.0 + 2.0 * basis.h_norm(c) ** 2,
                       rtol=1e-12)


def test_traits_with_updates_is_nondestructive(heat):
    updated = heat.traits.with_updates(c_const=0.0)
    assert updated.c_const == 0.0
    assert heat.traits.c_const == 1.0
    with pytest.raises(ConfigurationError):
        heat.traits.with_updates(delta=-1.0)


# --- batch application ------------------------------------------------------

def test_apply_chunked_matches_rowwise_apply(heat):
    c = np.random.default_rng(8).normal(size=(7, 16))
    batched = ops.apply_chunked(heat, 0.0, c)
    for i in range(7):
        one = ops.apply(heat, 0.0, spaces.Field(heat.basis, c[i]))
        assert np.array_equal(batched[i], one.coeffs)


# --- report plumbing and the battery ---------------------------------------

def test_condition_report_caps_detailed_violations():
    rep = ConditionReport(condition=H2)
    slacks = -np.ones(200)
    rep.record(slacks, np.full(200, 1e-12), lambda i: "s%d" % i)
    assert len(rep.violations) == 65
    assert rep.samples == 200
    assert not rep.passed


def test_battery_reports_all_conditions(heat):
    reps = run_condition_battery(heat, seed=3, n_samples=60)
    assert set(reps) == {H1, H2, H3, H4, C3}
    for rep in reps.values():
        assert rep.status == "checked"
        assert rep.passed
    assert reps[H2].samples == 60  # 20 + 20 + 20 over the three radii


def test_battery_skips_uniqueness_without_gamma():
    from nlevo.catalog import build_named
    p = build_named("advection_diffusion_3d")
    assert p.traits.gamma is None
    reps = run_condition_battery(p, seed=3, n_samples=30)
    assert reps[C3].status == "skipped"
    assert reps[C3].samples == 0


def test_battery_is_deterministic(heat):
    a = run_condition_battery(heat, seed=5, n_samples=45)
    b = run_condition_battery(heat, seed=5, n_samples=45)
    for cond in a:
        assert a[cond].min_slack == b[cond].min_slack
        assert a[cond].fitted_constants == b[cond].fitted_constants
