"""Evolution-operator interface, structural trait constants, and the
randomized condition checkers.

An :class:`EvolutionProblem` packages a time-dependent operator A(t, ·)
acting on basis coefficients, a forcing b(t), an initial state, and an
:class:`OperatorTraits` record holding the structural constants the theory
attaches to the operator: the coercivity exponent/margin (alpha, delta),
the growth exponent beta, the shared constant C, an integrable time profile
f(t), the local-monotonicity weight functionals rho and eta, and optionally
the uniqueness exponent gamma.

The checkers are falsifiers, not proofs: each draws norm-stratified random
fields, tests the declared inequality on every sample with a relative
tolerance, and reports violations, extremal slacks, and the best constant
the samples would admit (minimal admissible C, maximal coercivity margin).
All sampling is seeded and reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field, replace
from typing import Callable, Optional

import numpy as np

from . import spaces
from .errors import ConfigurationError, NumericalFailureError
from .functions import ScalarFunction

H1 = "H1"
H2 = "H2"
H3 = "H3"
H4 = "H4"
C3 = "C3"

RELATIVE_SLACK_TOL = 1e-9


def _slack_tolerance(lhs, rhs):
    return RELATIVE_SLACK_TOL * np.maximum(
        1.0, np.maximum(np.abs(lhs), np.abs(rhs)))


# --- trait functionals ----------------------------------------------------

@dataclass(frozen=True)
class TraitTerm:
    """One additive term coeff * Q(v)^power of a trait functional, where Q is
    a norm: 'const' (Q=1), 'lp' (L^p norm), 'vnorm', or 'hnorm'."""

    coeff: float
    kind: str
    p: float = 2.0
    power: float = 1.0

    def __post_init__(self):
        if self.coeff < 0:
            raise ConfigurationError(
                "trait-functional coefficients must be >= 0 (the weights are "
                "maps into [0, +inf))")
        if self.kind not in ("const", "lp", "vnorm", "hnorm"):
            raise ConfigurationError("unknown trait term kind %r" % (self.kind,))


class TraitFunctional:
    """A nonnegative functional of the state built from norm powers.

    Instances are sums of terms c·‖v‖_{L^p}^q, c·‖v‖_V^q, c·‖v‖_H^q and
    constants, which keeps them serializable for reports and guarantees
    nonnegativity term by term.  Evaluation is batched over leading axes.
    """

    def __init__(self, *terms: TraitTerm):
        self.terms = tuple(terms)

    @staticmethod
    def zero() -> "TraitFunctional":
        return TraitFunctional()

    @staticmethod
    def constant(c: float) -> "TraitFunctional":
        return TraitFunctional(TraitTerm(c, "const"))

    @staticmethod
    def lp_power(coeff: float, p: float, power: float) -> "TraitFunctional":
        return TraitFunctional(TraitTerm(coeff, "lp", p=p, power=power))

    @staticmethod
    def v_power(coeff: float, power: float) -> "TraitFunctional":
        return TraitFunctional(TraitTerm(coeff, "vnorm", power=power))

    @staticmethod
    def h_power(coeff: float, power: float) -> "TraitFunctional":
        return TraitFunctional(TraitTerm(coeff, "hnorm", power=power))

    def __add__(self, other: "TraitFunctional") -> "TraitFunctional":
        return TraitFunctional(*(self.terms + other.terms))

    def scaled(self, factor: float) -> "TraitFunctional":
        return TraitFunctional(*(replace(t, coeff=t.coeff * factor)
                                 for t in self.terms))

    @property
    def is_zero(self) -> bool:
        return all(t.coeff == 0.0 for t in self.terms)

    def __call__(self, basis: spaces.Basis, coeffs: np.ndarray,
                 v_norm: Optional[Callable] = None) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=np.float64)
        out = np.zeros(coeffs.shape[:-1])
        values = None
        for term in self.terms:
            if term.coeff == 0.0:
                continue
            if term.kind == "const":
                out = out + term.coeff
                continue
            if term.kind == "lp":
                if values is None:
                    values = basis.to_grid(coeffs)
                q = basis.lp_norm_grid(values, term.p)
            elif term.kind == "vnorm":
                q = v_norm(coeffs) if v_norm is not None else basis.v_norm(coeffs)
            else:
                q = basis.h_norm(coeffs)
            out = out + term.coeff * np.asarray(q) ** term.power
        return out

    def describe(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for t in self.terms:
            if t.kind == "const":
                parts.append("%g" % t.coeff)
            elif t.kind == "lp":
                parts.append("%g*Lp(%g)^%g" % (t.coeff, t.p, t.power))
            elif t.kind == "vnorm":
                parts.append("%g*V^%g" % (t.coeff, t.power))
            else:
                parts.append("%g*H^%g" % (t.coeff, t.power))
        return " + ".join(parts)

    def __repr__(self):  # pragma: no cover - debugging aid
        return "TraitFunctional(%s)" % self.describe()


# --- traits and problems --------------------------------------------------

@dataclass
class OperatorTraits:
    """Structural constants attached to an operator.

    The declared inequalities, for w = v1 - v2:
      monotonicity: ⟨A(t,v1)-A(t,v2), w⟩ ≤ (C + rho(v1) + eta(v2))·‖w‖²_H
                                            - margin·‖w‖_V^margin_exp
      coercivity:   2⟨A(t,v), v⟩ ≤ -delta·‖v‖_V^alpha + C·‖v‖²_H + f(t)
      growth:       ‖A(t,v)‖_V* ≤ (f(t)^{(alpha-1)/alpha}
                                    + C·‖v‖_V^{alpha-1})·(1 + ‖v‖_H^beta)
      uniqueness:   rho(v) + eta(v) ≤ C3·(1 + ‖v‖_V^alpha)·(1 + ‖v‖_H^gamma)
    with C3 = c3_const if given else c_const; gamma=None disables the
    uniqueness check.
    """

    alpha: float
    beta: float
    delta: float
    c_const: float
    f_profile: ScalarFunction
    rho: TraitFunctional
    eta: TraitFunctional
    gamma: Optional[float] = None
    c3_const: Optional[float] = None
    margin: float = 0.0
    margin_exp: float = 2.0

    def __post_init__(self):
        if not self.alpha > 1:
            raise ConfigurationError("coercivity exponent alpha must be > 1")
        if self.beta < 0:
            raise ConfigurationError("growth exponent beta must be >= 0")
        if not self.delta > 0:
            raise ConfigurationError("coercivity margin delta must be > 0")
        if self.margin < 0 or self.margin_exp < 1:
            raise ConfigurationError(
                "monotonicity margin needs margin >= 0, margin_exp >= 1")

    def f_at(self, t) -> np.ndarray:
        vals = np.asarray(self.f_profile(t), dtype=np.float64)
        if np.any(vals < -1e-12):
            raise ConfigurationError("f(t) profile must be nonnegative")
        return np.maximum(vals, 0.0)

    def with_updates(self, **kw) -> "OperatorTraits":
        return replace(self, **kw)


@dataclass
class EvolutionProblem:
    """A concrete evolution equation u' = A(t, u) + b(t) on a basis.

    ``apply_batch(t, coeffs)`` evaluates the Galerkin representation of
    A(t, ·) for coefficient arrays with any leading batch shape.
    ``linear_diag`` (if not None) is the diagonal of the linear part of A in
    the basis, and ``nonlinear_batch`` the remainder, enabling semi-implicit
    stepping; ``apply_batch`` must equal diag·u + nonlinear.
    Problems with a non-quadratic V-norm supply ``v_norm_batch`` and a
    surrogate ``vstar_norm_batch`` (flagged by ``vstar_is_surrogate``).
    """

    name: str
    basis: spaces.Basis
    traits: OperatorTraits
    apply_batch: Callable
    forcing: Callable
    initial: np.ndarray
    linear_diag: Optional[np.ndarray] = None
    nonlinear_batch: Optional[Callable] = None
    v_norm_batch: Optional[Callable] = None
    vstar_norm_batch: Optional[Callable] = None
    vstar_is_surrogate: bool = False
    describe_params: dict = dataclass_field(default_factory=dict)

    def __post_init__(self):
        self.initial = np.ascontiguousarray(self.initial, dtype=np.float64)
        if self.initial.shape != (self.basis.n_modes,):
            raise ConfigurationError(
                "initial state must have one coefficient per basis mode")

    def v_norms(self, coeffs) -> np.ndarray:
        if self.v_norm_batch is not None:
            return np.asarray(self.v_norm_batch(coeffs))
        return self.basis.v_norm(coeffs)

    def vstar_norms(self, coeffs) -> np.ndarray:
        if self.vstar_norm_batch is not None:
            return np.asarray(self.vstar_norm_batch(coeffs))
        return self.basis.vstar_norm(coeffs)

    def with_traits(self, traits: OperatorTraits) -> "EvolutionProblem":
        return replace(self, traits=traits)


def apply(problem: EvolutionProblem, t: float, u: spaces.Field) -> spaces.Field:
    """Galerkin image of A(t, u): coefficient i is ⟨A(t,u), e_i⟩.

    Raises NumericalFailureError (carrying t and the current norms) if the
    output is not finite.
    """
    if not u.basis.same_as(problem.basis):
        raise ConfigurationError("field does not live on the problem's basis")
    out = problem.apply_batch(float(t), u.coeffs)
    if not np.all(np.isfinite(out)):
        raise NumericalFailureError(
            "operator output is not finite", t=float(t),
            norms={"H": float(u.basis.h_norm(u.coeffs)),
                   "V": float(problem.v_norms(u.coeffs))})
    return spaces.Field(problem.basis, out, spaces.SPACE_VSTAR)


def apply_chunked(problem: EvolutionProblem, t: float, coeffs: np.ndarray,
                  chunk: int = 256) -> np.ndarray:
    """Batched operator application in bounded-memory chunks."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.ndim == 1 or coeffs.shape[0] <= chunk:
        out = problem.apply_batch(float(t), coeffs)
    else:
        out = np.concatenate(
            [problem.apply_batch(float(t), coeffs[i:i + chunk])
             for i in range(0, coeffs.shape[0], chunk)], axis=0)
    if not np.all(np.isfinite(out)):
        raise NumericalFailureError("operator output is not finite", t=float(t))
    return out


# --- reports --------------------------------------------------------------

@dataclass
class ConditionReport:
    """Result of checking one structural condition on sampled inputs."""

    condition: str
    samples: int = 0
    violations: list = dataclass_field(default_factory=list)
    fitted_constants: dict = dataclass_field(default_factory=dict)
    status: str = "checked"
    surrogate: bool = False
    min_slack: float = math.inf
    extremal_sample: str = ""

    @property
    def passed(self) -> bool:
        return self.status != "checked" or not self.violations

    def record(self, slacks: np.ndarray, tols: np.ndarray, descs) -> None:
        """Merge per-sample slacks into the report; descs maps index→text."""
        slacks = np.atleast_1d(slacks)
        tols = np.atleast_1d(tols)
        self.samples += slacks.size
        worst = int(np.argmin(slacks))
        if slacks[worst] < self.min_slack:
            self.min_slack = float(slacks[worst])
            self.extremal_sample = descs(worst)
        bad = np.nonzero(slacks < -tols)[0]
        for i in bad[:64]:
            self.violations.append(
                {"sample": descs(int(i)), "slack": float(slacks[i])})
        if bad.size > 64:
            self.violations.append(
                {"sample": "(+%d further violations)" % (bad.size - 64),
                 "slack": float(np.min(slacks[bad]))})


# --- sampling -------------------------------------------------------------

class FieldSampler:
    """Seeded random coefficient fields with spectral decay and optional
    rescaling to a target V-norm (the norm-stratification radius)."""

    def __init__(self, basis: spaces.Basis, seed, s_decay: float = 1.5,
                 target_v_norm: Optional[float] = None):
        self.basis = basis
        self.rng = np.random.default_rng(seed)
        self.s_decay = float(s_decay)
        self.target_v_norm = target_v_norm
        self.sigma = basis.v_weight ** (-self.s_decay)

    def sample(self, n: int) -> np.ndarray:
        c = self.rng.normal(size=(n, self.basis.n_modes)) * self.sigma
        if self.target_v_norm is not None:
            vn = self.basis.v_norm(c)
            c *= (self.target_v_norm / np.where(vn > 0, vn, 1.0))[:, None]
        return c

    def sample_pairs(self, n: int):
        return self.sample(n), self.sample(n)


# --- checkers -------------------------------------------------------------

def check_hemicontinuity(problem: EvolutionProblem, t: float,
                         v1: spaces.Field, v2: spaces.Field, v: spaces.Field,
                         s_grid, tol: float = 1e-6,
                         max_levels: int = 8) -> ConditionReport:
    """Continuity of s ↦ ⟨A(t, v1 + s·v2), v⟩ on s ∈ [-1, 1].

    Refines the s-grid by midpoint insertion until the actual value at every
    new midpoint agrees with the piecewise-linear interpolant of the previous
    level to ``tol`` (relative to the magnitude of the profile).  A jump
    leaves a midpoint gap of half the jump height at every level, so
    exhausting ``max_levels`` without convergence is reported as a violation
    at the worst midpoint.
    """
    s = np.asarray(s_grid, dtype=np.float64)
    if s.ndim != 1 or s.size < 16 or np.any(np.diff(s) <= 0) \
            or s[0] < -1.0 - 1e-12 or s[-1] > 1.0 + 1e-12:
        raise ConfigurationError(
            "hemicontinuity s_grid must be >= 16 increasing points in [-1, 1]")
    report = ConditionReport(condition=H1)

    def profile(points):
        states = v1.coeffs[None, :] + points[:, None] * v2.coeffs[None, :]
        out = apply_chunked(problem, t, states)
        return out @ v.coeffs

    phi = profile(s)
    evals = s.size
    scale = max(1.0, float(np.max(np.abs(phi))))
    gap = math.inf
    worst_s = float("nan")
    for level in range(max_levels):
        mids = 0.5 * (s[:-1] + s[1:])
        phi_mid = profile(mids)
        evals += mids.size
        interp = 0.5 * (phi[:-1] + phi[1:])
        gaps = np.abs(phi_mid - interp)
        scale = max(scale, float(np.max(np.abs(phi_mid))))
        worst = int(np.argmax(gaps))
        gap, worst_s = float(gaps[worst]), float(mids[worst])
        if gap < tol * scale:
            report.samples = evals
            report.fitted_constants = {
                "final_gap": gap, "scale": scale, "levels_used": level + 1}
            report.min_slack = tol * scale - gap
            report.extremal_sample = "s=%.9g" % worst_s
            return report
        merged = np.empty(s.size + mids.size)
        merged[0::2], merged[1::2] = s, mids
        merged_phi = np.empty_like(merged)
        merged_phi[0::2], merged_phi[1::2] = phi, phi_mid
        s, phi = merged, merged_phi
    report.samples = evals
    report.fitted_constants = {
        "final_gap": gap, "scale": scale, "levels_used": max_levels}
    report.min_slack = tol * scale - gap
    report.extremal_sample = "s=%.9g" % worst_s
    report.violations.append({
        "sample": report.extremal_sample,
        "slack": report.min_slack,
        "note": "interpolation gap %.3g did not fall below %.3g after %d "
                "refinement levels" % (gap, tol * scale, max_levels)})
    return report


def _pair_descs(prefix, basis, v1, v2):
    hn = basis.h_norm(v1 - v2)

    def desc(i):
        return "%spair=%d |v1-v2|_H=%.6g" % (prefix, i, hn[i])
    return desc


def check_local_monotonicity(problem: EvolutionProblem, t: float,
                             sampler: FieldSampler, n_samples: int,
                             pairs=None, use_margin: bool = True,
                             traits: Optional[OperatorTraits] = None,
                             context: str = "") -> ConditionReport:
    """⟨A(t,v1) - A(t,v2), v1 - v2⟩ ≤ (C + rho(v1) + eta(v2))·‖v1-v2‖²_H
    [- margin·‖v1-v2‖_V^margin_exp], on sampled pairs.

    Reports the minimal constant c_hat that would make every sample pass.
    """
    traits = problem.traits if traits is None else traits
    basis = problem.basis
    v1, v2 = sampler.sample_pairs(n_samples) if pairs is None else pairs
    a1 = apply_chunked(problem, t, v1)
    a2 = apply_chunked(problem, t, v2)
    w = v1 - v2
    lhs = np.einsum("ij,ij->i", a1 - a2, w)
    wh2 = np.einsum("ij,ij->i", w, w)
    weights = traits.rho(basis, v1, v_norm=problem.v_norm_batch) \
        + traits.eta(basis, v2, v_norm=problem.v_norm_batch)
    rhs = (traits.c_const + weights) * wh2
    margin_term = 0.0
    if use_margin and traits.margin > 0:
        margin_term = traits.margin * problem.v_norms(w) ** traits.margin_exp
        rhs = rhs - margin_term
    slack = rhs - lhs
    report = ConditionReport(condition=H2)
    report.record(slack, _slack_tolerance(lhs, rhs),
                  _pair_descs(context, basis, v1, v2))
    pos = wh2 > 0
    if np.any(pos):
        adjusted = (lhs + margin_term)[pos] if use_margin and traits.margin > 0 \
            else lhs[pos]
        report.fitted_constants["c_hat"] = float(
            np.max(adjusted / wh2[pos] - weights[pos]))
    return report


def check_coercivity(problem: EvolutionProblem, t: float,
                     sampler: FieldSampler, n_samples: int,
                     context: str = "") -> ConditionReport:
    """2⟨A(t,v), v⟩ ≤ -delta·‖v‖_V^alpha + C·‖v‖²_H + f(t) on samples.

    Reports delta_hat, the largest margin the samples would admit with the
    declared C and f.
    """
    traits = problem.traits
    v = sampler.sample(n_samples)
    av = apply_chunked(problem, t, v)
    lhs = 2.0 * np.einsum("ij,ij->i", av, v)
    vn = problem.v_norms(v)
    h2 = np.einsum("ij,ij->i", v, v)
    ft = float(traits.f_at(t))
    rhs = -traits.delta * vn ** traits.alpha + traits.c_const * h2 + ft
    report = ConditionReport(condition=H3)

    def desc(i):
        return "%ssample=%d |v|_V=%.6g" % (context, i, vn[i])
    report.record(rhs - lhs, _slack_tolerance(lhs, rhs), desc)
    pos = vn > 0
    if np.any(pos):
        report.fitted_constants["delta_hat"] = float(np.min(
            (traits.c_const * h2[pos] + ft - lhs[pos]) / vn[pos] ** traits.alpha))
    return report


def check_growth(problem: EvolutionProblem, t: float, sampler: FieldSampler,
                 n_samples: int, context: str = "") -> ConditionReport:
    """‖A(t,v)‖_V* ≤ (f(t)^{(alpha-1)/alpha} + C‖v‖_V^{alpha-1})(1 + ‖v‖_H^beta).

    Uses the problem's dual norm, falling back to its declared surrogate for
    non-quadratic V-norms (flagged on the report).  Reports minimal C.
    """
    traits = problem.traits
    v = sampler.sample(n_samples)
    av = apply_chunked(problem, t, v)
    lhs = problem.vstar_norms(av)
    vn = problem.v_norms(v)
    hn = np.sqrt(np.einsum("ij,ij->i", v, v))
    expo = (traits.alpha - 1.0) / traits.alpha
    f_part = float(traits.f_at(t)) ** expo
    amp = 1.0 + hn ** traits.beta
    rhs = (f_part + traits.c_const * vn ** (traits.alpha - 1.0)) * amp
    report = ConditionReport(condition=H4, surrogate=problem.vstar_is_surrogate)

    def desc(i):
        return "%ssample=%d |v|_V=%.6g" % (context, i, vn[i])
    report.record(rhs - lhs, _slack_tolerance(lhs, rhs), desc)
    pos = vn > 0
    if np.any(pos):
        need = (lhs[pos] / amp[pos] - f_part) / vn[pos] ** (traits.alpha - 1.0)
        report.fitted_constants["c_hat"] = float(max(0.0, np.max(need)))
    return report


def check_uniqueness_growth(traits: OperatorTraits, sampler: FieldSampler,
                            n_samples: int, v_norm: Optional[Callable] = None,
                            context: str = "") -> ConditionReport:
    """rho(v) + eta(v) ≤ C3·(1 + ‖v‖_V^alpha)(1 + ‖v‖_H^gamma) on samples.

    Skipped (status='skipped') when no gamma is declared.  Reports minimal C3.
    """
    if traits.gamma is None:
        return ConditionReport(condition=C3, status="skipped")
    basis = sampler.basis
    v = sampler.sample(n_samples)
    lhs = traits.rho(basis, v, v_norm=v_norm) + traits.eta(basis, v, v_norm=v_norm)
    vn = np.asarray(v_norm(v)) if v_norm is not None else basis.v_norm(v)
    hn = basis.h_norm(v)
    c3 = traits.c3_const if traits.c3_const is not None else traits.c_const
    envelope = (1.0 + vn ** traits.alpha) * (1.0 + hn ** traits.gamma)
    rhs = c3 * envelope
    report = ConditionReport(condition=C3)

    def desc(i):
        return "%ssample=%d |v|_V=%.6g" % (context, i, vn[i])
    report.record(rhs - lhs, _slack_tolerance(lhs, rhs), desc)
    report.fitted_constants["c3_hat"] = float(np.max(lhs / envelope))
    return report


# --- battery --------------------------------------------------------------

def _merge_reports(target: ConditionReport, part: ConditionReport,
                   fit_rules: dict) -> None:
    target.samples += part.samples
    target.violations.extend(part.violations)
    target.surrogate = target.surrogate or part.surrogate
    if part.min_slack < target.min_slack:
        target.min_slack = part.min_slack
        target.extremal_sample = part.extremal_sample
    for key, value in part.fitted_constants.items():
        rule = fit_rules.get(key, max)
        if key in target.fitted_constants:
            target.fitted_constants[key] = rule(
                target.fitted_constants[key], value)
        else:
            target.fitted_constants[key] = value


def run_condition_battery(problem: EvolutionProblem, seed: int = 0,
                          n_samples: int = 1000, radii=(1.0, 5.0, 20.0),
                          t: float = 0.0, s_decay: float = 1.5,
                          hemi_triples: int = 2,
                          hemi_tol: float = 1e-6) -> dict:
    """Run every structural checker against one problem.

    ``n_samples`` is the total per condition, split across the stratification
    radii (target V-norms of the sampled fields).  Returns a dict mapping
    condition name to a merged ConditionReport; sub-runs are independently
    seeded from (seed, condition, radius) so any extremal sample can be
    reproduced.
    """
    radii = tuple(float(r) for r in radii)
    per = [n_samples // len(radii)] * len(radii)
    per[-1] += n_samples - sum(per)
    fit_rules = {"c_hat": max, "delta_hat": min, "c3_hat": max,
                 "final_gap": max, "scale": max, "levels_used": max}
    reports = {
        H1: ConditionReport(condition=H1),
        H2: ConditionReport(condition=H2),
        H3: ConditionReport(condition=H3),
        H4: ConditionReport(condition=H4),
        C3: ConditionReport(condition=C3, status=(
            "checked" if problem.traits.gamma is not None else "skipped")),
    }
    s_grid = np.linspace(-1.0, 1.0, 17)
    for ri, radius in enumerate(radii):
        ctx = "R=%g " % radius
        sampler = FieldSampler(problem.basis, [seed, 1, ri],
                               s_decay=s_decay, target_v_norm=radius)
        _merge_reports(reports[H2], check_local_monotonicity(
            problem, t, sampler, per[ri], context=ctx), fit_rules)
        sampler = FieldSampler(problem.basis, [seed, 2, ri],
                               s_decay=s_decay, target_v_norm=radius)
        _merge_reports(reports[H3], check_coercivity(
            problem, t, sampler, per[ri], context=ctx), fit_rules)
        sampler = FieldSampler(problem.basis, [seed, 3, ri],
                               s_decay=s_decay, target_v_norm=radius)
        _merge_reports(reports[H4], check_growth(
            problem, t, sampler, per[ri], context=ctx), fit_rules)
        if problem.traits.gamma is not None:
            sampler = FieldSampler(problem.basis, [seed, 4, ri],
                                   s_decay=s_decay, target_v_norm=radius)
            _merge_reports(reports[C3], check_uniqueness_growth(
                problem.traits, sampler, per[ri],
                v_norm=problem.v_norm_batch, context=ctx), fit_rules)
        hemi_sampler = FieldSampler(problem.basis, [seed, 0, ri],
                                    s_decay=s_decay, target_v_norm=radius)
        for hi in range(hemi_triples):
            v1, v2, v = (spaces.Field(problem.basis, c)
                         for c in hemi_sampler.sample(3))
            part = check_hemicontinuity(problem, t, v1, v2, v, s_grid,
                                        tol=hemi_tol)
            for item in part.violations:
                item["sample"] = "%striple=%d %s" % (ctx, hi, item["sample"])
            if part.min_slack < reports[H1].min_slack:
                part.extremal_sample = "%striple=%d %s" % (
                    ctx, hi, part.extremal_sample)
            _merge_reports(reports[H1], part, fit_rules)
    return reports
