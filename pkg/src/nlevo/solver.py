"""Time integration of truncated spectral systems, with estimate monitors.

``solve`` integrates the coefficient ODE u' = P_n A(t, u) + P_n b(t) on the
leading ``n`` modes of the problem's basis and records the full norm history.
The monitors re-derive the a-priori machinery along computed trajectories:
``energy_monitor`` builds the integral energy ledger and its Gronwall
envelope, ``weak_residual`` tests the time-integrated weak form against a
fixed test field, ``convergence_study`` measures inter-resolution distances,
and ``dependence_experiment`` checks the two-solution stability envelope.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dataclass_field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import kernels, spaces
from .errors import ConfigurationError, NumericalFailureError
from .inequalities import gronwall_bound, young_constant
from .operators import EvolutionProblem, OperatorTraits, apply_chunked

SEMI_IMPLICIT = "semi_implicit"
IMPLICIT_MIDPOINT = "implicit_midpoint"
STEPPERS = (SEMI_IMPLICIT, IMPLICIT_MIDPOINT)

FIXED = "fixed"
ADAPTIVE = "adaptive"
DT_POLICIES = (FIXED, ADAPTIVE)

STATUS_OK = "ok"
STATUS_BLOWUP = "blowup"
STATUS_STEP_FAILURE = "step_failure"

#: H-norm beyond which a state is declared blown up.  Coercive problems
#: should never approach this; reaching it signals a configuration or trait
#: error and is surfaced loudly rather than silently clipped.
BLOWUP_NORM = 1e8
#: Smallest step the failure protocol will try before giving up.
DT_MIN = 1e-10
#: Stage fixed-point iteration cap per attempted step.
STAGE_MAX_ITER = 50


def default_stepper(problem: EvolutionProblem) -> str:
    """Midpoint for quadratic-coercivity problems; semi-implicit otherwise.

    Degenerate diffusions (coercivity exponent above 2) have a stiff
    nonlinear principal part for which the midpoint stage iteration is not
    contractive at useful step sizes.
    """
    return IMPLICIT_MIDPOINT if problem.traits.alpha == 2.0 else SEMI_IMPLICIT


@dataclass(frozen=True)
class SolverConfig:
    """How to integrate: truncation level, horizon, stepping policy.

    ``n`` is the number of leading basis modes retained (None keeps all).
    ``atol``/``rtol`` control the adaptive step-doubling error test;
    ``stage_atol`` is the fixed-point tolerance of the midpoint stage
    equation.  ``seed`` tags randomized sweeps built on top of the solver;
    a single solve is deterministic and ignores it.
    """

    n: Optional[int] = None
    T: float = 1.0
    dt: float = 1e-3
    stepper: str = IMPLICIT_MIDPOINT
    dt_policy: str = FIXED
    atol: float = 1e-8
    rtol: float = 1e-6
    stage_atol: float = 1e-12
    seed: int = 42

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigurationError("horizon T must be positive")
        if not self.dt > 0:
            raise ConfigurationError("step dt must be positive")
        if self.n is not None and self.n < 1:
            raise ConfigurationError("truncation n must be >= 1")
        if self.stepper not in STEPPERS:
            raise ConfigurationError(
                "unknown stepper %r (choose from %s)"
                % (self.stepper, ", ".join(STEPPERS)))
        if self.dt_policy not in DT_POLICIES:
            raise ConfigurationError(
                "unknown dt_policy %r (choose from %s)"
                % (self.dt_policy, ", ".join(DT_POLICIES)))
        if not (self.atol > 0 and self.rtol >= 0 and self.stage_atol > 0):
            raise ConfigurationError(
                "tolerances must satisfy atol > 0, rtol >= 0, stage_atol > 0")


@dataclass
class Trajectory:
    """Computed time history on the retained modes.

    ``states`` holds full-width coefficient rows (zeros above ``n_active``);
    ``x_norm`` is the running trapezoid of the V-norm to the coercivity
    power.  While ``status`` is not "ok", the history ends at the last good
    state and ``message`` says what happened next.
    """

    problem: EvolutionProblem
    n_active: int
    times: np.ndarray
    states: np.ndarray
    norm_h: np.ndarray
    norm_v: np.ndarray
    norm_vstar: np.ndarray
    x_norm: np.ndarray
    status: str = STATUS_OK
    message: str = ""
    stepper: str = IMPLICIT_MIDPOINT

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def fields(self) -> List[spaces.Field]:
        return [spaces.Field(self.problem.basis, row) for row in self.states]

    @property
    def norms(self) -> List[spaces.TripleNorms]:
        return [spaces.TripleNorms(h=float(h), v=float(v), vstar=float(w))
                for h, v, w in zip(self.norm_h, self.norm_v, self.norm_vstar)]

    def index_of(self, t: float) -> int:
        """Index of a recorded time, to 1e-9; error if t was not recorded."""
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ConfigurationError(
                "t=%g is not a recorded time (nearest: %g)"
                % (t, self.times[i]))
        return i

    def interpolated(self, t_grid: np.ndarray) -> np.ndarray:
        """States linearly interpolated onto ``t_grid`` (common-grid helper)."""
        t_grid = np.asarray(t_grid, dtype=np.float64)
        out = np.empty((t_grid.size, self.states.shape[1]))
        for j in range(self.states.shape[1]):
            out[:, j] = np.interp(t_grid, self.times, self.states[:, j])
        return out


def _step_plan(T: float, dt: float) -> List[float]:
    """Uniform steps of size dt covering [0, T], last one shortened."""
    nfull = int(math.floor(T / dt + 1e-9))
    rem = T - nfull * dt
    steps = [dt] * nfull
    if rem > 1e-9 * max(dt, 1.0):
        steps.append(rem)
    return steps


class _Stepper:
    """One-step maps for the truncated system, shared by both policies."""

    def __init__(self, problem: EvolutionProblem, config: SolverConfig,
                 n_active: int):
        self.problem = problem
        self.config = config
        self.n = n_active
        wide = problem.basis.n_modes
        self.diag = None
        if problem.linear_diag is not None:
            self.diag = np.zeros(wide)
            self.diag[:n_active] = problem.linear_diag[:n_active]

    def project(self, coeffs: np.ndarray) -> np.ndarray:
        if self.n < coeffs.shape[-1]:
            coeffs[..., self.n:] = 0.0
        return coeffs

    def forcing(self, t: float) -> np.ndarray:
        return self.project(np.array(self.problem.forcing(t),
                                     dtype=np.float64))

    def _explicit_part(self, t: float, u: np.ndarray) -> np.ndarray:
        """A(t,u) minus the implicitly-treated diagonal, plus forcing."""
        if self.diag is None:
            rhs = self.problem.apply_batch(t, u)
        elif self.problem.nonlinear_batch is not None:
            rhs = self.problem.nonlinear_batch(t, u)
        else:
            rhs = np.zeros_like(u)
        return self.project(np.asarray(rhs) + self.forcing(t))

    def semi_implicit(self, t: float, u: np.ndarray,
                      h: float) -> Optional[np.ndarray]:
        expl = self._explicit_part(t, u)
        if self.diag is not None:
            out = (u + h * expl) / (1.0 - h * self.diag)
        else:
            out = u + h * expl
        return self.project(out)

    def implicit_midpoint(self, t: float, u: np.ndarray,
                          h: float) -> Optional[np.ndarray]:
        """Solve the stage equation by damped fixed point; None = no luck."""
        tm = t + 0.5 * h
        denom = None if self.diag is None else 1.0 - 0.5 * h * self.diag
        m = u.copy()
        theta = 1.0
        before = math.inf
        for _ in range(STAGE_MAX_ITER):
            g = u + 0.5 * h * self._explicit_part(tm, m)
            if denom is not None:
                g = g / denom
            g = self.project(g)
            if not np.all(np.isfinite(g)):
                return None
            m_next = m + theta * (g - m)
            delta = float(np.max(np.abs(m_next - m)))
            m = m_next
            if delta <= self.config.stage_atol:
                return self.project(2.0 * m - u)
            if delta > before:
                theta = max(0.125, 0.5 * theta)
            before = delta
        return None

    def step(self, t: float, u: np.ndarray, h: float) -> Optional[np.ndarray]:
        if self.config.stepper == SEMI_IMPLICIT:
            return self.semi_implicit(t, u, h)
        return self.implicit_midpoint(t, u, h)


def _finish(problem: EvolutionProblem, config: SolverConfig, n_active: int,
            times: Sequence[float], states: Sequence[np.ndarray],
            status: str, message: str) -> Trajectory:
    times = np.asarray(times, dtype=np.float64)
    states = np.asarray(states, dtype=np.float64)
    norm_h = problem.basis.h_norm(states)
    norm_v = problem.v_norms(states)
    norm_vstar = problem.vstar_norms(states)
    alpha = problem.traits.alpha
    integrand = norm_v ** alpha
    x_norm = np.concatenate([[0.0], np.cumsum(
        np.diff(times) * 0.5 * (integrand[1:] + integrand[:-1]))]) \
        if times.size > 1 else np.zeros(1)
    return Trajectory(problem=problem, n_active=n_active, times=times,
                      states=states, norm_h=norm_h, norm_v=norm_v,
                      norm_vstar=norm_vstar, x_norm=x_norm, status=status,
                      message=message, stepper=config.stepper)


def _constant_forcing(problem: EvolutionProblem, T: float) -> Optional[np.ndarray]:
    b0 = np.asarray(problem.forcing(0.0), dtype=np.float64)
    for t in (0.37 * T, T):
        if not np.array_equal(np.asarray(problem.forcing(t)), b0):
            return None
    return b0


def solve(problem: EvolutionProblem, config: SolverConfig) -> Trajectory:
    """Integrate the truncated system from the projected initial state.

    Semi-implicit treats the linear diagonal implicitly and everything else
    explicitly; implicit midpoint solves its stage equation by damped fixed
    point (tolerance ``stage_atol``), halving the step down to 1e-10 on
    non-convergence before declaring step_failure.  States with H-norm
    above 1e8 or non-finite entries end the run with status blowup at the
    last good state.  Purely diagonal problems with constant forcing take
    an exact closed-form sweep per step.
    """
    wide = problem.basis.n_modes
    n_active = wide if config.n is None else int(config.n)
    if n_active > wide:
        raise ConfigurationError(
            "truncation n=%d exceeds the basis mode count %d"
            % (n_active, wide))
    u0 = np.zeros(wide)
    u0[:n_active] = problem.initial[:n_active]

    plan = _step_plan(config.T, config.dt)
    if (config.dt_policy == FIXED and config.stepper == IMPLICIT_MIDPOINT
            and problem.nonlinear_batch is None
            and problem.linear_diag is not None and len(plan) > 0
            and all(h == config.dt for h in plan)):
        b0 = _constant_forcing(problem, config.T)
        if b0 is not None:
            diag = np.zeros(wide)
            diag[:n_active] = problem.linear_diag[:n_active]
            b0 = b0.copy()
            b0[n_active:] = 0.0
            states = kernels.midpoint_diag_sweep(
                diag, u0, b0, config.dt, len(plan))
            times = np.arange(len(plan) + 1) * config.dt
            times[-1] = config.T
            return _finish(problem, config, n_active, times, states,
                           STATUS_OK, "")

    stepper = _Stepper(problem, config, n_active)
    times: List[float] = [0.0]
    states: List[np.ndarray] = [u0]
    if config.dt_policy == FIXED:
        status, message = _run_fixed(stepper, config, plan, times, states)
    else:
        status, message = _run_adaptive(stepper, config, times, states)
    return _finish(problem, config, n_active, times, states, status, message)


def _bad(u: Optional[np.ndarray]) -> Optional[str]:
    if u is None:
        return None
    if not np.all(np.isfinite(u)):
        return "non-finite state"
    nh = float(np.sqrt(np.dot(u, u)))
    if nh > BLOWUP_NORM:
        return "H-norm %.3g exceeds blowup threshold %.1g" % (nh, BLOWUP_NORM)
    return None


def _attempt(stepper: _Stepper, t: float, u: np.ndarray,
             h: float) -> Tuple[Optional[np.ndarray], float]:
    """Take one step, halving h on stage failure; (None, h) below DT_MIN."""
    while True:
        u_next = stepper.step(t, u, h)
        if u_next is not None:
            return u_next, h
        h *= 0.5
        if h < DT_MIN:
            return None, h


def _run_fixed(stepper, config, plan, times, states):
    t = 0.0
    u = states[0]
    remaining = list(plan)
    while remaining:
        h_goal = remaining.pop(0)
        done = 0.0
        while done < h_goal - 1e-15:
            u_next, h_used = _attempt(stepper, t, u, min(h_goal - done,
                                                         config.dt))
            if u_next is None:
                return STATUS_STEP_FAILURE, (
                    "stage iteration failed at t=%.6g even at dt=%.2g"
                    % (t, h_used))
            why = _bad(u_next)
            if why is not None:
                return STATUS_BLOWUP, "%s after step from t=%.6g" % (why, t)
            t += h_used
            done += h_used
            u = u_next
            times.append(t)
            states.append(u)
    return STATUS_OK, ""


def _run_adaptive(stepper, config, times, states):
    t = 0.0
    u = states[0]
    h = config.dt
    order = 2.0 if config.stepper == IMPLICIT_MIDPOINT else 1.0
    grow = 1.0 / (order + 1.0)
    while t < config.T - 1e-12 * max(1.0, config.T):
        h = min(h, config.T - t)
        big = stepper.step(t, u, h)
        half1 = stepper.step(t, u, 0.5 * h)
        small = None if half1 is None else stepper.step(t + 0.5 * h, half1,
                                                        0.5 * h)
        if big is None or small is None or not (
                np.all(np.isfinite(big)) and np.all(np.isfinite(small))):
            h *= 0.5
            if h < DT_MIN:
                return STATUS_STEP_FAILURE, (
                    "no acceptable step at t=%.6g (dt below %.1g)"
                    % (t, DT_MIN))
            continue
        err = float(np.sqrt(np.dot(big - small, big - small)))
        tol = config.atol + config.rtol * float(
            np.sqrt(np.dot(small, small)))
        if err <= tol:
            why = _bad(small)
            if why is not None:
                return STATUS_BLOWUP, "%s after step from t=%.6g" % (why, t)
            t += h
            u = small
            times.append(t)
            states.append(u)
            factor = 5.0 if err == 0 else min(
                5.0, max(0.2, 0.9 * (tol / err) ** grow))
            h *= factor
        else:
            h *= max(0.2, 0.9 * (tol / err) ** grow)
            if h < DT_MIN:
                return STATUS_STEP_FAILURE, (
                    "error test keeps failing at t=%.6g" % t)
    return STATUS_OK, ""


# --- energy ledger --------------------------------------------------------

@dataclass
class EnergyLedger:
    """Integral energy identity vs. its Gronwall envelope along one run.

    ``lhs`` is ‖u(t)‖²_H + (δ/2)∫₀ᵗ‖u‖_V^α; ``rhs`` the envelope
    e^{Ct}(‖u(0)‖²_H + ∫₀ᵗ e^{-Cs}(f(s) + C₁‖b(s)‖_{V*}^{α/(α-1)}) ds) with
    C₁ the conjugate Young constant matching the (δ/2) split.  ``k_bound``
    is the largest of the three a-priori bounded quantities: the V-norm in
    L^α of time, the sup of the H-norm, and the dual norm of A(·,u) in the
    conjugate Bochner norm.
    """

    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    slack: np.ndarray
    c1: float
    k_x: float
    k_sup_h: float
    k_dual: float

    @property
    def k_bound(self) -> float:
        return max(self.k_x, self.k_sup_h, self.k_dual)

    @property
    def min_slack(self) -> float:
        return float(np.min(self.slack))

    def passed(self, tol: float = 1e-8) -> bool:
        return bool(np.all(self.slack >= -tol))


def energy_monitor(trajectory: Trajectory, problem: EvolutionProblem,
                   traits: Optional[OperatorTraits] = None) -> EnergyLedger:
    """Build the energy ledger for a completed (status ok) trajectory.

    ``traits`` overrides the problem's own record, e.g. to evaluate the
    envelope with the sharp constants of a special case.  The operator dual
    norms for the a-priori bound are evaluated at the recorded states in
    chunks (the recorded time enters per chunk, which is exact for the
    autonomous catalog operators).
    """
    if trajectory.status != STATUS_OK:
        raise ConfigurationError(
            "energy_monitor needs a completed run (status=%s)"
            % trajectory.status)
    traits = problem.traits if traits is None else traits
    alpha, delta = traits.alpha, traits.delta
    conj = alpha / (alpha - 1.0)
    times = trajectory.times
    lhs = trajectory.norm_h ** 2 + 0.5 * delta * trajectory.x_norm

    c1 = young_constant(alpha, 0.5 * delta)
    b_const = _constant_forcing(problem, float(times[-1]))
    if b_const is not None:
        b_dual = np.full(times.shape, float(problem.vstar_norms(
            _truncated(problem, trajectory, b_const))))
    else:
        b_dual = np.array([
            problem.vstar_norms(_truncated(problem, trajectory,
                                           problem.forcing(t)))
            for t in times], dtype=np.float64)
    f_series = np.array([float(traits.f_at(t)) for t in times])
    rhs = gronwall_bound(trajectory.norm_h[0] ** 2, traits.c_const,
                         f_series + c1 * b_dual ** conj, times)

    a_out = np.empty_like(trajectory.states)
    chunk = 256
    for i in range(0, len(times), chunk):
        a_out[i:i + chunk] = apply_chunked(
            problem, float(times[i]), trajectory.states[i:i + chunk])
    a_out[:, trajectory.n_active:] = 0.0
    a_dual = problem.vstar_norms(a_out) ** conj
    k_dual = _trapz(a_dual, times) ** (1.0 / conj)

    return EnergyLedger(
        times=times, lhs=lhs, rhs=rhs, slack=rhs - lhs, c1=c1,
        k_x=float(trajectory.x_norm[-1] ** (1.0 / alpha)),
        k_sup_h=float(np.max(trajectory.norm_h)), k_dual=float(k_dual))


def _truncated(problem: EvolutionProblem, trajectory: Trajectory,
               coeffs) -> np.ndarray:
    out = np.array(coeffs, dtype=np.float64)
    out[trajectory.n_active:] = 0.0
    return out


def _trapz(values: np.ndarray, times: np.ndarray) -> float:
    if times.size < 2:
        return 0.0
    return float(np.sum(np.diff(times) * 0.5 * (values[1:] + values[:-1])))


# --- weak-form residual ---------------------------------------------------

def weak_residual(trajectory: Trajectory, problem: EvolutionProblem,
                  v, t: float) -> float:
    """|⟨u(t),v⟩_H − ⟨u₀,v⟩_H − ∫₀ᵗ ⟨P_n A(s,u(s)) + P_n b(s), v⟩ ds|.

    The pairing uses the truncated operator of the integrated system, so a
    test field orthogonal to the active modes gives exactly zero.  The time
    integral is the trapezoid rule on the recorded grid; the residual is
    then of the integrator's order.
    """
    v = np.asarray(v.coeffs if isinstance(v, spaces.Field) else v,
                   dtype=np.float64)
    idx = trajectory.index_of(t)
    times = trajectory.times[:idx + 1]
    states = trajectory.states[:idx + 1]
    a_out = np.empty_like(states)
    chunk = 256
    for i in range(0, len(times), chunk):
        a_out[i:i + chunk] = apply_chunked(
            problem, float(times[i]), states[i:i + chunk])
    b_rows = np.array([problem.forcing(s) for s in times], dtype=np.float64)
    rhs_rows = a_out + b_rows
    rhs_rows[:, trajectory.n_active:] = 0.0
    pairings = rhs_rows @ v
    integral = _trapz(pairings, times)
    return float(abs((states[idx] - states[0]) @ v - integral))


# --- convergence study ----------------------------------------------------

@dataclass
class ConvergencePair:
    n_coarse: int
    n_fine: int
    distance: float
    note: str = ""


@dataclass
class ConvergenceStudy:
    """Pairwise inter-resolution distances d(n_i, n_{i+1}) for one problem.

    The distance is the L^α-in-time H-norm gap on a common grid (the
    coarser member's, with the finer run linearly interpolated onto it).
    Failed members leave their pairs marked instead of aborting the study.
    """

    pairs: List[ConvergencePair]
    statuses: dict

    @property
    def distances(self) -> List[float]:
        return [p.distance for p in self.pairs]

    @property
    def decreasing(self) -> bool:
        ds = [d for d in self.distances if np.isfinite(d)]
        return all(b <= a for a, b in zip(ds, ds[1:]))


def convergence_study(problem: EvolutionProblem, config_base: SolverConfig,
                      n_list: Sequence[int]) -> ConvergenceStudy:
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ConfigurationError("n_list must be strictly increasing")
    configs = [replace(config_base, n=n) for n in n_list]
    with ThreadPoolExecutor(max_workers=min(4, len(configs))) as pool:
        runs = list(pool.map(lambda c: solve(problem, c), configs))
    statuses = {n: run.status for n, run in zip(n_list, runs)}
    alpha = problem.traits.alpha
    pairs = []
    for (na, ra), (nb, rb) in zip(zip(n_list, runs), zip(n_list[1:], runs[1:])):
        if not (ra.ok and rb.ok):
            pairs.append(ConvergencePair(
                na, nb, float("nan"),
                "member failed: n=%d %s" % ((na, ra.status) if not ra.ok
                                            else (nb, rb.status))))
            continue
        grid = ra.times
        diff = ra.states - rb.interpolated(grid)
        gaps = problem.basis.h_norm(diff) ** alpha
        pairs.append(ConvergencePair(
            na, nb, _trapz(gaps, grid) ** (1.0 / alpha)))
    return ConvergenceStudy(pairs=pairs, statuses=statuses)


# --- continuous dependence ------------------------------------------------

@dataclass
class DependenceReport:
    """Two-solution gap vs. the stability envelope, per recorded time.

    ``lhs`` is ‖u₁(t)−u₂(t)‖²_H; ``rhs`` the envelope
    exp[∫₀ᵗ 2(C + ρ(u₁) + η(u₂)) ds]·(‖Δu₀‖²_H + ∫₀ᵗ ‖Δb‖²_H ds) built
    from the recorded trajectories (the factor 2 converts the single-pairing
    monotonicity constants of the trait record to the squared-norm form).
    ``exp_factor`` is the realized exponential factor.
    """

    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    exp_factor: np.ndarray
    trajectories: Tuple[Trajectory, Trajectory]

    @property
    def slack(self) -> np.ndarray:
        return self.rhs - self.lhs

    def passed(self, tol: float = 1e-8) -> bool:
        scale = np.maximum(1.0, np.abs(self.rhs))
        return bool(np.all(self.slack >= -tol * scale))


def _as_forcing(problem: EvolutionProblem, b) -> Callable:
    if b is None:
        return problem.forcing
    if callable(b):
        return b
    arr = np.ascontiguousarray(b, dtype=np.float64)
    if arr.shape != (problem.basis.n_modes,):
        raise ConfigurationError(
            "forcing coefficients must have one entry per basis mode")
    return lambda t: arr


def dependence_experiment(problem: EvolutionProblem, u0_pair, b_pair,
                          config: SolverConfig) -> DependenceReport:
    """Solve the two perturbed problems and check the stability envelope.

    ``u0_pair`` holds the two initial coefficient vectors; ``b_pair`` two
    forcings (None = the problem's own, constant coefficient arrays, or
    callables of time).  Either member run failing aborts the experiment.
    """
    runs = []
    for u0, b in zip(u0_pair, b_pair):
        member = replace(problem,
                         initial=np.ascontiguousarray(u0, dtype=np.float64),
                         forcing=_as_forcing(problem, b))
        run = solve(member, config)
        if not run.ok:
            raise NumericalFailureError(
                "dependence experiment member failed: %s (%s)"
                % (run.status, run.message), t=float(run.times[-1]))
        runs.append(run)
    r1, r2 = runs
    grid = r1.times
    s2 = r2.states if r2.times.shape == grid.shape and \
        np.allclose(r2.times, grid) else r2.interpolated(grid)
    diff = r1.states - s2
    lhs = problem.basis.h_norm(diff) ** 2

    traits = problem.traits
    basis = problem.basis
    growth = 2.0 * (traits.c_const
                    + traits.rho(basis, r1.states, v_norm=problem.v_norm_batch)
                    + traits.eta(basis, s2, v_norm=problem.v_norm_batch))
    exponent = np.concatenate([[0.0], np.cumsum(
        np.diff(grid) * 0.5 * (growth[1:] + growth[:-1]))])
    exp_factor = np.exp(exponent)

    b1 = np.array([runs[0].problem.forcing(t) for t in grid])
    b2 = np.array([runs[1].problem.forcing(t) for t in grid])
    db = basis.h_norm(b1 - b2) ** 2
    db_int = np.concatenate([[0.0], np.cumsum(
        np.diff(grid) * 0.5 * (db[1:] + db[:-1]))])
    rhs = exp_factor * (lhs[0] + db_int)
    return DependenceReport(times=grid, lhs=lhs, rhs=rhs,
                            exp_factor=exp_factor,
                            trajectories=(r1, r2))
