"""Batch front end: parse run configs, dispatch tasks, persist CSV artifacts.

A run config is a TOML document with a flat, fully-validated key tree
(unknown keys are rejected with their dotted path).  Tasks execute in the
declared order; every artifact is a CSV of 17-significant-digit decimals
plus a report.txt whose numbers are verbatim copies of CSV cells.  Exit
codes: 0 all tasks pass, 1 configuration error, 2 numerical failure
(blowup/step failure), 3 structural check or monitor violation; numerical
failure takes precedence over violations when both occur.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import time
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

try:
    import tomllib as _toml          # Python >= 3.11
except ModuleNotFoundError:          # pragma: no cover - version dependent
    import tomli as _toml

from . import catalog, solver, spaces
from .errors import ConfigurationError, NumericalFailureError
from .functions import ScalarFunction, parse_scalar_function
from .operators import (C3, H1, H2, H3, H4, ConditionReport, FieldSampler,
                        _merge_reports, check_coercivity, check_growth,
                        check_hemicontinuity, check_local_monotonicity,
                        check_uniqueness_growth)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VIOLATION = 3

#: Environment variable that overrides the output directory (same effect as
#: the --out flag, which wins when both are given).
OUT_ENV_VAR = "NLEVO_OUT"

CHECK_TASKS = {"check_h1": H1, "check_h2": H2, "check_h3": H3,
               "check_h4": H4, "check_c3": C3}
TASK_NAMES = tuple(CHECK_TASKS) + ("solve", "energy", "convergence",
                                   "dependence")
#: Battery sub-seed index per condition, shared with the all-in-one battery
#: so a single check task reproduces the battery's samples exactly.
CHECK_SEED_INDEX = {H1: 0, H2: 1, H3: 2, H4: 3, C3: 4}

TIMESERIES_CSVS = ("trajectory.csv", "ledger.csv", "dependence.csv")
COMPARED_CSVS = ("trajectory.csv", "ledger.csv", "checks.csv", "tasks.csv",
                 "convergence.csv", "dependence.csv")

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


def _fmt(x) -> str:
    return "%.17g" % float(x)


# --- config schema --------------------------------------------------------

def _err(path: str, message: str) -> ConfigurationError:
    return ConfigurationError("%s: %s" % (path, message))


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _err(path, "expected a number, got %r" % (value,))
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise _err(path, "expected an integer, got %r" % (value,))
    return value


def _as_str(value, path: str) -> str:
    if not isinstance(value, str):
        raise _err(path, "expected a string, got %r" % (value,))
    return value


def _as_fn(value, path: str) -> ScalarFunction:
    text = _as_str(value, path)
    if text.strip() == "none":
        return ScalarFunction.zero()
    try:
        return parse_scalar_function(text)
    except ConfigurationError as exc:
        raise _err(path, str(exc)) from exc


def _as_forcing(value, path: str):
    """"none" or a list of per-mode coefficients."""
    if isinstance(value, str):
        if value.strip() == "none":
            return None
        raise _err(path, "expected \"none\" or a list of numbers")
    if not isinstance(value, list):
        raise _err(path, "expected \"none\" or a list of numbers")
    return np.array([_as_float(v, path) for v in value], dtype=np.float64)


def _as_float_list(value, path: str) -> List[float]:
    if not isinstance(value, list) or not value:
        raise _err(path, "expected a nonempty list of numbers")
    return [_as_float(v, "%s[%d]" % (path, i)) for i, v in enumerate(value)]


def _as_int_list(value, path: str) -> List[int]:
    if not isinstance(value, list) or not value:
        raise _err(path, "expected a nonempty list of integers")
    return [_as_int(v, "%s[%d]" % (path, i)) for i, v in enumerate(value)]


def _as_length(value, path: str) -> float:
    if isinstance(value, str):
        named = {"pi": math.pi, "2pi": 2.0 * math.pi}
        if value.strip() in named:
            return named[value.strip()]
        raise _err(path, "expected a number, \"pi\", or \"2pi\"")
    return _as_float(value, path)


def _check_table(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise _err(path, "expected a table")
    return value


_PARAM_FIELDS = {
    "burgers": {"F": _as_fn, "g": _as_fn, "h": _as_forcing,
                "C_lip": _as_float, "t_exp": _as_float},
    "advection": {"f_i": None, "g": _as_fn, "h": _as_forcing,
                  "r": _as_float, "t_exp": _as_float},
    "p_laplace": {"p": _as_float, "g": _as_fn, "h": _as_forcing,
                  "r": _as_float, "s": _as_float, "t_exp": _as_float},
    "nse_2d": {"nu": _as_float, "f": _as_forcing},
    "leray_alpha_3d": {"nu": _as_float, "alpha_smooth": _as_float,
                       "f": _as_forcing},
}
_PARAM_FAMILY = {"burgers": "burgers", "reaction_diffusion": "burgers",
                 "advection_diffusion_2d": "advection",
                 "advection_diffusion_3d": "advection",
                 "p_laplace": "p_laplace", "nse_2d": "nse_2d",
                 "leray_alpha_3d": "leray_alpha_3d"}

_TRAIT_KEYS = ("alpha", "beta", "delta", "c_const", "gamma", "c3_const",
               "margin", "margin_exp")


def _parse_initial(table: dict, basis) -> Tuple[Optional[np.ndarray],
                                                Optional[float]]:
    """Initial-state override: explicit coeffs, a single mode, or a scale.

    Returns (coeffs-or-None, scale-or-None); a scale multiplies the
    problem's built-in initial state after construction.
    """
    if not table:
        return None, None
    allowed = {"coeffs", "mode", "amplitude", "scale"}
    for key in table:
        if key not in allowed:
            raise _err("initial.%s" % key, "unknown key (accepted: %s)"
                       % ", ".join(sorted(allowed)))
    styles = [k for k in ("coeffs", "mode", "scale") if k in table]
    if len(styles) != 1:
        raise _err("initial", "give exactly one of coeffs, mode, or scale")
    if "amplitude" in table and styles != ["mode"]:
        raise _err("initial.amplitude", "only meaningful with initial.mode")
    if styles == ["scale"]:
        return None, _as_float(table["scale"], "initial.scale")
    if styles == ["mode"]:
        mode = _as_int(table["mode"], "initial.mode")
        if not 0 <= mode < basis.n_modes:
            raise _err("initial.mode", "outside the %d basis modes"
                       % basis.n_modes)
        amplitude = _as_float(table.get("amplitude", 1.0),
                              "initial.amplitude")
        coeffs = np.zeros(basis.n_modes)
        coeffs[mode] = amplitude
        return coeffs, None
    values = _as_float_list(table["coeffs"], "initial.coeffs")
    if len(values) > basis.n_modes:
        raise _err("initial.coeffs", "more than the %d basis modes"
                   % basis.n_modes)
    coeffs = np.zeros(basis.n_modes)
    coeffs[:len(values)] = values
    return coeffs, None


def _describe_value(v) -> str:
    if isinstance(v, ScalarFunction):
        return v.describe()
    if isinstance(v, tuple):
        return "(%s)" % ", ".join(_describe_value(x) for x in v)
    if isinstance(v, np.ndarray):
        return "[%s]" % ", ".join(_fmt(x) for x in v)
    return str(v)


def _parse_params(equation: str, table: dict) -> dict:
    fields = _PARAM_FIELDS[_PARAM_FAMILY[equation]]
    out = {}
    for key, value in table.items():
        path = "params.%s" % key
        if key not in fields:
            raise _err(path, "unknown parameter for %s (accepted: %s)"
                       % (equation, ", ".join(sorted(fields))))
        if key == "f_i":
            if not isinstance(value, list) or not value:
                raise _err(path, "expected a list of scalar-function strings")
            out[key] = tuple(_as_fn(v, "%s[%d]" % (path, i))
                             for i, v in enumerate(value))
        else:
            out[key] = fields[key](value, path)
    return out


def _build_basis(equation: str, table: dict) -> spaces.Basis:
    entry = catalog.catalog_entry(equation)
    allowed = {"domain", "L", "n"}
    for key in table:
        if key not in allowed:
            raise _err("basis.%s" % key,
                       "unknown key (accepted: %s)" % ", ".join(sorted(allowed)))
    n = _as_int(table["n"], "basis.n") if "n" in table else entry.default_n
    if n < 1:
        raise _err("basis.n", "must be >= 1")
    family = _PARAM_FAMILY[equation]
    want_interval = family in ("burgers", "p_laplace")
    if "domain" in table:
        domain = _as_str(table["domain"], "basis.domain")
        if domain not in ("interval", "torus"):
            raise _err("basis.domain", "expected \"interval\" or \"torus\"")
        if (domain == "interval") != want_interval:
            raise _err("basis.domain",
                       "%s runs on %s" % (equation,
                                          "an interval" if want_interval
                                          else "a torus"))
    if "L" not in table:
        return entry.build_basis(n)
    raw = table["L"]
    lengths = ([_as_length(v, "basis.L[%d]" % i)
                for i, v in enumerate(raw)] if isinstance(raw, list)
               else [_as_length(raw, "basis.L")])
    if want_interval:
        if len(lengths) == 1:
            return spaces.build_sine_basis(lengths[0], n)
        if len(lengths) == 2 and family == "p_laplace":
            return spaces.build_sine_basis_2d(lengths, n)
        raise _err("basis.L", "unsupported interval shape for %s" % equation)
    d = 2 if equation in ("advection_diffusion_2d", "nse_2d") else 3
    if len(lengths) == 1:
        lengths = lengths * d
    if len(lengths) != d:
        raise _err("basis.L", "%s needs %d lengths" % (equation, d))
    div_free = equation in ("nse_2d", "leray_alpha_3d")
    return spaces.build_fourier_basis(spaces.Domain.torus(*lengths), n,
                                      divergence_free=div_free)


def _parse_solver(table: dict, problem) -> solver.SolverConfig:
    allowed = {"n": _as_int, "T": _as_float, "dt": _as_float,
               "stepper": _as_str, "dt_policy": _as_str, "atol": _as_float,
               "rtol": _as_float, "stage_atol": _as_float}
    kw = {}
    for key, value in table.items():
        path = "solver.%s" % key
        if key not in allowed:
            raise _err(path, "unknown key (accepted: %s)"
                       % ", ".join(sorted(allowed)))
        kw[key] = allowed[key](value, path)
    if "stepper" not in kw:
        kw["stepper"] = solver.default_stepper(problem)
    try:
        return solver.SolverConfig(**kw)
    except ConfigurationError as exc:
        raise ConfigurationError("solver: %s" % exc) from exc


@dataclass
class RunConfig:
    """Parsed, validated run request with the problem already constructed."""

    equation: str
    problem: "object"
    solver: solver.SolverConfig
    tasks: Tuple[str, ...]
    seed: int
    output_dir: str
    check_opts: dict
    convergence_opts: dict
    dependence_opts: dict
    traits_override: dict
    echo: dict


def parse_config(text: str, seed_override: Optional[int] = None,
                 out_override: Optional[str] = None) -> RunConfig:
    """Validate a config document and construct the problem it describes.

    Raises ConfigurationError naming the offending dotted key path for any
    unknown key, type mismatch, missing requirement, or parameter outside
    the supported set.
    """
    try:
        doc = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigurationError("config is not well-formed TOML: %s" % exc)

    top_allowed = {"equation", "tasks", "seed", "output_dir", "params",
                   "basis", "solver", "checks", "convergence", "dependence",
                   "traits_override", "initial"}
    for key in doc:
        if key not in top_allowed:
            raise _err(key, "unknown key (accepted: %s)"
                       % ", ".join(sorted(top_allowed)))

    if "equation" not in doc:
        raise _err("equation", "required")
    equation = _as_str(doc["equation"], "equation")
    if equation not in catalog.CATALOG_NAMES:
        raise _err("equation", "unknown equation %r (catalog: %s)"
                   % (equation, ", ".join(catalog.CATALOG_NAMES)))

    if "tasks" not in doc or not isinstance(doc["tasks"], list) \
            or not doc["tasks"]:
        raise _err("tasks", "required nonempty list")
    tasks = []
    for i, name in enumerate(doc["tasks"]):
        name = _as_str(name, "tasks[%d]" % i)
        if name not in TASK_NAMES:
            raise _err("tasks[%d]" % i, "unknown task %r (accepted: %s)"
                       % (name, ", ".join(TASK_NAMES)))
        tasks.append(name)
    if "energy" in tasks and "solve" not in tasks[:tasks.index("energy")]:
        raise _err("tasks", "energy requires a solve task before it")

    seed = _as_int(doc.get("seed", 42), "seed")
    if seed_override is not None:
        seed = int(seed_override)

    overrides = _parse_params(equation, _check_table(doc.get("params", {}),
                                                     "params"))
    basis = _build_basis(equation, _check_table(doc.get("basis", {}),
                                                "basis"))
    entry = catalog.catalog_entry(equation)
    params = replace(entry.default_params, **overrides) if overrides \
        else entry.default_params
    initial, initial_scale = _parse_initial(
        _check_table(doc.get("initial", {}), "initial"), basis)
    problem = entry.build(params, basis, initial=initial)
    if initial_scale is not None:
        problem = replace(problem, initial=initial_scale * problem.initial)

    traits_override = {}
    for key, value in _check_table(doc.get("traits_override", {}),
                                   "traits_override").items():
        if key not in _TRAIT_KEYS:
            raise _err("traits_override.%s" % key,
                       "unknown trait (accepted: %s)" % ", ".join(_TRAIT_KEYS))
        traits_override[key] = _as_float(value, "traits_override.%s" % key)
    if traits_override:
        problem = problem.with_traits(
            problem.traits.with_updates(**traits_override))

    solver_cfg = _parse_solver(_check_table(doc.get("solver", {}), "solver"),
                               problem)
    if solver_cfg.n is not None and solver_cfg.n > basis.n_modes:
        raise _err("solver.n", "exceeds the %d basis modes" % basis.n_modes)

    check_opts = {"n_samples": 1000, "radii": (1.0, 5.0, 20.0),
                  "hemi_triples": 2, "hemi_tol": 1e-6, "s_decay": 1.5}
    for key, value in _check_table(doc.get("checks", {}), "checks").items():
        path = "checks.%s" % key
        if key == "n_samples":
            check_opts[key] = _as_int(value, path)
        elif key == "radii":
            check_opts[key] = tuple(_as_float_list(value, path))
        elif key == "hemi_triples":
            check_opts[key] = _as_int(value, path)
        elif key == "hemi_tol":
            check_opts[key] = _as_float(value, path)
        elif key == "s_decay":
            check_opts[key] = _as_float(value, path)
        else:
            raise _err(path, "unknown key")

    convergence_opts = {"n_list": None}
    for key, value in _check_table(doc.get("convergence", {}),
                                   "convergence").items():
        if key != "n_list":
            raise _err("convergence.%s" % key, "unknown key")
        convergence_opts["n_list"] = _as_int_list(value, "convergence.n_list")
    if "convergence" in tasks and convergence_opts["n_list"] is None:
        n_top = basis.n_modes if solver_cfg.n is None else solver_cfg.n
        ladder = sorted({max(1, n_top // 4), max(1, n_top // 2), n_top})
        convergence_opts["n_list"] = ladder

    dependence_opts = {"u0_factor": 1.1}
    for key, value in _check_table(doc.get("dependence", {}),
                                   "dependence").items():
        if key != "u0_factor":
            raise _err("dependence.%s" % key, "unknown key")
        dependence_opts["u0_factor"] = _as_float(value, "dependence.u0_factor")

    output_dir = _as_str(doc.get("output_dir", "."), "output_dir")
    if out_override is not None:
        output_dir = out_override
    elif os.environ.get(OUT_ENV_VAR):
        output_dir = os.environ[OUT_ENV_VAR]

    echo = {"equation": equation, "tasks": list(tasks), "seed": seed,
            "output_dir": output_dir,
            "params": {k: _describe_value(v) for k, v in overrides.items()},
            "basis": {"n_modes": basis.n_modes, "dims": basis.dims},
            "solver": {"n": solver_cfg.n, "T": solver_cfg.T,
                       "dt": solver_cfg.dt, "stepper": solver_cfg.stepper,
                       "dt_policy": solver_cfg.dt_policy},
            "traits_override": dict(traits_override)}
    return RunConfig(equation=equation, problem=problem, solver=solver_cfg,
                     tasks=tuple(tasks), seed=seed, output_dir=output_dir,
                     check_opts=check_opts, convergence_opts=convergence_opts,
                     dependence_opts=dependence_opts,
                     traits_override=traits_override, echo=echo)


# --- task execution -------------------------------------------------------

@dataclass
class RunReport:
    """What happened: per-task status, artifact manifest, exit code."""

    statuses: Dict[str, str]
    exit_code: int
    output_dir: str
    manifest: List[str]
    timings: Dict[str, float]
    task_rows: List[Tuple[str, str, str]]
    check_rows: List[dict]


def _run_single_check(problem, cond: str, seed: int,
                      opts: dict) -> ConditionReport:
    """One condition over the stratified radii, seeded like the battery."""
    radii = opts["radii"]
    n_samples = opts["n_samples"]
    per = [n_samples // len(radii)] * len(radii)
    per[-1] += n_samples - sum(per)
    fit_rules = {"c_hat": max, "delta_hat": min, "c3_hat": max,
                 "final_gap": max, "scale": max, "levels_used": max}
    merged = ConditionReport(condition=cond)
    if cond == C3 and problem.traits.gamma is None:
        return ConditionReport(condition=C3, status="skipped")
    s_grid = np.linspace(-1.0, 1.0, 17)
    for ri, radius in enumerate(radii):
        ctx = "R=%g " % radius
        sampler = FieldSampler(problem.basis,
                               [seed, CHECK_SEED_INDEX[cond], ri],
                               s_decay=opts["s_decay"], target_v_norm=radius)
        if cond == H1:
            for hi in range(opts["hemi_triples"]):
                v1, v2, v = (spaces.Field(problem.basis, c)
                             for c in sampler.sample(3))
                part = check_hemicontinuity(problem, 0.0, v1, v2, v, s_grid,
                                            tol=opts["hemi_tol"])
                for item in part.violations:
                    item["sample"] = "%striple=%d %s" % (ctx, hi,
                                                         item["sample"])
                if part.min_slack < merged.min_slack:
                    part.extremal_sample = "%striple=%d %s" % (
                        ctx, hi, part.extremal_sample)
                _merge_reports(merged, part, fit_rules)
        elif cond == H2:
            _merge_reports(merged, check_local_monotonicity(
                problem, 0.0, sampler, per[ri], context=ctx), fit_rules)
        elif cond == H3:
            _merge_reports(merged, check_coercivity(
                problem, 0.0, sampler, per[ri], context=ctx), fit_rules)
        elif cond == H4:
            _merge_reports(merged, check_growth(
                problem, 0.0, sampler, per[ri], context=ctx), fit_rules)
        else:
            _merge_reports(merged, check_uniqueness_growth(
                problem.traits, sampler, per[ri],
                v_norm=problem.v_norm_batch, context=ctx), fit_rules)
    return merged


def run(config: RunConfig) -> RunReport:
    """Execute the task list, writing artifacts even when tasks fail."""
    problem = config.problem
    statuses: Dict[str, str] = {}
    timings: Dict[str, float] = {}
    task_rows: List[Tuple[str, str, str]] = []
    check_rows: List[dict] = []
    any_numerical = False
    any_violation = False
    trajectory = None
    ledger = None
    study = None
    dependence = None

    for key in ("equation", "seed"):
        task_rows.append(("config", key, str(config.echo[key])))
    for key, value in config.echo["params"].items():
        task_rows.append(("config", "params.%s" % key, value))
    for key, value in config.echo["solver"].items():
        task_rows.append(("config", "solver.%s" % key, str(value)))
    for key, value in config.echo["traits_override"].items():
        task_rows.append(("config", "traits_override.%s" % key, _fmt(value)))

    try:
        for task in config.tasks:
            t0 = time.perf_counter()
            status = PASS
            try:
                if task in CHECK_TASKS:
                    cond = CHECK_TASKS[task]
                    report = _run_single_check(problem, cond, config.seed,
                                               config.check_opts)
                    check_rows.append(_check_row(report))
                    if report.status == "skipped":
                        status = SKIPPED
                    elif not report.passed:
                        status = FAIL
                        any_violation = True
                    task_rows.append((task, "violations",
                                      str(len(report.violations))))
                    if report.samples:
                        task_rows.append((task, "min_slack",
                                          _fmt(report.min_slack)))
                elif task == "solve":
                    trajectory = solver.solve(problem, config.solver)
                    task_rows.append((task, "status", trajectory.status))
                    task_rows.append((task, "steps",
                                      str(len(trajectory.times) - 1)))
                    task_rows.append((task, "final_t",
                                      _fmt(trajectory.times[-1])))
                    task_rows.append((task, "final_norm_H",
                                      _fmt(trajectory.norm_h[-1])))
                    task_rows.append((task, "final_norm_V",
                                      _fmt(trajectory.norm_v[-1])))
                    task_rows.append((task, "final_x_norm",
                                      _fmt(trajectory.x_norm[-1])))
                    if not trajectory.ok:
                        status = FAIL
                        any_numerical = True
                elif task == "energy":
                    if trajectory is None or not trajectory.ok:
                        status = SKIPPED
                        task_rows.append((task, "note",
                                          "no completed solve"))
                    else:
                        ledger = solver.energy_monitor(trajectory, problem)
                        task_rows.append((task, "min_slack",
                                          _fmt(ledger.min_slack)))
                        task_rows.append((task, "K", _fmt(ledger.k_bound)))
                        task_rows.append((task, "K_x", _fmt(ledger.k_x)))
                        task_rows.append((task, "K_sup_H",
                                          _fmt(ledger.k_sup_h)))
                        task_rows.append((task, "K_dual",
                                          _fmt(ledger.k_dual)))
                        task_rows.append((task, "C1", _fmt(ledger.c1)))
                        if not ledger.passed():
                            status = FAIL
                            any_violation = True
                elif task == "convergence":
                    study = solver.convergence_study(
                        problem, config.solver,
                        config.convergence_opts["n_list"])
                    member_failed = any(s != solver.STATUS_OK
                                        for s in study.statuses.values())
                    for pair in study.pairs:
                        task_rows.append((task,
                                          "d_%d_%d" % (pair.n_coarse,
                                                       pair.n_fine),
                                          _fmt(pair.distance)))
                    if member_failed:
                        status = FAIL
                        any_numerical = True
                    elif not study.decreasing:
                        status = FAIL
                        any_violation = True
                elif task == "dependence":
                    factor = config.dependence_opts["u0_factor"]
                    u0 = problem.initial
                    dependence = solver.dependence_experiment(
                        problem, (factor * u0, u0), (None, None),
                        config.solver)
                    task_rows.append((task, "final_gap_sq",
                                      _fmt(dependence.lhs[-1])))
                    task_rows.append((task, "final_bound",
                                      _fmt(dependence.rhs[-1])))
                    task_rows.append((task, "final_exp_factor",
                                      _fmt(dependence.exp_factor[-1])))
                    if not dependence.passed():
                        status = FAIL
                        any_violation = True
            except NumericalFailureError as exc:
                status = FAIL
                any_numerical = True
                task_rows.append((task, "error", str(exc)))
            statuses[task] = status
            task_rows.append((task, "result", status))
            timings[task] = time.perf_counter() - t0
    finally:
        exit_code = EXIT_OK
        if any_violation:
            exit_code = EXIT_VIOLATION
        if any_numerical:
            exit_code = EXIT_NUMERICAL
        manifest = _persist(config, statuses, exit_code, task_rows,
                            check_rows, timings, trajectory, ledger, study,
                            dependence)
    return RunReport(statuses=statuses, exit_code=exit_code,
                     output_dir=config.output_dir, manifest=manifest,
                     timings=timings, task_rows=task_rows,
                     check_rows=check_rows)


def _check_row(report: ConditionReport) -> dict:
    fitted = ";".join("%s=%s" % (k, _fmt(v))
                      for k, v in sorted(report.fitted_constants.items()))
    return {"condition": report.condition,
            "status": ("violated" if (report.status == "checked"
                                      and report.violations)
                       else report.status),
            "samples": str(report.samples),
            "violations": str(len(report.violations)),
            "min_slack": (_fmt(report.min_slack)
                          if report.samples else ""),
            "fitted_constants": fitted,
            "surrogate": "1" if report.surrogate else "0",
            "extremal_sample": report.extremal_sample}


# --- persistence ----------------------------------------------------------

def _write_csv(path: str, header: Sequence[str],
               rows: Sequence[Sequence[str]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _persist(config, statuses, exit_code, task_rows, check_rows, timings,
             trajectory, ledger, study, dependence) -> List[str]:
    outdir = config.output_dir
    os.makedirs(outdir, exist_ok=True)
    manifest = []

    def emit(name, header, rows):
        _write_csv(os.path.join(outdir, name), header, rows)
        manifest.append(name)

    emit("tasks.csv", ("task", "key", "value"), task_rows)

    if check_rows:
        header = ("condition", "status", "samples", "violations",
                  "min_slack", "fitted_constants", "surrogate",
                  "extremal_sample")
        emit("checks.csv", header,
             [[row[k] for k in header] for row in check_rows])

    if trajectory is not None:
        rows = []
        for i, t in enumerate(trajectory.times):
            row = [_fmt(t), _fmt(trajectory.norm_h[i]),
                   _fmt(trajectory.norm_v[i]), _fmt(trajectory.x_norm[i])]
            if ledger is not None:
                row += [_fmt(ledger.lhs[i]), _fmt(ledger.rhs[i]),
                        _fmt(ledger.slack[i])]
            else:
                row += ["", "", ""]
            rows.append(row)
        emit("trajectory.csv", ("t", "norm_H", "norm_V", "x_norm",
                                "ledger_lhs", "ledger_rhs", "slack"), rows)

    if ledger is not None:
        emit("ledger.csv", ("t", "lhs", "rhs", "slack"),
             [[_fmt(t), _fmt(a), _fmt(b), _fmt(s)]
              for t, a, b, s in zip(ledger.times, ledger.lhs, ledger.rhs,
                                    ledger.slack)])

    if study is not None:
        emit("convergence.csv", ("n_coarse", "n_fine", "distance", "note"),
             [[str(p.n_coarse), str(p.n_fine), _fmt(p.distance), p.note]
              for p in study.pairs])

    if dependence is not None:
        emit("dependence.csv", ("t", "gap_sq", "bound", "exp_factor",
                                "slack"),
             [[_fmt(t), _fmt(l), _fmt(r), _fmt(e), _fmt(r - l)]
              for t, l, r, e in zip(dependence.times, dependence.lhs,
                                    dependence.rhs, dependence.exp_factor)])

    emit("timings.csv", ("task", "seconds"),
         [[task, _fmt(sec)] for task, sec in timings.items()])

    report_path = os.path.join(outdir, "report.txt")
    with open(report_path, "w") as fh:
        fh.write(_report_text(config, statuses, exit_code, task_rows,
                              check_rows, manifest))
    manifest.append("report.txt")
    return manifest


def _report_text(config, statuses, exit_code, task_rows, check_rows,
                 manifest) -> str:
    """Human summary; every number is a verbatim copy of a CSV cell."""
    buf = io.StringIO()
    buf.write("nlevo run report\n")
    buf.write("================\n")
    buf.write("equation: %s\n" % config.equation)
    buf.write("seed: %d\n" % config.seed)
    buf.write("tasks: %s\n" % ", ".join(config.tasks))
    for key, value in config.echo["solver"].items():
        buf.write("solver.%s: %s\n" % (key, value))
    if config.traits_override:
        for key in config.traits_override:
            cell = next(v for t, k, v in task_rows
                        if t == "config" and k == "traits_override.%s" % key)
            buf.write("traits_override.%s: %s\n" % (key, cell))
    buf.write("\n")
    for task in config.tasks:
        buf.write("task %s: %s\n" % (task, statuses.get(task, "not run")))
        for t, key, value in task_rows:
            if t == task and key != "result":
                buf.write("  %s = %s\n" % (key, value))
    if check_rows:
        buf.write("\nchecks:\n")
        for row in check_rows:
            buf.write("  %s: %s (samples=%s violations=%s min_slack=%s)\n"
                      % (row["condition"], row["status"], row["samples"],
                         row["violations"], row["min_slack"]))
            if row["extremal_sample"]:
                buf.write("    extremal: %s\n" % row["extremal_sample"])
    buf.write("\nfiles: %s\n" % ", ".join(manifest + ["report.txt"]))
    buf.write("exit_code: %d\n" % exit_code)
    return buf.getvalue()


# --- run comparison -------------------------------------------------------

@dataclass
class ColumnDrift:
    file: str
    column: str
    max_abs_diff: float
    note: str = ""


@dataclass
class ComparisonReport:
    """Per-column drift between two run directories' CSV artifacts."""

    drifts: List[ColumnDrift]
    files: List[str]

    @property
    def max_drift(self) -> float:
        return max((d.max_abs_diff for d in self.drifts), default=0.0)

    @property
    def identical(self) -> bool:
        return self.max_drift == 0.0

    def describe(self) -> str:
        lines = ["compared files: %s" % ", ".join(self.files)]
        worst = [d for d in self.drifts if d.max_abs_diff > 0]
        if not worst:
            lines.append("no drift: all compared columns identical")
        for d in sorted(worst, key=lambda d: -d.max_abs_diff):
            lines.append("%s %s: max |diff| = %s%s"
                         % (d.file, d.column, _fmt(d.max_abs_diff),
                            " (%s)" % d.note if d.note else ""))
        return "\n".join(lines)


def _read_csv(path: str):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigurationError("%s: empty CSV" % path)
    return rows[0], rows[1:]


def _numeric(cell: str) -> Optional[float]:
    try:
        return float(cell)
    except ValueError:
        return None


def _compare_timeseries(file, header, rows_a, rows_b) -> List[ColumnDrift]:
    """Align on the coarser time grid by linear interpolation per column."""
    cols_a = {h: [r[i] for r in rows_a] for i, h in enumerate(header)}
    cols_b = {h: [r[i] for r in rows_b] for i, h in enumerate(header)}
    t_a = np.array([float(x) for x in cols_a["t"]])
    t_b = np.array([float(x) for x in cols_b["t"]])
    coarse_a = t_a.size <= t_b.size
    t_common = t_a if coarse_a else t_b
    out = []
    for col in header:
        if col == "t":
            out.append(ColumnDrift(file, col,
                                   abs(float(t_a[-1]) - float(t_b[-1])),
                                   "horizon gap"))
            continue
        va = [_numeric(x) for x in cols_a[col]]
        vb = [_numeric(x) for x in cols_b[col]]
        if any(v is None for v in va) or any(v is None for v in vb):
            same = cols_a[col] == cols_b[col]
            out.append(ColumnDrift(file, col, 0.0 if same else math.inf,
                                   "" if same else "text differs"))
            continue
        ya = np.interp(t_common, t_a, np.array(va))
        yb = np.interp(t_common, t_b, np.array(vb))
        out.append(ColumnDrift(file, col, float(np.max(np.abs(ya - yb)))))
    return out


def _compare_keyed(file, header, rows_a, rows_b,
                   key_cols: int) -> List[ColumnDrift]:
    keyed_a = {tuple(r[:key_cols]): r[key_cols:] for r in rows_a}
    keyed_b = {tuple(r[:key_cols]): r[key_cols:] for r in rows_b}
    if set(keyed_a) != set(keyed_b):
        only_a = sorted(set(keyed_a) - set(keyed_b))
        only_b = sorted(set(keyed_b) - set(keyed_a))
        raise ConfigurationError(
            "%s: row keys differ (only in a: %s; only in b: %s)"
            % (file, only_a[:3], only_b[:3]))
    drifts = {col: ColumnDrift(file, col, 0.0)
              for col in header[key_cols:]}
    for key, vals_a in keyed_a.items():
        for col, a_cell, b_cell in zip(header[key_cols:], vals_a,
                                       keyed_b[key]):
            fa, fb = _numeric(a_cell), _numeric(b_cell)
            d = drifts[col]
            if fa is None or fb is None:
                if a_cell != b_cell:
                    d.max_abs_diff = math.inf
                    d.note = "text differs (%s)" % "/".join(key)
            else:
                diff = abs(fa - fb)
                if diff > d.max_abs_diff:
                    d.max_abs_diff = diff
                    d.note = "at %s" % "/".join(key)
    return list(drifts.values())


_KEY_COLS = {"tasks.csv": 2, "checks.csv": 1, "convergence.csv": 2}


def compare_runs(dir_a: str, dir_b: str) -> ComparisonReport:
    """Column-wise drift between the scientific CSVs of two run directories.

    Time-series files are compared on the coarser grid (linear
    interpolation); keyed files are joined on their key columns.  Wall-clock
    timings are excluded by design.  Mismatched schemas (headers, key sets,
    or one-sided files) raise ConfigurationError.
    """
    drifts: List[ColumnDrift] = []
    files = []
    for name in COMPARED_CSVS:
        pa, pb = os.path.join(dir_a, name), os.path.join(dir_b, name)
        has_a, has_b = os.path.exists(pa), os.path.exists(pb)
        if has_a != has_b:
            raise ConfigurationError(
                "%s exists in only one run (tasks differ?)" % name)
        if not has_a:
            continue
        header_a, rows_a = _read_csv(pa)
        header_b, rows_b = _read_csv(pb)
        if header_a != header_b:
            raise ConfigurationError(
                "%s: headers differ (%s vs %s)" % (name, header_a, header_b))
        files.append(name)
        if name in TIMESERIES_CSVS:
            drifts.extend(_compare_timeseries(name, header_a, rows_a, rows_b))
        else:
            drifts.extend(_compare_keyed(name, header_a, rows_a, rows_b,
                                         _KEY_COLS[name]))
    if not files:
        raise ConfigurationError("no comparable CSV artifacts found")
    return ComparisonReport(drifts=drifts, files=files)


# --- entry point ----------------------------------------------------------

def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="nlevo",
        description="Run spectral evolution problems and their structural "
                    "condition checks from a TOML config.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a run config")
    p_run.add_argument("config", help="path to the TOML run config")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    p_run.add_argument("--out", default=None,
                       help="override the output directory "
                            "(also: %s env var)" % OUT_ENV_VAR)
    p_cmp = sub.add_parser("compare", help="drift between two run outputs")
    p_cmp.add_argument("report_a", help="first run output directory")
    p_cmp.add_argument("report_b", help="second run output directory")
    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            try:
                with open(args.config) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigurationError("cannot read config: %s" % exc)
            config = parse_config(text, seed_override=args.seed,
                                  out_override=args.out)
            report = run(config)
            for task in config.tasks:
                print("%s: %s" % (task, report.statuses[task]))
            print("artifacts: %s" % os.path.abspath(report.output_dir))
            return report.exit_code
        report = compare_runs(args.report_a, args.report_b)
        print(report.describe())
        return EXIT_OK
    except ConfigurationError as exc:
        print("configuration error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
