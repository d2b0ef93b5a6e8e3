"""Analytic inequalities as checkable predicates, plus the Gronwall bound.

Every check returns a :class:`SlackReport` recording both sides, the slack
``rhs - lhs``, and whether the inequality holds up to a small negative
tolerance (default 1e-9) that absorbs quadrature rounding.  The constants
in the quartic interpolation bounds (2 in 2-D, 4 in 3-D) are analytic
constants, deliberately not refitted to the discretization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from . import spaces

DEFAULT_SLACK_TOL = 1e-9


@dataclass(frozen=True)
class SlackReport:
    """Outcome of one inequality check: holds ⇔ rhs - lhs ≥ -tolerance."""

    lhs: float
    rhs: float
    slack: float
    holds: bool
    tolerance: float

    @staticmethod
    def compare(lhs: float, rhs: float,
                tolerance: float = DEFAULT_SLACK_TOL) -> "SlackReport":
        lhs, rhs = float(lhs), float(rhs)
        if not (np.isfinite(lhs) and np.isfinite(rhs)):
            raise ConfigurationError("slack comparison requires finite sides")
        slack = rhs - lhs
        return SlackReport(lhs=lhs, rhs=rhs, slack=slack,
                           holds=bool(slack >= -tolerance), tolerance=tolerance)


def gronwall_bound(g0: float, c: float, forcing, t_grid) -> np.ndarray:
    """Integral-form Gronwall bound t ↦ e^{ct} (g0 + ∫₀ᵗ e^{-cs} forcing ds).

    ``forcing`` is a sampled time series on ``t_grid`` (which must start at 0
    and increase strictly); the integral uses the trapezoid rule on that grid.
    Dominates any g with g(t) ≤ g0 + c∫g + ∫forcing.
    """
    t = np.asarray(t_grid, dtype=np.float64)
    f = np.asarray(forcing, dtype=np.float64)
    if t.ndim != 1 or t.size == 0 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
        raise ConfigurationError(
            "t_grid must start at 0 and increase strictly")
    if f.shape != t.shape:
        raise ConfigurationError("forcing series must match t_grid")
    if g0 < 0 or np.any(f < 0):
        raise ConfigurationError("gronwall_bound needs g0 >= 0, forcing >= 0")
    integrand = np.exp(-c * t) * f
    integral = np.concatenate(
        [[0.0], np.cumsum(np.diff(t) * 0.5 * (integrand[1:] + integrand[:-1]))])
    return np.exp(c * t) * (g0 + integral)


def _quartic_report(u: spaces.Field, dims: int, rhs: float) -> SlackReport:
    if u.basis.dims != dims:
        raise ConfigurationError(
            "this bound applies to %d-dimensional bases only" % dims)
    return SlackReport.compare(spaces.lp_norm(u, 4) ** 4, rhs)


def ladyzhenskaya_2d(u: spaces.Field) -> SlackReport:
    """‖u‖⁴_{L⁴} ≤ 2 ‖u‖²_H ‖u‖²_V on 2-D bases (scalar or vector)."""
    return _quartic_report(
        u, 2, 2.0 * spaces.norm(u, spaces.SPACE_H) ** 2
        * spaces.norm(u, spaces.SPACE_V) ** 2)


def ladyzhenskaya_3d(u: spaces.Field) -> SlackReport:
    """‖u‖⁴_{L⁴} ≤ 4 ‖u‖_H ‖u‖³_V on 3-D bases."""
    return _quartic_report(
        u, 3, 4.0 * spaces.norm(u, spaces.SPACE_H)
        * spaces.norm(u, spaces.SPACE_V) ** 3)


def interpolation_bound(u: spaces.Field, p_low: float, p_mid: float,
                        p_high: float, theta: float) -> SlackReport:
    """L^p interpolation ‖u‖_{p_mid} ≤ ‖u‖_{p_low}^{1-θ} ‖u‖_{p_high}^θ.

    Requires the exponent relation 1/p_mid = (1-θ)/p_low + θ/p_high.
    """
    if not 0.0 <= theta <= 1.0:
        raise ConfigurationError("interpolation parameter must lie in [0, 1]")
    if abs(1.0 / p_mid - (1.0 - theta) / p_low - theta / p_high) > 1e-12:
        raise ConfigurationError(
            "interpolation exponents violate 1/p_mid = (1-θ)/p_low + θ/p_high")
    lhs = spaces.lp_norm(u, p_mid)
    rhs = spaces.lp_norm(u, p_low) ** (1.0 - theta) \
        * spaces.lp_norm(u, p_high) ** theta
    return SlackReport.compare(lhs, rhs)


def young_constant(a: float, eps: float) -> float:
    """The constant C_ε with x·y ≤ ε x^a + C_ε y^b for the conjugate b."""
    if not a > 1 or not eps > 0:
        raise ConfigurationError("young_constant needs a > 1 and eps > 0")
    b = a / (a - 1.0)
    return (a * eps) ** (-b / a) / b


def young_split(x: float, y: float, a: float, b: float, eps: float) -> SlackReport:
    """Weighted Young inequality x·y ≤ ε x^a + C_ε y^b, C_ε = (aε)^{-b/a}/b."""
    if x < 0 or y < 0:
        raise ConfigurationError("young_split takes nonnegative x, y")
    if not (a > 1 and b > 1) or abs(1.0 / a + 1.0 / b - 1.0) > 1e-12:
        raise ConfigurationError("young_split needs conjugate exponents")
    rhs = eps * x ** a + young_constant(a, eps) * y ** b
    return SlackReport.compare(x * y, rhs)
