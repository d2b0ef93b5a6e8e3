"""Tagged closed-form scalar functions and sampled growth-condition checks.

Reaction terms, flux profiles, and drift coefficients enter the catalog as
tagged closed forms (polynomial, clipped polynomial, tanh sigmoid, signed
power law, sign, interpolation table) rather than arbitrary callables, so
that growth exponents can be declared by the caller and then falsified by
sampling instead of inferred.  The checkers fit the smallest admissible
constant on an inner point grid and re-test it on a wider grid (larger range
outward, finer approach to 0 inward): a fitted constant that keeps growing
under widening contradicts the declared exponents and raises
``ConfigurationError``.  Declared exponents a sampled check cannot
distinguish (excess below ~0.2 in the power) are accepted; the check is a
falsifier, not a proof.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigurationError

KIND_ZERO = kernels.KIND_ZERO
KIND_POLY = kernels.KIND_POLY
KIND_CLIPPED_POLY = kernels.KIND_CLIPPED_POLY
KIND_TANH = kernels.KIND_TANH
KIND_POWER_LAW = kernels.KIND_POWER_LAW
KIND_SIGN = kernels.KIND_SIGN
KIND_TABLE = kernels.KIND_TABLE

_KIND_NAMES = {
    KIND_ZERO: "zero",
    KIND_POLY: "poly",
    KIND_CLIPPED_POLY: "clipped_poly",
    KIND_TANH: "tanh",
    KIND_POWER_LAW: "power_law",
    KIND_SIGN: "sign",
    KIND_TABLE: "table",
}


@dataclass(frozen=True, eq=False)
class ScalarFunction:
    """A scalar function R -> R in one of the supported tagged closed forms.

    ``coeffs`` holds ascending polynomial coefficients for the poly kinds,
    (amplitude, rate) for tanh, (a, b, q) for a*x + b*sign(x)*|x|^q, the
    jump height for sign, and the concatenated (xs, ys) for a table.
    ``aux`` is the clip bound for clipped_poly and the table length for
    table.  Instances are immutable and evaluate elementwise on arrays of
    any shape (scalars in, scalar out).
    """

    kind: int
    coeffs: np.ndarray
    aux: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coeffs",
                           np.ascontiguousarray(self.coeffs, dtype=np.float64))

    def __call__(self, x):
        scalar = np.isscalar(x) or np.ndim(x) == 0
        out = kernels.eval_tagged(self.kind, self.coeffs, self.aux,
                                  np.atleast_1d(np.asarray(x, dtype=np.float64)))
        return float(out[0]) if scalar else out

    @property
    def is_zero(self) -> bool:
        if self.kind == KIND_ZERO:
            return True
        if self.kind in (KIND_POLY, KIND_CLIPPED_POLY, KIND_SIGN):
            return not np.any(self.coeffs)
        if self.kind in (KIND_TANH, KIND_POWER_LAW):
            return self.coeffs[0] == 0.0 and (
                self.kind == KIND_TANH or self.coeffs[1] == 0.0)
        if self.kind == KIND_TABLE:
            m = int(self.aux)
            return not np.any(self.coeffs[m:2 * m])
        return False

    def describe(self) -> str:
        """Canonical parseable text form (inverse of parse_scalar_function)."""
        name = _KIND_NAMES[self.kind]
        if self.kind == KIND_ZERO:
            return name
        if self.kind == KIND_CLIPPED_POLY:
            return "%s:%s:%s" % (name, _fmt(self.aux),
                                 ",".join(_fmt(c) for c in self.coeffs))
        if self.kind == KIND_TABLE:
            m = int(self.aux)
            pairs = ";".join("%s,%s" % (_fmt(x), _fmt(y))
                             for x, y in zip(self.coeffs[:m], self.coeffs[m:2 * m]))
            return "%s:%s" % (name, pairs)
        return "%s:%s" % (name, ",".join(_fmt(c) for c in self.coeffs))

    def __repr__(self):  # pragma: no cover - debugging aid
        return "ScalarFunction(%s)" % self.describe()

    # --- constructors -----------------------------------------------------
    @staticmethod
    def zero() -> "ScalarFunction":
        return ScalarFunction(KIND_ZERO, np.zeros(1))

    @staticmethod
    def poly(*coeffs: float) -> "ScalarFunction":
        """Polynomial with ascending coefficients: poly(a0, a1, ...) = a0 + a1·x + ..."""
        if not coeffs:
            raise ConfigurationError("poly needs at least one coefficient")
        return ScalarFunction(KIND_POLY, np.array(coeffs, dtype=np.float64))

    @staticmethod
    def constant(c: float) -> "ScalarFunction":
        return ScalarFunction.poly(float(c))

    @staticmethod
    def clipped_poly(bound: float, *coeffs: float) -> "ScalarFunction":
        """Polynomial evaluated at x clipped to [-bound, bound] (hence bounded)."""
        if not bound > 0:
            raise ConfigurationError("clipped_poly bound must be positive")
        if not coeffs:
            raise ConfigurationError("clipped_poly needs at least one coefficient")
        return ScalarFunction(KIND_CLIPPED_POLY,
                              np.array(coeffs, dtype=np.float64), float(bound))

    @staticmethod
    def tanh(amplitude: float, rate: float = 1.0) -> "ScalarFunction":
        """amplitude * tanh(rate * x): a bounded Lipschitz sigmoid."""
        return ScalarFunction(KIND_TANH, np.array([amplitude, rate], dtype=np.float64))

    @staticmethod
    def power_law(a: float, b: float, q: float) -> "ScalarFunction":
        """a*x + b*sign(x)*|x|^q, the odd power-law reaction profile."""
        if not q > 0:
            raise ConfigurationError("power_law exponent q must be positive")
        return ScalarFunction(KIND_POWER_LAW, np.array([a, b, q], dtype=np.float64))

    @staticmethod
    def sign(height: float) -> "ScalarFunction":
        """height * sign(x): discontinuous at 0 (a deliberate counterexample)."""
        return ScalarFunction(KIND_SIGN, np.array([height], dtype=np.float64))

    @staticmethod
    def table(xs, ys) -> "ScalarFunction":
        """Piecewise-linear interpolation through (xs, ys), clamped outside."""
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise ConfigurationError("table needs matching 1-D xs, ys with >= 2 rows")
        if not np.all(np.diff(xs) > 0):
            raise ConfigurationError("table xs must be strictly increasing")
        return ScalarFunction(KIND_TABLE, np.concatenate([xs, ys]), float(xs.size))


def _fmt(v: float) -> str:
    return "%.17g" % float(v)


def parse_scalar_function(text: str) -> ScalarFunction:
    """Parse the textual form used in config files; see ScalarFunction.describe.

    Grammar: ``zero`` | ``poly:a0,a1,...`` | ``clipped_poly:BOUND:a0,...`` |
    ``tanh:amp,rate`` | ``power_law:a,b,q`` | ``sign:h`` |
    ``table:x0,y0;x1,y1;...``
    """
    text = text.strip()
    head, _, rest = text.partition(":")
    try:
        if head == "zero":
            if rest:
                raise ConfigurationError("zero takes no arguments")
            return ScalarFunction.zero()
        if head == "poly":
            return ScalarFunction.poly(*_floats(rest))
        if head == "clipped_poly":
            bound_text, _, coeff_text = rest.partition(":")
            return ScalarFunction.clipped_poly(float(bound_text), *_floats(coeff_text))
        if head == "tanh":
            vals = _floats(rest)
            if len(vals) not in (1, 2):
                raise ConfigurationError("tanh takes amplitude[,rate]")
            return ScalarFunction.tanh(*vals)
        if head == "power_law":
            vals = _floats(rest)
            if len(vals) != 3:
                raise ConfigurationError("power_law takes a,b,q")
            return ScalarFunction.power_law(*vals)
        if head == "sign":
            vals = _floats(rest)
            if len(vals) != 1:
                raise ConfigurationError("sign takes a single height")
            return ScalarFunction.sign(vals[0])
        if head == "table":
            pairs = [p for p in rest.split(";") if p.strip()]
            pts = [_floats(p) for p in pairs]
            if any(len(p) != 2 for p in pts):
                raise ConfigurationError("table entries must be x,y pairs")
            arr = np.array(pts, dtype=np.float64)
            return ScalarFunction.table(arr[:, 0], arr[:, 1])
    except ValueError as exc:
        raise ConfigurationError(
            "could not parse scalar function %r: %s" % (text, exc)) from exc
    raise ConfigurationError(
        "unknown scalar function form %r (expected one of: %s)"
        % (text, ", ".join(sorted(_KIND_NAMES.values()))))


def _floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def parse_time_profile(text: str) -> ScalarFunction:
    """Parse a time profile t -> f(t): ``zero`` | ``constant:c`` | ``poly:...``
    | ``table:...`` (table values clamp outside the tabulated range)."""
    text = text.strip()
    head = text.partition(":")[0]
    if head == "constant":
        vals = _floats(text.partition(":")[2])
        if len(vals) != 1:
            raise ConfigurationError("constant takes a single value")
        return ScalarFunction.constant(vals[0])
    if head in ("zero", "poly", "table"):
        return parse_scalar_function(text)
    raise ConfigurationError(
        "unknown time profile %r (expected zero, constant:c, poly:..., table:...)"
        % text)


# --- sampled growth-condition checks -------------------------------------
#
# Each checker fits the minimal constant making its inequalities hold on an
# inner sample grid, then re-fits on a wider grid.  A genuine violation of
# the declared exponents makes the fitted constant grow with the grid
# (polynomially in the range ratio, or inversely in the smallest gap for a
# discontinuity), which the widening test detects.

_INNER_GRID = None
_OUTER_GRID = None
_WIDEN_FACTOR = 1.5
_WIDEN_ATOL = 1e-9


def _signed_grid(r_min: float, r_max: float, n_per_sign: int) -> np.ndarray:
    mags = np.geomspace(r_min, r_max, n_per_sign)
    return np.concatenate([-mags[::-1], [0.0], mags])


def _grids():
    global _INNER_GRID, _OUTER_GRID
    if _INNER_GRID is None:
        _INNER_GRID = _signed_grid(1e-3, 25.0, 40)
        _OUTER_GRID = _signed_grid(1e-5, 200.0, 48)
    return _INNER_GRID, _OUTER_GRID


def _max_ratio(lhs: np.ndarray, den: np.ndarray) -> float:
    """Smallest C >= 0 with lhs <= C*den on the samples (den > 0 where used)."""
    return float(max(0.0, np.max(lhs / den)))


def _check_widening(name: str, condition: str, c_inner: float, c_outer: float):
    if c_outer > _WIDEN_FACTOR * c_inner + _WIDEN_ATOL:
        raise ConfigurationError(
            "%s violates the declared %s bound: fitted constant grew from "
            "%.6g on |x|<=25 to %.6g on |x|<=200 under sample widening"
            % (name, condition, c_inner, c_outer))
    return max(c_inner, c_outer)


def _pair_arrays(grid: np.ndarray):
    x = np.repeat(grid, grid.size)
    y = np.tile(grid, grid.size)
    keep = x != y
    return x[keep], y[keep]


def check_growth_conditions(g: ScalarFunction, *, sign_exp: float,
                            growth_exp: float, quot_exp: float,
                            incr_exp: float = 2.0, name: str = "g") -> float:
    """Validate the three-part reaction condition family by sampling.

    Checks, for a single shared constant C >= 0:
      g(x)*x                <= C(|x|^sign_exp + 1)
      |g(x)|                <= C(|x|^growth_exp + 1)
      (g(x)-g(y))*(x-y)     <= C(1 + |x|^quot_exp + |y|^quot_exp)*|x-y|^incr_exp
    Returns the fitted C; raises ConfigurationError if widening the sample
    grid contradicts the declared exponents.
    """
    if growth_exp < 1 or quot_exp < 1 or incr_exp < 1:
        raise ConfigurationError(
            "%s: growth, quotient and increment exponents must be >= 1" % name)
    fitted = 0.0
    results = {}
    for label, grid in zip(("inner", "outer"), _grids()):
        gx = g(grid)
        c_sign = _max_ratio(gx * grid, np.abs(grid) ** sign_exp + 1.0)
        c_growth = _max_ratio(np.abs(gx), np.abs(grid) ** growth_exp + 1.0)
        x, y = _pair_arrays(grid)
        lhs = (g(x) - g(y)) * (x - y)
        den = (1.0 + np.abs(x) ** quot_exp + np.abs(y) ** quot_exp) \
            * np.abs(x - y) ** incr_exp
        c_mono = _max_ratio(lhs, den)
        results[label] = (c_sign, c_growth, c_mono)
    for idx, condition in enumerate(
            ("sign g(x)x", "growth |g(x)|", "difference-quotient")):
        fitted = max(fitted, _check_widening(
            name, condition, results["inner"][idx], results["outer"][idx]))
    return fitted


def check_lipschitz_growth(F: ScalarFunction, name: str = "F") -> float:
    """Validate |F(x)-F(y)| <= C(1+|x|+|y|)|x-y| by sampling; return fitted C."""
    cs = {}
    for label, grid in zip(("inner", "outer"), _grids()):
        x, y = _pair_arrays(grid)
        cs[label] = _max_ratio(np.abs(F(x) - F(y)),
                               (1.0 + np.abs(x) + np.abs(y)) * np.abs(x - y))
    return _check_widening(name, "affine-weighted Lipschitz", cs["inner"], cs["outer"])


def check_bounded_lipschitz(f: ScalarFunction, name: str = "f") -> tuple:
    """Validate that f is bounded and Lipschitz by sampling.

    Returns (sup |f|, Lipschitz constant) as fitted on the samples; raises
    ConfigurationError if either grows under sample widening.
    """
    sups = {}
    lips = {}
    for label, grid in zip(("inner", "outer"), _grids()):
        fx = f(grid)
        sups[label] = float(np.max(np.abs(fx)))
        x, y = _pair_arrays(grid)
        lips[label] = _max_ratio(np.abs(f(x) - f(y)), np.abs(x - y))
    sup = _check_widening(name, "boundedness", sups["inner"], sups["outer"])
    lip = _check_widening(name, "Lipschitz", lips["inner"], lips["outer"])
    return sup, lip
