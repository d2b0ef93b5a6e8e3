"""Hot pointwise kernels with a numba fast path and a pure-numpy fallback.

The numba path is the default whenever numba imports; set the environment
variable ``NLEVO_DISABLE_NUMBA=1`` before import to force the numpy fallback.
Both implementations of every kernel are importable (``NUMPY_IMPLS`` /
``NUMBA_IMPLS``) so tests and benchmarks can compare them directly.

Only genuinely loop-level work lives here: tagged scalar nonlinearities
evaluated on quadrature grids, the smoothed p-Laplace flux, weighted |.|^p
moments, and the dense time-stepping sweep for purely diagonal-linear
problems.  Transforms and pairings are BLAS matmuls and stay in numpy.

Raw kernels take 1-D (or (d, npts) for the vector moment) contiguous float64
arrays; the shape-generic wrappers at the bottom are the package-facing API.
"""

from __future__ import annotations

import os

import numpy as np

# integer codes for tagged scalar functions; must match functions.py
KIND_ZERO = 0
KIND_POLY = 1
KIND_CLIPPED_POLY = 2
KIND_TANH = 3
KIND_POWER_LAW = 4
KIND_SIGN = 5
KIND_TABLE = 6


def _np_eval_tagged(kind, coeffs, aux, x):
    if kind == KIND_ZERO:
        return np.zeros_like(x)
    if kind == KIND_POLY:
        y = np.zeros_like(x)
        for c in coeffs[::-1]:
            y = y * x + c
        return y
    if kind == KIND_CLIPPED_POLY:
        xc = np.clip(x, -aux, aux)
        y = np.zeros_like(x)
        for c in coeffs[::-1]:
            y = y * xc + c
        return y
    if kind == KIND_TANH:
        return coeffs[0] * np.tanh(coeffs[1] * x)
    if kind == KIND_POWER_LAW:
        return coeffs[0] * x + coeffs[1] * np.sign(x) * np.abs(x) ** coeffs[2]
    if kind == KIND_SIGN:
        return coeffs[0] * np.sign(x)
    if kind == KIND_TABLE:
        m = int(aux)
        return np.interp(x, coeffs[:m], coeffs[m:2 * m])
    raise ValueError("unknown scalar function kind code")


def _np_plaplace_flux(d, p, eps):
    return (d * d + eps * eps) ** ((p - 2.0) / 2.0) * d


def _np_weighted_abs_pow_sum(w, v, p):
    return float(np.dot(w, np.abs(v) ** p))


def _np_weighted_vec_pow_sum(w, v, p):
    mag2 = np.einsum("aj,aj->j", v, v)
    return float(np.dot(w, mag2 ** (p / 2.0)))


def _np_midpoint_diag_sweep(diag, u0, b, dt, nsteps):
    n = u0.shape[0]
    out = np.empty((nsteps + 1, n))
    out[0] = u0
    denom = 1.0 - 0.5 * dt * diag
    u = u0.copy()
    for m in range(nsteps):
        y = (u + 0.5 * dt * b) / denom
        u = 2.0 * y - u
        out[m + 1] = u
    return out


NUMPY_IMPLS = {
    "eval_tagged": _np_eval_tagged,
    "plaplace_flux": _np_plaplace_flux,
    "weighted_abs_pow_sum": _np_weighted_abs_pow_sum,
    "weighted_vec_pow_sum": _np_weighted_vec_pow_sum,
    "midpoint_diag_sweep": _np_midpoint_diag_sweep,
}

_DISABLED = os.environ.get("NLEVO_DISABLE_NUMBA", "").lower() in ("1", "true", "yes")

NUMBA_IMPLS: dict = {}
HAS_NUMBA = False

try:  # pragma: no cover - import guard
    if _DISABLED:
        raise ImportError("numba disabled by NLEVO_DISABLE_NUMBA")
    import numba as nb

    HAS_NUMBA = True
except ImportError:
    nb = None

if nb is not None:

    @nb.njit(cache=True)
    def _nb_eval_tagged(kind, coeffs, aux, x):
        n = x.size
        y = np.empty(n)
        if kind == KIND_ZERO:
            for j in range(n):
                y[j] = 0.0
        elif kind == KIND_POLY:
            for j in range(n):
                acc = 0.0
                for i in range(coeffs.size - 1, -1, -1):
                    acc = acc * x[j] + coeffs[i]
                y[j] = acc
        elif kind == KIND_CLIPPED_POLY:
            for j in range(n):
                xc = min(max(x[j], -aux), aux)
                acc = 0.0
                for i in range(coeffs.size - 1, -1, -1):
                    acc = acc * xc + coeffs[i]
                y[j] = acc
        elif kind == KIND_TANH:
            for j in range(n):
                y[j] = coeffs[0] * np.tanh(coeffs[1] * x[j])
        elif kind == KIND_POWER_LAW:
            for j in range(n):
                s = 1.0 if x[j] > 0.0 else (-1.0 if x[j] < 0.0 else 0.0)
                y[j] = coeffs[0] * x[j] + coeffs[1] * s * np.abs(x[j]) ** coeffs[2]
        elif kind == KIND_SIGN:
            for j in range(n):
                s = 1.0 if x[j] > 0.0 else (-1.0 if x[j] < 0.0 else 0.0)
                y[j] = coeffs[0] * s
        elif kind == KIND_TABLE:
            m = int(aux)
            y = np.interp(x, coeffs[:m], coeffs[m:2 * m])
        else:
            raise ValueError("unknown scalar function kind code")
        return y

    @nb.njit(cache=True)
    def _nb_plaplace_flux(d, p, eps):
        out = np.empty(d.size)
        for j in range(d.size):
            out[j] = (d[j] * d[j] + eps * eps) ** ((p - 2.0) / 2.0) * d[j]
        return out

    @nb.njit(cache=True)
    def _nb_weighted_abs_pow_sum(w, v, p):
        acc = 0.0
        for j in range(w.size):
            acc += w[j] * np.abs(v[j]) ** p
        return acc

    @nb.njit(cache=True)
    def _nb_weighted_vec_pow_sum(w, v, p):
        acc = 0.0
        d = v.shape[0]
        for j in range(w.size):
            m2 = 0.0
            for a in range(d):
                m2 += v[a, j] * v[a, j]
            acc += w[j] * m2 ** (p / 2.0)
        return acc

    @nb.njit(cache=True)
    def _nb_midpoint_diag_sweep(diag, u0, b, dt, nsteps):
        n = u0.shape[0]
        out = np.empty((nsteps + 1, n))
        u = u0.copy()
        for i in range(n):
            out[0, i] = u[i]
        for m in range(nsteps):
            for i in range(n):
                y = (u[i] + 0.5 * dt * b[i]) / (1.0 - 0.5 * dt * diag[i])
                u[i] = 2.0 * y - u[i]
                out[m + 1, i] = u[i]
        return out

    NUMBA_IMPLS = {
        "eval_tagged": _nb_eval_tagged,
        "plaplace_flux": _nb_plaplace_flux,
        "weighted_abs_pow_sum": _nb_weighted_abs_pow_sum,
        "weighted_vec_pow_sum": _nb_weighted_vec_pow_sum,
        "midpoint_diag_sweep": _nb_midpoint_diag_sweep,
    }

ACTIVE = NUMBA_IMPLS if HAS_NUMBA else NUMPY_IMPLS


def eval_tagged(kind: int, coeffs: np.ndarray, aux: float, x: np.ndarray) -> np.ndarray:
    """Evaluate a tagged scalar function elementwise on an array of any shape.

    coeffs holds ascending polynomial coefficients for the poly kinds,
    (amplitude, rate) for tanh, (a, b, q) for the power law a*x + b*sign(x)|x|^q,
    and the concatenation (xs, ys) for the interpolation table.  aux is the
    clip bound for KIND_CLIPPED_POLY and the table length for KIND_TABLE.
    """
    flat = np.ascontiguousarray(x, dtype=np.float64).ravel()
    return ACTIVE["eval_tagged"](kind, coeffs, aux, flat).reshape(np.shape(x))


def plaplace_flux(d: np.ndarray, p: float, eps: float) -> np.ndarray:
    """Smoothed flux (|d|^2 + eps^2)^((p-2)/2) * d, elementwise, any shape."""
    flat = np.ascontiguousarray(d, dtype=np.float64).ravel()
    return ACTIVE["plaplace_flux"](flat, p, eps).reshape(np.shape(d))


def weighted_abs_pow_sum(w: np.ndarray, v: np.ndarray, p: float) -> float:
    """sum_j w_j |v_j|^p over a scalar grid function."""
    return float(ACTIVE["weighted_abs_pow_sum"](
        np.ascontiguousarray(w, dtype=np.float64),
        np.ascontiguousarray(v, dtype=np.float64), p))


def weighted_vec_pow_sum(w: np.ndarray, v: np.ndarray, p: float) -> float:
    """sum_j w_j |v_.j|_2^p over a vector grid function v of shape (d, npts)."""
    return float(ACTIVE["weighted_vec_pow_sum"](
        np.ascontiguousarray(w, dtype=np.float64),
        np.ascontiguousarray(v, dtype=np.float64), p))


def midpoint_diag_sweep(diag: np.ndarray, u0: np.ndarray, b: np.ndarray,
                        dt: float, nsteps: int) -> np.ndarray:
    """Implicit-midpoint trajectory for u' = diag*u + b with constant b.

    The stage equation is linear and solved exactly each step.  Returns the
    dense state history, shape (nsteps+1, n).
    """
    return ACTIVE["midpoint_diag_sweep"](
        np.ascontiguousarray(diag, dtype=np.float64),
        np.ascontiguousarray(u0, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64), float(dt), int(nsteps))


def warmup() -> None:
    """Trigger JIT compilation of every kernel on tiny inputs."""
    x = np.array([0.1, -0.2])
    w = np.array([0.5, 0.5])
    for kind in (KIND_ZERO, KIND_POLY, KIND_CLIPPED_POLY, KIND_TANH,
                 KIND_POWER_LAW, KIND_SIGN):
        eval_tagged(kind, np.array([1.0, 0.5, 0.0, -1.0]), 1.0, x)
    eval_tagged(KIND_TABLE, np.array([-1.0, 1.0, 0.0, 2.0]), 2.0, x)
    plaplace_flux(x, 4.0, 1e-12)
    weighted_abs_pow_sum(w, x, 4.0)
    weighted_vec_pow_sum(w, np.vstack([x, x]), 4.0)
    midpoint_diag_sweep(np.array([-1.0]), np.array([1.0]), np.array([0.0]), 0.1, 2)
