"""Discrete realization of the V ⊆ H ⊆ V* triple: bases, fields, norms.

Every basis here is H-orthonormal by construction, so coefficient vectors
carry the whole geometry: ‖u‖_H is the Euclidean norm of the coefficients,
‖u‖_V weights each coefficient by the mode's V-norm (``v_weight``), and the
dual norm divides by it.  Three basis families are provided:

* 1-D / 2-D Dirichlet sine bases on an interval or box (zero boundary),
* real trigonometric scalar bases on a 2-D / 3-D torus (mean-zero),
* divergence-free vector trigonometric bases on the torus, with per-
  wavevector polarizations orthogonal to the wavevector (so projection of
  grid data onto the basis is automatically a Leray projection).

Quadrature grids are sized so that products of up to four retained modes
are integrated exactly (midpoint rule on intervals, uniform rule on the
torus), which makes orthonormality, grid round trips, and the quartic
norms used by the condition checkers exact to rounding.

Transforms between coefficients and grid values are dense matrix products
batched over leading axes.  Sine-basis differentiation leaves the span and
is exposed only through grid-valued gradients and weak divergences
(integration by parts against mode derivatives); torus differentiation is
exact within the span via the cos/sin partner structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Optional

import numpy as np

from . import kernels
from .errors import ConfigurationError

INTERVAL_DIRICHLET = "interval_dirichlet"
TORUS = "torus"

SPACE_V = "V"
SPACE_H = "H"
SPACE_VSTAR = "Vstar"
_SPACE_TAGS = (SPACE_V, SPACE_H, SPACE_VSTAR)


@dataclass(frozen=True)
class Domain:
    """Computational domain: Dirichlet interval/box or periodic torus."""

    kind: str
    lengths: tuple

    def __post_init__(self):
        lengths = tuple(float(v) for v in np.atleast_1d(self.lengths))
        object.__setattr__(self, "lengths", lengths)
        if self.kind not in (INTERVAL_DIRICHLET, TORUS):
            raise ConfigurationError("unknown domain kind %r" % (self.kind,))
        if any(not v > 0 for v in lengths):
            raise ConfigurationError("domain lengths must be positive")
        d = len(lengths)
        if self.kind == INTERVAL_DIRICHLET and d not in (1, 2):
            raise ConfigurationError(
                "Dirichlet interval/box domains support 1 or 2 dimensions")
        if self.kind == TORUS and d not in (2, 3):
            raise ConfigurationError("torus domains support 2 or 3 dimensions")

    @property
    def dims(self) -> int:
        return len(self.lengths)

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @staticmethod
    def interval(length: float) -> "Domain":
        return Domain(INTERVAL_DIRICHLET, (length,))

    @staticmethod
    def box(*lengths: float) -> "Domain":
        return Domain(INTERVAL_DIRICHLET, tuple(lengths))

    @staticmethod
    def torus(*lengths: float) -> "Domain":
        return Domain(TORUS, tuple(lengths))


class Basis:
    """An ordered, H-orthonormal spectral basis with its quadrature grid.

    Instances are immutable after construction; all arrays should be treated
    as read-only.  ``modes`` lists one descriptor per retained mode:
    ``("sine", (k1, ...))`` for Dirichlet modes, ``("cos"|"sin", (k1, ...))``
    for scalar torus modes, and ``("cos"|"sin", (k1, ...), pol)`` for
    divergence-free vector torus modes.
    """

    def __init__(self, *, domain, n, modes, v_weight, points, weights,
                 eval_mat, deriv_mats=None, kappa=None, phase_sign=None,
                 partner=None, vector_valued=False, divergence_free=False,
                 quad_points_per_axis=None):
        self.domain = domain
        self.n = int(n)
        self.modes = tuple(modes)
        self.v_weight = np.ascontiguousarray(v_weight, dtype=np.float64)
        self.points = points          # (d, npts) coordinates
        self.weights = np.ascontiguousarray(weights, dtype=np.float64)
        self.eval_mat = eval_mat      # (m, npts) scalar / (m, d, npts) vector
        self.deriv_mats = deriv_mats  # sine bases: (d, m, npts)
        self.kappa = kappa            # torus bases: (m, d) signed wavevectors
        self.phase_sign = phase_sign  # torus: +1 for cos rows, -1 for sin rows
        self.partner = partner        # torus: index of the cos/sin partner mode
        self.vector_valued = bool(vector_valued)
        self.divergence_free = bool(divergence_free)
        self.quad_points_per_axis = quad_points_per_axis
        m = len(self.modes)
        if self.v_weight.shape != (m,) or np.any(self.v_weight <= 0):
            raise ConfigurationError("v_weight must be positive, one per mode")
        flat = eval_mat.reshape(m, -1)
        self._flat_eval = np.ascontiguousarray(flat)
        self._flat_from = np.ascontiguousarray(
            flat * np.tile(self.weights, flat.shape[1] // self.weights.size))
        if deriv_mats is not None:
            self._weighted_deriv = np.ascontiguousarray(
                deriv_mats * self.weights)
        else:
            self._weighted_deriv = None

    # --- bookkeeping ------------------------------------------------------
    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def npts(self) -> int:
        return self.weights.size

    @property
    def dims(self) -> int:
        return self.domain.dims

    def laplacian_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of -Δ on the modes (equal to v_weight**2 throughout)."""
        return self.v_weight ** 2

    def zero_coeffs(self, *leading) -> np.ndarray:
        return np.zeros(tuple(leading) + (self.n_modes,))

    def _check_coeffs(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=np.float64)
        if coeffs.shape[-1] != self.n_modes:
            raise ConfigurationError(
                "coefficient vector has %d entries, basis has %d modes"
                % (coeffs.shape[-1], self.n_modes))
        return coeffs

    # --- transforms -------------------------------------------------------
    def to_grid(self, coeffs) -> np.ndarray:
        """Evaluate on the quadrature grid: (..., npts) or (..., d, npts)."""
        coeffs = self._check_coeffs(coeffs)
        out = coeffs @ self._flat_eval
        if self.vector_valued:
            return out.reshape(coeffs.shape[:-1] + (self.dims, self.npts))
        return out

    def from_grid(self, values) -> np.ndarray:
        """H-projection of grid data onto the retained modes.

        For divergence-free vector bases this is simultaneously the Leray
        projection, since every basis mode is already divergence-free.
        """
        values = np.asarray(values, dtype=np.float64)
        tail = (self.dims, self.npts) if self.vector_valued else (self.npts,)
        if values.shape[-len(tail):] != tail:
            raise ConfigurationError(
                "grid data shape %r does not end in %r" % (values.shape, tail))
        lead = values.shape[:-len(tail)]
        return values.reshape(lead + (-1,)) @ self._flat_from.T

    def grad_grid(self, coeffs) -> np.ndarray:
        """Gradient of a scalar field on the grid, shape (..., d, npts)."""
        if self.vector_valued:
            raise ConfigurationError("grad_grid applies to scalar bases")
        coeffs = self._check_coeffs(coeffs)
        if self.deriv_mats is not None:
            out = np.einsum("...m,amj->...aj", coeffs, self.deriv_mats)
            return np.ascontiguousarray(out)
        parts = [self.derivative_coeffs(coeffs, a) @ self._flat_eval
                 for a in range(self.dims)]
        return np.ascontiguousarray(np.stack(parts, axis=-2))

    def derivative_coeffs(self, coeffs, axis: int) -> np.ndarray:
        """Exact in-span partial derivative (torus bases only)."""
        if self.partner is None:
            raise ConfigurationError(
                "in-span differentiation requires a torus basis")
        coeffs = self._check_coeffs(coeffs)
        # d/dx_a cos -> -kappa_a sin ; d/dx_a sin -> +kappa_a cos
        factor = -self.phase_sign * self.kappa[:, axis]
        out = np.empty_like(coeffs)
        out[..., self.partner] = coeffs * factor
        return out

    def weak_divergence_from_grid(self, flux_values) -> np.ndarray:
        """Coefficients of div(G) paired weakly: ⟨div G, e_i⟩ = -⟨G, ∇e_i⟩.

        ``flux_values`` has shape (..., d, npts).  Boundary terms vanish for
        both basis families (zero trace / periodicity), so this is the exact
        dual-space representative of the divergence of grid data.
        """
        flux_values = np.asarray(flux_values, dtype=np.float64)
        if flux_values.shape[-2:] != (self.dims, self.npts):
            raise ConfigurationError(
                "flux data must have shape (..., %d, %d)" % (self.dims, self.npts))
        if self._weighted_deriv is not None:
            return -np.einsum("...aj,amj->...m", flux_values,
                              self._weighted_deriv)
        # On the torus, pairing against mode derivatives equals modal
        # differentiation of the projected components (projection is
        # self-adjoint and mode derivatives stay in the span).
        acc = None
        for a in range(self.dims):
            term = self.derivative_coeffs(
                self.from_grid(flux_values[..., a, :]), a)
            acc = term if acc is None else acc + term
        return acc

    # --- norms (batched over leading axes) --------------------------------
    def h_norm(self, coeffs) -> np.ndarray:
        return np.linalg.norm(self._check_coeffs(coeffs), axis=-1)

    def v_norm(self, coeffs) -> np.ndarray:
        return np.linalg.norm(self._check_coeffs(coeffs) * self.v_weight, axis=-1)

    def vstar_norm(self, coeffs) -> np.ndarray:
        return np.linalg.norm(self._check_coeffs(coeffs) / self.v_weight, axis=-1)

    def lp_norm_grid(self, values, p: float) -> np.ndarray:
        """L^p norm from grid values (vector data uses pointwise magnitude)."""
        if p < 1:
            raise ConfigurationError("lp_norm requires p >= 1")
        values = np.asarray(values, dtype=np.float64)
        if self.vector_valued:
            if values.ndim == 2:
                return kernels.weighted_vec_pow_sum(
                    self.weights, values, p) ** (1.0 / p)
            mag2 = np.einsum("...aj,...aj->...j", values, values)
            return np.einsum("j,...j->...", self.weights,
                             mag2 ** (p / 2.0)) ** (1.0 / p)
        if values.ndim == 1:
            return kernels.weighted_abs_pow_sum(
                self.weights, values, p) ** (1.0 / p)
        return np.einsum("j,...j->...", self.weights,
                         np.abs(values) ** p) ** (1.0 / p)

    def lp_norm(self, coeffs, p: float) -> np.ndarray:
        return self.lp_norm_grid(self.to_grid(coeffs), p)

    def same_as(self, other: "Basis") -> bool:
        return self is other or (
            self.domain == other.domain and self.modes == other.modes
            and self.vector_valued == other.vector_valued)


@dataclass(frozen=True, eq=False)
class Field:
    """A function in the discrete triple: basis + coefficients + space tag.

    The tag records which norm interpretation the producer intended (state
    vectors live in H/V, operator outputs in V*); it does not restrict which
    norms may be evaluated.  Arithmetic keeps the left operand's tag.
    """

    basis: Basis
    coeffs: np.ndarray
    space_tag: str = SPACE_H

    def __post_init__(self):
        coeffs = np.ascontiguousarray(self.coeffs, dtype=np.float64)
        if coeffs.ndim != 1 or coeffs.shape[0] != self.basis.n_modes:
            raise ConfigurationError(
                "field coefficients must be a vector with one entry per mode")
        if not np.all(np.isfinite(coeffs)):
            raise ConfigurationError("field coefficients must be finite")
        if self.space_tag not in _SPACE_TAGS:
            raise ConfigurationError("unknown space tag %r" % (self.space_tag,))
        object.__setattr__(self, "coeffs", coeffs)

    def with_coeffs(self, coeffs, space_tag: Optional[str] = None) -> "Field":
        return Field(self.basis, coeffs,
                     self.space_tag if space_tag is None else space_tag)

    def __add__(self, other: "Field") -> "Field":
        _require_same_basis(self, other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: "Field") -> "Field":
        _require_same_basis(self, other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "Field":
        return self.with_coeffs(self.coeffs * float(scalar))

    __rmul__ = __mul__


def _require_same_basis(a: Field, b: Field):
    if not a.basis.same_as(b.basis):
        raise ConfigurationError("fields are defined on different bases")


@dataclass(frozen=True)
class TripleNorms:
    """All three triple norms of one field, plus any requested L^p norms."""

    h: float
    v: float
    vstar: float
    lp: dict = dataclass_field(default_factory=dict)


# --- basis builders -------------------------------------------------------

def _sine_axis(length: float, n: int, npts: int):
    """1-D Dirichlet sine family on [0, length] with midpoint quadrature."""
    x = (np.arange(npts) + 0.5) * (length / npts)
    w = np.full(npts, length / npts)
    k = np.arange(1, n + 1)
    amp = np.sqrt(2.0 / length)
    phase = np.outer(k * np.pi / length, x)
    E = amp * np.sin(phase)
    D = amp * (k * np.pi / length)[:, None] * np.cos(phase)
    vw = k * np.pi / length
    return x, w, E, D, vw


def build_sine_basis(length: float, n: int, quad_points: Optional[int] = None) -> Basis:
    """Dirichlet sine basis e_k(x) = sqrt(2/length)·sin(kπx/length), k=1..n.

    The midpoint quadrature uses at least 4n+1 points so that products of up
    to four retained modes (and so every orthonormality relation and quartic
    norm) integrate exactly.
    """
    if n < 1 or not length > 0:
        raise ConfigurationError("sine basis needs length > 0 and n >= 1")
    npts = 4 * n + 1 if quad_points is None else int(quad_points)
    if npts < 4 * n + 1:
        raise ConfigurationError("sine basis quadrature needs >= 4n+1 points")
    x, w, E, D, vw = _sine_axis(float(length), int(n), npts)
    modes = tuple(("sine", (k,)) for k in range(1, n + 1))
    return Basis(domain=Domain.interval(length), n=n, modes=modes, v_weight=vw,
                 points=x[None, :], weights=w, eval_mat=E, deriv_mats=D[None],
                 quad_points_per_axis=(npts,))


def build_sine_basis_2d(lengths, n: int, quad_points: Optional[int] = None) -> Basis:
    """Tensor-product Dirichlet sine basis on a box, n modes per axis.

    Modes are ordered lexicographically by wavenumber pair (k1 major), and
    ‖e_{k1,k2}‖_V² = (k1π/L1)² + (k2π/L2)².
    """
    domain = Domain.box(*np.atleast_1d(lengths))
    if domain.dims != 2:
        raise ConfigurationError("build_sine_basis_2d needs two lengths")
    if n < 1:
        raise ConfigurationError("sine basis needs n >= 1")
    npts = 4 * n + 1 if quad_points is None else int(quad_points)
    if npts < 4 * n + 1:
        raise ConfigurationError("sine basis quadrature needs >= 4n+1 points")
    l1, l2 = domain.lengths
    x1, w1, e1, d1, vw1 = _sine_axis(l1, n, npts)
    x2, w2, e2, d2, vw2 = _sine_axis(l2, n, npts)
    E = np.kron(e1, e2)
    Dx = np.kron(d1, e2)
    Dy = np.kron(e1, d2)
    weights = np.kron(w1, w2)
    pts = np.stack([np.repeat(x1, npts), np.tile(x2, npts)])
    vw = np.sqrt(np.add.outer(vw1 ** 2, vw2 ** 2)).ravel()
    modes = tuple(("sine", (k1, k2))
                  for k1 in range(1, n + 1) for k2 in range(1, n + 1))
    return Basis(domain=domain, n=n, modes=modes, v_weight=vw, points=pts,
                 weights=weights, eval_mat=E, deriv_mats=np.stack([Dx, Dy]),
                 quad_points_per_axis=(npts, npts))


def _torus_wavevectors(n: int, d: int) -> np.ndarray:
    """Nonzero integer vectors with |k|_inf <= n whose first nonzero entry is
    positive (one representative per ±k pair), in lexicographic order."""
    axes = [np.arange(-n, n + 1)] * d
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    keep = []
    for k in grid:
        nz = k[k != 0]
        if nz.size and nz[0] > 0:
            keep.append(k)
    return np.array(sorted(keep, key=tuple), dtype=np.int64)


def _polarizations(kappa_row: np.ndarray) -> np.ndarray:
    """Orthonormal vectors orthogonal to kappa: 1 in 2-D, 2 in 3-D."""
    d = kappa_row.size
    if d == 2:
        p = np.array([-kappa_row[1], kappa_row[0]])
        return (p / np.linalg.norm(p))[None, :]
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(kappa_row)))] = 1.0
    p1 = np.cross(kappa_row, helper)
    p1 /= np.linalg.norm(p1)
    p2 = np.cross(kappa_row, p1)
    p2 /= np.linalg.norm(p2)
    return np.stack([p1, p2])


def _torus_grid(domain: Domain, npts_axis: tuple):
    axes = [np.arange(m) * (L / m) for L, m in zip(domain.lengths, npts_axis)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh])
    w = np.full(pts.shape[1], domain.volume / pts.shape[1])
    return pts, w


def build_fourier_basis(domain: Domain, n: int, divergence_free: bool = False,
                        quad_points: Optional[int] = None) -> Basis:
    """Real trigonometric basis on a torus: mean-zero, |k|_inf <= n.

    Scalar form: for each canonical wavevector (first nonzero component
    positive) the pair cos(κ·x), sin(κ·x), normalized to unit H-norm.
    Divergence-free vector form: the same phases times per-wavevector unit
    polarization vectors orthogonal to κ (one in 2-D, two in 3-D), ordered
    wavevector → phase → polarization.  v_weight is |κ| with
    κ_a = 2π k_a / L_a.
    """
    if domain.kind != TORUS:
        raise ConfigurationError("Fourier bases require a torus domain")
    if n < 1:
        raise ConfigurationError("Fourier basis needs n >= 1")
    d = domain.dims
    per_axis = 4 * n + 1 if quad_points is None else int(quad_points)
    if per_axis < 4 * n + 1:
        raise ConfigurationError("torus quadrature needs >= 4n+1 points per axis")
    npts_axis = (per_axis,) * d
    pts, weights = _torus_grid(domain, npts_axis)
    kvecs = _torus_wavevectors(n, d)
    kappa_wv = kvecs * (2.0 * np.pi / np.array(domain.lengths))
    theta = kappa_wv @ pts                       # (n_wv, npts)
    amp = np.sqrt(2.0 / domain.volume)
    cos_t, sin_t = amp * np.cos(theta), amp * np.sin(theta)

    if not divergence_free:
        n_wv = kvecs.shape[0]
        E = np.empty((2 * n_wv, pts.shape[1]))
        E[0::2], E[1::2] = cos_t, sin_t
        modes = []
        for k in kvecs:
            modes.append(("cos", tuple(int(v) for v in k)))
            modes.append(("sin", tuple(int(v) for v in k)))
        vw = np.repeat(np.linalg.norm(kappa_wv, axis=1), 2)
        kappa = np.repeat(kappa_wv, 2, axis=0)
        phase_sign = np.tile([1.0, -1.0], n_wv)
        partner = np.arange(2 * n_wv).reshape(-1, 2)[:, ::-1].ravel()
        return Basis(domain=domain, n=n, modes=tuple(modes), v_weight=vw,
                     points=pts, weights=weights, eval_mat=E, kappa=kappa,
                     phase_sign=phase_sign, partner=partner,
                     quad_points_per_axis=npts_axis)

    n_pol = d - 1
    block = 2 * n_pol                            # modes per wavevector
    n_modes = block * kvecs.shape[0]
    E = np.empty((n_modes, d, pts.shape[1]))
    modes, vw, kappa, phase_sign, partner = [], [], [], [], []
    for i, k in enumerate(kvecs):
        pols = _polarizations(kappa_wv[i])
        base = block * i
        for phase_idx, (phase_name, phase_vals, sgn) in enumerate(
                (("cos", cos_t[i], 1.0), ("sin", sin_t[i], -1.0))):
            for pol_idx in range(n_pol):
                row = base + phase_idx * n_pol + pol_idx
                E[row] = np.outer(pols[pol_idx], phase_vals)
                modes.append((phase_name, tuple(int(v) for v in k), pol_idx))
                vw.append(np.linalg.norm(kappa_wv[i]))
                kappa.append(kappa_wv[i])
                phase_sign.append(sgn)
                partner.append(base + (1 - phase_idx) * n_pol + pol_idx)
    return Basis(domain=domain, n=n, modes=tuple(modes),
                 v_weight=np.array(vw), points=pts, weights=weights,
                 eval_mat=E, kappa=np.array(kappa),
                 phase_sign=np.array(phase_sign),
                 partner=np.array(partner, dtype=np.int64),
                 vector_valued=True, divergence_free=True,
                 quad_points_per_axis=npts_axis)


def build_basis(domain: Domain, n: int, divergence_free: bool = False,
                quad_points: Optional[int] = None) -> Basis:
    """Build the natural basis for a domain: sine for Dirichlet, Fourier for
    torus."""
    if domain.kind == INTERVAL_DIRICHLET:
        if divergence_free:
            raise ConfigurationError(
                "divergence-free bases require a torus domain")
        if domain.dims == 1:
            return build_sine_basis(domain.lengths[0], n, quad_points)
        return build_sine_basis_2d(domain.lengths, n, quad_points)
    return build_fourier_basis(domain, n, divergence_free, quad_points)


# --- field-level operations ----------------------------------------------

def norm(f: Field, which: str) -> float:
    """Triple norm of a field: ``which`` in {H, V, Vstar}.

    H is the Euclidean coefficient norm, V weights by v_weight, Vstar divides
    by it (exact dual norm of the retained span under the quadratic V-norm).
    """
    if which == SPACE_H:
        return float(f.basis.h_norm(f.coeffs))
    if which == SPACE_V:
        return float(f.basis.v_norm(f.coeffs))
    if which == SPACE_VSTAR:
        return float(f.basis.vstar_norm(f.coeffs))
    raise ConfigurationError("norm selector must be one of %r" % (_SPACE_TAGS,))


def pairing(w: Field, v: Field) -> float:
    """Duality pairing ⟨w, v⟩; equals the H inner product when both lie in H."""
    _require_same_basis(w, v)
    return float(np.dot(w.coeffs, v.coeffs))


def project(f: Field, m: int) -> Field:
    """Truncate to the first m modes of the basis ordering (entries beyond m
    zeroed).  Idempotent, H- and V-contractive."""
    if m < 0:
        raise ConfigurationError("projection mode count must be >= 0")
    if m > f.basis.n_modes:
        raise ConfigurationError("projection mode count exceeds basis size")
    coeffs = f.coeffs.copy()
    coeffs[m:] = 0.0
    return f.with_coeffs(coeffs)


def truncate_coeffs(coeffs: np.ndarray, m: int) -> np.ndarray:
    """Coefficient-level projection onto the first m modes (batched)."""
    out = np.array(coeffs, dtype=np.float64, copy=True)
    out[..., m:] = 0.0
    return out


def lp_norm(f: Field, p: float) -> float:
    """Quadrature L^p norm; vector fields use the pointwise magnitude."""
    return float(f.basis.lp_norm(f.coeffs, p))


def to_grid(f: Field) -> np.ndarray:
    return f.basis.to_grid(f.coeffs)


def from_grid(values: np.ndarray, basis: Basis, space_tag: str = SPACE_H) -> Field:
    return Field(basis, basis.from_grid(values), space_tag)


def triple_norms(f: Field, ps=()) -> TripleNorms:
    return TripleNorms(h=norm(f, SPACE_H), v=norm(f, SPACE_V),
                       vstar=norm(f, SPACE_VSTAR),
                       lp={p: lp_norm(f, p) for p in ps})
