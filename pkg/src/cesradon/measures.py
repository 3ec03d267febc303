"""Measures on the nonnegative orthant: atoms plus a density part.

A measure is a finite list of weighted atoms together with an optional
absolutely-continuous density.  Densities come in four flavors:

* ``Separable`` — a product over axes, each axis a product of elementary
  factors (exponential, power-with-cutoff, gaussian).  This is the variant
  the closed-form fast paths understand.
* ``Box`` — constant value on [0, corner].
* ``GridSampled`` — values on a log-uniform grid, multilinear interpolation
  in log coordinates, zero outside the hull.
* ``Callback`` — an opaque vectorized evaluator with a declared support
  radius and sign promise.

The JSON wire format (used by the CLI) is defined by ``MEASURE_SCHEMA``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy import integrate
from scipy.interpolate import RegularGridInterpolator

from .errors import ConfigError, NonConvergent, StripViolation
from .grids import LogGrid

__all__ = [
    "Factor",
    "Separable",
    "Box",
    "GridSampled",
    "Callback",
    "DensitySpec",
    "AtomicMeasure",
    "MeasureModel",
    "WeightedNormReport",
    "eval_density",
    "density_dim",
    "support_bound",
    "density_nonnegative",
    "total_mass",
    "weighted_norms",
    "warp_density",
    "measure_from_json",
    "measure_to_json",
    "MEASURE_SCHEMA",
]

_FACTOR_KINDS = ("exponential", "power", "gaussian")


@dataclass(frozen=True)
class Factor:
    """One elementary per-axis density factor.

    kind = "exponential": e^{-rate*x}, rate > 0
    kind = "power":       x^exponent on [0, cutoff], exponent > -1
    kind = "gaussian":    e^{-x^2}
    """

    kind: str
    rate: float = 1.0
    exponent: float = 0.0
    cutoff: float = math.inf

    def __post_init__(self):
        if self.kind not in _FACTOR_KINDS:
            raise ConfigError(f"unknown factor kind {self.kind!r}")
        if self.kind == "exponential" and not self.rate > 0:
            raise ConfigError("exponential factor needs rate > 0")
        if self.kind == "power":
            if not self.exponent > -1:
                raise ConfigError("power factor needs exponent > -1")
            if not self.cutoff > 0:
                raise ConfigError("power factor needs cutoff > 0")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "exponential":
            return np.exp(-self.rate * t)
        if self.kind == "gaussian":
            return np.exp(-t * t)
        with np.errstate(divide="ignore"):
            vals = np.where(
                t > 0,
                np.power(t, self.exponent, where=t > 0, out=np.zeros_like(t)),
                np.inf if self.exponent < 0 else (1.0 if self.exponent == 0 else 0.0),
            )
        if np.isfinite(self.cutoff):
            vals = np.where(t <= self.cutoff, vals, 0.0)
        return vals


@dataclass(frozen=True)
class Separable:
    """Product density: a(x) = prod_k prod_j factor_{kj}(x_k)."""

    axes: Tuple[Tuple[Factor, ...], ...]

    def __post_init__(self):
        axes = tuple(tuple(fs) for fs in self.axes)
        object.__setattr__(self, "axes", axes)
        if not axes or any(len(fs) == 0 for fs in axes):
            raise ConfigError("Separable needs at least one factor per axis")


@dataclass(frozen=True)
class Box:
    """Constant density `value` on the box [0, corner]."""

    corner: np.ndarray
    value: float

    def __post_init__(self):
        corner = np.asarray(self.corner, dtype=float).reshape(-1)
        object.__setattr__(self, "corner", corner)
        if corner.size == 0 or np.any(corner <= 0) or not np.all(np.isfinite(corner)):
            raise ConfigError("Box corner must be strictly positive and finite")
        if not (np.isfinite(self.value) and self.value >= 0):
            raise ConfigError("Box value must be finite and >= 0")


@dataclass(frozen=True)
class GridSampled:
    """Values on a LogGrid, multilinear in u = log x, zero outside the hull."""

    grid: LogGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(self.grid.shape)
        object.__setattr__(self, "values", values)

    def interpolator(self) -> RegularGridInterpolator:
        pts = tuple(self.grid.axis_nodes(k) for k in range(self.grid.dim))
        return RegularGridInterpolator(
            pts, self.values, method="linear", bounds_error=False, fill_value=0.0
        )


@dataclass(frozen=True)
class Callback:
    """Opaque density: fn(points) with points shaped (..., dim)."""

    fn: Callable[[np.ndarray], np.ndarray]
    dim: int
    support_radius: float = math.inf
    nonnegative: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError("Callback dim must be >= 1")
        if not self.support_radius > 0:
            raise ConfigError("Callback support_radius must be > 0")


DensitySpec = Union[Separable, Box, GridSampled, Callback]


@dataclass(frozen=True)
class AtomicMeasure:
    """Finitely many weighted atoms in the orthant; weights may be signed."""

    atoms: Tuple[Tuple[np.ndarray, float], ...] = ()

    def __post_init__(self):
        cooked = []
        for loc, w in self.atoms:
            loc = np.asarray(loc, dtype=float).reshape(-1)
            if np.any(loc < 0) or not np.all(np.isfinite(loc)):
                raise ConfigError("atom locations must be finite and >= 0")
            if not np.isfinite(w):
                raise ConfigError("atom weights must be finite")
            cooked.append((loc, float(w)))
        object.__setattr__(self, "atoms", tuple(cooked))

    @property
    def dim(self) -> Optional[int]:
        return self.atoms[0][0].size if self.atoms else None

    def total_variation(self) -> float:
        return float(sum(abs(w) for _, w in self.atoms))


@dataclass(frozen=True)
class MeasureModel:
    """atoms + optional density; either part may be absent (but not both)."""

    atomic: AtomicMeasure = field(default_factory=AtomicMeasure)
    density: Optional[DensitySpec] = None

    def __post_init__(self):
        if self.density is None and not self.atomic.atoms:
            raise ConfigError("measure needs atoms or a density")
        if self.density is not None and self.atomic.dim is not None:
            if density_dim(self.density) != self.atomic.dim:
                raise ConfigError("atom dimension does not match density dimension")

    @property
    def dim(self) -> int:
        if self.density is not None:
            return density_dim(self.density)
        return self.atomic.dim


def density_dim(d: DensitySpec) -> int:
    if isinstance(d, Separable):
        return len(d.axes)
    if isinstance(d, Box):
        return d.corner.size
    if isinstance(d, GridSampled):
        return d.grid.dim
    if isinstance(d, Callback):
        return d.dim
    raise TypeError(f"not a DensitySpec: {type(d)!r}")


def eval_density(d: DensitySpec, x) -> Union[float, np.ndarray]:
    """Pointwise density value at x (shape (..., n) or (n,)).

    Outside the declared support the value is 0; Separable power factors
    with negative exponent return +inf exactly on their axis.
    """
    x = np.asarray(x, dtype=float)
    scalar_in = x.ndim == 1
    pts = x[None, :] if scalar_in else x
    n = density_dim(d)
    if pts.shape[-1] != n:
        raise ValueError(f"expected points with last axis {n}, got {pts.shape}")

    if isinstance(d, Separable):
        out = np.ones(pts.shape[:-1])
        for k, factors in enumerate(d.axes):
            for f in factors:
                out = out * f(pts[..., k])
    elif isinstance(d, Box):
        inside = np.all((pts >= 0) & (pts <= d.corner), axis=-1)
        out = np.where(inside, d.value, 0.0)
    elif isinstance(d, GridSampled):
        with np.errstate(divide="ignore"):
            u = np.where(pts > 0, np.log(np.where(pts > 0, pts, 1.0)), -np.inf)
        ok = np.all(np.isfinite(u), axis=-1)
        out = np.zeros(pts.shape[:-1])
        if np.any(ok):
            out[ok] = d.interpolator()(u[ok])
    else:
        out = np.asarray(d.fn(pts), dtype=float)
        if out.shape != pts.shape[:-1]:
            out = out.reshape(pts.shape[:-1])

    return float(out[0]) if scalar_in else out


def support_bound(d: DensitySpec, axis: int) -> float:
    """Upper bound of the support along `axis` (inf when unbounded)."""
    if isinstance(d, Separable):
        cuts = [f.cutoff for f in d.axes[axis] if f.kind == "power"]
        return min(cuts) if cuts else math.inf
    if isinstance(d, Box):
        return float(d.corner[axis])
    if isinstance(d, GridSampled):
        du = d.grid.spacing(axis)
        return math.exp(d.grid.u_max[axis] - du)  # last node, grid is endpoint-exclusive
    return d.support_radius


def density_nonnegative(d: DensitySpec) -> bool:
    if isinstance(d, (Separable, Box)):
        return True
    if isinstance(d, GridSampled):
        return bool(np.all(d.values >= 0))
    return d.nonnegative


def abs_measure(m: MeasureModel) -> MeasureModel:
    """Total-variation counterpart: |weights|, |density|."""
    atoms = AtomicMeasure(tuple((loc, abs(w)) for loc, w in m.atomic.atoms))
    d = m.density
    if d is None or density_nonnegative(d):
        return MeasureModel(atomic=atoms, density=d)
    if isinstance(d, GridSampled):
        return MeasureModel(atomic=atoms, density=GridSampled(d.grid, np.abs(d.values)))
    inner = d.fn
    wrapped = Callback(
        fn=lambda pts: np.abs(inner(pts)),
        dim=d.dim,
        support_radius=d.support_radius,
        nonnegative=True,
    )
    return MeasureModel(atomic=atoms, density=wrapped)


# ---------------------------------------------------------------------------
# integration helpers (production path: QUADPACK via scipy)

def _quad(f, a, b, tol):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=tol, limit=200)
    if err > max(10 * tol, 1e-7 * (1 + abs(val))):
        raise NonConvergent(
            f"quadrature error estimate {err:.2e} above tolerance on [{a}, {b}]"
        )
    return val


def _axis_profile(factors: Tuple[Factor, ...]):
    def prof(t):
        out = np.ones_like(np.asarray(t, dtype=float))
        for f in factors:
            out = out * f(t)
        return out
    return prof


def total_mass(m: MeasureModel, tol: float = 1e-9) -> float:
    """Total mass: exact atom sum plus the density integral to tolerance tol.

    Parameters
    ----------
    m : MeasureModel
    tol : float
        Absolute tolerance for the density integral.

    Returns
    -------
    float

    Raises
    ------
    NonConvergent
        If the quadrature error estimate cannot be driven below tolerance.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    total = float(sum(w for _, w in m.atomic.atoms))
    d = m.density
    if d is None:
        return total

    if isinstance(d, Box):
        return total + d.value * float(np.prod(d.corner))

    if isinstance(d, Separable):
        prod = 1.0
        for factors in d.axes:
            upper = min([f.cutoff for f in factors if f.kind == "power"] or [math.inf])
            prod *= _quad(_axis_profile(factors), 0.0, upper, tol)
        return total + prod

    if isinstance(d, GridSampled):
        # exact integral of the multilinear interpolant against prod(e^{u_k}) du:
        # tensor product of per-node hat-function weights.
        w_axes = []
        for k in range(d.grid.dim):
            nodes = d.grid.axis_nodes(k)
            h = d.grid.spacing(k)
            eh = math.expm1(h)
            up = (math.exp(h) * (h - 1.0) + 1.0) / h     # rising hat x e^u on [0,h]
            down = eh - up                               # falling hat
            w = np.zeros_like(nodes)
            w[1:] += up * np.exp(nodes[:-1])
            w[:-1] += down * np.exp(nodes[:-1])
            w_axes.append(w)
        acc = d.values
        for w in w_axes:
            acc = np.tensordot(acc, w, axes=([0], [0]))
        return total + float(acc)

    # Callback
    n = d.dim
    hi = d.support_radius
    if n == 1:
        f = d.fn
        return total + _quad(lambda t: float(f(np.array([[t]]))[0]), 0.0,
                             hi if np.isfinite(hi) else np.inf, tol)
    if n == 2:
        f = d.fn
        top = hi if np.isfinite(hi) else np.inf
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.dblquad(
                lambda y, x: float(f(np.array([[x, y]]))[0]),
                0.0, top, 0.0, top, epsabs=tol, epsrel=tol,
            )
        if err > max(10 * tol, 1e-7 * (1 + abs(val))):
            raise NonConvergent("2-D quadrature error above tolerance")
        return total + val
    raise NotImplementedError("total_mass for Callback supports dim <= 2")


# ---------------------------------------------------------------------------
# weighted norms (Mellin-strip admissibility diagnostics)

_DIVERGED = object()


def _weighted_1d(g, sigma: float, tol: float, upper: float):
    """∫_0^upper g(x) x^sigma dx by dyadic shells with divergence detection.

    g is a scalar-callable, nonnegative.  Returns (value, finite).  Shells
    halve toward 0 (and double toward inf when upper is inf); the running
    shell ratio decides between geometric tail extrapolation and declaring
    divergence.
    """
    pivot = min(1.0, upper)
    total = 0.0

    def shell(a, b):
        return _quad(lambda t: g(t) * t**sigma, a, b, tol / 8)

    for step in (0.5, 2.0):
        if step == 2.0 and np.isfinite(upper):
            if upper > pivot:
                total += shell(pivot, upper)
            continue
        b = pivot
        prev = None
        ratio = None
        grow = 0
        flat = 0
        done = False
        for _ in range(220):
            a = b * step
            lo, hi = (a, b) if step < 1 else (b, a)
            s = shell(lo, hi)
            total += s
            if prev is not None and prev > 0 and s > 0:
                ratio = s / prev
                grow = grow + 1 if ratio > 10.0 else 0
                flat = flat + 1 if ratio >= 0.995 else 0
                if grow >= 2 or (flat >= 3 and s > tol / 100):
                    return total, False
                if s < tol / 4 and ratio < 1.0:
                    total += s * ratio / (1.0 - ratio)  # geometric tail
                    done = True
                    break
            elif s == 0.0 and prev == 0.0:
                done = True
                break
            prev = s
            b = a
        if not done and prev is not None and prev > 0:
            # budget exhausted; a sub-unit ratio still gives a convergent tail
            if ratio is not None and ratio < 0.995:
                total += prev * ratio / (1.0 - ratio)
            elif prev > tol:
                return total, False
    return total, True


@dataclass(frozen=True)
class WeightedNormReport:
    l1_weighted: float
    l2_weighted: float
    c: np.ndarray
    alpha: float
    finite: Tuple[bool, bool]


def weighted_norms(d: DensitySpec, c, alpha: float, tol: float = 1e-7) -> WeightedNormReport:
    """Weighted L^1 and L^2 norms of |a| with per-axis weights.

    L^1 uses the weight prod_k x_k^{alpha*(c_k - 1)}; L^2 (of the squared
    integrand) uses prod_k x_k^{2*alpha*(c_k - 1) + 1}.  These are the
    integrability conditions the inversion strip choice relies on.

    Parameters
    ----------
    d : DensitySpec
    c : array_like
        Strip offsets, one per axis, each < 1.
    alpha : float
    tol : float

    Returns
    -------
    WeightedNormReport
        Norm estimates plus (l1_finite, l2_finite) flags; a False flag means
        shell refinement kept growing, i.e. the weighted integral diverges.

    Raises
    ------
    StripViolation
        If any c_k >= 1.
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    n = density_dim(d)
    if c.size == 1 and n > 1:
        c = np.full(n, c[0])
    if c.size != n:
        raise ValueError("c must have one entry per axis")
    if np.any(c >= 1):
        raise StripViolation("strip offsets must satisfy c_k < 1")

    sig1 = alpha * (c - 1.0)
    sig2 = 2.0 * alpha * (c - 1.0) + 1.0

    if isinstance(d, Separable):
        l1, l2sq = 1.0, 1.0
        fin1 = fin2 = True
        for k, factors in enumerate(d.axes):
            prof = _axis_profile(factors)
            upper = support_bound(d, k)
            v1, f1 = _weighted_1d(lambda t: float(prof(t)), sig1[k], tol, upper)
            v2, f2 = _weighted_1d(lambda t: float(prof(t)) ** 2, sig2[k], tol, upper)
            l1 *= v1
            l2sq *= v2
            fin1 &= f1
            fin2 &= f2
        return WeightedNormReport(l1, math.sqrt(max(l2sq, 0.0)), c, alpha, (fin1, fin2))

    if isinstance(d, Box):
        sep = Separable(
            tuple((Factor("power", exponent=0.0, cutoff=float(ci)),) for ci in d.corner)
        )
        rep = weighted_norms(sep, c, alpha, tol)
        return WeightedNormReport(
            rep.l1_weighted * d.value,
            rep.l2_weighted * d.value,
            c,
            alpha,
            rep.finite,
        )

    # GridSampled / Callback: iterated 1-D shells, |a| pointwise.
    if n > 2:
        raise NotImplementedError("weighted_norms supports dim <= 2 for this variant")
    upper = [support_bound(d, k) for k in range(n)]

    def absval(*coords):
        return abs(eval_density(d, np.array(coords)))

    def one(sig):
        if n == 1:
            return _weighted_1d(lambda t: absval(t), sig[0], tol, upper[0])
        diverged = []

        def outer_fn(x1):
            v, fin = _weighted_1d(lambda t: absval(x1, t), sig[1], tol, upper[1])
            if not fin:
                diverged.append(x1)
            return v

        val, fin_outer = _weighted_1d(outer_fn, sig[0], tol, upper[0])
        return val, fin_outer and not diverged

    v1, f1 = one(sig1)

    def sq(*coords):
        return absval(*coords) ** 2

    if n == 1:
        v2, f2 = _weighted_1d(lambda t: sq(t), sig2[0], tol, upper[0])
    else:
        diverged2 = []

        def outer_sq(x1):
            v, fin = _weighted_1d(lambda t: sq(x1, t), sig2[1], tol, upper[1])
            if not fin:
                diverged2.append(x1)
            return v

        v2, f2raw = _weighted_1d(outer_sq, sig2[0], tol, upper[0])
        f2 = f2raw and not diverged2
    return WeightedNormReport(v1, math.sqrt(max(v2, 0.0)), c, alpha, (bool(f1), bool(f2)))


def warp_density(d: DensitySpec, alpha: float) -> Callback:
    """Pushforward under y = x^alpha (componentwise).

    Returns the density a_*(y) = alpha^{-n} a(y^{1/alpha}) prod y_k^{1/alpha - 1},
    so that integrating a_* over a box B equals the original mass of the
    preimage of B.
    """
    n = density_dim(d)
    bound = max(support_bound(d, k) for k in range(n))

    def fn(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        y = np.clip(pts, 0.0, None)
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.power(y, 1.0 / alpha)
            jac = np.prod(
                np.power(y, 1.0 / alpha - 1.0, where=y > 0, out=np.zeros_like(y)),
                axis=-1,
            )
        vals = eval_density(d, x) * jac * alpha ** (-n)
        return np.where(np.all(y > 0, axis=-1), vals, 0.0)

    return Callback(
        fn=fn,
        dim=n,
        support_radius=bound**alpha if np.isfinite(bound) else math.inf,
        nonnegative=density_nonnegative(d),
    )


# ---------------------------------------------------------------------------
# JSON wire format

_FACTOR_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": list(_FACTOR_KINDS)},
        "rate": {"type": "number", "exclusiveMinimum": 0},
        "exponent": {"type": "number", "exclusiveMinimum": -1},
        "cutoff": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

MEASURE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "density": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {
                        "variant": {"const": "Separable"},
                        "factors": {
                            "type": "array",
                            "minItems": 1,
                            "items": {
                                "type": "array",
                                "minItems": 1,
                                "items": _FACTOR_SCHEMA,
                            },
                        },
                    },
                    "required": ["variant", "factors"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "variant": {"const": "Box"},
                        "corner": {
                            "type": "array",
                            "minItems": 1,
                            "items": {"type": "number", "exclusiveMinimum": 0},
                        },
                        "value": {"type": "number", "minimum": 0},
                    },
                    "required": ["variant", "corner", "value"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "variant": {"const": "GridSampled"},
                        "u_min": {"type": "array", "items": {"type": "number"}},
                        "u_max": {"type": "array", "items": {"type": "number"}},
                        "shape": {"type": "array", "items": {"type": "integer", "minimum": 2}},
                        "values": {"type": "array", "items": {"type": "number"}},
                    },
                    "required": ["variant", "u_min", "u_max", "shape", "values"],
                    "additionalProperties": False,
                },
            ]
        },
        "atoms": {
            "type": "array",
            "items": {
                "type": "array",
                "prefixItems": [
                    {"type": "array", "minItems": 1, "items": {"type": "number", "minimum": 0}},
                    {"type": "number"},
                ],
                "minItems": 2,
                "maxItems": 2,
                "items": False,
            },
        },
    },
    "anyOf": [{"required": ["density"]}, {"required": ["atoms"]}],
    "additionalProperties": False,
}


def measure_from_json(obj: dict) -> MeasureModel:
    """Build a MeasureModel from its JSON form, validating the schema first."""
    import jsonschema

    try:
        jsonschema.validate(obj, MEASURE_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ConfigError(f"measure spec rejected: {e.message}") from e

    density: Optional[DensitySpec] = None
    if "density" in obj:
        dd = obj["density"]
        if dd["variant"] == "Separable":
            axes = tuple(
                tuple(Factor(**{k: v for k, v in f.items()}) for f in facs)
                for facs in dd["factors"]
            )
            density = Separable(axes)
        elif dd["variant"] == "Box":
            density = Box(np.asarray(dd["corner"], dtype=float), float(dd["value"]))
        else:
            grid = LogGrid(tuple(dd["u_min"]), tuple(dd["u_max"]), tuple(dd["shape"]))
            density = GridSampled(grid, np.asarray(dd["values"], dtype=float))
    atoms = AtomicMeasure(
        tuple((np.asarray(a[0], dtype=float), float(a[1])) for a in obj.get("atoms", []))
    )
    return MeasureModel(atomic=atoms, density=density)


def measure_to_json(m: MeasureModel) -> dict:
    """Inverse of measure_from_json; Callback densities are not serializable."""
    out: dict = {}
    d = m.density
    if d is not None:
        if isinstance(d, Separable):
            factors = []
            for facs in d.axes:
                row = []
                for f in facs:
                    item = {"kind": f.kind}
                    if f.kind == "exponential":
                        item["rate"] = f.rate
                    elif f.kind == "power":
                        item["exponent"] = f.exponent
                        if np.isfinite(f.cutoff):
                            item["cutoff"] = f.cutoff
                    row.append(item)
                factors.append(row)
            out["density"] = {"variant": "Separable", "factors": factors}
        elif isinstance(d, Box):
            out["density"] = {
                "variant": "Box",
                "corner": [float(v) for v in d.corner],
                "value": float(d.value),
            }
        elif isinstance(d, GridSampled):
            out["density"] = {
                "variant": "GridSampled",
                "u_min": list(d.grid.u_min),
                "u_max": list(d.grid.u_max),
                "shape": list(d.grid.shape),
                "values": [float(v) for v in d.values.ravel()],
            }
        else:
            raise ConfigError("Callback densities have no JSON form")
    if m.atomic.atoms:
        out["atoms"] = [[[float(v) for v in loc], w] for loc, w in m.atomic.atoms]
    return out
