"""Forward transforms: profit values, sublevel masses, and Radon slices.

The profit of a measure mu at the price system (p, p0) is

    Pi(p, p0) = integral of (p0 - p (.) x)_+  mu(dx),

where (.) is the CES pairing; its second p0-derivative is the generalized
Radon transform R, and the first derivative is the sublevel mass (the CDF
of p (.) x under mu).  Separable/box densities go through the closed-form
panel engine in ``_backend``; everything else is handled by iterated
adaptive quadrature over the (convex) sublevel region with the inner bound
solved exactly from the level equation.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import IntegrationWarning, cumulative_trapezoid, quad

from . import _backend
from ._slowpath import _LEVELS, _gj01, _gl01
from .ces import PricePoint, ces_dot, level_bound, sublevel_indicator, validate_alpha
from .errors import MethodUnavailable, NonConvergent, OutOfRange, UnboundedRegion
from .measures import (
    Box,
    Callback,
    Factor,
    GridSampled,
    MeasureModel,
    Separable,
    density_nonnegative,
    eval_density,
    support_bound,
)

__all__ = [
    "RadonSlice",
    "profit_transform",
    "sublevel_mass",
    "radon_slice",
    "profit_from_radon",
]


# ---------------------------------------------------------------------------
# density plumbing


def _evaluator(d) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized density evaluator with per-call cost hoisted out."""
    if isinstance(d, GridSampled):
        interp = d.interpolator()

        def ev(pts):
            pts = np.asarray(pts, dtype=float)
            pos = np.all(pts > 0.0, axis=-1)
            safe = np.where(pts > 0.0, pts, 1.0)
            return np.where(pos, interp(np.log(safe)), 0.0)

        return ev
    return lambda pts: np.asarray(eval_density(d, pts), dtype=float)


def _engine_axes(d):
    """Closed-form axis list for the panel engine, or None.

    Boxes are separable with constant factors, so they ride the engine too;
    the second return value is the constant prefactor.
    """
    if isinstance(d, Separable):
        return _backend.build_axes(d), 1.0
    if isinstance(d, Box):
        sep = Separable(
            axes=tuple((Factor("power", exponent=0.0, cutoff=float(c)),) for c in d.corner)
        )
        return _backend.build_axes(sep), float(d.value)
    return None, 1.0


def _check_region(m: MeasureModel, pp: PricePoint):
    if m.dim != pp.dim:
        raise OutOfRange(f"measure dimension {m.dim} != price dimension {pp.dim}")
    d = m.density
    if d is None:
        return
    for k in range(pp.dim):
        if pp.p[k] == 0.0 and not math.isfinite(support_bound(d, k)):
            raise UnboundedRegion(
                f"p[{k}] = 0 with unbounded support: sublevel region has infinite extent"
            )


def _atom_profit(m: MeasureModel, pp: PricePoint, alpha: float) -> float:
    total = 0.0
    for loc, w in m.atomic.atoms:
        total += w * max(0.0, pp.p0 - float(ces_dot(pp.p, loc, alpha)))
    return total


def _atom_mass(m: MeasureModel, pp: PricePoint, alpha: float) -> float:
    # atoms exactly on the level surface count as inside (<=)
    total = 0.0
    for loc, w in m.atomic.atoms:
        if sublevel_indicator(pp.p, pp.p0, loc, alpha):
            total += w
    return total


def _quiet_quad(f, a, b, **opts):
    # interpolated integrands trip scipy's roundoff heuristics; the returned
    # error estimate is still checked by the caller's tolerance laddering
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(f, a, b, **opts)


def _density_quad(d, pp: PricePoint, alpha: float, tol: float, want_profit: bool) -> float:
    """Iterated adaptive quadrature over {p (.) x <= p0} for generic densities."""
    n = pp.dim
    dens = _evaluator(d)
    q = pp.p
    p0 = pp.p0
    if n > 2:
        raise MethodUnavailable("generic quadrature implemented for n <= 2 only")

    def upper(axis: int) -> float:
        return min(level_bound(q, p0, axis), support_bound(d, axis))

    opts = dict(limit=200, epsabs=tol / 4.0, epsrel=tol / 4.0)
    if n == 1:
        hi = upper(0)

        def f(x):
            val = float(dens(np.array([[x]]))[0])
            return ((p0 - q[0] * x) if want_profit else 1.0) * val

        out, _ = _quiet_quad(f, 0.0, hi, **opts)
        return out

    hi1 = upper(0)
    cap2 = support_bound(d, 1)
    a = alpha

    def x2_top(x1: float) -> float:
        if q[1] == 0.0:
            return cap2
        rem = p0**a - (q[0] * x1) ** a
        if rem <= 0.0:
            return 0.0
        return min(rem ** (1.0 / a) / q[1], cap2)

    inner_opts = dict(limit=200, epsabs=tol / (8.0 * max(hi1, 1.0)), epsrel=tol / 4.0)

    def inner(x1: float) -> float:
        top = x2_top(x1)
        if top <= 0.0:
            return 0.0

        def f(x2):
            pt = np.array([[x1, x2]])
            val = float(dens(pt)[0])
            if want_profit:
                val *= p0 - float(ces_dot(q, pt[0], a))
            return val

        out, _ = _quiet_quad(f, 0.0, top, **inner_opts)
        return out

    out, _ = _quiet_quad(inner, 0.0, hi1, **opts)
    return out


def _density_value(d, pp: PricePoint, alpha: float, tol: float, want_profit: bool) -> float:
    if d is None:
        return 0.0
    axes, scale = _engine_axes(d)
    if axes is not None and np.all(pp.p > 0.0):
        fn = _backend.profit_rows if want_profit else _backend.mass_rows
        return scale * float(fn(axes, alpha, pp.p[None, :], np.array([pp.p0]), tol=tol)[0])
    return _density_quad(d, pp, alpha, tol, want_profit)


def profit_transform(m: MeasureModel, pp: PricePoint, alpha: float, tol: float = 1e-9) -> float:
    """Profit Pi(p, p0) = integral of (p0 - p (.) x)_+ against the measure.

    Parameters
    ----------
    m : MeasureModel
        Atoms plus optional density.
    pp : PricePoint
        Price vector and level.
    alpha : float
        CES exponent in (0, 1].
    tol : float
        Absolute tolerance for the density part.

    Returns
    -------
    float

    Raises
    ------
    UnboundedRegion
        If some price coordinate vanishes while the density support is
        unbounded along that axis.
    NonConvergent
        On quadrature budget exhaustion.
    """
    alpha = validate_alpha(alpha)
    _check_region(m, pp)
    return _atom_profit(m, pp, alpha) + _density_value(m.density, pp, alpha, tol, True)


def sublevel_mass(m: MeasureModel, pp: PricePoint, alpha: float, tol: float = 1e-9) -> float:
    """Measure of the sublevel set {x : p (.) x <= p0}; equals dPi/dp0."""
    alpha = validate_alpha(alpha)
    _check_region(m, pp)
    return _atom_mass(m, pp, alpha) + _density_value(m.density, pp, alpha, tol, False)


# ---------------------------------------------------------------------------
# Radon slices


@dataclass(frozen=True)
class RadonSlice:
    """Samples of R(p, .) and of the sublevel mass along a p0 grid."""

    p: np.ndarray
    alpha: float
    p0_grid: np.ndarray
    values: np.ndarray
    cdf_values: np.ndarray

    def __post_init__(self):
        p0 = np.asarray(self.p0_grid, dtype=float)
        if p0.ndim != 1 or p0.size == 0:
            raise OutOfRange("p0_grid must be a nonempty 1-d grid")
        if not (np.all(p0 > 0.0) and np.all(np.diff(p0) > 0.0)):
            raise OutOfRange("p0_grid must be strictly increasing and positive")
        vals = np.asarray(self.values, dtype=float)
        cdf = np.asarray(self.cdf_values, dtype=float)
        if vals.shape != p0.shape or cdf.shape != p0.shape:
            raise OutOfRange("values/cdf_values must match p0_grid shape")
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "p0_grid", p0)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "cdf_values", cdf)


def _fd_radon(m, pp, alpha, tol, h) -> float:
    """Second p0-derivative of the profit == first derivative of the mass."""

    def mass(s: float) -> float:
        return sublevel_mass(m, PricePoint(pp.p, s), alpha, tol=tol)

    def central(step: float) -> float:
        return (mass(pp.p0 + step) - mass(pp.p0 - step)) / (2.0 * step)

    d1 = central(h)
    d2 = central(h / 2.0)
    return (4.0 * d2 - d1) / 3.0


def _surface_radon(m, pp, alpha, tol) -> float:
    """Level-curve integral for n = 2 (the weight is the one for which
    d(p (.) x) wedge Omega = dx1 wedge dx2):

      R(p, p0) = p0/(alpha p1 p2) * int_0^1 a(x1(s), x2(s))
                 s^{1/alpha-1} (1-s)^{1/alpha-1} ds,
      x1 = p0 s^{1/alpha} / p1,  x2 = p0 (1-s)^{1/alpha} / p2.
    """
    d = m.density
    dens = _evaluator(d)
    q1, q2 = float(pp.p[0]), float(pp.p[1])
    p0 = pp.p0
    inv_a = 1.0 / alpha
    w_exp = inv_a - 1.0  # endpoint weight exponent; 0 when alpha = 1

    # density kinks (support edges) in the s parameter
    edges = [0.0, 1.0]
    b1 = support_bound(d, 0)
    b2 = support_bound(d, 1)
    if math.isfinite(b1):
        edges.append((q1 * b1 / p0) ** alpha)
    if math.isfinite(b2):
        edges.append(1.0 - (q2 * b2 / p0) ** alpha)
    edges = sorted({min(1.0, max(0.0, e)) for e in edges})

    def curve(svals: np.ndarray) -> np.ndarray:
        x1 = p0 * svals**inv_a / q1
        x2 = p0 * (1.0 - svals) ** inv_a / q2
        return dens(np.stack([x1, x2], axis=-1))

    prev = None
    for order in _LEVELS:
        xg, wg = _gl01(order)
        xj, wj = _gj01(order, w_exp)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            span = hi - lo
            if span <= 0.0:
                continue
            if lo == 0.0:
                # fold s^{w_exp} into the rule, keep (1-s)^{w_exp} explicit
                s = span * xj
                total += span ** (w_exp + 1.0) * np.sum(
                    wj * (1.0 - s) ** w_exp * curve(s)
                )
            elif hi == 1.0:
                s = 1.0 - span * xj
                total += span ** (w_exp + 1.0) * np.sum(wj * s**w_exp * curve(s))
            else:
                s = lo + span * xg
                total += span * np.sum(
                    wg * s**w_exp * (1.0 - s) ** w_exp * curve(s)
                )
        val = p0 / (alpha * q1 * q2) * total
        if prev is not None and abs(val - prev) <= max(tol, 1e-12 * abs(val)):
            return val
        prev = val
    raise NonConvergent("surface quadrature did not settle under order doubling")


def radon_slice(
    m: MeasureModel,
    p,
    alpha: float,
    p0_grid,
    method: str = "derivative",
    tol: float = 1e-9,
) -> RadonSlice:
    """Sample the generalized Radon transform R(p, .) along a p0 grid.

    Parameters
    ----------
    m : MeasureModel
    p : array_like
        Price vector (fixed over the slice).
    alpha : float
    p0_grid : array_like
        Strictly increasing positive levels.
    method : {"derivative", "surface"}
        ``derivative`` differentiates the sublevel mass by central
        differences (step 1e-3 * p0, one Richardson level).  ``surface``
        evaluates the level-curve integral directly; n = 2, absolutely
        continuous measures only.
    tol : float
        Tolerance handed to the underlying mass/quadrature evaluations.

    Returns
    -------
    RadonSlice
        With both the R samples and the sublevel-mass samples.

    Raises
    ------
    MethodUnavailable
        For unsupported method/measure combinations (atoms under
        ``surface``, atoms sitting inside a difference stencil under
        ``derivative``, n != 2 for ``surface``).
    """
    alpha = validate_alpha(alpha)
    p = np.asarray(p, dtype=float)
    p0_grid = np.asarray(p0_grid, dtype=float)
    if p0_grid.ndim != 1 or not np.all(np.diff(p0_grid) > 0) or not np.all(p0_grid > 0):
        raise OutOfRange("p0_grid must be 1-d, positive, strictly increasing")
    if method not in ("derivative", "surface"):
        raise MethodUnavailable(f"unknown method {method!r}")
    if m.density is None and method == "derivative":
        raise MethodUnavailable("derivative method needs a density part")

    values = np.empty_like(p0_grid)
    cdf = np.empty_like(p0_grid)
    if method == "surface":
        if m.dim != 2:
            raise MethodUnavailable("surface method is implemented for n = 2")
        if m.atomic.atoms or m.density is None:
            raise MethodUnavailable("surface method needs an absolutely continuous measure")
        for i, s in enumerate(p0_grid):
            pp = PricePoint(p, float(s))
            values[i] = _surface_radon(m, pp, alpha, tol)
            cdf[i] = sublevel_mass(m, pp, alpha, tol=tol)
        return RadonSlice(p, alpha, p0_grid, values, cdf)

    # derivative method: keep atoms out of every difference stencil
    atom_levels = np.array(
        [float(ces_dot(p, loc, alpha)) for loc, _ in m.atomic.atoms]
    )
    for i, s in enumerate(p0_grid):
        h = 1e-3 * float(s)
        if atom_levels.size and np.min(np.abs(atom_levels - s)) <= 2.0 * h:
            raise MethodUnavailable(
                f"atom level within the difference stencil at p0 = {s:g}"
            )
        pp = PricePoint(p, float(s))
        values[i] = _fd_radon(m, pp, alpha, tol, h)
        cdf[i] = sublevel_mass(m, pp, alpha, tol=tol)
    return RadonSlice(p, alpha, p0_grid, values, cdf)


def profit_from_radon(rs: RadonSlice, p0: float) -> float:
    """Rebuild the profit from Radon samples: Pi(p0) = int_0^{p0} (p0-s) R(s) ds.

    The double integration starts at 0 with Pi(+0) = Pi'(+0) = 0; below the
    first grid point R is extended by its first sample.

    Raises
    ------
    OutOfRange
        If p0 lies beyond the sampled grid.
    """
    grid = rs.p0_grid
    if not (0.0 <= p0 <= grid[-1] * (1.0 + 1e-12)):
        raise OutOfRange(f"p0 = {p0:g} outside the sampled range (0, {grid[-1]:g}]")
    if p0 == 0.0:
        return 0.0
    s = np.concatenate(([0.0], grid))
    r = np.concatenate(([rs.values[0]], rs.values))
    if p0 < s[-1]:
        k = int(np.searchsorted(s, p0))
        r_at = float(np.interp(p0, s, r))
        s = np.concatenate((s[:k], [p0]))
        r = np.concatenate((r[:k], [r_at]))
    mass = cumulative_trapezoid(r, s, initial=0.0)
    profit = cumulative_trapezoid(mass, s, initial=0.0)
    return float(profit[-1])
