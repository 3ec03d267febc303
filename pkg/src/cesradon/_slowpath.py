"""Pure-numpy separable transform engine (the fallback backend).

Handles densities that factor across axes into power/exponential/gaussian
pieces.  Per axis the partial mass M(T) = int_0^T x^beta e^{-lam x - g x^2} dx
has a closed form through the incomplete gamma function as long as lam and
g are not both present; the sublevel mass then reduces (n = 2) to a single
w-integral over [0, 1] via the substitution (q1 x1)^alpha = s^alpha w, and
the profit to an s-integral of the mass.  For n = 1 the profit itself is
closed-form (the second antiderivative of the density is again an
incomplete-gamma expression), so only n = 2 needs quadrature.

Quadrature strategy: fixed-order Gauss-Legendre / Gauss-Jacobi panels with
the exact endpoint exponents folded into the Jacobi weight (the mass
vanishes like s^{sum(beta_k + 1)} at s = 0, the w-integrand carries
w^{(1+beta_1)/alpha - 1} at w = 0 and (1-w)^{(1+beta_2)/alpha} at w = 1),
and order doubling until successive levels agree.  Panel edges are placed
at cutoff-induced kinks AND at the levels where an exponential or gaussian
factor has decayed to numerical noise: without the latter the integrand at
extreme price ratios is a boundary layer of width ~ q that fixed nodes
never see, which silently loses the entire mass.  Panels spanning many
decades are subdivided geometrically so power-law integrands stay accurate.

Everything is vectorized over a batch of (q, p0) rows; the compiled
backend mirrors the same panel logic scalar-wise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gamma as _gamma
from scipy.special import gammainc, roots_jacobi

from .errors import NonConvergent

BACKEND_NAME = "fallback"

_LEVELS = (8, 16, 32, 64, 128, 256, 512)
_CHUNK = 128  # rows per block at the deepest refinement
_LAYER = 36.0  # e^{-36} < 2^-52: a factor this far into its tail is numerically dead
_RATIO = 8.0  # widest endpoint ratio of an unfolded panel before geometric splitting
_MAX_SUB = 16  # cap on geometric subpanels per gap


@dataclass(frozen=True)
class AxisCF:
    """Canonical closed-form axis: x^beta * e^{-lam x - gauss x^2} on [0, cutoff]."""

    beta: float
    lam: float
    gauss: float
    cutoff: float


def build_axes(separable):
    """Canonicalize a Separable density; None when no closed form exists."""
    axes = []
    for factors in separable.axes:
        beta, lam, gauss = 0.0, 0.0, 0.0
        cutoff = math.inf
        for f in factors:
            if f.kind == "exponential":
                lam += f.rate
            elif f.kind == "gaussian":
                gauss += 1.0
            else:
                beta += f.exponent
                cutoff = min(cutoff, f.cutoff)
        if lam > 0 and gauss > 0:
            return None  # e^{-lam x - x^2} has no incomplete-gamma form
        if beta <= -1:
            return None
        axes.append(AxisCF(beta, lam, gauss, cutoff))
    return axes


def _axis_scale(axis: AxisCF) -> float:
    """x-length beyond which the non-power part of the axis density is dead."""
    if axis.lam > 0:
        return _LAYER / axis.lam
    if axis.gauss > 0:
        return math.sqrt(_LAYER / axis.gauss)
    return math.inf


def _gamma_ratio(a: float, z):
    """gamma_lower(a, z) / z^a, stable at z -> 0 (limit 1/a)."""
    z = np.asarray(z, dtype=float)
    small = z < 1e-4
    zs = np.where(small, z, 0.0)
    series = 1.0 / a - zs / (a + 1.0) + zs * zs / (2.0 * (a + 2.0))
    zb = np.where(small, 1.0, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = _gamma(a) * gammainc(a, zb) * np.exp(-a * np.log(zb))
    return np.where(small, series, direct)


def partial_mass(axis: AxisCF, T):
    """M(T) = int_0^T x^beta e^{-lam x - gauss x^2} dx, vectorized in T."""
    T = np.asarray(T, dtype=float)
    Tc = np.clip(T, 0.0, axis.cutoff)
    b1 = axis.beta + 1.0
    if axis.lam > 0:
        return axis.lam ** (-b1) * _gamma(b1) * gammainc(b1, axis.lam * Tc)
    if axis.gauss > 0:
        h = 0.5 * b1
        return 0.5 * axis.gauss ** (-h) * _gamma(h) * gammainc(h, axis.gauss * Tc * Tc)
    return Tc**b1 / b1


def partial_mass_scaled(axis: AxisCF, T):
    """M(min(T, cutoff)) / T^{beta+1}; analytic at T = 0 (value 1/(beta+1))."""
    T = np.asarray(T, dtype=float)
    b1 = axis.beta + 1.0
    Tc = np.clip(T, 0.0, axis.cutoff)
    if axis.lam > 0:
        # M/T^{b1} = gamma(b1, lam T)/(lam T)^{b1} since the lam^{-b1} cancels
        core = _gamma_ratio(b1, axis.lam * Tc)
    elif axis.gauss > 0:
        core = 0.5 * _gamma_ratio(0.5 * b1, axis.gauss * Tc * Tc)
    else:
        core = np.full_like(Tc, 1.0 / b1)
    # beyond the cutoff M is frozen at M(cutoff): rescale by (Tc/T)^{b1}
    if np.isfinite(axis.cutoff):
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(T > axis.cutoff, (axis.cutoff / np.where(T > 0, T, 1.0)) ** b1, 1.0)
        core = core * ratio
    return core


def axis_profit_int(axis: AxisCF, X):
    """int_0^X M(T) dT in closed form; M is frozen past the cutoff.

    Integration by parts gives int_0^X P(a, z(T)) dT in terms of P(a, .)
    and P(a + 1/2 or a + 1, .), so the n = 1 profit q * I(p0/q) needs no
    quadrature at all and survives arbitrarily extreme p0/q ratios.
    """
    X = np.asarray(X, dtype=float)
    Xc = np.clip(X, 0.0, axis.cutoff)
    b1 = axis.beta + 1.0
    if axis.lam > 0:
        z = axis.lam * Xc
        base = (
            axis.lam ** (-b1 - 1.0)
            * _gamma(b1)
            * (z * gammainc(b1, z) - b1 * gammainc(b1 + 1.0, z))
        )
    elif axis.gauss > 0:
        h = 0.5 * b1
        z = axis.gauss * Xc * Xc
        base = (
            0.5
            * axis.gauss ** (-h)
            * _gamma(h)
            * (
                Xc * gammainc(h, z)
                - (_gamma(h + 0.5) / _gamma(h)) / math.sqrt(axis.gauss) * gammainc(h + 0.5, z)
            )
        )
    else:
        base = Xc ** (b1 + 1.0) / (b1 * (b1 + 1.0))
    if np.isfinite(axis.cutoff):
        mc = float(partial_mass(axis, axis.cutoff))
        base = base + np.clip(X - axis.cutoff, 0.0, None) * mc
    return base


def axis_density(axis: AxisCF, x):
    """x^beta e^{-lam x - gauss x^2} with the cutoff applied."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if axis.beta == 0.0:
            p = np.ones_like(x)
        else:
            p = np.power(x, axis.beta, where=x > 0, out=np.zeros_like(x))
            if axis.beta < 0:
                p = np.where(x > 0, p, np.inf)
    val = p * np.exp(-axis.lam * x - axis.gauss * x * x)
    return np.where(x <= axis.cutoff, val, 0.0)


def axis_resid(axis: AxisCF, x):
    """The smooth part e^{-lam x - gauss x^2} (power handled analytically)."""
    x = np.asarray(x, dtype=float)
    val = np.exp(-axis.lam * x - axis.gauss * x * x)
    return np.where(x <= axis.cutoff, val, 0.0)


@lru_cache(maxsize=128)
def _gl01(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return (x + 1.0) / 2.0, w / 2.0


@lru_cache(maxsize=128)
def _gj01(m: int, b: float):
    """Nodes/weights for int_0^1 w^b g(w) dw ~= sum W_i g(x_i)."""
    if abs(b) < 1e-13:
        return _gl01(m)
    x, w = roots_jacobi(m, 0.0, b)
    return (x + 1.0) / 2.0, w / 2.0 ** (b + 1.0)


@lru_cache(maxsize=128)
def _gjab01(m: int, a: float, b: float):
    """Nodes/weights for int_0^1 (1-w)^a w^b g(w) dw."""
    if abs(a) < 1e-13:
        return _gj01(m, b)
    x, w = roots_jacobi(m, a, b)
    return (x + 1.0) / 2.0, w / 2.0 ** (a + b + 1.0)


def _refine_log(bounds):
    """Split panels whose endpoint ratio is huge into geometric subpanels.

    bounds: (B, E) nondecreasing per row, column 0 the folded panel (kept
    whole).  Per gap the subpanel count is the batch max but each row uses
    its own geometric spacing, padding with duplicate edges (zero-width
    panels are skipped downstream), so row decompositions are independent.
    """
    B, E = bounds.shape
    cols = [bounds[:, 0:1], bounds[:, 1:2]]
    log_ratio = math.log(_RATIO)
    for j in range(1, E - 1):
        a = bounds[:, j]
        b = bounds[:, j + 1]
        pos = (a > 0.0) & (b > a)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(pos, b / np.where(pos, a, 1.0), 1.0)
        rmax = float(np.max(r)) if r.size else 1.0
        if rmax > _RATIO:
            k = np.ceil(np.log(r) / log_ratio).astype(int)
            k = np.clip(k, 1, _MAX_SUB)
            kmax = int(np.max(k))
            for c in range(1, kmax):
                frac = np.minimum(c, k) / k
                mid = np.where(frac >= 1.0, b, a * r**frac)
                cols.append(mid[:, None])
        cols.append(b[:, None])
    return np.concatenate(cols, axis=1)


def _mass2_panels(axes, alpha, q, s, m):
    """Sublevel mass for n=2 separable rows at w-order m.

    q: (B, 2), s: (B,).  Axis 0's power exponent is folded into the Jacobi
    weight at w = 0 and axis 1's into the weight at w = 1 (callers order
    the axes); the remaining integrand core resid1(x1) * M2(T2)/T2^{b2+1}
    is smooth, with panel edges at every cutoff kink and decay layer.
    """
    a1, a2 = axes
    inv_a = 1.0 / alpha
    s = np.asarray(s, dtype=float)
    safe_s = np.where(s > 0, s, 1.0)
    q1 = q[..., 0]
    q2 = q[..., 1]
    pos = s > 0
    scale1 = safe_s / q1  # extent of the region along axis 1 at level s
    scale2 = safe_s / q2
    b1 = a1.beta + 1.0
    b2 = a2.beta + 1.0
    b_fold = b1 * inv_a - 1.0
    a_fold = b2 * inv_a

    # candidate interior edges; anything outside (0, 1) collapses onto the
    # mandatory 0.5 split so the batch keeps a uniform column layout
    cands = [np.full_like(safe_s, 0.5)]
    with np.errstate(over="ignore", invalid="ignore"):
        L1 = _axis_scale(a1)
        if math.isfinite(L1):
            cands.append((q1 * L1 / safe_s) ** alpha)  # resid1 dead beyond
        if math.isfinite(a1.cutoff):
            cands.append((q1 * a1.cutoff / safe_s) ** alpha)  # x1 hits its cutoff
        L2 = _axis_scale(a2)
        if math.isfinite(L2):
            cands.append(1.0 - (q2 * L2 / safe_s) ** alpha)  # M2 saturated beyond
        if math.isfinite(a2.cutoff):
            cands.append(1.0 - (q2 * a2.cutoff / safe_s) ** alpha)  # M2 frozen beyond
    cs = np.stack(cands, axis=-1)
    cs = np.where((cs > 1e-250) & (cs < 1.0 - 1e-15), cs, 0.5)
    cs = np.sort(cs, axis=-1)
    zero = np.zeros_like(safe_s)[..., None]
    bounds = _refine_log(np.concatenate([zero, cs, zero + 1.0], axis=-1))
    E = bounds.shape[-1]

    xj, wj = _gj01(m, b_fold)
    xg, wg = _gl01(m)
    xr, wr = _gjab01(m, a_fold, 0.0)

    def _core(x1, T2):
        return axis_resid(a1, x1) * partial_mass_scaled(a2, T2)

    # first panel [0, e1]: w^{b_fold} folded into the rule
    hi = bounds[..., 1]
    w_n = hi[..., None] * xj
    x1 = scale1[..., None] * w_n**inv_a
    T2 = scale2[..., None] * (1.0 - w_n) ** inv_a
    val = hi ** (b_fold + 1.0) * ((1.0 - w_n) ** a_fold * _core(x1, T2) * wj).sum(axis=-1)

    # interior panels: plain Gauss-Legendre, both endpoint powers explicit
    for j in range(1, E - 2):
        lo = bounds[..., j]
        span = np.clip(bounds[..., j + 1] - lo, 0.0, None)
        if not np.any(span > 0):
            continue
        w_n = lo[..., None] + span[..., None] * xg
        x1 = scale1[..., None] * w_n**inv_a
        T2 = scale2[..., None] * (1.0 - w_n) ** inv_a
        g = w_n**b_fold * (1.0 - w_n) ** a_fold * _core(x1, T2)
        val = val + span * (g * wg).sum(axis=-1)

    # last panel [lo, 1]: (1-w)^{a_fold} folded; keep 1-w in product form
    lo = bounds[..., E - 2]
    rspan = np.clip(1.0 - lo, 0.0, None)
    w_n = lo[..., None] + rspan[..., None] * xr
    x1 = scale1[..., None] * w_n**inv_a
    T2 = scale2[..., None] * (rspan[..., None] * (1.0 - xr)) ** inv_a
    g = w_n**b_fold * _core(x1, T2)
    val = val + rspan ** (a_fold + 1.0) * (g * wr).sum(axis=-1)

    out = inv_a * scale1**b1 * scale2**b2 * val
    return np.where(pos, out, 0.0)


def _mass_at_order(axes, alpha, q, s, m):
    if len(axes) == 1:
        with np.errstate(divide="ignore"):
            T = np.where(s > 0, s / q[..., 0], 0.0)
        return partial_mass(axes[0], T)
    order = (0, 1) if axes[0].beta <= axes[1].beta else (1, 0)
    return _mass2_panels([axes[order[0]], axes[order[1]]], alpha, q[:, list(order)], s, m)


def mass_rows(axes, alpha: float, q: np.ndarray, s, tol: float = 1e-10):
    """Sublevel mass of a separable density on rows (q_i, s_i).

    Parameters
    ----------
    axes : list of AxisCF (length 1 or 2)
    alpha : float
    q : (B, n) strictly positive prices
    s : (B,) or scalar levels
    tol : float
        Absolute tolerance for the order-doubling acceptance (n = 2).

    Returns
    -------
    (B,) masses
    """
    q = np.atleast_2d(np.asarray(q, dtype=float))
    s = np.broadcast_to(np.asarray(s, dtype=float), (q.shape[0],))
    if len(axes) == 1:
        return _mass_at_order(axes, alpha, q, s, 0)
    if len(axes) != 2:
        raise NotImplementedError("closed-form mass supports n <= 2")
    prev = None
    for m in _LEVELS:
        cur = _mass_at_order(axes, alpha, q, s, m)
        if prev is not None and np.all(
            np.abs(cur - prev) <= tol * np.maximum(1.0, np.abs(cur))
        ):
            return cur
        prev = cur
    raise NonConvergent("mass quadrature did not settle under order doubling")


def _profit_bounds(axes, alpha, q, p0):
    """Panel edges in s: cutoff levels, the corner, and per-axis decay levels.

    A cutoff kink at s* = q_k c_k trails a boundary layer on its right: the
    mass deficit relaxes through an integral over the *other* axis, so it
    decays on the x_j scale of that axis, i.e. over s^alpha - s*^alpha of
    order (q_j l_j)^alpha.  The layer end gets its own edge so the layer is
    never buried inside a wide panel.
    """
    B = q.shape[0]
    top = np.asarray(np.broadcast_to(np.asarray(p0, dtype=float), (B,)))
    cands = []
    for k, a in enumerate(axes):
        L = _axis_scale(a)
        if math.isfinite(L):
            cands.append(q[:, k] * L)
        if math.isfinite(a.cutoff):
            kink = q[:, k] * a.cutoff
            cands.append(kink)
            if len(axes) == 2:
                other = axes[1 - k]
                lj = min(_axis_scale(other), other.cutoff)
                if math.isfinite(lj):
                    cands.append(
                        (kink**alpha + (q[:, 1 - k] * lj) ** alpha) ** (1.0 / alpha)
                    )
    if len(axes) == 2 and all(math.isfinite(a.cutoff) for a in axes):
        corner = (
            (q[:, 0] * axes[0].cutoff) ** alpha + (q[:, 1] * axes[1].cutoff) ** alpha
        ) ** (1.0 / alpha)
        cands.append(corner)
    if not cands:
        # pure-power axes: the mass is a monomial, one folded panel is exact
        return np.stack([np.zeros(B), top], axis=1)
    cs = np.stack(cands, axis=1)
    cs = np.where((cs > 1e-250) & (cs < top[:, None] * (1.0 - 1e-15)), cs, top[:, None])
    cs.sort(axis=1)
    bounds = np.concatenate([np.zeros((B, 1)), cs, top[:, None]], axis=1)
    return _refine_log(bounds)


def _profit_block(axes, alpha, q, p0, m):
    """One refinement level of the n=2 profit quadrature for a row block."""
    bounds = _profit_bounds(axes, alpha, q, p0)  # (B, E)
    B = bounds.shape[0]
    gamma_fold = sum(a.beta + 1.0 for a in axes)  # mass ~ s^gamma at s -> 0
    total = np.zeros(B)
    for j in range(bounds.shape[1] - 1):
        lo = bounds[:, j]
        hi = bounds[:, j + 1]
        span = np.clip(hi - lo, 0.0, None)
        if not np.any(span > 0):
            continue
        if j == 0:
            xj, wj = _gj01(m, gamma_fold)
            s_n = span[:, None] * xj
            flat_q = np.repeat(q, m, axis=0)
            mvals = _mass_at_order(axes, alpha, flat_q, s_n.ravel(), m).reshape(B, m)
            with np.errstate(divide="ignore", invalid="ignore"):
                g = np.where(s_n > 0, mvals / np.where(s_n > 0, s_n, 1.0) ** gamma_fold, 0.0)
            total += span ** (gamma_fold + 1.0) * (g * wj).sum(axis=1)
        else:
            xg, wg = _gl01(m)
            s_n = lo[:, None] + span[:, None] * xg
            flat_q = np.repeat(q, m, axis=0)
            mvals = _mass_at_order(axes, alpha, flat_q, s_n.ravel(), m).reshape(B, m)
            total += span * (mvals * wg).sum(axis=1)
    return total


def profit_rows(axes, alpha: float, q: np.ndarray, p0, tol: float = 1e-9):
    """Profit on rows (q_i, p0_i) for a separable density.

    n = 1 is evaluated in closed form.  For n = 2 the quadrature order
    (both the s-rule and the inner w-rule) doubles until successive levels
    agree to `tol` absolutely; raises NonConvergent when the ladder is
    exhausted.
    """
    q = np.atleast_2d(np.asarray(q, dtype=float))
    B = q.shape[0]
    p0 = np.broadcast_to(np.asarray(p0, dtype=float), (B,))
    out = np.zeros(B)
    live = p0 > 1e-30
    if not np.any(live):
        return out

    if len(axes) == 1:
        ql = q[live, 0]
        out[live] = ql * axis_profit_int(axes[0], p0[live] / ql)
        return out
    if len(axes) != 2:
        raise NotImplementedError("closed-form profit supports n <= 2")

    pieces = []
    qi = q[live]
    pi = p0[live]
    for start in range(0, qi.shape[0], _CHUNK):
        qb = qi[start : start + _CHUNK]
        pb = pi[start : start + _CHUNK]
        prev = None
        for m in _LEVELS:
            val = _profit_block(axes, alpha, qb, pb, m)
            if prev is not None and np.all(
                np.abs(val - prev) <= tol * np.maximum(1.0, np.abs(val))
            ):
                break
            prev = val
        else:
            raise NonConvergent("profit quadrature did not settle under order doubling")
        pieces.append(val)
    out[live] = np.concatenate(pieces)
    return out
