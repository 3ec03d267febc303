"""Independent reference integrators for testing the production paths.

Nothing in here is called by the transform/inversion code — that is the
point.  The adaptive Gauss-Kronrod engine below is hand-rolled (the
production generic-density route uses QUADPACK via scipy), the Monte-Carlo
integrator uses a counter-based Philox stream so reruns are bit-identical,
and ``direct_mellin`` evaluates the profit Mellin transform by plain
quadrature on a log axis rather than by FFT.

Integrand convention: callables must accept numpy arrays for their *last*
positional argument (innermost integration axis) and broadcast over it;
outer coordinates arrive as scalars.
"""

from __future__ import annotations

import numpy as np

from .errors import NonConvergent, TailDivergence

__all__ = [
    "mc_integrate",
    "nested_quadrature",
    "finite_difference",
    "direct_mellin",
]

# Gauss(7)/Kronrod(15) nodes and weights on [-1, 1] (symmetric half listed).
_KX = np.array(
    [
        0.991455371120813,
        0.949107912342759,
        0.864864423359769,
        0.741531185599394,
        0.586087235467691,
        0.405845151377397,
        0.207784955007898,
        0.0,
    ]
)
_KW = np.array(
    [
        0.022935322010529,
        0.063092092629979,
        0.104790010322250,
        0.140653259715525,
        0.169004726639267,
        0.190350578064785,
        0.204432940075298,
        0.209482141084728,
    ]
)
_GW = np.array(
    [
        0.129484966168870,
        0.279705391489277,
        0.381830050505119,
        0.417959183673469,
    ]
)

_NODES = np.concatenate([-_KX[:-1], _KX[::-1]])  # 15 ascending nodes
_WK = np.concatenate([_KW[:-1], _KW[::-1]])
_WG_FULL = np.zeros(15)
_WG_FULL[1:-1:2] = np.concatenate([_GW[:-1], _GW[::-1]])


class _Budget:
    """Shared evaluation counter for one top-level quadrature call."""

    def __init__(self, limit: int = 1 << 20):
        self.limit = limit
        self.used = 0

    def spend(self, n: int) -> None:
        self.used += n
        if self.used > self.limit:
            raise NonConvergent(
                f"quadrature budget exhausted ({self.used} > {self.limit} "
                "integrand evaluations); integral may diverge or need a "
                "better parameterization"
            )


def _gk_panel(f, a: float, b: float, budget: _Budget):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid + half * _NODES
    y = np.asarray(f(x))
    budget.spend(15)
    k = half * (_WK @ y)
    g = half * (_WG_FULL @ y)
    return k, abs(k - g)


def _adaptive_gk(f, a: float, b: float, tol: float, budget: _Budget):
    """Globally adaptive bisection on a finite interval; f vectorized."""
    val, err = _gk_panel(f, a, b, budget)
    panels = [(err, a, b, val)]
    total_err = err
    while total_err > tol and len(panels) < (budget.limit // 30):
        i = max(range(len(panels)), key=lambda j: panels[j][0])
        perr, pa, pb, pval = panels.pop(i)
        pm = 0.5 * (pa + pb)
        if pm <= pa or pm >= pb:  # interval at floating-point resolution
            panels.append((0.0, pa, pb, pval))
            total_err -= perr
            continue
        v1, e1 = _gk_panel(f, pa, pm, budget)
        v2, e2 = _gk_panel(f, pm, pb, budget)
        panels.append((e1, pa, pm, v1))
        panels.append((e2, pm, pb, v2))
        total_err += e1 + e2 - perr
    if total_err > 10 * tol:
        raise NonConvergent(
            f"adaptive quadrature stalled at error {total_err:.2e} (target {tol:.2e})"
        )
    return sum(p[3] for p in panels), total_err


def _integrate_axis(f, lo: float, hi: float, tol: float, budget: _Budget):
    """One axis, mapping a +inf upper endpoint through x = lo + s/(1-s)."""
    if np.isinf(hi):
        def mapped(s):
            s = np.asarray(s)
            x = lo + s / (1.0 - s)
            return f(x) / (1.0 - s) ** 2

        return _adaptive_gk(mapped, 0.0, 1.0 - 1e-12, tol, budget)
    if hi <= lo:
        return 0.0, 0.0
    return _adaptive_gk(f, lo, hi, tol, budget)


def nested_quadrature(f, bounds, tol: float = 1e-9, budget_limit: int = 1 << 20):
    """Iterated adaptive Gauss-Kronrod over a (possibly state-dependent) box.

    Parameters
    ----------
    f : callable
        ``f(x1, ..., xn)`` with the last argument vectorized.
    bounds : sequence of (lo, hi)
        One pair per axis, outermost first.  Each endpoint is a number or a
        callable of the outer coordinates fixed so far; ``hi`` may be inf.
    tol : float
        Absolute tolerance for the full integral.

    Returns
    -------
    float or complex
    """
    bounds = list(bounds)
    budget = _Budget(budget_limit)

    def level(idx: int, outer: tuple):
        lo, hi = bounds[idx]
        lo_v = float(lo(*outer)) if callable(lo) else float(lo)
        hi_v = float(hi(*outer)) if callable(hi) else float(hi)
        level_tol = tol / (16.0**idx) if idx else tol
        if idx == len(bounds) - 1:
            def g(x):
                return f(*outer, x)
            val, _ = _integrate_axis(g, lo_v, hi_v, level_tol, budget)
            return val
        def g(x):
            x = np.atleast_1d(x)
            return np.array([level(idx + 1, outer + (xi,)) for xi in x])
        val, _ = _integrate_axis(g, lo_v, hi_v, level_tol, budget)
        return val

    return level(0, ())


def mc_integrate(f, bounds, n_samples: int, seed: int):
    """Plain Monte-Carlo mean-times-volume on a box, Philox-keyed.

    ``f`` gets an (n_samples, dim) array and must return (n_samples,).
    Returns ``(value, stderr)``.  Same seed, same machine order, same bits.
    """
    bounds = np.asarray(bounds, dtype=float)
    if bounds.ndim != 2 or bounds.shape[1] != 2:
        raise ValueError("bounds must be a sequence of (lo, hi) pairs")
    widths = bounds[:, 1] - bounds[:, 0]
    if np.any(widths <= 0) or not np.all(np.isfinite(widths)):
        raise ValueError("mc_integrate needs a finite box")
    vol = float(np.prod(widths))
    gen = np.random.Generator(np.random.Philox(key=int(seed)))
    pts = bounds[:, 0] + widths * gen.random((int(n_samples), bounds.shape[0]))
    vals = np.asarray(f(pts), dtype=float)
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else np.inf
    return vol * mean, vol * stderr


def finite_difference(f, x: float, order: int = 1, h: float = 1e-4,
                      richardson: bool = True) -> float:
    """Central finite difference of ``f`` at ``x`` (order 1 or 2).

    With ``richardson`` a single extrapolation level combines steps h and
    h/2, upgrading the O(h^2) truncation to O(h^4) for smooth f.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")

    def central(step: float) -> float:
        if order == 1:
            return (f(x + step) - f(x - step)) / (2.0 * step)
        return (f(x + step) - 2.0 * f(x) + f(x - step)) / step**2

    d = central(h)
    if not richardson:
        return d
    d2 = central(0.5 * h)
    return (4.0 * d2 - d) / 3.0


def direct_mellin(profit, t, alpha: float, tol: float = 1e-8):
    """Profit Mellin transform by direct quadrature on log axes.

    Computes ``M(t) = ∫_{R^n_+} p^{-t} Π(p^{1/alpha}, 1) dp`` through the
    substitution p = e^w, growing the w-box until the shell increments fall
    under ``tol``.  ``profit(q_vector) -> Π(q, 1)`` need not be vectorized.

    Returns a complex number.
    """
    t = np.atleast_1d(np.asarray(t, dtype=complex))
    n = t.shape[0]
    if n > 2:
        raise NotImplementedError("direct_mellin supports n <= 2")

    def integrand_1d(w):
        w = np.atleast_1d(w)
        vals = np.array([profit(np.array([np.exp(wi / alpha)])) for wi in w])
        return np.exp((1.0 - t[0]) * w) * vals

    def integrand_2d(w1, w2):
        w2 = np.atleast_1d(w2)
        q1 = np.exp(w1 / alpha)
        vals = np.array(
            [profit(np.array([q1, np.exp(w2i / alpha)])) for w2i in w2]
        )
        return np.exp((1.0 - t[0]) * w1 + (1.0 - t[1]) * w2) * vals

    total = 0.0 + 0.0j
    prev_shell = None
    grew = 0
    w_edge = 0.0
    step = 4.0
    while w_edge < 64.0:
        lo, hi = w_edge, w_edge + step
        if n == 1:
            shell = nested_quadrature(integrand_1d, [(lo, hi)], tol=tol / 8)
            shell += nested_quadrature(integrand_1d, [(-hi, -lo)], tol=tol / 8)
        else:
            # three L-shaped pieces growing the square [-hi, hi]^2
            shell = nested_quadrature(integrand_2d, [(lo, hi), (-hi, hi)], tol=tol / 8)
            shell += nested_quadrature(integrand_2d, [(-hi, -lo), (-hi, hi)], tol=tol / 8)
            shell += nested_quadrature(integrand_2d, [(-lo, lo), (lo, hi)], tol=tol / 8)
            shell += nested_quadrature(integrand_2d, [(-lo, lo), (-hi, -lo)], tol=tol / 8)
        total += shell
        if prev_shell is not None and abs(shell) > 10.0 * abs(prev_shell) and grew >= 1:
            raise TailDivergence("Mellin tail keeps growing; t outside the strip?")
        if prev_shell is not None and abs(shell) > 10.0 * abs(prev_shell):
            grew += 1
        if abs(shell) < tol / 4 and w_edge > 0:
            return total
        prev_shell = shell
        w_edge = hi
    raise TailDivergence("Mellin log-box grew past w=64 without converging")
