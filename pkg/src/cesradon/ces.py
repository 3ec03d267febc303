"""CES aggregation primitives.

Everything downstream (transforms, characterization, inversion) is phrased in
terms of the constant-elasticity combination

    ces_dot(p, x; alpha) = (sum_k (p_k x_k)^alpha)^(1/alpha),   0 < alpha <= 1,

on the nonnegative orthant.  The power chain is evaluated as
``exp(alpha * log(.))`` with the largest term factored out, so huge/tiny
prices do not overflow and exact zeros short-circuit instead of producing
``log(0)`` warnings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfRange

__all__ = [
    "validate_alpha",
    "ces_sum",
    "ces_dot",
    "sublevel_indicator",
    "level_bound",
    "PricePoint",
]


def validate_alpha(alpha: float) -> float:
    """Return ``alpha`` as float, insisting on 0 < alpha <= 1."""
    a = float(alpha)
    if not (0.0 < a <= 1.0) or not np.isfinite(a):
        raise OutOfRange(f"alpha must lie in (0, 1], got {alpha!r}")
    return a


def _check_nonnegative(arr: np.ndarray, name: str) -> None:
    if np.any(arr < 0.0):
        raise OutOfRange(f"{name} must be nonnegative componentwise")


def ces_sum(a, b, alpha: float):
    """CES combination ``(a^alpha + b^alpha)^(1/alpha)`` of nonnegative scalars
    or arrays (elementwise).

    Homogeneous of degree 1, commutative, associative; reduces to ``a + b`` at
    alpha = 1.
    """
    alpha = validate_alpha(alpha)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_nonnegative(a, "a")
    _check_nonnegative(b, "b")
    m = np.maximum(a, b)
    out = np.zeros(np.broadcast(a, b).shape)
    nz = m > 0.0
    if np.any(nz):
        # factor out the max: m * (r^alpha + s^alpha)^(1/alpha), r,s <= 1
        mm = m[nz] if m.ndim else m
        r = np.where(nz, a, 0.0)[nz] / mm
        s = np.where(nz, b, 0.0)[nz] / mm
        val = mm * np.power(np.power(r, alpha) + np.power(s, alpha), 1.0 / alpha)
        if out.ndim:
            out[nz] = val
        else:
            out = val
    return out if out.ndim else float(out)


def ces_dot(p, x, alpha: float):
    """Generalized price-quantity pairing ``(sum_k (p_k x_k)^alpha)^(1/alpha)``.

    Parameters
    ----------
    p : array_like, shape (n,)
        Nonnegative price vector.
    x : array_like, shape (..., n)
        Nonnegative quantity vector(s); leading axes broadcast.
    alpha : float
        CES exponent in (0, 1].

    Returns
    -------
    float or ndarray of shape (...)

    Notes
    -----
    Concave and positively homogeneous of degree 1 in ``x`` (and in ``p``)
    for alpha in (0, 1].  Zero products contribute nothing; the all-zero
    vector maps to 0.
    """
    alpha = validate_alpha(alpha)
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    _check_nonnegative(p, "p")
    _check_nonnegative(x, "x")
    prod = p * x  # broadcasts (..., n)
    m = prod.max(axis=-1)
    scalar = m.ndim == 0
    m_arr = np.atleast_1d(m)
    prod = prod.reshape(m_arr.shape + (p.shape[-1],))
    out = np.zeros_like(m_arr)
    nz = m_arr > 0.0
    if np.any(nz):
        ratios = prod[nz] / m_arr[nz, None]
        s = np.power(ratios, alpha).sum(axis=-1)
        out[nz] = m_arr[nz] * np.power(s, 1.0 / alpha)
    if scalar:
        return float(out[0])
    return out.reshape(np.asarray(m).shape)


def sublevel_indicator(p, p0: float, x, alpha: float):
    """Indicator of the closed CES ball ``{x : ces_dot(p, x) <= p0}``.

    Returns a float (0.0/1.0) for a single point or a float array for a batch.
    """
    val = ces_dot(p, x, alpha)
    if np.ndim(val) == 0:
        return 1.0 if val <= p0 else 0.0
    return (val <= p0).astype(float)


def level_bound(p, p0: float, axis: int) -> float:
    """Upper bound of the sublevel set along ``axis``: p0 / p_axis.

    Returns ``inf`` when the price coordinate vanishes (the set is then
    unbounded in that direction).
    """
    p = np.asarray(p, dtype=float)
    if not (0 <= axis < p.shape[-1]):
        raise OutOfRange(f"axis {axis} out of range for dimension {p.shape[-1]}")
    if p0 <= 0.0:
        raise OutOfRange("p0 must be positive")
    pa = float(p[axis])
    if pa == 0.0:
        return float("inf")
    return float(p0) / pa


@dataclass(frozen=True)
class PricePoint:
    """A price system: vector ``p`` plus scalar level ``p0``.

    ``p`` must be nonnegative with at least one strictly positive coordinate,
    and ``p0 > 0``.
    """

    p: np.ndarray
    p0: float

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise OutOfRange("p must be a nonempty 1-d vector")
        _check_nonnegative(p, "p")
        if not np.any(p > 0.0):
            raise OutOfRange("p must have at least one positive coordinate")
        if not (float(self.p0) > 0.0 and np.isfinite(self.p0)):
            raise OutOfRange("p0 must be positive and finite")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "p0", float(self.p0))

    @property
    def dim(self) -> int:
        return self.p.shape[0]

    def scaled(self, lam: float) -> "PricePoint":
        """The ray point (lam*p, lam*p0)."""
        if lam <= 0:
            raise OutOfRange("scaling factor must be positive")
        return PricePoint(self.p * lam, self.p0 * lam)
