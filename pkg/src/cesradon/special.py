"""Complex log-Gamma and the Beta ratios used by the Mellin machinery.

``log_gamma`` is a fixed-coefficient Lanczos approximation (g = 607/128,
15 terms) valid for Re z >= 0.5, extended to the rest of the plane by the
reflection formula with a log-sin evaluated in a form that stays on the
analytic continuation (no spurious 2-pi-i jumps, no overflow for large
imaginary parts).  Matches the principal branch — continuation from the
positive real axis, limit from above on the cut — to better than 1e-12
relative for Re z in [-10, 50], |Im z| <= 100.

The two Beta ratios are thin wrappers:

    beta_multivariate(z) = Gamma(z_1)...Gamma(z_n) / Gamma(z_1+...+z_n)
    beta2(w)             = Gamma(2) Gamma(w) / Gamma(2 + w) = 1/(w (w+1))

Note the one-argument multivariate Beta is identically 1.
"""

from __future__ import annotations

import numpy as np

from .errors import PoleError

__all__ = ["log_gamma", "beta_multivariate", "beta2"]

_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = np.array(
    [
        0.99999999999999709182,
        57.156235665862923517,
        -59.597960355475491248,
        14.136097974741747174,
        -0.49191381609762019978,
        0.33994649984811888699e-4,
        0.46523628927048575665e-4,
        -0.98374475304879564677e-4,
        0.15808870322491248884e-3,
        -0.21026444172410488319e-3,
        0.21743961811521264320e-3,
        -0.16431810653676389022e-3,
        0.84418223983852743293e-4,
        -0.26190838401581408670e-4,
        0.36899182659531622704e-5,
    ]
)
_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def _lanczos_log_gamma(z: np.ndarray) -> np.ndarray:
    """Core Lanczos sum; caller guarantees Re z >= 0.5."""
    zm1 = z - 1.0
    acc = np.full(z.shape, _LANCZOS_C[0], dtype=complex)
    for k in range(1, _LANCZOS_C.size):
        acc = acc + _LANCZOS_C[k] / (zm1 + k)
    t = zm1 + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (zm1 + 0.5) * np.log(t) - t + np.log(acc)


def _log_sin_pi_upper(z: np.ndarray) -> np.ndarray:
    """log(sin(pi z)), analytic continuation, valid for Im z >= 0.

    Uses sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 pi i z}); the second factor
    stays inside the unit disk around 1 for Im z > 0, so log1p is
    single-valued and nothing overflows however large Im z gets.
    """
    return (
        np.log(0.5)
        + 0.5j * np.pi
        - 1j * np.pi * z
        + np.log1p(-np.exp(2j * np.pi * z))
    )


def log_gamma(z):
    """Principal-branch log-Gamma of complex argument(s).

    Parameters
    ----------
    z : complex scalar or array_like

    Returns
    -------
    complex scalar or complex ndarray matching the input shape.

    Raises
    ------
    PoleError
        If any entry is a nonpositive integer.
    """
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)

    re, im = arr.real, arr.imag
    on_pole = (im == 0.0) & (re <= 0.0) & (re == np.round(re))
    if np.any(on_pole):
        raise PoleError(
            f"log_gamma pole at z={arr[on_pole][0]} (nonpositive integer)"
        )

    out = np.empty(arr.shape, dtype=complex)
    direct = re >= 0.5
    if np.any(direct):
        out[direct] = _lanczos_log_gamma(arr[direct])
    if np.any(~direct):
        zr = arr[~direct]
        # work in the closed upper half-plane, conjugate back afterwards
        flip = zr.imag < 0.0
        zu = np.where(flip, np.conj(zr), zr)
        refl = np.log(np.pi) - _log_sin_pi_upper(zu) - _lanczos_log_gamma(1.0 - zu)
        out[~direct] = np.where(flip, np.conj(refl), refl)

    if scalar:
        return complex(out[0])
    return out.reshape(np.shape(z))


def beta_multivariate(z) -> complex | np.ndarray:
    """Multivariate Beta ``prod_k Gamma(z_k) / Gamma(sum_k z_k)``.

    ``z`` is a vector of complex strip points, or an array whose *last* axis
    indexes the components (the leading axes broadcast, which is what the
    spectral division stage wants).
    """
    arr = np.asarray(z, dtype=complex)
    if arr.ndim == 0:
        raise PoleError("beta_multivariate expects at least one component")
    num = log_gamma(arr).sum(axis=-1)
    den = log_gamma(arr.sum(axis=-1))
    out = np.exp(num - den)
    if out.ndim == 0:
        return complex(out)
    return out


def beta2(w):
    """Euler Beta with fixed first argument 2: ``B(2, w) = 1/(w (w+1))``."""
    arr = np.asarray(w, dtype=complex)
    if np.any(arr == 0.0) or np.any(arr == -1.0):
        raise PoleError("beta2 pole at w in {0, -1}")
    out = 1.0 / (arr * (arr + 1.0))
    if out.ndim == 0:
        return complex(out)
    return out
