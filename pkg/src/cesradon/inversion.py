"""Recovery of a density from its profit transform.

The pipeline follows the substitution chain that turns the profit transform
into a product of Beta factors and a Fourier transform:

1. sample Pi(q, 1) on a log grid u = log q (``sample_profit_log``);
2. with p = q^alpha, the Mellin transform M(t) = int p^{-t} Pi(p^{1/alpha}, 1) dp
   on the contour t = c + i tau becomes an FFT of e^{alpha(1-c) u} Pi(e^u, 1)
   (``mellin_of_profit``);
3. divide by alpha * B(1-t) * B(2, alpha(n - sum t)) — what remains is the
   Fourier transform of phi(x) = a_*(e^x) e^{c.x}, where a_* is the density
   warped by y = x^alpha (``spectral_divide``);
4. inverse transform with the frequency ball |tau| <= R masked in, remove the
   strip factor, and unwarp back to a(x) (``reconstruct_density``).

``kernel_eval``/``reconstruct_via_kernel`` evaluate the same inversion as an
explicit integral kernel — slow, but an independent check of the FFT path.
``invert_radon`` rebuilds the profit from Radon samples first.

Numerical notes, found the hard way:

* division by ``beta2`` amplifies spectral noise like |tau|^2; that is benign
  in n = 1, but in n = 2 the multivariate Beta factor grows like
  e^{pi * min_k |tau_k|} along the anti-diagonal, so the truncation radius
  has to stay small (R ~ 5) no matter how fine the grid is;
* the weighted samples decay only like e^{-alpha(1-c)|u|} toward the left
  grid edge, so a hard cutoff there rings across the spectrum; the samples
  are cosine-apodized at both ends before the FFT (see ``mellin_of_profit``).
"""

import hashlib
import json
import math
import os
import tempfile
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import _backend
from .ces import PricePoint, validate_alpha
from .errors import (
    BoundaryLeak,
    ConfigError,
    NonConvergent,
    PoleError,
    StripViolation,
    TruncationWarning,
)
from .forward import RadonSlice, profit_from_radon, profit_transform
from .grids import LogGrid
from .measures import GridSampled, MeasureModel, Separable, measure_to_json
from .special import beta2, beta_multivariate

__all__ = [
    "MellinStrip",
    "Spectrum",
    "InversionConfig",
    "sample_profit_log",
    "mellin_of_profit",
    "spectral_divide",
    "reconstruct_density",
    "kernel_eval",
    "reconstruct_via_kernel",
    "invert_radon",
    "nyquist_radius",
]

_CACHE_HEADER = b"cesradon-cache v1\n"


# ---------------------------------------------------------------------------
# configuration types


@dataclass(frozen=True)
class MellinStrip:
    """The contour offsets c = (c_1, ..., c_n); every c_k must be < 1."""

    c: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(np.asarray(self.c, dtype=float)))
        if not c:
            raise ConfigError("strip needs at least one component")
        if not all(v < 1.0 for v in c):
            raise StripViolation(f"strip components must satisfy c_k < 1, got {c}")
        object.__setattr__(self, "c", c)

    @property
    def dim(self) -> int:
        return len(self.c)


@dataclass(frozen=True)
class Spectrum:
    """Transform values on the discrete Fourier dual of a LogGrid."""

    grid: LogGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise ConfigError(
                f"spectrum shape {vals.shape} does not match grid {self.grid.shape}"
            )
        object.__setattr__(self, "values", vals)


def _kappa_axes(grid: LogGrid):
    """Angular FFT frequencies per axis (dual to u)."""
    return [
        2.0 * np.pi * np.fft.fftfreq(grid.shape[k], d=grid.spacing(k))
        for k in range(grid.dim)
    ]


def nyquist_radius(grid: LogGrid, alpha: float) -> float:
    """Largest |tau| representable on the grid's frequency lattice."""
    per_axis = [np.pi / (alpha * grid.spacing(k)) for k in range(grid.dim)]
    return float(np.sqrt(np.sum(np.square(per_axis))))


@dataclass(frozen=True)
class InversionConfig:
    """Grid, contour, CES exponent, and frequency-ball truncation."""

    grid: LogGrid
    strip: MellinStrip
    alpha: float
    radius: Optional[float] = None
    taper: str = "hard"

    def __post_init__(self):
        validate_alpha(self.alpha)
        if self.strip.dim != self.grid.dim:
            raise ConfigError("strip dimension does not match grid dimension")
        for nk in self.grid.shape:
            if nk < 8 or nk & (nk - 1):
                raise ConfigError(f"grid shape must be powers of two >= 8, got {nk}")
        if self.taper not in ("hard", "gaussian"):
            raise ConfigError(f"taper must be 'hard' or 'gaussian', got {self.taper!r}")
        n = self.grid.dim
        # automatic given c_k < 1, but asserted all the same
        assert self.alpha * (n - sum(self.strip.c)) > 0
        if self.radius is not None:
            if not self.radius > 0:
                raise ConfigError("truncation radius must be positive")
            if self.radius > nyquist_radius(self.grid, self.alpha) * (1 + 1e-12):
                raise ConfigError(
                    "truncation radius exceeds the representable frequency range"
                )

    def tau_axes(self):
        return [k / self.alpha for k in _kappa_axes(self.grid)]


def default_config(n: int, alpha: float, **overrides) -> InversionConfig:
    """Desk-scale defaults: n=1 -> N=4096 on [-12,12]; n=2 -> 256^2 on [-8,8]."""
    if n == 1:
        grid = LogGrid(u_min=(-12.0,), u_max=(12.0,), shape=(4096,))
    elif n == 2:
        grid = LogGrid(u_min=(-8.0, -8.0), u_max=(8.0, 8.0), shape=(256, 256))
    else:
        raise ConfigError("defaults exist for n in {1, 2} only")
    kw = dict(grid=grid, strip=MellinStrip((0.5,) * n), alpha=alpha)
    kw.update(overrides)
    return InversionConfig(**kw)


# ---------------------------------------------------------------------------
# stage 1: profit samples on the log grid


def _cache_dir() -> str:
    env = os.environ.get("CESRADON_CACHE_DIR")
    if env:
        return env
    return os.path.join(os.path.expanduser("~"), ".cache", "cesradon")


def _sample_key(m: MeasureModel, grid: LogGrid, alpha: float, tol: float, p0: float):
    try:
        mjson = measure_to_json(m)
    except Exception:
        return None  # not serializable (callbacks) -> not cacheable
    payload = json.dumps(
        {
            "measure": mjson,
            "grid": [list(grid.u_min), list(grid.u_max), list(grid.shape)],
            "alpha": alpha,
            "tol": tol,
            "p0": p0,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()


def _cache_load(key: str, shape) -> Optional[np.ndarray]:
    path = os.path.join(_cache_dir(), key + ".bin")
    try:
        with open(path, "rb") as fh:
            if fh.readline() != _CACHE_HEADER:
                return None
            if fh.readline().strip().decode() != key:
                return None
            raw = np.frombuffer(fh.read(), dtype="<f8")
    except (OSError, ValueError):
        return None
    if raw.size != int(np.prod(shape)):
        return None
    return raw.reshape(shape).copy()


def _cache_store(key: str, values: np.ndarray) -> None:
    cdir = _cache_dir()
    try:
        os.makedirs(cdir, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=cdir, suffix=".tmp")
        with os.fdopen(fd, "wb") as fh:
            fh.write(_CACHE_HEADER)
            fh.write(key.encode() + b"\n")
            fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())
        os.replace(tmp, os.path.join(cdir, key + ".bin"))
    except OSError:
        pass  # cache is best-effort


def sample_profit_log(
    source: Union[MeasureModel, Callable],
    cfg: InversionConfig,
    tol: float = 1e-7,
    p0: float = 1.0,
    cache: bool = True,
) -> np.ndarray:
    """Pi(e^{u_1}, ..., e^{u_n}; 1) on the configuration grid.

    ``source`` is a MeasureModel, or a callable ``f(p, p0) -> float``
    evaluating the profit.  When ``p0 != 1`` the samples are reduced through
    degree-1 homogeneity: Pi(q, 1) = Pi(q p0, p0) / p0.

    MeasureModel samples are cached on disk (keyed by measure, grid, alpha,
    tol), so re-runs with a different strip or truncation reuse them; set
    CESRADON_CACHE_DIR to relocate, ``cache=False`` to bypass.
    """
    grid = cfg.grid
    p0 = float(p0)
    if not p0 > 0:
        raise ConfigError("reference level p0 must be positive")

    if isinstance(source, MeasureModel):
        key = _sample_key(source, grid, cfg.alpha, tol, p0) if cache else None
        if key is not None:
            hit = _cache_load(key, grid.shape)
            if hit is not None:
                return hit
        out = _sample_measure(source, cfg, tol, p0)
        if key is not None:
            _cache_store(key, out)
        return out

    # generic evaluator: loop over grid points
    pts = np.exp(np.stack([g.ravel() for g in grid.mesh()], axis=-1))
    flat = np.array([float(source(pt * p0, p0)) / p0 for pt in pts])
    return flat.reshape(grid.shape)


def _sample_measure(m: MeasureModel, cfg: InversionConfig, tol: float, p0: float):
    grid = cfg.grid
    d = m.density
    axes = _backend.build_axes(d) if isinstance(d, Separable) else None
    if m.atomic.atoms:
        axes = None  # atoms need the full transform; go pointwise

    if axes is not None:
        q = np.exp(np.stack([g.ravel() for g in grid.mesh()], axis=-1))
        vals = _backend.profit_rows(axes, cfg.alpha, q * p0, np.full(len(q), p0), tol=tol)
        return (vals / p0).reshape(grid.shape)

    pts = np.exp(np.stack([g.ravel() for g in grid.mesh()], axis=-1))
    flat = np.array(
        [
            profit_transform(m, PricePoint(pt * p0, p0), cfg.alpha, tol=tol) / p0
            for pt in pts
        ]
    )
    return flat.reshape(grid.shape)


# ---------------------------------------------------------------------------
# stage 2: Mellin transform by FFT


def _axis_outer(grid: LogGrid, axis_arrays):
    """Broadcast per-axis 1-d arrays to the full tensor by summing none,
    i.e. return a list reshaped for broadcasting along each axis."""
    out = []
    for k, arr in enumerate(axis_arrays):
        shape = [1] * grid.dim
        shape[k] = len(arr)
        out.append(np.asarray(arr).reshape(shape))
    return out


def _edge_window(n: int, frac: float = 0.1) -> np.ndarray:
    """Cosine roll-off over the outer ``frac`` of samples at each end."""
    w = np.ones(n)
    e = max(2, int(round(frac * n)))
    ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(e) / e))
    w[:e] = ramp
    w[-e:] = ramp[::-1]
    return w


def mellin_of_profit(
    samples: np.ndarray,
    cfg: InversionConfig,
    boundary_tol: float = 3e-2,
    apodize: bool = True,
) -> Spectrum:
    """M(tau) = int p^{-c-i tau} Pi(p^{1/alpha}, 1) dp on the FFT lattice.

    With p = q^alpha = e^{alpha u} the integral per axis is
    alpha * int e^{alpha(1-c) u} Pi(e^u, 1) e^{-i (alpha tau) u} du, i.e. a
    plain DFT of the exponentially weighted samples.

    The weighted samples must have decayed at the grid edges; if an edge
    still holds more than ``boundary_tol`` of the peak, the grid is too
    small and BoundaryLeak is raised.  The default threshold (3e-2, not
    something stricter) reflects the actual e^{-alpha(1-c)|u|} edge decay of
    profit samples on workable grid sizes; ``apodize`` then rolls the edges
    to zero so the residual leak does not ring across the spectrum.
    """
    grid = cfg.grid
    samples = np.asarray(samples, dtype=float)
    if samples.shape != grid.shape:
        raise ConfigError(f"samples shape {samples.shape} != grid shape {grid.shape}")
    alpha = cfg.alpha
    c = cfg.strip.c

    nodes = [grid.axis_nodes(k) for k in range(grid.dim)]
    weights = _axis_outer(
        grid, [np.exp(alpha * (1.0 - c[k]) * nodes[k]) for k in range(grid.dim)]
    )
    f = samples.astype(float)
    for wk in weights:
        f = f * wk

    peak = np.max(np.abs(f))
    if peak > 0.0:
        for k in range(grid.dim):
            for side, idx in (("low", 0), ("high", -1)):
                edge = np.max(np.abs(np.take(f, idx, axis=k)))
                if edge > boundary_tol * peak:
                    raise BoundaryLeak(
                        f"axis {k} {side} edge holds {edge/peak:.2e} of the peak "
                        f"(> {boundary_tol:g}); enlarge the grid range"
                    )
        if apodize:
            for wk in _axis_outer(grid, [_edge_window(nk) for nk in grid.shape]):
                f = f * wk

    spec = np.fft.fftn(f)
    kappas = _kappa_axes(grid)
    for k, kap in enumerate(_axis_outer(grid, kappas)):
        spec = spec * np.exp(-1j * kap * grid.u_min[k])
    du = np.prod([grid.spacing(k) for k in range(grid.dim)])
    spec *= alpha**grid.dim * du
    return Spectrum(grid, spec)


# ---------------------------------------------------------------------------
# stage 3: divide out the Beta factors


def _strip_points(cfg: InversionConfig):
    """t = c + i tau on the lattice, stacked along the last axis."""
    taus = _axis_outer(cfg.grid, cfg.tau_axes())
    full = [np.broadcast_to(t, cfg.grid.shape) for t in taus]
    tau = np.stack(full, axis=-1)
    return np.asarray(cfg.strip.c) + 1j * tau


def spectral_divide(M: Spectrum, cfg: InversionConfig) -> Spectrum:
    """Divide by alpha * B(1-t) * B(2, alpha(n - sum t)) pointwise.

    What remains is the Fourier transform (in the e^{+i tau x} convention)
    of phi(x) = a_*(e^x) e^{c.x}.  The constant is alpha to the first power
    for every n: the Beta product absorbs one radial substitution, not one
    per axis.
    """
    t = _strip_points(cfg)
    n = cfg.grid.dim
    denom = (
        cfg.alpha
        * beta_multivariate(1.0 - t)
        * beta2(cfg.alpha * (n - t.sum(axis=-1)))
    )
    denom = np.asarray(denom)
    if np.any(np.abs(denom) < 1e-280) or not np.all(np.isfinite(denom)):
        raise PoleError("Beta divisor vanished on the contour; config corrupt")
    return Spectrum(M.grid, M.values / denom)


# ---------------------------------------------------------------------------
# stage 4: truncated inverse transform and unwarp


def _radial_mask(cfg: InversionConfig) -> np.ndarray:
    if cfg.radius is None:
        return np.ones(cfg.grid.shape)
    taus = _axis_outer(cfg.grid, cfg.tau_axes())
    r2 = np.zeros(cfg.grid.shape)
    for t in taus:
        r2 = r2 + t * t
    r = np.sqrt(r2)
    if cfg.taper == "hard":
        return (r <= cfg.radius).astype(float)
    return np.exp(-((r / cfg.radius) ** 8) * np.log(10.0))


def reconstruct_density(S: Spectrum, cfg: InversionConfig):
    """Invert the spectrum to density samples on the exp-image grid.

    phi(x_j) with x = alpha u comes from the e^{-i tau x} synthesis (a
    forward FFT after the boundary phase); then the strip factor e^{-c.x}
    and the unwarp a(z) = alpha^n a_*(z^alpha) prod z_k^{alpha-1} with
    z = e^u are applied pointwise.  Returns a GridSampled density.
    """
    grid = cfg.grid
    alpha = cfg.alpha
    G = S.values * _radial_mask(cfg)
    kappas = _kappa_axes(grid)
    for k, kap in enumerate(_axis_outer(grid, kappas)):
        G = G * np.exp(-1j * kap * grid.u_min[k])
    h = np.fft.fftn(G)
    norm = np.prod(
        [1.0 / (alpha * grid.shape[k] * grid.spacing(k)) for k in range(grid.dim)]
    )
    phi = h * norm

    nodes = [grid.axis_nodes(k) for k in range(grid.dim)]
    c = cfg.strip.c
    vals = alpha**grid.dim * np.real(phi)
    for k, uk in enumerate(_axis_outer(grid, nodes)):
        vals = vals * np.exp((-alpha * c[k] + alpha - 1.0) * uk)
    return GridSampled(grid, vals)


# ---------------------------------------------------------------------------
# explicit kernel (independent of the FFT path)


def _kernel_integrand_factory(u, strip: MellinStrip, alpha: float):
    u = np.asarray(u, dtype=float)
    n = u.size
    c = np.asarray(strip.c)
    logu = np.log(u)

    def integrand(tau):
        # tau: (..., n) real -> complex integrand values
        t = c + 1j * np.asarray(tau)
        expo = -alpha * (t - 1.0) - 1.0
        powers = np.exp(np.sum(expo * logu, axis=-1))
        denom = beta_multivariate(1.0 - t) * beta2(alpha * (n - t.sum(axis=-1)))
        return powers / denom

    return integrand


def _gl_nodes(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return x, w


def _kernel_1d_exact(u: float, c: float, alpha: float, R: float) -> float:
    """Truncated n=1 kernel in closed form.

    With w0 = alpha(1-c) and b = alpha ln u the contour integrand is
    u^{w0-1} (A + B tau + C tau^2) e^{-i b tau}, A = w0(w0+1),
    B = -i alpha(2 w0 + 1), C = -alpha^2, because 1/B(2,w) = w(w+1).
    The symmetric tau-moments are elementary, so no quadrature is needed
    and the result is exactly real.
    """
    w0 = alpha * (1.0 - c)
    b = alpha * math.log(u)
    A = w0 * (w0 + 1.0)
    Bc = alpha * (2.0 * w0 + 1.0)  # B = -i*Bc
    if abs(b) * R < 1e-6:
        # small-phase series of A*I0 + B*I1 + C*I2
        val = 2.0 * R * A - alpha**2 * (2.0 * R**3 / 3.0) - Bc * (2.0 * R**3 / 3.0) * b
    else:
        s, co = math.sin(R * b), math.cos(R * b)
        I0 = 2.0 * s / b
        # B*I1 = -2 Bc [sin(Rb) - Rb cos(Rb)] / b^2  (real)
        BI1 = -2.0 * Bc * (s - R * b * co) / (b * b)
        # C*I2 = -2 alpha^2 [2Rb cos(Rb) + (R^2 b^2 - 2) sin(Rb)] / b^3
        CI2 = -2.0 * alpha**2 * (2.0 * R * b * co + (R * R * b * b - 2.0) * s) / b**3
        val = A * I0 + BI1 + CI2
    return alpha / (2.0 * np.pi) * u ** (w0 - 1.0) * val


def kernel_eval(
    u,
    strip: MellinStrip,
    alpha: float,
    R: float,
    tol: float = 1e-9,
    full_output: bool = False,
):
    """The inversion kernel K_alpha(u; c) truncated at |tau| <= R.

    K = alpha^{2n-1}/(2 pi)^n * int_{|tau|<=R}
        prod u_k^{-alpha(c_k + i tau_k - 1) - 1}
        / [B(1 - c - i tau) B(2, alpha(n - sum (c_k + i tau_k)))] d tau

    Returns the real part; with ``full_output`` a (real, imag) pair — the
    imaginary part is a discretization diagnostic, ~0 by conjugate symmetry
    (exactly 0 for n = 1, where the moments close in elementary terms and
    no quadrature runs).  Emits TruncationWarning when the integrand at
    |tau| = R is not yet negligible against the accumulated value.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    n = u.size
    if n > 2:
        raise NotImplementedError("kernel_eval supports n <= 2")
    if np.any(u <= 0):
        raise ConfigError("kernel argument must be strictly positive")
    if not R > 0:
        raise ConfigError("truncation radius must be positive")
    validate_alpha(alpha)
    if strip.dim != n:
        raise ConfigError("strip dimension does not match the argument")
    if n == 1:
        out = _kernel_1d_exact(float(u[0]), float(strip.c[0]), alpha, R)
        if full_output:
            return out, 0.0
        return out
    f = _kernel_integrand_factory(u, strip, alpha)
    pref = alpha ** (2 * n - 1) / (2.0 * np.pi) ** n

    prev = None
    val = None
    for m in (32, 64, 128, 256, 512, 1024):
        # polar: int_0^R r dr int_0^{2pi} dtheta, trapezoid in the angle
        xr, wr = _gl_nodes(m)
        r = 0.5 * R * (xr + 1.0)
        ang = 2.0 * np.pi * np.arange(2 * m) / (2 * m)
        tau = np.stack(
            [
                r[:, None] * np.cos(ang)[None, :],
                r[:, None] * np.sin(ang)[None, :],
            ],
            axis=-1,
        )
        vals = f(tau)
        val = (0.5 * R) * (2.0 * np.pi / (2 * m)) * np.sum(
            wr[:, None] * r[:, None] * vals
        )
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            break
        prev = val
    else:
        raise NonConvergent("kernel quadrature did not settle")

    # tail heuristic: integrand magnitude on the truncation sphere
    ang = 2.0 * np.pi * np.arange(16) / 16
    rim_pts = np.stack([R * np.cos(ang), R * np.sin(ang)], axis=-1)
    rim = float(np.mean(np.abs(f(rim_pts)))) * np.pi * R**2
    if rim > 1e-3 * max(abs(val), 1e-300):
        warnings.warn(
            f"kernel integrand at |tau|={R:g} is {rim:.2e} vs accumulated "
            f"{abs(val):.2e}; raise R",
            TruncationWarning,
        )
    out = pref * val
    if full_output:
        return float(np.real(out)), float(np.imag(out))
    return float(np.real(out))


def reconstruct_via_kernel(
    profit: Callable,
    x,
    strip: MellinStrip,
    alpha: float,
    R: float,
    tol: float = 1e-6,
) -> float:
    """a(x) = int K_alpha(p_1 x_1, ..., p_n x_n; c) Pi(p, 1) dp by quadrature.

    ``profit(q_vector) -> Pi(q, 1)``.  Fully independent of the FFT
    pipeline; n <= 2.  One axis integrates the closed-form kernel against
    the profit adaptively.  Two axes run the contour-disk form with the
    profit tabulated on a log-price lattice; since the Beta division
    amplifies absolute table error like e^{pi R}, that route is practical
    for R up to about 5 and raises NonConvergent beyond what the table
    can support.
    """
    from scipy.integrate import quad

    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    if strip.dim != n:
        raise ConfigError("strip dimension does not match the argument")
    if n == 1:

        def g(w):
            p = float(np.exp(w))
            pv = float(profit(np.array([p])))
            if pv == 0.0:
                return 0.0
            return kernel_eval(x * p, strip, alpha, R) * pv * p

        # the kernel oscillates at frequency alpha*R/(2 pi) per unit w, so
        # give the adaptive rule enough subdivisions to track the phase
        lim = max(400, int(20 * alpha * R))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            lo, _ = quad(g, -50.0, 0.0, limit=lim, epsabs=tol, epsrel=1e-8)
            hi, _ = quad(g, 0.0, 50.0, limit=lim, epsabs=tol, epsrel=1e-8)
        return lo + hi

    # n = 2: swap the integration order; the p-integral of the kernel's
    # power factors against Pi is M(t)/alpha^n, so
    # a(x) = alpha^{n-1}/(2 pi)^n * int_{|tau|<=R}
    #        prod x_k^{-alpha(t_k-1)-1} M(t)/[B(1-t) B2(alpha(n-sum t))] dtau
    # Evaluating M afresh per contour node would nest three quadratures.
    # Instead Pi is tabulated once per resolution level on a trapezoid
    # lattice in w = log p (wide enough that the weighted integrand has
    # died at the rim), and every M(t) collapses to matrix products
    # against the same table.
    c = np.asarray(strip.c)
    logx = np.log(x)

    def weighted(w1, w2):
        q = np.array([math.exp(w1 / alpha), math.exp(w2 / alpha)])
        return math.exp((1.0 - c[0]) * w1 + (1.0 - c[1]) * w2) * float(profit(q))

    W = 12.0
    while True:
        line = np.linspace(-W, W, 17)
        edge = max(
            max(abs(weighted(s * W, v)) for s in (-1, 1) for v in line),
            max(abs(weighted(v, s * W)) for s in (-1, 1) for v in line),
        )
        interior = max(abs(weighted(a_, b_)) for a_ in line[2::3] for b_ in line[2::3])
        if interior == 0.0:
            return 0.0
        # 1/B(1-t) grows like e^{pi R} on the antidiagonal of the ball, so
        # the table must be good in *absolute* terms well past the target
        # tolerance; the rim threshold scales accordingly
        if edge <= 3e-5 * math.exp(-np.pi * R) * interior:
            break
        if W >= 60.0:
            raise NonConvergent(
                "weighted profit integrand has not decayed on a |log p| <= 60 "
                "box; at this truncation radius the Mellin table cannot reach "
                "the absolute accuracy the Beta division demands"
            )
        W *= 1.5

    def build_lattice(dw):
        nodes = np.arange(-W, W + 0.5 * dw, dw)
        q_ax = np.exp(nodes / alpha)
        table = np.empty((nodes.size, nodes.size))
        for i, q1 in enumerate(q_ax):
            table[i] = [profit(np.array([q1, q2])) for q2 in q_ax]
        tr = np.full(nodes.size, dw)
        tr[0] = tr[-1] = 0.5 * dw  # trapezoid ends
        table *= np.outer(
            tr * np.exp((1.0 - c[0]) * nodes), tr * np.exp((1.0 - c[1]) * nodes)
        )
        return nodes, table

    def disk_value(nodes, table) -> complex:
        prev_m = None
        for m in (8, 16, 32, 64):
            xr, wr = _gl_nodes(m)
            r = 0.5 * R * (xr + 1.0)
            ang = 2.0 * np.pi * np.arange(2 * m) / (2 * m)
            total = 0.0 + 0.0j
            for ri, wi in zip(r, wr):
                tau = np.stack([ri * np.cos(ang), ri * np.sin(ang)], axis=-1)
                t = c + 1j * tau
                E1 = np.exp(-1j * np.outer(tau[:, 0], nodes))
                E2 = np.exp(-1j * np.outer(tau[:, 1], nodes))
                mell = np.sum((E1 @ table) * E2, axis=1)
                expo = -alpha * (t - 1.0) - 1.0
                powers = np.exp(np.sum(expo * logx, axis=-1))
                denom = beta_multivariate(1.0 - t) * beta2(
                    alpha * (2 - t.sum(axis=-1))
                )
                total += wi * ri * np.sum(powers * mell / denom)
            val_m = (0.5 * R) * (2.0 * np.pi / (2 * m)) * total
            if prev_m is not None and abs(val_m - prev_m) <= 10 * tol * max(
                1.0, abs(val_m)
            ):
                return val_m
            prev_m = val_m
        return val_m

    # halve the lattice step until the disk value settles; the first step
    # already puts the nearest alias of the e^{-i tau w} factor well past
    # the truncation ball
    prev = None
    dw = min(0.25, np.pi / (2.0 * R))
    for _ in range(4):
        val = disk_value(*build_lattice(dw))
        if prev is not None and abs(val - prev) <= 10 * tol * max(1.0, abs(val)):
            break
        prev = val
        dw *= 0.5
    else:
        raise NonConvergent("Mellin lattice refinement did not settle")
    return float(np.real(val) * alpha / (2.0 * np.pi) ** 2)


# ---------------------------------------------------------------------------
# Radon-side entry point


def invert_radon(rs_provider: Callable, cfg: InversionConfig, **mellin_kw):
    """Recover the density from Radon slices.

    ``rs_provider(q_vector) -> RadonSlice`` must cover p0 = 1 in its grid
    hull.  Profit samples are rebuilt slice-by-slice with
    ``profit_from_radon`` and fed to the standard pipeline.
    """
    grid = cfg.grid
    pts = np.exp(np.stack([g.ravel() for g in grid.mesh()], axis=-1))
    flat = np.empty(len(pts))
    for i, q in enumerate(pts):
        rs = rs_provider(q)
        flat[i] = profit_from_radon(rs, 1.0)
    samples = flat.reshape(grid.shape)
    spec = mellin_of_profit(samples, cfg, **mellin_kw)
    return reconstruct_density(spectral_divide(spec, cfg), cfg)
