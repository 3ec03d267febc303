"""Named example inputs for the characterization battery.

Four clean inputs must pass every applicable check, and four corrupted ones
must each trip a specific condition:

* ``density-negative-bump`` — a density with an injected negative patch; the
  Radon samples go negative there (``radon.nonneg``).
* ``profit-degree-two`` — a synthetic profit homogeneous of degree 2 instead
  of 1 (``profit.homogeneity``).
* ``probe-oscillatory`` — a probe F whose differences change sign
  (``f.monotone``).
* ``atom-at-origin`` — mass parked at x = 0, so F(lam*p) plateaus at the atom
  weight instead of decaying (``f.decay``).

``run_battery`` executes every check that applies to the fixture's kind and
returns the reports; the command-line tool turns them into exit codes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .ces import PricePoint
from .characterize import (
    CheckReport,
    check_completely_monotone,
    check_f_bounded,
    check_f_decay,
    check_profit_conditions,
    check_radon_homogeneity,
    check_radon_nonneg,
    f_probe_from_measure,
)
from .errors import ConfigError
from .forward import profit_transform, radon_slice, sublevel_mass
from .measures import AtomicMeasure, Callback, Factor, MeasureModel, Separable

__all__ = ["Fixture", "FIXTURES", "fixture_names", "get_fixture", "run_battery"]


@dataclass(frozen=True)
class Fixture:
    """One battery input: a measure, a profit function, or a probe F."""

    name: str
    kind: str  # "measure" | "profit" | "fprobe"
    expected: str  # "clean" | "corrupted"
    flagged: Optional[str]  # condition a corrupted fixture must fail
    alpha: float
    dim: int
    build: Callable[[], object]


def _pi_unit_exp(b: float) -> float:
    # b + expm1(-b) loses all digits for small b; switch to the series
    if b < 1e-4:
        return b * b * (0.5 - b / 6.0 + b * b / 24.0)
    return b + math.expm1(-b)


def _exp_measure(n: int) -> MeasureModel:
    return MeasureModel(
        density=Separable(axes=tuple((Factor("exponential"),) for _ in range(n)))
    )


def _bump_measure() -> MeasureModel:
    def dens(pts: np.ndarray) -> np.ndarray:
        x = np.asarray(pts, dtype=float)[..., 0]
        sign = np.where((x > 1.0) & (x < 1.2), -1.0, 1.0)
        return np.where(x >= 0.0, sign * np.exp(-x), 0.0)

    return MeasureModel(
        density=Callback(fn=dens, dim=1, support_radius=50.0, nonnegative=False)
    )


def _origin_atom_measure() -> MeasureModel:
    return MeasureModel(
        atomic=AtomicMeasure(((np.zeros(1), 0.5),)),
        density=Separable(axes=((Factor("exponential"),),)),
    )


def _exp_profit():
    # profit of the unit exponential density, written degree-1 homogeneous
    def pi(p: np.ndarray, p0: float) -> float:
        q = float(p[0])
        return q * _pi_unit_exp(p0 / q)

    return pi, 1


def _degree_two_profit():
    return (lambda p, p0: p0 * p0), 1


def _exp_probe():
    return (lambda p: math.exp(-float(np.sum(p)))), 1


def _oscillatory_probe():
    return (lambda p: math.sin(float(p[0])) + 2.0), 1


FIXTURES = {
    f.name: f
    for f in (
        Fixture("density-exp-1d", "measure", "clean", None, 1.0, 1,
                lambda: _exp_measure(1)),
        Fixture("density-exp-2d", "measure", "clean", None, 1.0, 2,
                lambda: _exp_measure(2)),
        Fixture("profit-homogeneous-exp", "profit", "clean", None, 1.0, 1,
                _exp_profit),
        Fixture("probe-exp", "fprobe", "clean", None, 1.0, 1, _exp_probe),
        Fixture("density-negative-bump", "measure", "corrupted", "radon.nonneg",
                1.0, 1, _bump_measure),
        Fixture("profit-degree-two", "profit", "corrupted", "profit.homogeneity",
                1.0, 1, _degree_two_profit),
        Fixture("probe-oscillatory", "fprobe", "corrupted", "f.monotone",
                1.0, 1, _oscillatory_probe),
        Fixture("atom-at-origin", "measure", "corrupted", "f.decay",
                1.0, 1, _origin_atom_measure),
    )
}


def fixture_names() -> List[str]:
    return sorted(FIXTURES)


def get_fixture(name: str) -> Fixture:
    try:
        return FIXTURES[name]
    except KeyError:
        raise ConfigError(
            f"unknown fixture {name!r}; available: {', '.join(fixture_names())}"
        ) from None


def _probe_rows(n: int, count: int, seed: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=int(seed)))
    return 0.5 * 4.0 ** gen.uniform(0.0, 1.0, size=(count, n + 1))  # [0.5, 2]


def run_battery(fixture, seed: int = 0, tol: float = 1e-3) -> List[CheckReport]:
    """Run every check that applies to the fixture's kind.

    Parameters
    ----------
    fixture : Fixture or str
        A fixture or its registry name.
    seed : int
        Philox key for probe placement and scale draws.
    tol : float
        Relative slack handed to the profit battery; the remaining checks
        use their own defaults.

    Returns
    -------
    list of CheckReport
    """
    if isinstance(fixture, str):
        fixture = get_fixture(fixture)
    alpha, n = fixture.alpha, fixture.dim
    reports: List[CheckReport] = []

    if fixture.kind == "measure":
        m = fixture.build()
        ones = np.ones(n)
        rs = radon_slice(m, ones, alpha, np.geomspace(0.05, 8.0, 80))
        reports.append(check_radon_nonneg(rs))
        probes = _probe_rows(n, 8, seed)
        reports.append(
            check_radon_homogeneity(
                lambda p, p0: sublevel_mass(m, PricePoint(p, p0), alpha),
                probes,
                seed=seed,
            )
        )
        F = f_probe_from_measure(m, alpha)
        axis = np.array([0.6, 1.0, 1.6])
        scan = np.stack(np.meshgrid(*([axis] * n)), axis=-1).reshape(-1, n)
        reports.append(check_completely_monotone(F, scan, h=0.08))
        reports.append(check_f_bounded(F, ones))
        reports.append(check_f_decay(F, ones))
        reports.extend(
            check_profit_conditions(
                lambda p, p0: profit_transform(m, PricePoint(p, p0), alpha),
                alpha,
                probes,
                tol=tol,
                seed=seed,
            )
        )
        return reports

    if fixture.kind == "profit":
        fn, n = fixture.build()
        probes = _probe_rows(n, 8, seed)
        return check_profit_conditions(fn, alpha, probes, tol=tol, seed=seed)

    if fixture.kind == "fprobe":
        fn, n = fixture.build()
        scan = np.stack(
            np.meshgrid(*([np.linspace(0.5, 9.5, 12)] * n)), axis=-1
        ).reshape(-1, n)
        reports.append(check_completely_monotone(fn, scan))
        reports.append(check_f_bounded(fn, np.ones(n)))
        reports.append(check_f_decay(fn, np.ones(n)))
        return reports

    raise ConfigError(f"unknown fixture kind {fixture.kind!r}")
