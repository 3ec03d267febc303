"""Forward-transform tests: frozen values, oracle cross-checks, invariants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cesradon import oracle
from cesradon.ces import PricePoint, ces_dot
from cesradon.errors import MethodUnavailable, OutOfRange, UnboundedRegion
from cesradon.forward import (
    RadonSlice,
    profit_from_radon,
    profit_transform,
    radon_slice,
    sublevel_mass,
)
from cesradon.grids import LogGrid
from cesradon.measures import (
    AtomicMeasure,
    Box,
    Callback,
    Factor,
    GridSampled,
    MeasureModel,
    Separable,
    eval_density,
    warp_density,
)

EXP1 = MeasureModel(density=Separable(axes=((Factor("exponential"),),)))
EXP2 = MeasureModel(
    density=Separable(
        axes=((Factor("exponential"),), (Factor("exponential", rate=2.0),))
    )
)
UNIT_BOX = MeasureModel(density=Box(corner=np.array([1.0, 1.0]), value=1.0))


# ---------------------------------------------------------------------------
# frozen example values


def test_profit_single_atom():
    m = MeasureModel(atomic=AtomicMeasure((((1.0, 1.0), 1.0),)))
    assert profit_transform(m, PricePoint((1, 1), 3.0), 1.0) == pytest.approx(1.0)


def test_mass_atom_on_boundary_counts_inside():
    m = MeasureModel(atomic=AtomicMeasure((((1.0, 1.0), 1.0),)))
    assert sublevel_mass(m, PricePoint((1, 1), 1.0), 1.0) == 0.0
    assert sublevel_mass(m, PricePoint((1, 1), 2.0), 1.0) == 1.0  # 1+1 == 2


def test_profit_exponential_closed_form():
    # integral of (1 - x)_+ e^{-x} = e^{-1}
    val = profit_transform(EXP1, PricePoint((1.0,), 1.0), 1.0)
    assert val == pytest.approx(np.exp(-1), abs=1e-12)


def test_mass_exponential_cdf():
    val = sublevel_mass(EXP1, PricePoint((1.0,), 2.0), 1.0)
    assert val == pytest.approx(1 - np.exp(-2), abs=1e-12)


def test_profit_unit_box_sixth():
    val = profit_transform(UNIT_BOX, PricePoint((1, 1), 1.0), 1.0)
    assert val == pytest.approx(1.0 / 6.0, abs=1e-12)


def test_mass_unit_box_triangle():
    val = sublevel_mass(UNIT_BOX, PricePoint((1, 1), 1.0), 1.0)
    assert val == pytest.approx(0.5, abs=1e-12)


def test_profit_two_dim_exponential_closed_form():
    # unit-rate exp x unit-rate exp at p=(1,1), p0=1: 3/e - 1
    m = MeasureModel(
        density=Separable(axes=((Factor("exponential"),), (Factor("exponential"),)))
    )
    val = profit_transform(m, PricePoint((1, 1), 1.0), 1.0)
    assert val == pytest.approx(3.0 / np.e - 1.0, abs=1e-12)


def test_radon_exponential_slice():
    grid = np.array([0.5, 1.0, 1.5])
    rs = radon_slice(EXP1, (1.0,), 1.0, grid)
    assert rs.values == pytest.approx(np.exp(-grid), abs=1e-9)
    assert rs.cdf_values == pytest.approx(1 - np.exp(-grid), abs=1e-10)


def test_radon_box_both_methods_half():
    for method in ("derivative", "surface"):
        rs = radon_slice(UNIT_BOX, (1.0, 1.0), 1.0, np.array([0.5]), method=method)
        assert rs.values[0] == pytest.approx(0.5, abs=1e-7), method


def test_radon_zero_measure_is_zero():
    m = MeasureModel(density=Box(corner=np.array([1.0, 1.0]), value=0.0))
    for method in ("derivative", "surface"):
        rs = radon_slice(m, (1.0, 1.0), 1.0, np.array([0.3, 0.7]), method=method)
        assert np.all(rs.values == 0.0)


# ---------------------------------------------------------------------------
# oracle cross-checks


def test_engine_profit_vs_nested_quadrature():
    p = np.array([1.0, 1.3])
    p0, a = 0.9, 0.5

    def integrand(x1, x2):
        x2 = np.atleast_1d(x2)
        gap = p0 - (((p[0] * x1) ** a + (p[1] * x2) ** a)) ** (1 / a)
        return np.clip(gap, 0.0, None) * np.exp(-x1 - 2.0 * x2)

    ref = oracle.nested_quadrature(
        integrand,
        [(0.0, p0 / p[0]), (0.0, lambda x1: ((p0**a - (p[0] * x1) ** a) ** (1 / a)) / p[1])],
        tol=1e-10,
    )
    val = profit_transform(EXP2, PricePoint(p, p0), a, tol=1e-11)
    assert val == pytest.approx(ref, abs=1e-9)


def test_engine_profit_vs_monte_carlo():
    p = np.array([0.8, 1.1])
    p0, a = 1.2, 0.7

    def integrand(x):
        gap = p0 - ((p[0] * x[:, 0]) ** a + (p[1] * x[:, 1]) ** a) ** (1 / a)
        return np.clip(gap, 0.0, None) * np.exp(-x[:, 0] - 2.0 * x[:, 1])

    est, err = oracle.mc_integrate(integrand, [(0.0, 12.0), (0.0, 12.0)], 400_000, seed=42)
    val = profit_transform(EXP2, PricePoint(p, p0), a)
    assert abs(val - est) < 4 * err + 1e-6


def test_callback_generic_path_matches_engine():
    cb = Callback(
        fn=lambda pts: np.exp(-pts[..., 0] - 2.0 * pts[..., 1]),
        dim=2,
        support_radius=np.inf,
        nonnegative=True,
    )
    pp = PricePoint((1.0, 1.3), 0.9)
    v_gen = profit_transform(MeasureModel(density=cb), pp, 0.5, tol=1e-9)
    v_eng = profit_transform(EXP2, pp, 0.5, tol=1e-11)
    assert v_gen == pytest.approx(v_eng, abs=1e-7)
    m_gen = sublevel_mass(MeasureModel(density=cb), pp, 0.5, tol=1e-9)
    m_eng = sublevel_mass(EXP2, pp, 0.5, tol=1e-11)
    assert m_gen == pytest.approx(m_eng, abs=1e-7)


def test_gridsampled_profit_near_closed_form():
    lg = LogGrid(u_min=(-8.0,), u_max=(3.0,), shape=(400,))
    vals = np.exp(-np.exp(lg.axis_nodes(0)))
    m = MeasureModel(density=GridSampled(lg, vals))
    val = profit_transform(m, PricePoint((1.0,), 1.0), 1.0, tol=1e-8)
    # limited by the 400-node log-linear interpolant, not the quadrature
    assert val == pytest.approx(np.exp(-1), abs=2e-3)


# ---------------------------------------------------------------------------
# invariants


@settings(max_examples=60, deadline=None)
@given(
    lam=st.floats(0.1, 10.0),
    q=st.floats(0.2, 4.0),
    p0=st.floats(0.1, 3.0),
)
def test_profit_homogeneity_degree_one(lam, q, p0):
    tol = 1e-10
    pp = PricePoint((q,), p0)
    base = profit_transform(EXP1, pp, 1.0, tol=tol)
    scaled = profit_transform(EXP1, pp.scaled(lam), 1.0, tol=tol)
    assert abs(scaled - lam * base) <= 10 * tol * max(1.0, lam)


def test_profit_homogeneity_two_dim():
    rng = np.random.default_rng(3)
    tol = 1e-10
    for _ in range(20):
        p = rng.uniform(0.3, 2.0, size=2)
        p0 = rng.uniform(0.2, 2.5)
        lam = rng.uniform(0.1, 10.0)
        pp = PricePoint(p, p0)
        base = profit_transform(EXP2, pp, 0.5, tol=tol)
        scaled = profit_transform(EXP2, pp.scaled(lam), 0.5, tol=tol)
        assert abs(scaled - lam * base) <= 10 * tol * max(1.0, lam)


def test_sublevel_mass_scale_invariance():
    rng = np.random.default_rng(4)
    tol = 1e-10
    for _ in range(20):
        p = rng.uniform(0.3, 2.0, size=2)
        p0 = rng.uniform(0.2, 2.5)
        lam = rng.uniform(0.1, 10.0)
        pp = PricePoint(p, p0)
        a = sublevel_mass(EXP2, pp, 0.5, tol=tol)
        b = sublevel_mass(EXP2, pp.scaled(lam), 0.5, tol=tol)
        assert abs(a - b) <= 10 * tol


def test_mass_is_p0_derivative_of_profit_halving():
    # smooth density: central-difference error is O(h^2), so halving h
    # should cut the error by about 4; require at least 3.5
    pp = PricePoint((1.0, 1.3), 0.9)
    a = 0.5
    exact = sublevel_mass(EXP2, pp, a, tol=1e-13)

    def fd(h):
        up = profit_transform(EXP2, PricePoint(pp.p, pp.p0 + h), a, tol=1e-13)
        dn = profit_transform(EXP2, PricePoint(pp.p, pp.p0 - h), a, tol=1e-13)
        return (up - dn) / (2 * h)

    e1 = abs(fd(0.02) - exact)
    e2 = abs(fd(0.01) - exact)
    assert e1 / e2 >= 3.5


def test_surface_and_derivative_methods_agree():
    tol = 1e-9
    for a in (1.0, 0.5):
        for p0 in (0.4, 0.8, 1.5):
            rd = radon_slice(EXP2, (1.0, 1.3), a, np.array([p0]), method="derivative", tol=tol)
            rsu = radon_slice(EXP2, (1.0, 1.3), a, np.array([p0]), method="surface", tol=tol)
            assert abs(rd.values[0] - rsu.values[0]) <= max(1e-4, 10 * tol)


def test_profit_jointly_convex_probes():
    rng = np.random.default_rng(11)
    tol = 1e-10
    for _ in range(20):
        pa = rng.uniform(0.3, 2.0, size=3)  # (p1, p2, p0)
        pb = rng.uniform(0.3, 2.0, size=3)
        mid = 0.5 * (pa + pb)
        f = lambda v: profit_transform(EXP2, PricePoint(v[:2], v[2]), 0.5, tol=tol)
        assert f(mid) <= 0.5 * (f(pa) + f(pb)) + 10 * tol


def test_warp_identity():
    # Pi_a[density](p, p0) = int (p0 - (sum p_k^a y_k)^{1/a})_+ a_*(y) dy
    d = EXP2.density
    a = 0.5
    dw = warp_density(d, a)
    p = np.array([1.0, 1.3])
    p0 = 0.9
    pa = p**a

    def integrand(y1, y2):
        y2 = np.atleast_1d(y2)
        pts = np.stack([np.full_like(y2, y1), y2], axis=-1)
        lin = pa[0] * y1 + pa[1] * y2
        return (p0 - lin ** (1 / a)) * eval_density(dw, pts)

    rhs = oracle.nested_quadrature(
        integrand,
        [(0.0, p0**a / pa[0]), (0.0, lambda y1: (p0**a - pa[0] * y1) / pa[1])],
        tol=1e-9,
    )
    lhs = profit_transform(EXP2, PricePoint(p, p0), a, tol=1e-11)
    assert lhs == pytest.approx(rhs, abs=1e-5)


def test_cdf_samples_nondecreasing():
    grid = np.linspace(0.2, 2.4, 12)
    rs = radon_slice(EXP2, (1.0, 1.3), 0.5, grid)
    assert np.all(np.diff(rs.cdf_values) >= -1e-12)


# ---------------------------------------------------------------------------
# profit reconstruction from Radon samples


def test_profit_from_radon_exponential():
    grid = np.arange(1e-3, 1.0 + 1e-12, 1e-3)
    rs = radon_slice(EXP1, (1.0,), 1.0, grid)
    rec = profit_from_radon(rs, 1.0)
    assert rec == pytest.approx(np.exp(-1), abs=1e-3)


def test_profit_from_radon_constant_rate():
    g = np.linspace(0.1, 2.0, 50)
    rs = RadonSlice(np.array([1.0]), 1.0, g, np.full_like(g, 0.7), np.zeros_like(g))
    assert profit_from_radon(rs, 2.0) == pytest.approx(0.7 * 2.0**2 / 2, abs=1e-12)
    # interior target point, off the sample grid
    assert profit_from_radon(rs, 1.234) == pytest.approx(0.7 * 1.234**2 / 2, abs=1e-10)


def test_profit_from_radon_zero_slice():
    g = np.linspace(0.1, 2.0, 20)
    rs = RadonSlice(np.array([1.0]), 1.0, g, np.zeros_like(g), np.zeros_like(g))
    assert profit_from_radon(rs, 1.0) == 0.0


def test_profit_from_radon_out_of_hull():
    g = np.linspace(0.1, 1.0, 10)
    rs = RadonSlice(np.array([1.0]), 1.0, g, np.ones_like(g), np.zeros_like(g))
    with pytest.raises(OutOfRange):
        profit_from_radon(rs, 1.5)


# ---------------------------------------------------------------------------
# error paths


def test_unbounded_region_zero_price():
    with pytest.raises(UnboundedRegion):
        profit_transform(EXP2, PricePoint((1.0, 0.0), 1.0), 1.0)


def test_zero_price_ok_with_compact_support():
    # int over [0,1]^2 of (1 - x1)_+ = 1/2
    val = profit_transform(UNIT_BOX, PricePoint((1.0, 0.0), 1.0), 1.0)
    assert val == pytest.approx(0.5, abs=1e-8)


def test_surface_method_rejects_atoms_and_wrong_dim():
    with_atoms = MeasureModel(
        atomic=AtomicMeasure((((0.5, 0.5), 1.0),)), density=EXP2.density
    )
    with pytest.raises(MethodUnavailable):
        radon_slice(with_atoms, (1.0, 1.0), 1.0, np.array([1.0]), method="surface")
    with pytest.raises(MethodUnavailable):
        radon_slice(EXP1, (1.0,), 1.0, np.array([1.0]), method="surface")


def test_derivative_method_rejects_atom_in_stencil():
    m = MeasureModel(
        atomic=AtomicMeasure((((1.0, 1.0), 1.0),)), density=EXP2.density
    )
    lvl = float(ces_dot(np.array([1.0, 1.0]), np.array([1.0, 1.0]), 1.0))
    with pytest.raises(MethodUnavailable):
        radon_slice(m, (1.0, 1.0), 1.0, np.array([lvl]), method="derivative")
    # away from the atom level it works
    rs = radon_slice(m, (1.0, 1.0), 1.0, np.array([0.5 * lvl]), method="derivative")
    assert np.isfinite(rs.values[0])


def test_unknown_method_rejected():
    with pytest.raises(MethodUnavailable):
        radon_slice(EXP1, (1.0,), 1.0, np.array([1.0]), method="simpson")


def test_dimension_mismatch_rejected():
    with pytest.raises(OutOfRange):
        profit_transform(EXP2, PricePoint((1.0,), 1.0), 1.0)


def test_radon_slice_grid_validation():
    with pytest.raises(OutOfRange):
        RadonSlice(np.array([1.0]), 1.0, np.array([1.0, 0.5]), np.zeros(2), np.zeros(2))
    with pytest.raises(OutOfRange):
        RadonSlice(np.array([1.0]), 1.0, np.array([0.5, 1.0]), np.zeros(3), np.zeros(2))
