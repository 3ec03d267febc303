"""Backend selection and compiled/fallback equivalence."""

import os
import subprocess
import sys

import numpy as np
import pytest

from cesradon import _backend, _slowpath
from cesradon.measures import Factor, Separable

HAS_COMPILED = _backend.BACKEND == "compiled"

FIXTURES = {
    "smooth": Separable(
        axes=((Factor("exponential"),), (Factor("exponential", rate=2.0),))
    ),
    "kinky": Separable(
        axes=(
            (Factor("exponential", rate=1.3),),
            (Factor("power", exponent=0.7, cutoff=1.5),),
        )
    ),
    "gaussian": Separable(
        axes=(
            (Factor("gaussian"), Factor("power", exponent=1.0)),
            (Factor("exponential"),),
        )
    ),
}


def test_backend_name_is_valid():
    assert _backend.BACKEND in ("compiled", "fallback")


def test_force_fallback_env_honored():
    code = "import cesradon._backend as b; print(b.BACKEND)"
    env = dict(os.environ, CESRADON_FORCE_FALLBACK="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.stdout.strip() == "fallback"


@pytest.mark.skipif(not HAS_COMPILED, reason="compiled extension not built")
@pytest.mark.parametrize("name", sorted(FIXTURES))
@pytest.mark.parametrize("alpha", [1.0, 0.5])
def test_compiled_matches_fallback(name, alpha):
    axes = _slowpath.build_axes(FIXTURES[name])
    rng = np.random.default_rng(17)
    q = rng.uniform(0.25, 2.5, size=(60, 2))
    p0 = rng.uniform(0.1, 3.0, size=60)
    fast_p = _backend.profit_rows(axes, alpha, q, p0, tol=1e-11)
    slow_p = _slowpath.profit_rows(axes, alpha, q, p0, tol=1e-11)
    np.testing.assert_allclose(fast_p, slow_p, atol=1e-9, rtol=1e-9)
    fast_m = _backend.mass_rows(axes, alpha, q, p0, tol=1e-11)
    slow_m = _slowpath.mass_rows(axes, alpha, q, p0, tol=1e-11)
    np.testing.assert_allclose(fast_m, slow_m, atol=1e-9, rtol=1e-9)


@pytest.mark.skipif(not HAS_COMPILED, reason="compiled extension not built")
def test_compiled_matches_fallback_one_dim():
    axes = _slowpath.build_axes(Separable(axes=((Factor("exponential"),),)))
    rng = np.random.default_rng(23)
    q = rng.uniform(0.25, 2.5, size=(40, 1))
    p0 = rng.uniform(0.1, 3.0, size=40)
    np.testing.assert_allclose(
        _backend.profit_rows(axes, 0.6, q, p0),
        _slowpath.profit_rows(axes, 0.6, q, p0),
        atol=1e-10,
    )
    np.testing.assert_allclose(
        _backend.mass_rows(axes, 0.6, q, p0),
        _slowpath.mass_rows(axes, 0.6, q, p0),
        atol=1e-12,
    )
