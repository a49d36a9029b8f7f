import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import naive_dft, naive_sobolev_norm
from regtest.spectral import (
    GridFunction,
    PeriodicGrid,
    Spectrum,
    dual_sobolev_norm,
    inverse_periodic_fourier,
    l2_inner,
    periodic_fourier,
    riesz_map,
    sobolev_inner,
    sobolev_norm,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
sizes = st.sampled_from([4, 8, 16, 64])
t_values = st.sampled_from([0.0, 0.51, 1.0])


@st.composite
def grid_functions(draw, n=None):
    n = n or draw(sizes)
    g = PeriodicGrid(n)
    return GridFunction(g, draw(arrays(float, n, elements=finite)))


def test_grid_layout():
    g = PeriodicGrid(8)
    assert g.indices[0] == -4 and g.indices[-1] == 3
    np.testing.assert_allclose(g.points, 2.0 * np.arange(-4, 4) / 8)
    assert g.spacing == 0.25


@pytest.mark.parametrize("n", [3, 2, 7, 0])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ValueError):
        PeriodicGrid(n)


def test_grid_function_rejects_nonfinite():
    g = PeriodicGrid(4)
    with pytest.raises(ValueError):
        GridFunction(g, [0.0, np.nan, 1.0, 2.0])
    with pytest.raises(ValueError):
        GridFunction(g, [0.0, 1.0])


def test_grid_function_is_read_only():
    f = GridFunction(PeriodicGrid(4), np.zeros(4))
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def test_constant_has_single_coefficient():
    g = PeriodicGrid(16)
    s = periodic_fourier(GridFunction(g, np.ones(16)))
    assert s[0] == pytest.approx(1.0)
    others = [s[k] for k in range(-8, 8) if k != 0]
    np.testing.assert_allclose(others, 0, atol=1e-15)


def test_cosine_has_two_coefficients():
    g = PeriodicGrid(32)
    s = periodic_fourier(GridFunction.from_callable(g, lambda x: np.cos(np.pi * x)))
    assert s[1] == pytest.approx(0.5)
    assert s[-1] == pytest.approx(0.5)
    rest = [s[k] for k in range(-16, 16) if abs(k) != 1]
    np.testing.assert_allclose(rest, 0, atol=1e-15)


def test_transform_matches_quadratic_dft():
    rng = np.random.default_rng(1)
    g = PeriodicGrid(16)
    v = rng.standard_normal(16)
    np.testing.assert_allclose(periodic_fourier(GridFunction(g, v)).coeffs, naive_dft(v), atol=1e-12)


def test_inverse_of_single_modes():
    g = PeriodicGrid(16)
    c = np.zeros(16, complex)
    c[8] = 1.0
    np.testing.assert_allclose(inverse_periodic_fourier(Spectrum(g, c)).values, 1.0, atol=1e-15)
    c[8] = 0.0
    c[9] = c[7] = 0.5
    np.testing.assert_allclose(inverse_periodic_fourier(Spectrum(g, c)).values, np.cos(np.pi * g.points), atol=1e-14)


def test_round_trip_large_grid():
    rng = np.random.default_rng(2)
    g = PeriodicGrid(1024)
    f = GridFunction(g, rng.standard_normal(1024))
    back = inverse_periodic_fourier(periodic_fourier(f))
    assert np.max(np.abs(back.values - f.values)) < 1e-12


def test_inverse_rejects_asymmetric_spectrum():
    g = PeriodicGrid(8)
    c = np.zeros(8, complex)
    c[5] = 1.0  # k = 1 without its k = -1 partner
    with pytest.raises(ValueError, match="conjugate"):
        inverse_periodic_fourier(Spectrum(g, c))


@pytest.mark.parametrize("t", [0.0, 0.51, 3.0])
def test_norms_of_constant(t):
    f = GridFunction(PeriodicGrid(16), np.ones(16))
    assert sobolev_norm(f, t) == pytest.approx(np.sqrt(2))
    assert dual_sobolev_norm(f, t) == pytest.approx(np.sqrt(2))


def test_cosine_h1_norm():
    # two modes of size 1/2 with weight (1 + 1)^1: sqrt(2 * 2 * 2 * 1/4) = sqrt(2)
    f = GridFunction.from_callable(PeriodicGrid(64), lambda x: np.cos(np.pi * x))
    assert sobolev_norm(f, 1.0) == pytest.approx(np.sqrt(2), rel=1e-13)
    assert sobolev_norm(f, 1.0) == pytest.approx(naive_sobolev_norm(f.values, 1.0), rel=1e-12)


def test_l2_norm_scaling():
    rng = np.random.default_rng(3)
    g = PeriodicGrid(256)
    v = rng.standard_normal(256)
    assert sobolev_norm(GridFunction(g, v), 0) == pytest.approx(np.sqrt(2 / 256) * np.linalg.norm(v), rel=1e-12)


def test_dual_norm_matches_definition():
    rng = np.random.default_rng(4)
    v = rng.standard_normal(64)
    f = GridFunction(PeriodicGrid(64), v)
    assert dual_sobolev_norm(f, 0.51) == pytest.approx(naive_sobolev_norm(v, -0.51), rel=1e-12)
    assert dual_sobolev_norm(f, 0.0) == sobolev_norm(f, 0.0)


def test_negative_index_rejected():
    f = GridFunction(PeriodicGrid(4), np.ones(4))
    with pytest.raises(ValueError):
        sobolev_norm(f, -1)
    with pytest.raises(ValueError):
        dual_sobolev_norm(f, -0.5)


def test_riesz_examples():
    g = PeriodicGrid(32)
    y = GridFunction.from_callable(g, lambda x: np.cos(np.pi * x))
    assert riesz_map(y, 0) is y
    np.testing.assert_allclose(riesz_map(y, 1.0).values, 0.5 * y.values, atol=1e-15)


def test_riesz_pairing_example():
    rng = np.random.default_rng(5)
    g = PeriodicGrid(1024)
    y, e = GridFunction(g, rng.standard_normal(1024)), GridFunction(g, rng.standard_normal(1024))
    assert abs(l2_inner(y, e) - sobolev_inner(riesz_map(y, 0.51), e, 0.51)) < 1e-10


@given(grid_functions())
def test_parseval(f):
    c = periodic_fourier(f).coeffs
    lhs = sobolev_norm(f, 0) ** 2
    assert lhs == pytest.approx(2.0 * np.sum(np.abs(c) ** 2), rel=1e-10, abs=1e-12)


@given(st.data(), t_values)
def test_riesz_pairing_property(data, t):
    n = data.draw(sizes)
    y, e = data.draw(grid_functions(n)), data.draw(grid_functions(n))
    scale = 1.0 + sobolev_norm(y, 0) * sobolev_norm(e, 0)
    assert abs(l2_inner(y, e) - sobolev_inner(riesz_map(y, t), e, t)) <= 1e-10 * scale


@given(grid_functions(), st.floats(0, 3))
def test_norm_sandwich(f, t):
    lo, mid, hi = dual_sobolev_norm(f, t), sobolev_norm(f, 0), sobolev_norm(f, t)
    assert lo <= mid * (1 + 1e-12) + 1e-300
    assert mid <= hi * (1 + 1e-12) + 1e-300


@given(grid_functions())
def test_round_trip_property(f):
    back = inverse_periodic_fourier(periodic_fourier(f))
    assert np.max(np.abs(back.values - f.values)) <= 1e-12 * max(1.0, np.max(np.abs(f.values)))


@given(grid_functions(), t_values)
def test_sobolev_norm_matches_definition(f, t):
    assert sobolev_norm(f, t) == pytest.approx(naive_sobolev_norm(f.values, t), rel=1e-9, abs=1e-9)
