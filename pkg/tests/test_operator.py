import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import naive_convolution
from regtest.operator import (
    KernelSpec,
    adjoint,
    forward,
    kernel_multiplier,
    kernel_symbol,
    plugin_probe,
    unregularized_probe,
)
from regtest.scenario import Scenario, feature_functional
from regtest.spectral import GridFunction, PeriodicGrid, l2_inner, l2_norm, periodic_fourier, sobolev_norm

G = PeriodicGrid()


def cosine(g):
    return GridFunction.from_callable(g, lambda x: np.cos(np.pi * x))


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec(a=0.4)
    with pytest.raises(ValueError):
        KernelSpec(b=0.0)


@pytest.mark.parametrize(
    "k, a, expected",
    [(0, 2, 1.0), (10, 2, 1.09**-2), (10, 4, 1.09**-4)],
)
def test_multiplier_values(k, a, expected):
    assert kernel_multiplier(k, KernelSpec(a), G) == pytest.approx(expected, rel=1e-14)


def test_multiplier_printed_digits():
    assert round(kernel_multiplier(10, KernelSpec(2), G), 6) == 0.841680
    assert round(kernel_multiplier(10, KernelSpec(4), G), 6) == 0.708425


@pytest.mark.parametrize("a", [2.0, 4.0])
def test_multiplier_monotone(a):
    m = kernel_symbol(KernelSpec(a), G)
    assert m[0] == 1.0
    assert np.all(np.diff(m) < 0)
    assert np.all(m[1:] < 1)


def test_forward_examples():
    ks = KernelSpec(2)
    one = GridFunction(G, np.ones(G.n))
    np.testing.assert_allclose(forward(one, ks).values, 1.0, atol=1e-14)
    c = cosine(G)
    np.testing.assert_allclose(forward(c, ks).values, 1.0009**-2 * c.values, atol=1e-14)
    np.testing.assert_allclose(adjoint(GridFunction.zeros(G), ks).values, 0.0)


@pytest.mark.parametrize("a", [2.0, 4.0])
def test_forward_matches_quadratic_convolution(a):
    g = PeriodicGrid(32)
    rng = np.random.default_rng(6)
    v = np.zeros(32)
    v[:16] = rng.standard_normal(16)
    got = forward(GridFunction(g, v), KernelSpec(a)).values
    np.testing.assert_allclose(got, naive_convolution(v, a, 0.06), atol=1e-10)


def test_spectrum_scaled_by_multiplier():
    rng = np.random.default_rng(7)
    ks = KernelSpec(2)
    u = GridFunction(G, rng.standard_normal(G.n))
    ratio = periodic_fourier(forward(u, ks)).coeffs / periodic_fourier(u).coeffs
    np.testing.assert_allclose(ratio, kernel_multiplier(G.frequencies, ks, G), rtol=1e-9)


def test_self_adjoint_random_pairs():
    rng = np.random.default_rng(8)
    ks = KernelSpec(2)
    for _ in range(100):
        u, v = GridFunction(G, rng.standard_normal(G.n)), GridFunction(G, rng.standard_normal(G.n))
        assert abs(l2_inner(forward(u, ks), v) - l2_inner(u, adjoint(v, ks))) < 1e-10


def test_unregularized_probe_examples():
    ks = KernelSpec(2)
    one = GridFunction(G, np.ones(G.n))
    np.testing.assert_allclose(unregularized_probe(one, ks).values, 1.0, atol=1e-13)
    c = cosine(G)
    # high-frequency roundoff is amplified by 1/m(n/2) ~ 6e4
    np.testing.assert_allclose(unregularized_probe(c, ks).values, 1.0009**2 * c.values, atol=1e-10)


def test_unregularized_probe_inverts_forward():
    s = Scenario("s1")
    phi = feature_functional(s, G)
    back = forward(unregularized_probe(phi, s.kernel), s.kernel)
    assert np.max(np.abs(back.values - phi.values)) <= 1e-8 * np.max(np.abs(phi.values))


def test_ill_posedness_marker():
    s = Scenario("s3", a=4.0)
    phi = feature_functional(s, G)
    ratio = l2_norm(unregularized_probe(phi, s.kernel)) / l2_norm(phi)
    assert ratio >= 1e3


def test_plugin_examples():
    ks = KernelSpec(2)
    one = GridFunction(G, np.ones(G.n))
    np.testing.assert_allclose(plugin_probe(one, ks, 1.0).values, 0.5, atol=1e-14)
    c = cosine(G)
    m1 = 1.0009**-2
    np.testing.assert_allclose(plugin_probe(c, ks, 1e-14).values, c.values / m1, atol=1e-10)
    with pytest.raises(ValueError):
        plugin_probe(c, ks, 0.0)


def test_plugin_coefficients_match_formula():
    rng = np.random.default_rng(9)
    ks = KernelSpec(2)
    phi = GridFunction(G, rng.standard_normal(G.n))
    m = kernel_multiplier(G.frequencies, ks, G)
    got = periodic_fourier(plugin_probe(phi, ks, 1e-3)).coeffs
    want = m / (m**2 + 1e-3) * periodic_fourier(phi).coeffs
    np.testing.assert_allclose(got, want, atol=1e-12)


@given(
    arrays(float, 64, elements=st.floats(-1e3, 1e3, allow_nan=False)),
    st.sampled_from([2.0, 4.0]),
    st.floats(0, 2),
)
def test_contraction_on_sobolev_spaces(v, a, t):
    e = GridFunction(PeriodicGrid(64), v)
    assert sobolev_norm(forward(e, KernelSpec(a)), 0) <= sobolev_norm(e, t) * (1 + 1e-12) + 1e-300
