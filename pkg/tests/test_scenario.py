import numpy as np
import pytest

from regtest.scenario import Scenario, beta_kernel, feature_functional, feature_value, truth
from regtest.spectral import PeriodicGrid, l1_norm

G = PeriodicGrid()
BUILTINS = [
    Scenario(kind, a=a, l=l, lam=lam)
    for kind in ("s1", "s2", "s3")
    for a in (2.0, 4.0)
    for l in (5 / 128, 5 / 256)
    for lam in (0.0, 1 / 3, 2 / 3, 1.0)
]


def test_shape_exponents():
    assert (Scenario("s1", a=2).beta, Scenario("s1", a=2).gamma) == (5.0, 2.0)
    assert (Scenario("s2", a=4).beta, Scenario("s2", a=4).gamma) == (9.0, 1.0)
    assert (Scenario("S3").beta, Scenario("S3").gamma) == (1.0, 2.0)
    assert Scenario("S3").kind == "s3"


@pytest.mark.parametrize(
    "kwargs",
    [dict(kind="s4"), dict(l=0.0), dict(l=1.0), dict(lam=1.5), dict(lam=-0.1), dict(l=0.3, lam=0.0), dict(t=-1)],
)
def test_invalid_scenarios(kwargs):
    with pytest.raises(ValueError):
        Scenario(**kwargs)


def test_beta_kernel_rejects_small_shape():
    with pytest.raises(ValueError):
        beta_kernel(G.points, 0.1, 0.5)


def test_indicator_functional():
    phi = feature_functional(Scenario("s3"), G).values
    inside = phi > 0
    np.testing.assert_allclose(phi[inside], phi[inside][0])
    x = G.points[inside]
    assert x.min() == 0.0 and x.max() == pytest.approx(5 / 128)


def test_smooth_functional_shape():
    s = Scenario("s1", a=2)  # beta = 5
    phi = feature_functional(s, G).values
    x = G.points
    idx = np.flatnonzero((x >= 0) & (x <= s.l + 1e-12))
    vals = phi[idx]
    assert vals[0] == 0 and vals[-1] == pytest.approx(0, abs=1e-12)
    np.testing.assert_allclose(vals, vals[::-1], atol=1e-12)
    assert x[idx][np.argmax(vals)] == pytest.approx(s.l / 2)


@pytest.mark.parametrize("s", BUILTINS, ids=str)
def test_normalizations(s):
    phi = feature_functional(s, G)
    u = truth(s, G)
    assert np.linalg.norm(np.sqrt(G.spacing) * phi.values) == pytest.approx(1.0, abs=1e-12)
    assert l1_norm(u) == pytest.approx(1.0, abs=1e-12)
    assert np.all(phi.values >= 0) and np.all(u.values >= 0)
    x = G.points[u.values > 0]
    assert x.min() >= (1 - s.lam) * s.l - G.spacing / 2 - 1e-12
    assert x.max() <= (2 - s.lam) * s.l + G.spacing / 2 + 1e-12


def test_truth_support_extremes():
    s = Scenario("s2", lam=1.0)
    x = G.points[truth(s, G).values > 0]
    assert x.min() == 0.0 and x.max() == pytest.approx(s.l)
    s0 = Scenario("s1", lam=0.0)
    x0 = G.points[truth(s0, G).values > 0]
    assert x0.min() > s0.l - 1e-12 and x0.max() < 2 * s0.l + 1e-12


def test_nonsmooth_truth_is_indicator():
    u = truth(Scenario("s2", lam=2 / 3), G).values
    np.testing.assert_allclose(u[u > 0], u[u > 0][0])


def test_disjoint_supports_have_zero_feature():
    for kind in ("s1", "s2", "s3"):
        s = Scenario(kind, lam=0.0)
        assert abs(feature_value(feature_functional(s, G), truth(s, G))) < 1e-12


@pytest.mark.parametrize("kind", ["s1", "s2", "s3"])
@pytest.mark.parametrize("a", [2.0, 4.0])
@pytest.mark.parametrize("l", [5 / 128, 5 / 256])
def test_feature_positive_and_monotone(kind, a, l):
    vals = []
    for lam in (1 / 3, 2 / 3, 1.0):
        s = Scenario(kind, a=a, l=l, lam=lam)
        vals.append(feature_value(feature_functional(s, G), truth(s, G)))
    assert all(v > 0 for v in vals)
    assert vals[0] <= vals[1] <= vals[2]


def test_feature_value_is_scaled_pairing():
    s = Scenario("s1")
    phi, u = feature_functional(s, G), truth(s, G)
    phi_t = np.sqrt(G.spacing) * phi.values
    u_t = G.spacing * u.values
    assert feature_value(phi, u) == pytest.approx(float(phi_t @ u_t), rel=1e-14)
