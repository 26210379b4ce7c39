"""The numpy and numba kernel backends must agree."""
import numpy as np
import pytest

from cbfsafe import _kernels_numba as nb
from cbfsafe import _kernels_numpy as npk


@pytest.fixture
def scene(rng):
    centers = rng.uniform(-3, 3, size=(7, 2))
    radii_sq = rng.uniform(0.04, 0.36, size=7)
    return centers, radii_sq


def test_lse(kernels, rng):
    h = rng.normal(size=9) * 5
    val, lam = kernels.lse_min(h, 2.0)
    assert lam.sum() == pytest.approx(1.0, abs=1e-14)
    assert val <= h.min()


def test_circle_composite_backends_agree(scene, rng):
    centers, radii_sq = scene
    for p in rng.uniform(-4, 4, size=(50, 2)):
        for a, b in zip(npk.circle_composite(p, centers, radii_sq, 2.0), nb.circle_composite(p, centers, radii_sq, 2.0)):
            np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)
    P = rng.uniform(-4, 4, size=(50, 2))
    for a, b in zip(npk.circle_composite_batch(P, centers, radii_sq, 2.0), nb.circle_composite_batch(P, centers, radii_sq, 2.0)):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)


def test_closed_form_backends_agree(rng):
    lie_f = rng.normal(size=40)
    lie_g = rng.normal(size=(40, 2))
    lie_g[3] = 0.0
    h = rng.normal(size=40)
    u = rng.normal(size=(40, 2)) * 3
    us_a, eta_a = npk.closed_form_batch(lie_f, lie_g, h, u, 5.0, 1e-12)
    us_b, eta_b = nb.closed_form_batch(lie_f, lie_g, h, u, 5.0, 1e-12)
    np.testing.assert_allclose(us_a, us_b, rtol=1e-14, atol=1e-14)
    np.testing.assert_allclose(eta_a, eta_b, rtol=1e-14, atol=1e-14)
    assert eta_a[3] == 0.0
    for k in range(40):
        us, e = nb.closed_form(lie_f[k], lie_g[k], h[k], u[k], 5.0, 1e-12)
        np.testing.assert_array_equal(us, us_b[k])
        assert e == eta_b[k]


def test_hildreth_backends_agree(rng):
    for _ in range(30):
        A = rng.normal(size=(6, 2))
        b = rng.normal(size=6)
        u = rng.normal(size=2) * 3
        ta, tb = np.empty(10_001), np.empty(10_001)
        ra = npk.hildreth(A, b, u, 1e-8, 10_000, ta)
        rb = nb.hildreth(A, b, u, 1e-8, 10_000, tb)
        assert ra[2] == rb[2]
        np.testing.assert_allclose(ra[0], rb[0], atol=1e-9)
        np.testing.assert_allclose(ra[1], rb[1], atol=1e-9)
        assert npk.kkt_residual(A, b, u, ra[0], ra[1]) == pytest.approx(nb.kkt_residual(A, b, u, ra[0], ra[1]), rel=1e-12, abs=1e-12)
