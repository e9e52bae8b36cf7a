import math

import numpy as np
import pytest
from scipy import integrate, special

from mfbergman import quadrature
from mfbergman.core import make_grid


@pytest.mark.parametrize("n,alpha", [(5, 0.0), (20, -0.5), (64, 2.5), (64, -0.9)])
def test_gauss_laguerre_matches_scipy(n, alpha):
    x, w = quadrature.gauss_laguerre(n, alpha)
    xs, ws = special.roots_genlaguerre(n, alpha)
    np.testing.assert_allclose(x, xs, rtol=1e-11)
    # tiny trailing weights only agree absolutely
    np.testing.assert_allclose(w, ws, rtol=1e-8, atol=1e-14 * ws.max())


def test_gauss_laguerre_normalized_moments():
    x, w = quadrature.gauss_laguerre(64, 1.5, normalized=True)
    assert w.sum() == pytest.approx(1.0, rel=1e-13)
    # E[U^3] for U ~ Gamma(2.5) is 2.5 * 3.5 * 4.5
    assert np.dot(w, x**3) == pytest.approx(2.5 * 3.5 * 4.5, rel=1e-12)


def test_gauss_laguerre_rejects():
    with pytest.raises(ValueError):
        quadrature.gauss_laguerre(0)
    with pytest.raises(ValueError):
        quadrature.gauss_laguerre(4, -1.0)


@pytest.mark.parametrize("lam", [-0.5, 0.0, 1.0, 2.5])
def test_nu_weights_positive_and_accurate(lam):
    g = make_grid(1, 8, 40, 512, 2)
    w = g.nu_weights(lam)
    assert np.all(w > 0)
    y = g.y_nodes
    for k in (0, 1, 2):
        exact = (lam + 1) * 2**lam * y[-1] ** (lam + k + 1) / (lam + k + 1)
        assert np.dot(w, y**k) == pytest.approx(exact, rel=1e-12)
    smooth = np.exp(-y)
    exact = (lam + 1) * 2**lam * special.gamma(lam + 1) * special.gammainc(lam + 1, y[-1])
    assert np.dot(w, smooth) == pytest.approx(exact, rel=1e-8)


def test_fitted_weights_exact_on_model():
    y = make_grid(1, 8, 40, 64, 2).y_nodes
    rate, decay = 0.5, 0.5
    w = quadrature.fitted_weights(y, rate, decay)
    # int_0^inf e^{-y} dy = 1, int_0^inf y e^{-y} dy = 1
    assert np.dot(w, np.exp(-rate * y)) == pytest.approx(1.0, rel=1e-13)
    assert np.dot(w, y * np.exp(-rate * y)) == pytest.approx(1.0, rel=1e-12)
    approx = np.dot(w, np.exp(-y**2 / 50) * np.exp(-rate * y))
    exact = integrate.quad(lambda t: np.exp(-t * t / 50 - t), 0, np.inf)[0]
    assert approx == pytest.approx(exact, rel=1e-4)


def test_fitted_interp_exact_and_tail():
    y = np.array([0.5, 1.0, 2.0, 4.0])
    vals = np.exp(-0.7 * y)[None, :]
    t = np.array([[0.1, 0.75, 3.0, 6.0]])
    out, clamped = quadrature.fitted_interp(y, vals, [0.7], t, tail="exp")
    np.testing.assert_allclose(out, np.exp(-0.7 * t), rtol=1e-14)
    assert clamped == 0
    out, clamped = quadrature.fitted_interp(y, vals, [0.7], t, tail="zero")
    assert out[0, -1] == 0 and clamped == 1


def test_trapezoid_weights_cover_origin():
    y = np.array([0.5, 1.0, 2.0])
    w = quadrature.trapezoid_weights(y)
    np.testing.assert_allclose(w, [0.75, 0.75, 0.5])
    assert math.isclose(w.sum(), 2.0)
