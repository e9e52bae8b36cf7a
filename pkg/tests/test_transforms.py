import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from mfbergman import densities, specfun, transforms
from mfbergman.core import (
    FOURIER_SIDE,
    PHYSICAL,
    U2_SIDE,
    BoundaryDensity,
    GridFunction,
    SpaceParams,
    lq_distance,
    lq_norm,
    make_grid,
    mixed_norm,
)


@pytest.fixture(scope="module")
def bump_small(small_grid):
    return densities.sample_density(densities.Bump(1.0, 4.0), small_grid)


def _fourier_side(phi, params, grid):
    return transforms.u1_forward(transforms.pw_synthesize(phi, params, grid), params)


def test_ground_state_profile():
    y = np.geomspace(1e-3, 40, 50)
    prof = transforms.GroundStateProfile.on(y, 3.0)
    np.testing.assert_allclose(prof.values, np.exp(-y / 3.0), rtol=1e-15)


# -- U1 ----------------------------------------------------------------------


def test_u1_gaussian_is_invariant(small_grid):
    g = small_grid
    gy = np.exp(-g.y_nodes) * (1 + g.y_nodes)
    f = GridFunction(g, np.exp(-g.x_nodes**2 / 2)[:, None] * gy[None, :])
    out = transforms.u1_forward(f, SpaceParams())
    xi = out.grid.x_nodes
    assert out.repr_tag == FOURIER_SIDE
    np.testing.assert_allclose(out.values, (np.exp(-xi**2 / 2) / math.sqrt(math.pi))[:, None] * gy, atol=1e-13)


def test_u1_matches_direct_quadrature(small_grid):
    # off-centre Gaussian: checks the phase bookkeeping against a direct sum
    g = small_grid
    f = GridFunction(g, np.exp(-((g.x_nodes - 1.3) ** 2))[:, None] * np.ones(g.shape[1]))
    out = transforms.u1_forward(f, SpaceParams())
    for m in (100, 128, 140, 200):
        xi = out.grid.x_nodes[m]
        re = integrate.quad(lambda x: math.exp(-((x - 1.3) ** 2)) * math.cos(xi * x), -40, 40, limit=400)[0]
        im = integrate.quad(lambda x: -math.exp(-((x - 1.3) ** 2)) * math.sin(xi * x), -40, 40, limit=400)[0]
        ref = (re + 1j * im) / math.sqrt(2 * math.pi) / math.sqrt(math.pi)
        assert abs(out.values[m, 0] - ref) < 1e-12


def test_u1_roundtrip_and_zero(small_grid):
    rng = np.random.default_rng(3)
    f = GridFunction(small_grid, rng.normal(size=small_grid.shape) + 1j * rng.normal(size=small_grid.shape))
    back = transforms.u1_inverse(transforms.u1_forward(f, SpaceParams()), SpaceParams())
    assert back.repr_tag == PHYSICAL and back.grid is small_grid
    np.testing.assert_allclose(back.values, f.values, atol=1e-10)
    zero = GridFunction(small_grid, np.zeros(small_grid.shape))
    assert not np.any(transforms.u1_forward(zero, SpaceParams()).values)


def test_u1_checks_representation(small_grid):
    f = GridFunction(small_grid, np.zeros(small_grid.shape), FOURIER_SIDE)
    with pytest.raises(ValueError):
        transforms.u1_forward(f, SpaceParams())


# -- U2 ----------------------------------------------------------------------


@pytest.mark.parametrize("lam,p", [(-0.5, 1.0), (0.0, 2.0), (1.0, 3.0), (2.5, 1.5)])
def test_u2_maps_analytic_to_ground_state(small_grid, bump_small, lam, p):
    params = SpaceParams(lam, p)
    g = _fourier_side(bump_small, params, small_grid)
    h = transforms.u2_forward(g, params)
    assert h.repr_tag == U2_SIDE
    ref = transforms.r0_embed(bump_small, params, g.grid)
    assert np.abs(h.values - ref.values).max() <= 1e-8 * np.abs(ref.values).max()


@pytest.mark.parametrize("lam,p", [(-0.5, 1.0), (0.0, 2.0), (2.5, 3.0)])
def test_u2_inverse_of_ground_state(small_grid, bump_small, lam, p):
    params = SpaceParams(lam, p)
    g = _fourier_side(bump_small, params, small_grid)
    back = transforms.u2_inverse(transforms.r0_embed(bump_small, params, g.grid), params)
    assert np.abs(back.values - g.values).max() <= 1e-8 * np.abs(g.values).max()


def test_u2_lambda_zero_closed_form(small_grid):
    params = SpaceParams(0.0, 2.0)
    dual = small_grid.dual()
    xi, y = dual.x_nodes, dual.y_nodes
    # (A + B y) e^{-|xi| y} is reproduced exactly by the resampling in U2
    ax = np.abs(xi)[:, None]
    vals = np.exp(-((xi - 2) ** 2))[:, None] * (1 + 0.5 * y[None, :]) * np.exp(-ax * y[None, :])
    h = transforms.u2_forward(GridFunction(dual, vals, FOURIER_SIDE), params)
    for i in np.nonzero((xi > 0.5) & (xi < 4))[0]:
        s = y / (2 * abs(xi[i]))
        ref = (2 * abs(xi[i])) ** -0.5 * np.exp(-((xi[i] - 2) ** 2)) * (1 + 0.5 * s) * np.exp(-abs(xi[i]) * s)
        inside = s <= y[-1]
        np.testing.assert_allclose(h.values[i, inside], ref[inside], rtol=1e-12)
    zero_col = np.nonzero(xi == 0)[0][0]
    assert not np.any(h.values[zero_col])


def test_u2_isometry(desk_grid):
    phi = densities.sample_density(densities.Bump(1.0, 4.0), desk_grid)
    for lam, p, q in ((-0.5, 1.0, 2.0), (2.5, 3.0, 4.0)):
        params = SpaceParams(lam, p, q)
        g = _fourier_side(phi, params, desk_grid)
        h = transforms.u2_forward(g, params)
        assert mixed_norm(h, SpaceParams(0.0, p, q)) == pytest.approx(mixed_norm(g, params), rel=1e-6)


def test_u2_roundtrip_generic(small_grid):
    # non-analytic input: linear interpolation error only, on interior nodes
    params = SpaceParams(1.0, 2.0)
    dual = small_grid.dual()
    xi, y = dual.x_nodes, dual.y_nodes
    vals = np.exp(-((xi - 2) ** 2))[:, None] * np.exp(-xi.clip(0.5)[:, None] * y[None, :])
    g = GridFunction(dual, vals, FOURIER_SIDE)
    back = transforms.u2_inverse(transforms.u2_forward(g, params), params)
    rows = (xi > 0.5) & (xi < 4)
    cols = y < 10
    err = np.abs(back.values - g.values)[np.ix_(rows, cols)].max()
    assert err < 1e-3


# -- R0, B_p -----------------------------------------------------------------


def test_r0_embed_indicator(small_grid):
    params = SpaceParams(0.0, 2.5)
    dual = small_grid.dual()
    phi = densities.sample_density(densities.Indicator(1.0, 2.0), small_grid)
    g = transforms.r0_embed(phi, params, dual)
    xi = dual.x_nodes
    on = (xi >= 1) & (xi <= 2)
    np.testing.assert_allclose(g.values[on], np.exp(-dual.y_nodes / 2.5)[None, :].repeat(on.sum(), 0))
    assert not np.any(g.values[~on])


@pytest.mark.parametrize("p,q", [(1.0, 1.0), (2.0, 2.0), (3.0, 4.0)])
def test_r0_is_isometric_with_left_inverse(desk_grid, p, q):
    phi = densities.sample_density(densities.Bump(1.0, 4.0), desk_grid)
    params = SpaceParams(0.0, p, q)
    g = transforms.r0_embed(phi, params, desk_grid.dual())
    assert mixed_norm(g, params) == pytest.approx(lq_norm(phi, q), rel=1e-8)
    back = transforms.r0_left_inverse(g, params)
    np.testing.assert_allclose(back.values, phi.values, atol=1e-10)


def test_r0_left_inverse_examples(small_grid):
    dual = small_grid.dual()
    pos = (dual.x_nodes > 0)[:, None]
    g = GridFunction(dual, pos * np.exp(-dual.y_nodes)[None, :], U2_SIDE)
    out = transforms.r0_left_inverse(g, SpaceParams(0.0, 1.0))
    np.testing.assert_allclose(out.values, 1.0, rtol=1e-12)
    zero = GridFunction(dual, np.zeros(dual.shape), U2_SIDE)
    assert not np.any(transforms.r0_left_inverse(zero, SpaceParams()).values)


def test_r0_left_inverse_warns_on_truncation(small_grid):
    dual = small_grid.dual()
    g = GridFunction(dual, np.ones(dual.shape), U2_SIDE)
    with pytest.warns(transforms.TruncationWarning) as rec:
        transforms.r0_left_inverse(g, SpaceParams())
    assert rec[0].message.tail == pytest.approx(1.0)


def test_bp_projection(small_grid, bump_small):
    dual = small_grid.dual()
    params = SpaceParams(0.0, 1.0)
    pos = (dual.x_nodes > 0)[:, None]
    y = dual.y_nodes
    g = GridFunction(dual, pos * (y * np.exp(-y))[None, :], U2_SIDE)
    out = transforms.bp_project(g, params)
    np.testing.assert_allclose(out.values, pos * np.exp(-y)[None, :], atol=1e-12)
    params = SpaceParams(1.0, 3.0)
    rough = GridFunction(dual, pos * np.exp(-((dual.x_nodes[:, None] - 2) ** 2) - 0.5 * y * (1 + np.sin(y))), U2_SIDE)
    once = transforms.bp_project(rough, params)
    twice = transforms.bp_project(once, params)
    np.testing.assert_allclose(twice.values, once.values, atol=1e-10 * np.abs(once.values).max())
    r0 = transforms.r0_embed(bump_small, params, dual)
    np.testing.assert_allclose(transforms.bp_project(r0, params).values, r0.values, atol=1e-10)


# -- synthesis / analysis ----------------------------------------------------


def test_synthesis_lambda0_p2_indicator_direct_path(small_grid):
    params = SpaceParams(0.0, 2.0)
    xi = np.linspace(1.0, 2.0, 4001)
    phi = BoundaryDensity(xi, np.ones_like(xi))
    f = transforms.pw_synthesize(phi, params, small_grid)
    for i, j in ((128, 0), (140, 20), (100, 60)):
        z = small_grid.x_nodes[i] + 1j * small_grid.y_nodes[j]
        re = integrate.quad(lambda s: math.sqrt(s) * (np.exp(1j * s * z)).real, 1, 2, epsabs=1e-13)[0]
        im = integrate.quad(lambda s: math.sqrt(s) * (np.exp(1j * s * z)).imag, 1, 2, epsabs=1e-13)[0]
        assert abs(f.values[i, j] - (re + 1j * im)) < 1e-7


def test_synthesis_fft_route_matches_direct_sum(small_grid, bump_small):
    params = SpaceParams(1.0, 3.0)
    f = transforms.pw_synthesize(bump_small, params, small_grid)
    xi = bump_small.xi_nodes
    amp = transforms.synthesis_weights(xi) * specfun.theta(params, xi) * bump_small.values
    x, y = small_grid.x_nodes, small_grid.y_nodes
    ref = np.exp(1j * np.outer(x, xi)) @ (amp[:, None] * np.exp(-np.outer(xi, y))) / math.sqrt(2)
    np.testing.assert_allclose(f.values, ref, atol=1e-12 * np.abs(ref).max())
    assert f.analytic


def test_synthesis_of_zero(small_grid):
    phi = densities.sample_density(densities.Zero(), small_grid)
    f = transforms.pw_synthesize(phi, SpaceParams(), small_grid)
    assert not np.any(f.values)
    assert not np.any(transforms.pw_analyze(f, SpaceParams()).values)


@pytest.mark.parametrize("lam", [0.0, 1.0])
def test_analysis_p2_against_brute_force(lam):
    # theta(x)/sqrt(2) int (1/pi) e^{-x eta} [sum_s f(s + i eta) e^{-i x s} ds] dnu(eta),
    # direct sums in s, trapezoid in eta with (0, y0] given to the first node.
    # The trapezoid rule needs a fine eta grid to reach 1e-4.
    grid = make_grid(40.0, 512, 40.0, 4096, 2.0)
    params = SpaceParams(lam, 2.0, 2.0)
    phi = densities.sample_density(densities.Bump(1.0, 4.0), grid)
    f = transforms.pw_synthesize(phi, params, grid)
    got = transforms.pw_analyze(f, params)
    s, eta = grid.x_nodes, grid.y_nodes
    h = np.diff(eta)
    w = np.concatenate(([eta[0] + 0.5 * h[0]], 0.5 * (h[1:] + h[:-1]), [0.5 * h[-1]]))
    w = w * (lam + 1) * (2 * eta) ** lam
    for k in (15, 22, 30, 38, 46):
        x = got.xi_nodes[k]
        assert 1 < x < 4
        inner = np.exp(-1j * x * s) @ f.values * grid.x_step
        val = specfun.theta(params, x) / math.sqrt(2) / math.pi * np.sum(w * np.exp(-x * eta) * inner)
        assert abs(got.values[k] - val) <= 1e-4 * abs(val)


@pytest.mark.parametrize("lam,p,q", [(-0.5, 1.0, 1.0), (0.0, 2.0, 2.0), (2.5, 3.0, 4.0)])
def test_synthesis_isometry_and_left_inverse_small(small_grid, bump_small, lam, p, q):
    params = SpaceParams(lam, p, q)
    f = transforms.pw_synthesize(bump_small, params, small_grid)
    ref = lq_norm(bump_small, q)
    assert mixed_norm(transforms.u1_forward(f, params), params) == pytest.approx(ref, rel=1e-3)
    back = transforms.pw_analyze(f, params)
    assert lq_distance(back, bump_small, q) <= 1e-3 * ref


def test_analysis_warns_for_slowly_decaying_input(small_grid):
    g = small_grid
    f = GridFunction(g, np.exp(-g.x_nodes**2)[:, None] * np.ones(g.shape[1]))
    with pytest.warns(transforms.TruncationWarning):
        transforms.pw_analyze(f, SpaceParams(0.0, 1.0))


def test_fourier_side_satisfies_transport_equation():
    # (xi + d/dy) g = 0 for the Fourier side of an analytic function
    params = SpaceParams(0.5, 2.0)
    res = []
    for k in range(2):
        grid = make_grid(40.0, 256, 40.0, 128 * 2**k, 2.0)
        phi = densities.sample_density(densities.Bump(1.0, 4.0), grid)
        g = _fourier_side(phi, params, grid)
        xi, y = g.grid.x_nodes, g.grid.y_nodes
        r = xi[:, None] * g.values + np.gradient(g.values, y, axis=1)
        cols = (y > 0.05) & (y < 10)
        res.append(np.abs(r[:, cols]).max() / np.abs(g.values).max())
    assert res[1] <= 0.3 * res[0]


def test_bergman_projection(small_grid, bump_small):
    for lam, p in ((0.0, 2.0), (1.0, 3.0)):
        params = SpaceParams(lam, p)
        f = transforms.pw_synthesize(bump_small, params, small_grid)
        b = transforms.bergman_project(f, params)
        scale = np.abs(f.values).max()
        assert np.abs(b.values - f.values).max() <= 1e-3 * scale
        rough = f.with_values(f.values * np.exp(-small_grid.y_nodes)[None, :])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", transforms.TruncationWarning)
            b1 = transforms.bergman_project(rough, params)
        b2 = transforms.bergman_project(b1, params)
        assert np.abs(b2.values - b1.values).max() <= 1e-3 * np.abs(b1.values).max()
    zero = GridFunction(small_grid, np.zeros(small_grid.shape))
    assert not np.any(transforms.bergman_project(zero, SpaceParams()).values)
