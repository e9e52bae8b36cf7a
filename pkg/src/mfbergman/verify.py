"""Residual suites behind ``mfbergman verify``.

Each check returns one residual (already relative where that makes sense)
and carries a default tolerance.  A suite passes when every residual is
within tolerance.  The sweeps are fixed so that reports are reproducible.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import densities, specfun, toeplitz, transforms
from .core import HalfPlaneGrid, SpaceParams, lq_distance, lq_norm, make_grid, mixed_norm
from .quadrature import gauss_laguerre

LAMBDAS = (-0.5, 0.0, 1.0, 2.5)
PS_FINE = (1.0, 1.5, 2.0, 3.0)
PS = (1.0, 2.0, 3.0)
QS = (1.0, 2.0, 4.0)
T_SWEEP = (1e-3, 0.1, 1.0, 10.0)
X_SWEEP = tuple(np.geomspace(1e-3, 1e3, 13))
GAMMA_SWEEP = np.geomspace(1e-6, 1e6, 61)


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    tol: float
    run: Callable


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# -- specfun -----------------------------------------------------------------


def check_gamma_goldens(grid):
    worst = 0.0
    for a in (0.5, 1.0, 2.0, 5.0, 20.0):
        worst = max(worst, _rel(specfun.gamma_upper_reg(a, 0.0), 1.0))
    for x in (0.0, 0.5, 1.0, 3.0, 10.0):
        worst = max(worst, _rel(specfun.gamma_upper_reg(1.0, x), math.exp(-x)))
        worst = max(worst, _rel(specfun.gamma_upper_reg(2.0, x), (1.0 + x) * math.exp(-x)))
    return worst


def check_psi_identity(grid):
    worst = 0.0
    t = np.array(T_SWEEP)
    for lam in LAMBDAS:
        for p in PS_FINE:
            for x in X_SWEEP:
                ctx = specfun.PsiBetaContext(SpaceParams(lam, p, 2.0), float(x))
                q = specfun.gamma_upper_reg(lam + 1.0, p * x * t)
                ok = q > 1e-300
                e = np.abs(np.exp(-specfun.psi(ctx, t[ok])) - q[ok]) / q[ok]
                worst = max(worst, float(np.max(e, initial=0.0)))
    return worst


def check_psi_beta_roundtrip(grid):
    worst = 0.0
    t = np.array(T_SWEEP)
    for lam in LAMBDAS:
        for p in PS_FINE:
            for x in X_SWEEP:
                ctx = specfun.PsiBetaContext(SpaceParams(lam, p, 2.0), float(x))
                y = specfun.psi(ctx, t)
                r1 = np.abs(specfun.beta(ctx, y) - t) / t
                r2 = np.abs(specfun.psi(ctx, specfun.beta(ctx, y)) - y) / y
                worst = max(worst, float(np.max(r1)), float(np.max(r2)))
    return worst


def check_lambda0_closed(grid):
    worst = 0.0
    t = np.array(T_SWEEP)
    for p in PS_FINE:
        for x in X_SWEEP:
            ctx = specfun.PsiBetaContext(SpaceParams(0.0, p, 2.0), float(x))
            worst = max(worst, float(np.max(np.abs(specfun.psi(ctx, t) - p * x * t) / (p * x * t))))
            worst = max(worst, float(np.max(np.abs(specfun.beta(ctx, t) - t / (p * x)) / (t / (p * x)))))
    return worst


def check_theta_quadrature(grid):
    worst = 0.0
    for lam in LAMBDAS:
        u, w = gauss_laguerre(64, lam, normalized=True)
        for p in PS_FINE:
            params = SpaceParams(lam, p, 2.0)
            for x in X_SWEEP:
                # int exp(-p x y) (lam+1)(2y)^lam dy with t = p x y
                scale = (lam + 1.0) * 2.0**lam * math.gamma(lam + 1.0) / (p * x) ** (lam + 1.0)
                integral = scale * float(np.sum(w))
                worst = max(worst, _rel(specfun.theta(params, x) ** -p, integral))
    return worst


def check_theta_reciprocal(grid):
    worst = 0.0
    for lam in LAMBDAS:
        for p in PS_FINE:
            params = SpaceParams(lam, p, 2.0)
            xi = np.array(X_SWEEP)
            prod = specfun.theta(params, xi) * specfun.phi_xi_norm(params, xi)
            worst = max(worst, float(np.max(np.abs(prod - 1.0))))
    return worst


# -- transforms --------------------------------------------------------------


def _quiet(fn, *args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", transforms.TruncationWarning)
        return fn(*args)


def _isometry_and_inverse(grid):
    iso = inv = 0.0
    for form in densities.smooth_suite():
        phi = densities.sample_density(form, grid)
        for lam in LAMBDAS:
            for p in PS:
                params = SpaceParams(lam, p, 2.0)
                f = transforms.pw_synthesize(phi, params, grid)
                g = transforms.u1_forward(f, params)
                back = _quiet(transforms.pw_analyze, f, params)
                for q in QS:
                    pq = SpaceParams(lam, p, q)
                    ref = lq_norm(phi, q)
                    iso = max(iso, abs(mixed_norm(g, pq) - ref) / ref)
                    inv = max(inv, lq_distance(back, phi, q) / ref)
    return iso, inv


_CACHE: dict = {}


def _iso_cached(grid):
    key = id(grid)
    if key not in _CACHE:
        _CACHE.clear()
        _CACHE[key] = _isometry_and_inverse(grid)
    return _CACHE[key]


def check_isometry(grid):
    return _iso_cached(grid)[0]


def check_left_inverse(grid):
    return _iso_cached(grid)[1]


def check_classical_reduction(grid):
    worst = 0.0
    phi = densities.sample_density(densities.Bump(1.0, 4.0), grid)
    xi = phi.xi_nodes
    w = transforms.synthesis_weights(xi)
    for lam in LAMBDAS:
        params = SpaceParams(lam, 2.0, 2.0)
        f = transforms.pw_synthesize(phi, params, grid)
        psi_v = phi.values * xi ** ((lam + 1.0) / 2.0)
        kern = np.exp(1j * np.outer(grid.x_nodes, xi))
        ref = kern @ ((w * psi_v)[:, None] * np.exp(-np.outer(xi, grid.y_nodes)))
        ref /= math.sqrt(math.gamma(lam + 2.0))
        worst = max(worst, float(np.max(np.abs(f.values - ref)) / np.max(np.abs(ref))))
    return worst


def check_u2_roundtrip(grid):
    worst = 0.0
    phi = densities.sample_density(densities.Bump(1.0, 4.0), grid)
    for lam in LAMBDAS:
        for p in PS:
            params = SpaceParams(lam, p, 2.0)
            g = transforms.u1_forward(transforms.pw_synthesize(phi, params, grid), params)
            h = transforms.u2_forward(g, params)
            back = transforms.u2_inverse(h, params)
            worst = max(worst, float(np.max(np.abs(back.values - g.values)) / np.max(np.abs(g.values))))
    return worst


def check_u2_isometry(grid):
    worst = 0.0
    phi = densities.sample_density(densities.Bump(1.0, 4.0), grid)
    for lam in LAMBDAS:
        for p in PS:
            params = SpaceParams(lam, p, 2.0)
            g = transforms.u1_forward(transforms.pw_synthesize(phi, params, grid), params)
            h = transforms.u2_forward(g, params)
            unweighted = SpaceParams(0.0, p, 2.0)
            worst = max(worst, _rel(mixed_norm(h, unweighted), mixed_norm(g, params)))
    return worst


def check_projection(grid):
    worst = 0.0
    phi = densities.sample_density(densities.Bump(1.0, 4.0), grid)
    for lam in (0.0, 1.0):
        for p in PS:
            params = SpaceParams(lam, p, 2.0)
            f = transforms.pw_synthesize(phi, params, grid)
            scale = np.max(np.abs(f.values))
            b = transforms.bergman_project(f, params)
            worst = max(worst, float(np.max(np.abs(b.values - f.values)) / scale))
            rough = f.with_values(f.values * np.exp(-grid.y_nodes)[None, :])
            b1 = _quiet(transforms.bergman_project, rough, params)
            b2 = transforms.bergman_project(b1, params)
            worst = max(worst, float(np.max(np.abs(b2.values - b1.values)) / np.max(np.abs(b1.values))))
    return worst


def check_decay_slope(grid):
    worst = 0.0
    phi = densities.sample_density(densities.Bump(1.0, 4.0), grid)
    y = grid.y_nodes
    for lam in LAMBDAS:
        for p in PS:
            params = SpaceParams(lam, p, 2.0)
            g = transforms.u1_forward(transforms.pw_synthesize(phi, params, grid), params)
            xi = g.grid.x_nodes
            for i in np.nonzero((xi >= 1.75) & (xi <= 3.25))[0]:
                use = xi[i] * y <= 15.0
                slope = np.polyfit(y[use], np.log(np.abs(g.values[i, use])), 1)[0]
                worst = max(worst, abs(slope + xi[i]))
    return worst


def cauchy_riemann_residual(f) -> float:
    """Max of ``|df/dx + i df/dy|`` over interior nodes, relative to ``max |f|``.

    Central differences: periodic in ``x``, three-point non-uniform in ``y``.
    """
    v = f.values
    dx = f.grid.x_step
    fx = (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) / (2.0 * dx)
    y = f.grid.y_nodes
    h0 = np.diff(y)[:-1]
    h1 = np.diff(y)[1:]
    fy = (
        -h1 / (h0 * (h0 + h1)) * v[:, :-2]
        + (h1 - h0) / (h0 * h1) * v[:, 1:-1]
        + h0 / (h1 * (h0 + h1)) * v[:, 2:]
    )
    res = fx[1:-1, 1:-1] + 1j * fy[1:-1]
    xs = f.grid.x_nodes[1:-1]
    ys = y[1:-1]
    window = (np.abs(xs) <= 10.0)[:, None] & ((ys >= 0.05) & (ys <= 10.0))[None, :]
    return float(np.max(np.abs(res[window])) / np.max(np.abs(v)))


def check_cr_order(grid):
    params = SpaceParams(0.0, 2.0, 2.0)
    form = densities.Bump(1.0, 4.0)
    res = []
    for k in (0, 1, 2):
        n_x, n_y = 512 * 2**k, 128 * 2**k
        g = make_grid(40.0, n_x, 40.0, n_y, 2.0)
        phi = densities.sample_density(form, g)
        res.append(cauchy_riemann_residual(transforms.pw_synthesize(phi, params, g)))
    return max(res[1] / res[0], res[2] / res[1])


# -- toeplitz ----------------------------------------------------------------


def check_gamma_forms(grid):
    x = GAMMA_SWEEP
    worst = 0.0
    for lam in LAMBDAS:
        for p in PS:
            params = SpaceParams(lam, p, 2.0)
            one = toeplitz.gamma_of_symbol(toeplitz.Const(1.0), params, x, "quadrature")
            worst = max(worst, float(np.max(np.abs(one - 1.0))))
            px = p * x
            e = toeplitz.gamma_of_symbol(toeplitz.Exp(1.0), params, x)
            worst = max(worst, float(np.max(np.abs(e / (px / (px + 1.0)) ** (lam + 1.0) - 1.0))))
            s = toeplitz.gamma_of_symbol(toeplitz.Power(1.0), params, x)
            worst = max(worst, float(np.max(np.abs(s * px / (lam + 1.0) - 1.0))))
    return worst


def check_indicator_identity(grid):
    worst = 0.0
    x = GAMMA_SWEEP
    for lam in LAMBDAS:
        for p in PS:
            params = SpaceParams(lam, p, 2.0)
            g = toeplitz.gamma_of_symbol(toeplitz.Indicator(0.0, 0.5), params, x)
            for xv, gv in zip(x, g):
                ctx = specfun.PsiBetaContext(params, float(xv))
                worst = max(worst, abs(gv + math.exp(-specfun.psi(ctx, 0.5)) - 1.0))
    return worst


def check_direct_vs_multiplier(grid):
    worst = 0.0
    form = densities.Bump(1.0, 4.0)
    phi = densities.sample_density(form, grid)
    for lam in (0.0, 1.0):
        params = SpaceParams(lam, 2.0, 2.0)
        for a in (toeplitz.Exp(1.0), toeplitz.Indicator(0.0, 1.0)):
            direct = _quiet(toeplitz.toeplitz_direct_p2q2, a, phi, params, grid)
            mult = toeplitz.apply_toeplitz(a, phi, params)
            worst = max(worst, toeplitz.relative_l2(direct, mult))
    return worst


def check_spectrum(grid):
    worst = 0.0
    for lam in LAMBDAS:
        for p in PS:
            params = SpaceParams(lam, p, 2.0)
            rep = toeplitz.boundedness_and_spectrum(toeplitz.Exp(1.0), params)
            lo, hi = rep.range_components[0]
            if not rep.bounded or len(rep.range_components) != 1:
                return math.inf
            worst = max(worst, abs(lo - 0.0), abs(hi - 1.0))
            if toeplitz.boundedness_and_spectrum(toeplitz.Power(1.0), params).bounded:
                return math.inf
    return worst


CHECKS = [
    Check("specfun", "gamma_goldens", 1e-12, check_gamma_goldens),
    Check("specfun", "exp_psi_identity", 1e-12, check_psi_identity),
    Check("specfun", "psi_beta_roundtrip", 1e-10, check_psi_beta_roundtrip),
    Check("specfun", "lambda0_closed_forms", 1e-13, check_lambda0_closed),
    Check("specfun", "theta_quadrature", 1e-10, check_theta_quadrature),
    Check("specfun", "theta_reciprocal", 1e-13, check_theta_reciprocal),
    Check("transforms", "synthesis_isometry", 1e-3, check_isometry),
    Check("transforms", "left_inverse", 1e-3, check_left_inverse),
    Check("transforms", "classical_reduction", 1e-12, check_classical_reduction),
    Check("transforms", "u2_roundtrip", 1e-8, check_u2_roundtrip),
    Check("transforms", "u2_isometry", 1e-6, check_u2_isometry),
    Check("transforms", "projection_fix_idempotent", 1e-3, check_projection),
    Check("transforms", "decay_slope", 1e-6, check_decay_slope),
    Check("transforms", "cauchy_riemann_order", 0.3, check_cr_order),
    Check("toeplitz", "gamma_closed_forms", 1e-8, check_gamma_forms),
    Check("toeplitz", "indicator_psi_identity", 1e-10, check_indicator_identity),
    Check("toeplitz", "direct_vs_multiplier", 1e-3, check_direct_vs_multiplier),
    Check("toeplitz", "spectrum_exp_power", 1e-6, check_spectrum),
]

SUITES = ("specfun", "transforms", "toeplitz", "all")


def run_suite(suite: str, grid: HalfPlaneGrid, tol=None) -> list:
    """Run the checks of ``suite``; returns rows ``{suite, check, residual, tol, pass}``."""
    if suite not in SUITES:
        raise ValueError("unknown suite %r (choose from %s)" % (suite, ", ".join(SUITES)))
    rows = []
    for chk in CHECKS:
        if suite != "all" and chk.suite != suite:
            continue
        limit = chk.tol if tol is None else tol
        residual = float(chk.run(grid))
        rows.append(
            {
                "suite": chk.suite,
                "check": chk.name,
                "residual": residual,
                "tol": limit,
                "pass": bool(residual <= limit),
            }
        )
    return rows
