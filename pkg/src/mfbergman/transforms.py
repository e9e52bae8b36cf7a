"""The transform chain between the half-plane and the boundary half-line.

Conventions, fixed once here:

* ``(F f)(xi) = (2 pi)^(-1/2) int exp(-i xi x) f(x) dx`` and ``U1 = F / sqrt(pi)``.
  On a grid ``x_j = x_0 + j dx`` with ``N`` nodes the transform is sampled at
  ``xi_m = (m - N/2) 2 pi / (N dx)``; the sum over ``j`` is an FFT followed by
  ``fftshift`` and the phase ``exp(-i xi_m x_0)``.
* A function in the analytic subspace has Fourier side
  ``theta(xi) phi(xi) exp(-xi y)`` for ``xi > 0`` and 0 otherwise; ``U2`` maps it
  to ``phi(xi) exp(-y/p)``.

Resampling inside ``U2`` and its inverse uses exponentially fitted linear
interpolation (see :func:`mfbergman.quadrature.fitted_interp`), which is exact
on the analytic subspace.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import specfun
from .core import (
    FOURIER_SIDE,
    PHYSICAL,
    U2_SIDE,
    BoundaryDensity,
    GridFunction,
    HalfPlaneGrid,
    SpaceParams,
)
from .quadrature import fitted_interp

TAIL_TOLERANCE = 1e-12


class TruncationWarning(UserWarning):
    """A function is not negligible at ``y_max``; ``tail`` is the relative size."""

    def __init__(self, message, tail):
        super().__init__(message)
        self.tail = tail


@dataclass(frozen=True)
class GroundStateProfile:
    """``l_{0,p}(y) = exp(-y/p)`` sampled on a ``y`` grid."""

    p: float
    y: np.ndarray
    values: np.ndarray

    @classmethod
    def on(cls, y, p: float) -> "GroundStateProfile":
        y = np.asarray(y, dtype=float)
        return cls(float(p), y, np.exp(-y / p))


def _require(f: GridFunction, tag: str, op: str):
    if f.repr_tag != tag:
        raise ValueError("%s expects a %s function, got %s" % (op, tag, f.repr_tag))


def _phase(nodes_from, nodes_to):
    # exp(-i xi_m x_0) bookkeeping for a grid starting at x_0
    return np.exp(-1j * nodes_to * nodes_from[0])


def _check_dual(fourier: HalfPlaneGrid):
    n = fourier.n_x
    if abs(fourier.x_nodes[0] + (n // 2) * fourier.x_step) > 1e-9 * fourier.x_step:
        raise ValueError("frequency grid is not the FFT dual layout (m - N/2) dxi")


def u1_forward(f: GridFunction, params: SpaceParams) -> GridFunction:
    """Normalized partial Fourier transform in ``x``: ``(1/sqrt(pi)) F_{x->xi} f``."""
    _require(f, PHYSICAL, "u1_forward")
    grid = f.grid
    dual = grid.dual()
    spec = np.fft.fftshift(np.fft.fft(f.values, axis=0), axes=0)
    scale = grid.x_step / math.sqrt(2.0 * math.pi) / math.sqrt(math.pi)
    vals = spec * (scale * _phase(grid.x_nodes, dual.x_nodes))[:, None]
    return GridFunction(dual, vals, FOURIER_SIDE, analytic=f.analytic)


def u1_inverse(g: GridFunction, params: SpaceParams) -> GridFunction:
    """Inverse of :func:`u1_forward` (multiplier ``sqrt(pi)``)."""
    _require(g, FOURIER_SIDE, "u1_inverse")
    fourier = g.grid
    _check_dual(fourier)
    phys = fourier.dual()
    n = fourier.n_x
    shifted = g.values * np.conj(_phase(phys.x_nodes, fourier.x_nodes))[:, None]
    vals = np.fft.ifft(np.fft.ifftshift(shifted, axes=0), axis=0) * n
    vals *= fourier.x_step / math.sqrt(2.0 * math.pi) * math.sqrt(math.pi)
    return GridFunction(phys, vals, PHYSICAL, analytic=g.analytic)


def _log_theta(params, ax):
    lam, p = params.lam, params.p
    log_c = ((lam + 1.0) * math.log(p) - lam * math.log(2.0) - math.lgamma(lam + 2.0)) / p
    return log_c + (lam + 1.0) / p * np.log(ax)


def u2_forward(g: GridFunction, params: SpaceParams) -> GridFunction:
    """``(U2 g)(x, y) = exp(-y/p + |x| beta(|x|, y)) g(x, beta(|x|, y)) / theta(|x|)``.

    ``beta(x, y) = b(y) / (p x)`` where ``b`` solves ``-log Q(lam+1, b) = y``,
    so one root solve per ``y`` node serves every column.  The column
    ``x = 0`` is set to 0.
    """
    _require(g, FOURIER_SIDE, "u2_forward")
    grid = g.grid
    y = grid.y_nodes
    ax = np.abs(grid.x_nodes)
    rows = np.nonzero(ax > 0)[0]
    b_star = specfun.unit_beta(params.lam + 1.0, y)
    t = b_star[None, :] / (params.p * ax[rows, None])
    log_scale = (b_star - y)[None, :] / params.p - _log_theta(params, ax[rows])[:, None]
    vals = np.zeros(grid.shape, dtype=complex)
    tail = "exp" if g.analytic else "zero"
    vals[rows], clamped = fitted_interp(y, g.values[rows], ax[rows], t, tail=tail, log_scale=log_scale)
    return GridFunction(grid, vals, U2_SIDE, analytic=g.analytic, clamped=g.clamped + clamped)


def u2_inverse(h: GridFunction, params: SpaceParams) -> GridFunction:
    """``theta(|x|) exp(psi(|x|, y)/p - |x| y) h(x, psi(|x|, y))``; ``x = 0`` maps to 0."""
    _require(h, U2_SIDE, "u2_inverse")
    grid = h.grid
    y = grid.y_nodes
    ax = np.abs(grid.x_nodes)
    rows = np.nonzero(ax > 0)[0]
    uniq, inv = np.unique(ax[rows], return_inverse=True)
    a = params.lam + 1.0
    psi_u = specfun.unit_psi(a, params.p * uniq[:, None] * y[None, :])
    s = psi_u[inv]
    log_scale = s / params.p - ax[rows, None] * y[None, :] + _log_theta(params, ax[rows])[:, None]
    vals = np.zeros(grid.shape, dtype=complex)
    tail = "exp" if h.analytic else "zero"
    rate = np.full(len(rows), 1.0 / params.p)
    vals[rows], clamped = fitted_interp(y, h.values[rows], rate, s, tail=tail, log_scale=log_scale)
    return GridFunction(grid, vals, FOURIER_SIDE, analytic=h.analytic, clamped=h.clamped + clamped)


def _density_on(phi: BoundaryDensity, xi: np.ndarray) -> np.ndarray:
    if phi.xi_nodes.shape == xi.shape and np.allclose(phi.xi_nodes, xi, rtol=1e-13, atol=0):
        return phi.values
    return phi.evaluate(xi)


def r0_embed(f: BoundaryDensity, params: SpaceParams, grid: HalfPlaneGrid) -> GridFunction:
    """``chi_+(x) f(x) exp(-y/p)`` on a frequency-side grid."""
    xi = grid.x_nodes
    pos = xi > 0
    vals = np.zeros(grid.shape, dtype=complex)
    profile = GroundStateProfile.on(grid.y_nodes, params.p)
    vals[pos] = _density_on(f, xi[pos])[:, None] * profile.values[None, :]
    return GridFunction(grid, vals, U2_SIDE, analytic=True)


def _check_tail(values, where):
    peak = np.max(np.abs(values)) if values.size else 0.0
    if peak == 0:
        return
    tail = float(np.max(np.abs(values[:, -1])) / peak)
    if tail > TAIL_TOLERANCE:
        warnings.warn(
            TruncationWarning("%s: relative size %.3g at y_max" % (where, tail), tail), stacklevel=3
        )


def r0_left_inverse(g: GridFunction, params: SpaceParams) -> BoundaryDensity:
    """``chi_+(x) int g(x, eta) exp(-eta (p-1)/p) d eta`` on the positive nodes.

    The ``eta`` integral uses weights fitted to ``exp(-eta/p)`` with the
    matching exponential tail beyond ``y_max``, so ``R0^{-1} R0 = I`` to
    rounding.  Functions not known to be analytic get a truncation warning
    when they are not negligible at ``y_max``.
    """
    _require(g, U2_SIDE, "r0_left_inverse")
    grid = g.grid
    pos = grid.x_nodes > 0
    if not g.analytic:
        _check_tail(g.values[pos], "r0_left_inverse")
    w = grid.fitted_weights(1.0 / params.p, (params.p - 1.0) / params.p)
    return BoundaryDensity(grid.x_nodes[pos], g.values[pos] @ w)


def bp_project(g: GridFunction, params: SpaceParams) -> GridFunction:
    """``B_p = R0 R0^{-1}``, the projection onto ``chi_+ (x) L^q`` times ``exp(-y/p)``."""
    return r0_embed(r0_left_inverse(g, params), params, g.grid)


def synthesis_weights(xi: np.ndarray) -> np.ndarray:
    """Quadrature weights over density nodes (trapezoid)."""
    w = np.zeros(len(xi))
    h = np.diff(xi)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def pw_synthesize(phi: BoundaryDensity, params: SpaceParams, grid: HalfPlaneGrid) -> GridFunction:
    """``f(z) = 2^(-1/2) int theta(xi) phi(xi) exp(i xi z) d xi`` on a physical grid.

    When ``phi`` lives on the positive frequencies of ``grid`` the sum is an
    inverse FFT; otherwise it is evaluated directly.
    """
    xi = phi.xi_nodes
    w = synthesis_weights(xi)
    amp = w * specfun._theta(params, xi) * phi.values
    y = grid.y_nodes
    dual = grid.dual()
    pos = dual.x_nodes > 0
    if np.array_equal(xi.shape, dual.x_nodes[pos].shape) and np.allclose(
        xi, dual.x_nodes[pos], rtol=1e-13, atol=0
    ):
        spec = np.zeros(grid.shape, dtype=complex)
        spec[pos] = (amp / dual.x_step)[:, None] * np.exp(-np.outer(xi, y))
        out = u1_inverse(GridFunction(dual, spec, FOURIER_SIDE), params)
        return GridFunction(grid, out.values, PHYSICAL, analytic=True)
    kernel = np.exp(1j * np.outer(grid.x_nodes, xi))
    vals = kernel @ (amp[:, None] * np.exp(-np.outer(xi, y))) / math.sqrt(2.0)
    return GridFunction(grid, vals, PHYSICAL, analytic=True)


def pw_analyze(f: GridFunction, params: SpaceParams) -> BoundaryDensity:
    """Boundary density of ``f``: the left inverse of :func:`pw_synthesize`.

    For ``xi > 0``, ``theta^(p-1)(xi) / sqrt(2) * int (1/pi) exp(-(p-1) xi eta)
    [int f(s + i eta) exp(-i xi s) ds] d nu_lam(eta)``.  The inner integral is
    the FFT of each ``eta`` slice, the outer one uses the grid's ``nu``
    weights.
    """
    _require(f, PHYSICAL, "pw_analyze")
    g = u1_forward(f, params)
    grid = g.grid
    pos = grid.x_nodes > 0
    xi = grid.x_nodes[pos]
    eta = grid.y_nodes
    # inner integral = sqrt(2) pi * (U1 f)
    integrand = g.values[pos] * np.exp(-(params.p - 1.0) * np.outer(xi, eta))
    if not f.analytic:
        _check_tail(integrand, "pw_analyze")
    w = grid.nu_weights(params.lam)
    theta = specfun._theta(params, xi)
    return BoundaryDensity(xi, theta ** (params.p - 1.0) * (integrand @ w))


def bergman_project(f: GridFunction, params: SpaceParams) -> GridFunction:
    """Projection onto the analytic subspace through the transform chain."""
    _require(f, PHYSICAL, "bergman_project")
    g = u2_forward(u1_forward(f, params), params)
    h = u2_inverse(bp_project(g, params), params)
    out = u1_inverse(h, params)
    return GridFunction(f.grid, out.values, PHYSICAL, analytic=True, clamped=g.clamped)
