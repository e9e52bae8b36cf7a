"""Special functions behind the weights and changes of variable.

The regularized incomplete gamma functions are evaluated with the
classical split: power series for ``x < a + 1`` and a modified-Lentz
continued fraction otherwise.  Everything is vectorized over ``x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import SpaceParams

A_MAX = 200.0
_EPS = 1e-16
_FPMIN = 1e-300
_MAXITER = 5000
_PSI_RTOL = 4e-15
_STEP_TOL = 1e-14


class ConvergenceError(ArithmeticError):
    """An iterative solver failed to converge; carries the last bracket."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


def _check_a(a):
    if not (0.0 < a <= A_MAX):
        raise ValueError("incomplete gamma parameter a=%r outside (0, %g]" % (a, A_MAX))


def _series_p(a, x, lga):
    """Lower regularized P(a, x) by power series; x > 0."""
    total = np.full_like(x, 1.0 / a)
    term = total.copy()
    active = np.ones(x.shape, dtype=bool)
    n = 0
    while active.any():
        n += 1
        if n > _MAXITER:
            raise ConvergenceError("incomplete gamma series did not converge")
        term[active] *= x[active] / (a + n)
        total[active] += term[active]
        active &= np.abs(term) >= np.abs(total) * _EPS
    return total * np.exp(a * np.log(x) - x - lga)


def _cf_log_q(a, x, lga):
    """log Q(a, x) by Lentz's continued fraction; x >= a + 1."""
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / _FPMIN)
    d = 1.0 / b
    h = d.copy()
    out = np.empty_like(x)
    idx = np.arange(x.size)
    i = 0
    while idx.size:
        i += 1
        if i > _MAXITER:
            raise ConvergenceError("incomplete gamma continued fraction did not converge")
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = b + an / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        done = np.abs(delta - 1.0) < _EPS
        if done.any():
            out[idx[done]] = h[done]
            keep = ~done
            idx, b, c, d, h = idx[keep], b[keep], c[keep], d[keep], h[keep]
    return -x + a * np.log(x) - lga + np.log(out)


def _incgamma(a, x):
    """Return (P, Q, log Q) arrays for scalar ``a`` and array ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    lga = math.lgamma(a)
    p = np.zeros_like(x)
    logq = np.zeros_like(x)
    ser = (x > 0) & (x < a + 1.0)
    cf = x >= a + 1.0
    if ser.any():
        ps = _series_p(a, x[ser], lga)
        p[ser] = ps
        logq[ser] = np.log1p(-ps)
    if cf.any():
        lq = _cf_log_q(a, x[cf], lga)
        logq[cf] = lq
        p[cf] = -np.expm1(lq)
    q = np.where(ser, 1.0 - p, np.exp(logq))
    return p, q, logq


def _domain(a, x):
    _check_a(a)
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x < 0):
        raise ValueError("incomplete gamma argument must be >= 0")
    return x


def _out(v, x):
    return float(v) if np.ndim(x) == 0 else v


def gamma_upper_reg(a: float, x):
    """Regularized upper incomplete gamma ``Q(a, x) = Gamma(a, x) / Gamma(a)``."""
    x = _domain(a, x)
    return _out(_incgamma(a, x)[1], x)


def gamma_lower_reg(a: float, x):
    """Regularized lower incomplete gamma ``P(a, x) = 1 - Q(a, x)``."""
    x = _domain(a, x)
    return _out(_incgamma(a, x)[0], x)


def log_gamma_upper_reg(a: float, x):
    """``log Q(a, x)``, finite even where ``Q`` underflows."""
    x = _domain(a, x)
    return _out(_incgamma(a, x)[2], x)


def theta(params: SpaceParams, x):
    """Normalizing weight ``theta_{lam,p}(x)``.

    ``theta(x) exp(-x y)`` has unit norm in ``L^p(R+, nu_lam)`` for each
    ``x > 0``.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise ValueError("theta requires x > 0")
    return _out(_theta(params, xa), x)


def _theta(params, x):
    # (p^(lam+1) x^(lam+1) / (2^lam Gamma(lam+2)))^(1/p), x >= 0 allowed
    lam, p = params.lam, params.p
    log_c = ((lam + 1.0) * math.log(p) - lam * math.log(2.0) - math.lgamma(lam + 2.0)) / p
    with np.errstate(divide="ignore"):
        return np.exp(log_c + (lam + 1.0) / p * np.log(x))


def phi_xi_norm(params: SpaceParams, xi):
    """``||exp(-xi y)||`` in ``L^p(R+, nu_lam)``; ``+inf`` for ``xi <= 0``."""
    xa = np.asarray(xi, dtype=float)
    out = np.full(xa.shape, np.inf)
    pos = xa > 0
    lam, p = params.lam, params.p
    log_c = (lam * math.log(2.0) + math.lgamma(lam + 2.0) - (lam + 1.0) * math.log(p)) / p
    out[pos] = np.exp(log_c - (lam + 1.0) / p * np.log(xa[pos]))
    return _out(out, xi)


@dataclass(frozen=True)
class PsiBetaContext:
    """Fixed ``(params, x)`` for evaluating ``psi(x, .)`` and its inverse."""

    params: SpaceParams
    x: float
    log_gamma: float = field(init=False)

    def __post_init__(self):
        if not self.x > 0:
            raise ValueError("x must be > 0")
        _check_a(self.params.lam + 1.0)
        object.__setattr__(self, "log_gamma", math.lgamma(self.params.lam + 1.0))

    @property
    def rate(self) -> float:
        return self.params.p * self.x


def unit_psi(a: float, b):
    """``-log Q(a, b)``, accurate for tiny and huge ``b``."""
    b = np.asarray(b, dtype=float)
    p, _, logq = _incgamma(a, b)
    small = b < a + 1.0
    with np.errstate(divide="ignore"):
        return np.where(small, -np.log1p(-p), -logq)


def _unit_dlog(a, b, psi_b, lga):
    # d log(psi) / d log(b) = b psi'(b) / psi,  psi'(b) = b^(a-1) e^-b / Gamma(a, b)
    return np.exp(a * np.log(b) - b - lga + psi_b) / psi_b


def unit_beta(a: float, y, guess=None, maxiter: int = 200):
    """Solve ``-log Q(a, b) = y`` for ``b > 0`` (vectorized).

    Bracketing by doubling/halving from ``guess`` (default ``b = y``), then
    Newton steps on ``log psi`` against ``log b`` with bisection fallback.
    """
    _check_a(a)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(~(y > 0)):
        raise ValueError("psi inverse requires y > 0")
    lga = math.lgamma(a)
    b = y.copy() if guess is None else np.atleast_1d(np.asarray(guess, dtype=float)).copy()
    lo = np.zeros_like(y)
    hi = np.full_like(y, np.inf)
    f = unit_psi(a, b)
    below = f < y
    lo[below] = b[below]
    hi[~below] = b[~below]
    # expand the open side of each bracket
    for _ in range(maxiter):
        need_hi = np.isinf(hi)
        need_lo = (lo == 0) & ~(f == y)
        if not (need_hi.any() or need_lo.any()):
            break
        if need_hi.any():
            trial = lo[need_hi] * 2.0
            ft = unit_psi(a, trial)
            ok = ft >= y[need_hi]
            idx = np.nonzero(need_hi)[0]
            hi[idx[ok]] = trial[ok]
            lo[idx[~ok]] = trial[~ok]
        if need_lo.any():
            trial = hi[need_lo] * 0.5
            ft = unit_psi(a, trial)
            ok = ft <= y[need_lo]
            idx = np.nonzero(need_lo)[0]
            lo[idx[ok]] = trial[ok]
            hi[idx[~ok]] = trial[~ok]
    else:
        raise ConvergenceError("bracketing failed", bracket=(lo, hi))

    # start from whichever bracket end is finite and positive
    u = np.log(np.where(lo > 0, lo, hi))
    active = np.ones(y.shape, dtype=bool)
    for _ in range(maxiter):
        idx = np.nonzero(active)[0]
        uu = u[idx]
        bb = np.exp(uu)
        fb = unit_psi(a, bb)
        ya = y[idx]
        with np.errstate(divide="ignore"):
            g = np.log(fb) - np.log(ya)
        up = fb < ya
        lo[idx[up]] = bb[up]
        hi[idx[~up]] = bb[~up]
        lo_u = np.log(np.maximum(lo[idx], _FPMIN))
        hi_u = np.log(hi[idx])
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            u_new = uu - g / _unit_dlog(a, bb, fb, lga)
        bad = ~np.isfinite(u_new) | (u_new < lo_u) | (u_new > hi_u)
        u_new = np.where(bad, 0.5 * (lo_u + hi_u), u_new)
        # relative tests: psi carries ~1e-15 rounding noise, so demand less
        hit = np.abs(g) <= _PSI_RTOL
        done = hit | (np.abs(u_new - uu) <= _STEP_TOL) | (hi_u - lo_u <= _STEP_TOL)
        u[idx] = np.where(hit, uu, u_new)
        active[idx[done]] = False
        if not active.any():
            return np.exp(u)
    raise ConvergenceError("psi inverse did not converge", bracket=(lo, hi))


def psi(ctx: PsiBetaContext, t):
    """``psi_lam(x, t) = log(Gamma(lam+1) / Gamma(lam+1, p x t))``."""
    ta = np.asarray(t, dtype=float)
    if np.any(~(ta > 0)):
        raise ValueError("psi requires t > 0")
    return _out(unit_psi(ctx.params.lam + 1.0, ctx.rate * ta), t)


def psi_dt(ctx: PsiBetaContext, t):
    """Derivative of ``psi`` in ``t``."""
    ta = np.asarray(t, dtype=float)
    a = ctx.params.lam + 1.0
    b = ctx.rate * ta
    val = ctx.rate * np.exp((a - 1.0) * np.log(b) - b - ctx.log_gamma + unit_psi(a, b))
    return _out(val, t)


def beta(ctx: PsiBetaContext, y):
    """Inverse of ``psi(x, .)``: the ``t > 0`` with ``psi(x, t) = y``."""
    ya = np.asarray(y, dtype=float)
    b = unit_beta(ctx.params.lam + 1.0, np.atleast_1d(ya))
    t = b / ctx.rate
    return float(t[0]) if np.ndim(y) == 0 else t.reshape(ya.shape)
