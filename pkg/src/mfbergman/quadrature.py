"""Quadrature rules on the half-line.

Two families live here:

* Gauss rules built by the Golub-Welsch eigenvalue method (generalized
  Gauss-Laguerre), used wherever an integral over ``(0, inf)`` has a known
  ``t**alpha * exp(-t)`` factor.
* Node-based rules for sampled data on a fixed, graded ``y`` grid.  These are
  product-integration rules: the sampled function is interpolated
  piecewise and the interpolant is integrated exactly against the weight.
"""

from __future__ import annotations

import math

import numpy as np

_LEG_X, _LEG_W = np.polynomial.legendre.leggauss(12)


def gauss_laguerre(n: int, alpha: float = 0.0, normalized: bool = False):
    """Nodes and weights of the ``n``-point generalized Gauss-Laguerre rule.

    The rule integrates ``f(t) t**alpha exp(-t)`` over ``(0, inf)``.  With
    ``normalized=True`` the weights are divided by ``Gamma(alpha + 1)`` so
    they sum to one; this form never overflows and is what callers
    normalizing by ``Gamma(alpha + 1)`` want anyway.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if alpha <= -1:
        raise ValueError("alpha must be > -1")
    k = np.arange(n, dtype=float)
    diag = 2.0 * k + 1.0 + alpha
    off = np.sqrt(k[1:] * (k[1:] + alpha))
    jacobi = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    nodes, vecs = np.linalg.eigh(jacobi)
    weights = vecs[0, :] ** 2
    if not normalized:
        weights = weights * math.gamma(alpha + 1.0)
    return nodes, weights


def trapezoid_weights(y: np.ndarray) -> np.ndarray:
    """Trapezoid weights on increasing positive nodes, covering ``(0, y[-1]]``.

    The uncovered segment ``(0, y[0]]`` is assigned to the first node
    (constant extrapolation), so a constant integrates exactly.
    """
    y = np.asarray(y, dtype=float)
    w = np.zeros_like(y)
    h = np.diff(y)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    w[0] += y[0]
    return w


def _nu_moment(a, b, lam, k):
    # int_a^b y^k (lam+1) (2y)^lam dy
    e = lam + 1.0 + k
    return (lam + 1.0) * 2.0**lam * (b**e - a**e) / e


def _segment_weights(y, lam, seg, order):
    """Contributions of one segment to the product weights."""
    n = len(y)
    if seg == 0:
        # polynomial through the first `order` nodes, continued down to 0;
        # weights match the exact moments int_0^{y0} (y/y0)^j dnu
        k = min(order, n)
        b = y[0]
        scaled = y[:k] / b
        vander = np.vander(scaled, k, increasing=True)
        moments = np.array([_nu_moment(0.0, b, lam, j) / b**j for j in range(k)])
        return list(range(k)), np.linalg.solve(vander.T, moments)
    lo_node = seg - 1
    a, b = y[lo_node], y[lo_node + 1]
    if order == 2 or n < order:
        m0 = _nu_moment(a, b, lam, 0)
        m1 = _nu_moment(a, b, lam, 1)
        h = b - a
        return [lo_node, lo_node + 1], np.array([(b * m0 - m1) / h, (m1 - a * m0) / h])
    half = order // 2
    start = min(max(lo_node - half + 1, 0), n - order)
    idx = list(range(start, start + order))
    t = 0.5 * (b - a) * (_LEG_X + 1.0) + a
    wt = 0.5 * (b - a) * _LEG_W * (lam + 1.0) * (2.0 * t) ** lam
    out = np.empty(order)
    for jj, j in enumerate(idx):
        basis = np.ones_like(t)
        for k in idx:
            if k != j:
                basis *= (t - y[k]) / (y[j] - y[k])
        out[jj] = wt @ basis
    return idx, out


def nu_weights(y: np.ndarray, lam: float, order: int = 6) -> np.ndarray:
    """Product-integration weights for ``int_0^{y[-1]} f dnu_lam``.

    ``dnu_lam(y) = (lam+1) (2y)**lam dy``.  Interior segments integrate the
    local interpolant through ``order`` neighbouring nodes exactly against
    the weight; the first segment ``(0, y[0]]`` extrapolates the quadratic
    through the first three nodes.  Any segment whose contribution would
    make a node weight non-positive is demoted to a lower order (down to
    linear, or constant on the first segment), so the returned weights are
    always positive.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    orders = [3] + [order] * (n - 1)
    for _ in range(4 * n):
        w = np.zeros(n)
        owners: list[list[int]] = [[] for _ in range(n)]
        for seg in range(n):
            idx, contrib = _segment_weights(y, lam, seg, orders[seg])
            w[idx] += contrib
            for j in idx:
                owners[j].append(seg)
        bad = np.nonzero(w <= 0.0)[0]
        if bad.size == 0:
            return w
        demoted = False
        for j in bad:
            for seg in owners[j]:
                floor = 1 if seg == 0 else 2
                if orders[seg] > floor:
                    orders[seg] = max(floor, orders[seg] - (1 if seg == 0 else 2))
                    demoted = True
        if not demoted:
            break
    raise ArithmeticError("could not build positive weights for lambda=%g" % lam)


def fitted_weights(y: np.ndarray, rate: float, decay: float) -> np.ndarray:
    """Weights for ``int_0^inf f(y) exp(-decay*y) dy`` with exponential fitting.

    On each segment ``f`` is modelled as ``exp(-rate*y) (A + B y)``, the first
    segment's model is continued down to 0, and beyond the last node ``f`` is
    continued as ``f[-1] exp(-rate (y - y[-1]))``.  The rule is exact for
    ``f = exp(-rate*y)`` and ``f = y exp(-rate*y)``.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    if rate + decay <= 0:
        raise ValueError("rate + decay must be positive")
    w = np.zeros(n)
    lo = np.concatenate(([0.0], y[:-1]))
    hi = y
    # segment j covers [lo[j], hi[j]]; it uses the model of nodes (i, i+1)
    left = np.maximum(np.arange(n) - 1, 0)
    right = left + 1
    a = y[left][:, None]
    b = y[right][:, None]
    h = b - a
    t = 0.5 * (hi - lo)[:, None] * (_LEG_X[None, :] + 1.0) + lo[:, None]
    gw = 0.5 * (hi - lo)[:, None] * _LEG_W[None, :] * np.exp(-decay * t)
    basis_l = (b - t) / h * np.exp(-rate * (t - a))
    basis_r = (t - a) / h * np.exp(-rate * (t - b))
    np.add.at(w, left, np.sum(gw * basis_l, axis=1))
    np.add.at(w, right, np.sum(gw * basis_r, axis=1))
    w[-1] += math.exp(-decay * y[-1]) / (rate + decay)
    return w


def fitted_interp(y, values, rate, t, tail="zero", log_scale=None):
    """Exponentially fitted linear interpolation along the last axis.

    Row ``i`` of ``values`` is sampled at ``y`` and is modelled between
    neighbouring nodes as ``exp(-rate[i] y) (A + B y)``; with ``rate = 0``
    this is plain linear interpolation.  ``t`` holds the query points per
    row.  Queries below ``y[0]`` continue the first segment's model.
    Queries above ``y[-1]`` either follow the pure exponential tail
    (``tail="exp"``) or are set to zero (``tail="zero"``).

    ``log_scale`` (same shape as ``t``) multiplies the result by
    ``exp(log_scale)`` inside the exponentials, avoiding overflow when a
    large prefactor meets a small interpolated value.

    Returns ``(result, n_clamped)``.
    """
    y = np.asarray(y, dtype=float)
    values = np.asarray(values)
    t = np.asarray(t, dtype=float)
    rate = np.broadcast_to(np.asarray(rate, dtype=float).reshape(-1, 1), t.shape)
    if log_scale is None:
        log_scale = np.zeros_like(t)
    n = len(y)
    i = np.clip(np.searchsorted(y, t, side="right") - 1, 0, n - 2)
    a = y[i]
    b = y[i + 1]
    s = (t - a) / (b - a)
    rows = np.arange(values.shape[0])[:, None]
    va = values[rows, i]
    vb = values[rows, i + 1]
    wa = (1.0 - s) * np.exp(log_scale - rate * (t - a))
    wb = s * np.exp(log_scale - rate * (t - b))
    out = wa * va + wb * vb
    above = t > y[-1]
    n_clamped = 0
    if np.any(above):
        if tail == "exp":
            r_idx = np.broadcast_to(rows, t.shape)[above]
            out = out.astype(np.result_type(out, values), copy=True)
            out[above] = values[r_idx, -1] * np.exp(
                log_scale[above] - rate[above] * (t[above] - y[-1])
            )
        else:
            out = np.where(above, 0.0, out)
            n_clamped = int(np.count_nonzero(above & (np.abs(values[:, -1])[:, None] > 0)))
    return out, n_clamped
