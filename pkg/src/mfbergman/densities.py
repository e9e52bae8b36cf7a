"""Closed-form boundary densities and their spec strings.

Forms: ``ind(a,b)``, ``bump(a,b)`` (smooth, compactly supported, peak 1),
``poly(c0,...,ck)*ind(a,b)``, ``gauss(mu,s)``, ``zero()`` and ``csv(path)``.
Densities are sampled on the positive nodes of a grid's frequency axis,
which is where the transforms expect them.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import BoundaryDensity, HalfPlaneGrid, read_density
from .grammar import SpecParseError, expect_args, parse_product


class Indicator:
    def __init__(self, a: float, b: float):
        if not (0 <= a < b):
            raise ValueError("indicator needs 0 <= a < b")
        self.a, self.b = float(a), float(b)

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        return ((xi >= self.a) & (xi <= self.b)).astype(complex)

    def __repr__(self):
        return "ind(%r,%r)" % (self.a, self.b)


class Bump:
    """``exp(1 - 1/(1 - s^2))`` with ``s`` mapping ``[a, b]`` onto ``[-1, 1]``."""

    def __init__(self, a: float, b: float):
        if not (0 <= a < b):
            raise ValueError("bump needs 0 <= a < b")
        self.a, self.b = float(a), float(b)

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        s = (2.0 * xi - self.a - self.b) / (self.b - self.a)
        out = np.zeros(xi.shape, dtype=complex)
        inside = np.abs(s) < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return out

    def __repr__(self):
        return "bump(%r,%r)" % (self.a, self.b)


class PolyIndicator:
    def __init__(self, coeffs, a: float, b: float):
        if not coeffs:
            raise ValueError("poly needs at least one coefficient")
        self.coeffs = [float(c) for c in coeffs]
        self.ind = Indicator(a, b)

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        # numpy wants highest degree first
        return np.polyval(self.coeffs[::-1], xi) * self.ind(xi)

    def __repr__(self):
        return "poly(%s)*%r" % (",".join(repr(c) for c in self.coeffs), self.ind)


class Gaussian:
    def __init__(self, mu: float, s: float):
        if not s > 0:
            raise ValueError("gauss width must be > 0")
        self.mu, self.s = float(mu), float(s)

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.exp(-0.5 * ((xi - self.mu) / self.s) ** 2).astype(complex)

    def __repr__(self):
        return "gauss(%r,%r)" % (self.mu, self.s)


class Zero:
    def __call__(self, xi):
        return np.zeros(np.shape(xi), dtype=complex)

    def __repr__(self):
        return "zero()"


def parse_density(text: str):
    """Parse a density spec.  Returns a callable form, or a
    :class:`BoundaryDensity` for ``csv(path)``."""
    calls = parse_product(text)
    head = calls[0]
    if len(calls) == 2:
        if head.name != "poly" or calls[1].name != "ind":
            raise SpecParseError("only poly(...)*ind(a,b) products are allowed", text, calls[1].column)
        expect_args(calls[1], text, 2, 2)
        if not head.args:
            raise SpecParseError("poly() needs coefficients", text, head.column)
        return _build(lambda: PolyIndicator(head.args, *calls[1].args), text, head)
    if len(calls) > 2:
        raise SpecParseError("too many factors", text, calls[2].column)
    name = head.name
    if name in ("ind", "bump", "gauss"):
        expect_args(head, text, 2, 2)
        cls = {"ind": Indicator, "bump": Bump, "gauss": Gaussian}[name]
        return _build(lambda: cls(*head.args), text, head)
    if name == "zero":
        expect_args(head, text, 0, 0)
        return Zero()
    if name == "csv":
        expect_args(head, text, 1, 1)
        return read_density(Path(head.args[0]))
    raise SpecParseError("unknown density form %r" % name, text, head.column)


def _build(factory, text, call):
    try:
        return factory()
    except ValueError as exc:
        raise SpecParseError(str(exc), text, call.column) from None


def density_nodes(grid: HalfPlaneGrid) -> np.ndarray:
    """Positive frequencies of ``grid``'s transform axis, excluding the Nyquist end."""
    dual = grid.dual()
    return dual.x_nodes[dual.x_nodes > 0]


def sample_density(form, grid: HalfPlaneGrid) -> BoundaryDensity:
    """Sample a form (or resample a stored density) on ``density_nodes(grid)``."""
    nodes = density_nodes(grid)
    if isinstance(form, BoundaryDensity):
        if form.xi_nodes.shape == nodes.shape and np.allclose(form.xi_nodes, nodes, rtol=1e-13, atol=0):
            return BoundaryDensity(nodes, form.values, form.closed_form)
        return BoundaryDensity(nodes, form.evaluate(nodes), form.closed_form)
    return BoundaryDensity.sample(form, nodes)


def smooth_suite():
    """Six fixed densities used by the isometry and left-inverse checks."""
    return [
        Indicator(1.0, 2.0),
        Indicator(0.5, 3.0),
        Bump(1.0, 4.0),
        Bump(0.25, 1.5),
        PolyIndicator([1.0, -0.5, 0.25], 1.0, 3.0),
        PolyIndicator([0.0, 1.0], 0.5, 2.5),
    ]


__all__ = [
    "Bump",
    "Gaussian",
    "Indicator",
    "PolyIndicator",
    "Zero",
    "density_nodes",
    "parse_density",
    "sample_density",
    "smooth_suite",
]
