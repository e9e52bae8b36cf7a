"""Parameters, grids, sampled functions and the weighted mixed norms.

The half-plane is discretized as a tensor grid: a uniform, FFT-friendly
``x`` axis on ``[-X, X)`` and a ``y`` axis graded toward 0 on ``(0, Y]``.
Every transform in the package maps between grids of this kind; the
``x`` axis of a Fourier-side grid holds frequencies.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import quadrature

PHYSICAL = "physical"
FOURIER_SIDE = "fourier_side"
U2_SIDE = "u2_side"
REPR_TAGS = (PHYSICAL, FOURIER_SIDE, U2_SIDE)


@dataclass(frozen=True)
class SpaceParams:
    """The triple ``(lambda, p, q)``: weight exponent, inner and outer exponents."""

    lam: float = 0.0
    p: float = 2.0
    q: float = 2.0

    def __post_init__(self):
        for name in ("lam", "p", "q"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError("%s must be a finite real, got %r" % (name, v))
        if not self.lam > -1:
            raise ValueError("lambda must be > -1, got %r" % self.lam)
        if not 1 <= self.p:
            raise ValueError("p must satisfy 1 <= p < inf, got %r" % self.p)
        if not 1 <= self.q:
            raise ValueError("q must satisfy 1 <= q < inf, got %r" % self.q)


def nu_weight(params: SpaceParams, y):
    """Density of ``nu_lambda``: ``(lambda+1) (2y)**lambda``."""
    ya = np.asarray(y, dtype=float)
    if np.any(~(ya > 0)):
        raise ValueError("nu_weight requires y > 0")
    val = (params.lam + 1.0) * (2.0 * ya) ** params.lam
    return float(val) if np.ndim(y) == 0 else val


@dataclass(frozen=True, eq=False)
class HalfPlaneGrid:
    """Tensor grid on the half-plane with trapezoid weights on both axes.

    ``x_weights`` is the periodic trapezoid rule (``x_step`` everywhere);
    ``y_weights`` is the trapezoid rule on ``(0, y_max]`` with the segment
    below the first node assigned to it.  Weighted integrals against
    ``nu_lambda`` use :meth:`nu_weights`.
    """

    x_nodes: np.ndarray
    y_nodes: np.ndarray
    x_weights: np.ndarray = field(repr=False)
    y_weights: np.ndarray = field(repr=False)
    x_step: float

    @classmethod
    def from_nodes(cls, x_nodes, y_nodes) -> "HalfPlaneGrid":
        x = np.array(x_nodes, dtype=float)
        y = np.array(y_nodes, dtype=float)
        if x.ndim != 1 or len(x) < 2:
            raise ValueError("need at least two x nodes")
        if y.ndim != 1 or len(y) < 2:
            raise ValueError("need at least two y nodes")
        step = (x[-1] - x[0]) / (len(x) - 1)
        if not step > 0 or np.max(np.abs(np.diff(x) - step)) > 1e-12 * step:
            raise ValueError("x nodes must be uniform and increasing")
        if not (np.all(y > 0) and np.all(np.diff(y) > 0)):
            raise ValueError("y nodes must be positive and strictly increasing")
        for arr in (x, y):
            arr.setflags(write=False)
        xw = np.full(len(x), step)
        yw = quadrature.trapezoid_weights(y)
        xw.setflags(write=False)
        yw.setflags(write=False)
        return cls(x, y, xw, yw, float(step))

    @property
    def shape(self) -> tuple:
        return (len(self.x_nodes), len(self.y_nodes))

    @property
    def n_x(self) -> int:
        return len(self.x_nodes)

    def nu_weights(self, lam: float) -> np.ndarray:
        """y-quadrature weights for ``int f dnu_lam`` (cached per lambda)."""
        cache = self.__dict__.setdefault("_nu_cache", {})
        key = float(lam)
        if key not in cache:
            w = quadrature.nu_weights(self.y_nodes, key)
            w.setflags(write=False)
            cache[key] = w
        return cache[key]

    def fitted_weights(self, rate: float, decay: float) -> np.ndarray:
        cache = self.__dict__.setdefault("_fit_cache", {})
        key = (float(rate), float(decay))
        if key not in cache:
            w = quadrature.fitted_weights(self.y_nodes, *key)
            w.setflags(write=False)
            cache[key] = w
        return cache[key]

    def dual(self) -> "HalfPlaneGrid":
        """The grid of the discrete Fourier transform in ``x``.

        Frequencies ``(m - N/2) * 2 pi / (N dx)``; the ``y`` axis is shared.
        The dual of the dual is this grid object again.
        """
        cached = self.__dict__.get("_dual")
        if cached is not None:
            return cached
        n = self.n_x
        dxi = 2.0 * math.pi / (n * self.x_step)
        xi = (np.arange(n) - n // 2) * dxi
        other = HalfPlaneGrid.from_nodes(xi, self.y_nodes)
        object.__setattr__(other, "_dual", self)
        object.__setattr__(self, "_dual", other)
        return other

    def positive_x(self) -> np.ndarray:
        return self.x_nodes[self.x_nodes > 0]

    def same_as(self, other: "HalfPlaneGrid") -> bool:
        return self is other or (
            self.shape == other.shape
            and np.allclose(self.x_nodes, other.x_nodes, rtol=0, atol=1e-12 * self.x_step)
            and np.allclose(self.y_nodes, other.y_nodes, rtol=1e-13, atol=0)
        )


def make_grid(
    x_halfwidth: float, n_x: int, y_max: float, n_y: int, grading: float = 2.0
) -> HalfPlaneGrid:
    """Uniform ``x`` on ``[-X, X)`` and ``y_k = y_max (k/n_y)**grading``."""
    if not x_halfwidth > 0:
        raise ValueError("x_halfwidth must be > 0")
    if not y_max > 0:
        raise ValueError("y_max must be > 0")
    if int(n_x) != n_x or n_x < 8 or (int(n_x) & (int(n_x) - 1)):
        raise ValueError("n_x must be a power of two >= 8, got %r" % n_x)
    if int(n_y) != n_y or n_y < 8:
        raise ValueError("n_y must be an integer >= 8, got %r" % n_y)
    if not grading >= 1:
        raise ValueError("grading must be >= 1")
    n_x, n_y = int(n_x), int(n_y)
    step = 2.0 * x_halfwidth / n_x
    x = -x_halfwidth + step * np.arange(n_x)
    y = y_max * (np.arange(1, n_y + 1) / n_y) ** grading
    return HalfPlaneGrid.from_nodes(x, y)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples ``values[x_index, y_index]`` on a grid.

    ``repr_tag`` records which representation the samples belong to:
    ``physical`` (f(x, y)), ``fourier_side`` ((U1 f)(xi, y)) or ``u2_side``
    ((U2 U1 f)(xi, y)).  ``analytic`` marks samples known to lie in the
    analytic subspace of that representation; ``clamped`` counts samples
    that a transform had to set to zero for lack of data.
    """

    grid: HalfPlaneGrid
    values: np.ndarray
    repr_tag: str = PHYSICAL
    analytic: bool = False
    clamped: int = 0

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise ValueError("values shape %s does not match grid %s" % (vals.shape, self.grid.shape))
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        if self.repr_tag not in REPR_TAGS:
            raise ValueError("unknown repr_tag %r" % self.repr_tag)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def with_values(self, values, **changes) -> "GridFunction":
        kw = dict(grid=self.grid, values=values, repr_tag=self.repr_tag, analytic=False, clamped=0)
        kw.update(changes)
        return GridFunction(**kw)

    def __mul__(self, c):
        return self.with_values(self.values * c, analytic=self.analytic)

    __rmul__ = __mul__

    def __add__(self, other: "GridFunction"):
        if not self.grid.same_as(other.grid) or self.repr_tag != other.repr_tag:
            raise ValueError("cannot add grid functions on different grids/representations")
        return self.with_values(self.values + other.values, analytic=self.analytic and other.analytic)

    def __sub__(self, other: "GridFunction"):
        return self + (-1.0) * other


@dataclass(frozen=True, eq=False)
class BoundaryDensity:
    """A function on the positive half-line, sampled and optionally closed-form.

    ``closed_form`` is any callable ``xi -> values`` (see
    :mod:`mfbergman.densities`); when present it is used to evaluate the
    density off its nodes.
    """

    xi_nodes: np.ndarray
    values: np.ndarray
    closed_form: Optional[Callable] = None

    def __post_init__(self):
        xi = np.array(self.xi_nodes, dtype=float)
        vals = np.array(self.values, dtype=complex)
        if xi.ndim != 1 or vals.shape != xi.shape:
            raise ValueError("xi_nodes and values must be 1-D of equal length")
        if not (np.all(xi > 0) and np.all(np.diff(xi) > 0)):
            raise ValueError("xi_nodes must be positive and strictly increasing")
        if not np.all(np.isfinite(vals)):
            raise ValueError("density values must be finite")
        xi.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "xi_nodes", xi)
        object.__setattr__(self, "values", vals)

    @classmethod
    def sample(cls, form: Callable, xi_nodes) -> "BoundaryDensity":
        xi = np.asarray(xi_nodes, dtype=float)
        return cls(xi, form(xi), closed_form=form)

    def evaluate(self, xi) -> np.ndarray:
        """Values at arbitrary points; zero for ``xi <= 0`` and off the node range."""
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape, dtype=complex)
        pos = xi > 0
        if self.closed_form is not None:
            out[pos] = self.closed_form(xi[pos])
            return out
        inside = pos & (xi >= self.xi_nodes[0]) & (xi <= self.xi_nodes[-1])
        out[inside] = np.interp(xi[inside], self.xi_nodes, self.values.real) + 1j * np.interp(
            xi[inside], self.xi_nodes, self.values.imag
        )
        return out

    def with_values(self, values) -> "BoundaryDensity":
        return BoundaryDensity(self.xi_nodes, values)


def _finite(values):
    if np.any(np.isnan(values)):
        raise ValueError("NaN encountered in norm evaluation")


def mixed_norm(f: GridFunction, params: SpaceParams) -> float:
    """Weighted mixed norm: inner ``L^p(R+, nu_lam)`` in ``y``, outer ``L^q`` in ``x``."""
    _finite(f.values)
    w_y = f.grid.nu_weights(params.lam)
    inner = (np.abs(f.values) ** params.p) @ w_y
    outer = f.grid.x_weights @ (inner ** (params.q / params.p))
    return float(outer ** (1.0 / params.q))


def lq_norm(phi: BoundaryDensity, q: float) -> float:
    """Trapezoid ``L^q`` norm over the density's node range."""
    if not q >= 1:
        raise ValueError("q must be >= 1")
    _finite(phi.values)
    vals = np.abs(phi.values) ** q
    total = 0.5 * np.sum((vals[1:] + vals[:-1]) * np.diff(phi.xi_nodes))
    return float(total ** (1.0 / q))


def lq_distance(a: BoundaryDensity, b: BoundaryDensity, q: float) -> float:
    if not np.array_equal(a.xi_nodes, b.xi_nodes):
        raise ValueError("densities live on different nodes")
    return lq_norm(a.with_values(a.values - b.values), q)


# -- CSV serialization -------------------------------------------------------

_FMT = "%.17g"


def _open_out(target):
    if hasattr(target, "write"):
        return target, False
    return open(target, "w", newline="\n"), True


def write_grid_function(target, f: GridFunction) -> None:
    """CSV ``x,y,re,im``, row-major over ``(x, y)``."""
    fh, close = _open_out(target)
    try:
        nx, ny = f.grid.shape
        xs = np.repeat(f.grid.x_nodes, ny)
        ys = np.tile(f.grid.y_nodes, nx)
        data = np.column_stack([xs, ys, f.values.real.ravel(), f.values.imag.ravel()])
        buf = io.StringIO()
        np.savetxt(buf, data, fmt=_FMT, delimiter=",")
        fh.write("x,y,re,im\n")
        fh.write(buf.getvalue())
    finally:
        if close:
            fh.close()


def write_density(target, phi: BoundaryDensity) -> None:
    """CSV ``xi,re,im``."""
    fh, close = _open_out(target)
    try:
        data = np.column_stack([phi.xi_nodes, phi.values.real, phi.values.imag])
        buf = io.StringIO()
        np.savetxt(buf, data, fmt=_FMT, delimiter=",")
        fh.write("xi,re,im\n")
        fh.write(buf.getvalue())
    finally:
        if close:
            fh.close()


def _read_table(source, header):
    text = Path(source).read_text() if not hasattr(source, "read") else source.read()
    lines = text.splitlines()
    if not lines or lines[0].strip().replace(" ", "") != header:
        raise ValueError("expected CSV header %r" % header)
    if len(lines) == 1:
        return np.zeros((0, header.count(",") + 1))
    return np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",", ndmin=2)


def csv_header(source) -> str:
    with open(source) as fh:
        return fh.readline().strip().replace(" ", "")


def read_grid_function(source, repr_tag: str = PHYSICAL) -> GridFunction:
    data = _read_table(source, "x,y,re,im")
    x = np.unique(data[:, 0])
    y = np.unique(data[:, 1])
    if len(x) * len(y) != len(data):
        raise ValueError("CSV does not describe a full tensor grid")
    order = np.lexsort((data[:, 1], data[:, 0]))
    data = data[order]
    grid = HalfPlaneGrid.from_nodes(x, y)
    vals = (data[:, 2] + 1j * data[:, 3]).reshape(len(x), len(y))
    return GridFunction(grid, vals, repr_tag)


def read_density(source) -> BoundaryDensity:
    data = _read_table(source, "xi,re,im")
    return BoundaryDensity(data[:, 0], data[:, 1] + 1j * data[:, 2])
