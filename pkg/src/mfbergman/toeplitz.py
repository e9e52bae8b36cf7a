"""Toeplitz operators with vertical symbols ``a = a(y)``.

After conjugation by the Paley-Wiener pair such an operator acts on the
boundary density as multiplication by

    gamma(x) = x^(lam+1) / Gamma(lam+1) * int_0^inf a(t/p) exp(-t x) t^lam dt
             = E[a(U / (p x))],   U ~ Gamma(lam+1, 1),

so everything here reduces to expectations of ``a`` under a gamma
distribution rescaled by ``1/(p x)``.  Every symbol form has a closed
expression; a Gauss-Laguerre rule in ``u = t x`` is the generic fallback.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import specfun
from .core import BoundaryDensity, HalfPlaneGrid, SpaceParams, lq_norm
from .grammar import SpecParseError, expect_args, parse_product
from .quadrature import gauss_laguerre

_LEG8_X, _LEG8_W = np.polynomial.legendre.leggauss(8)


class IntegrabilityError(ValueError):
    """The symbol is outside the admissible class; ``condition`` is
    ``"near-zero"`` or ``"tail"``."""

    def __init__(self, message, condition):
        super().__init__("%s (failed condition: %s)" % (message, condition))
        self.condition = condition


def _x_array(x):
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise ValueError("gamma is defined for x > 0 only")
    return xa


def _reg_diff(a, lo, hi):
    """``P(a, hi) - P(a, lo)`` for ``0 <= lo <= hi`` (``hi`` may be inf),
    taking whichever of ``P`` or ``Q`` keeps the difference accurate."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    fin = np.isfinite(hi)
    hi_f = np.where(fin, hi, 0.0)
    p_lo, q_lo, _ = specfun._incgamma(a, lo)
    p_hi, q_hi, _ = specfun._incgamma(a, hi_f)
    q_hi = np.where(fin, q_hi, 0.0)
    p_hi = np.where(fin, p_hi, 1.0)
    return np.where(lo >= a + 1.0, q_lo - q_hi, p_hi - p_lo)


class VerticalSymbol:
    """Base class for symbols ``a(y)`` of the admissible class."""

    spec = "?"

    def __call__(self, y):
        raise NotImplementedError

    def check(self, params: SpaceParams) -> None:
        """Raise :class:`IntegrabilityError` if ``a`` is not admissible for ``params``."""

    def closed_gamma(self, params: SpaceParams, x: np.ndarray) -> Optional[np.ndarray]:
        return None

    def bounds(self):
        """``(inf a, sup a)`` when known, else None."""
        return None

    def cell_averages(self, edges: np.ndarray) -> np.ndarray:
        """Mean of ``a`` over each cell ``[edges[k], edges[k+1]]`` (8-point Gauss)."""
        lo = edges[:-1, None]
        hi = edges[1:, None]
        t = 0.5 * (hi - lo) * (_LEG8_X + 1.0) + lo
        return 0.5 * (self(t) @ _LEG8_W)

    def __repr__(self):
        return self.spec


@dataclass(frozen=True, repr=False)
class Const(VerticalSymbol):
    c: float = 1.0

    @property
    def spec(self):
        return "const(%r)" % self.c

    def __call__(self, y):
        return np.full(np.shape(y), self.c, dtype=float)

    def closed_gamma(self, params, x):
        return np.full(np.shape(x), self.c, dtype=float)

    def bounds(self):
        return (self.c, self.c)


@dataclass(frozen=True, repr=False)
class Exp(VerticalSymbol):
    """``c exp(-sigma y)``."""

    sigma: float = 1.0
    c: float = 1.0

    @property
    def spec(self):
        return "exp(%r,%r)" % (self.sigma, self.c)

    def check(self, params):
        if self.sigma < 0:
            raise IntegrabilityError("exp(sigma) grows for sigma < 0", "tail")

    def __call__(self, y):
        return self.c * np.exp(-self.sigma * np.asarray(y, dtype=float))

    def closed_gamma(self, params, x):
        # (p x / (p x + sigma))^(lam+1)
        return self.c * np.exp(-(params.lam + 1.0) * np.log1p(self.sigma / (params.p * x)))

    def bounds(self):
        return tuple(sorted((0.0 if self.sigma > 0 else self.c, self.c)))


@dataclass(frozen=True, repr=False)
class Indicator(VerticalSymbol):
    """Indicator of ``(a, b)``, ``0 <= a < b <= inf``."""

    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not (0 <= self.a < self.b):
            raise ValueError("indicator needs 0 <= a < b")

    @property
    def spec(self):
        return "ind(%r,%r)" % (self.a, self.b)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return ((y > self.a) & (y < self.b)).astype(float)

    def cell_averages(self, edges):
        lo = np.clip(edges[:-1], self.a, self.b)
        hi = np.clip(edges[1:], self.a, self.b)
        return (hi - lo) / np.diff(edges)

    def closed_gamma(self, params, x):
        px = params.p * x
        return _reg_diff(params.lam + 1.0, self.a * px, self.b * px)

    def bounds(self):
        return (0.0, 1.0)


@dataclass(frozen=True, repr=False)
class Power(VerticalSymbol):
    """``y**s``; admissible for ``s > max(-1, -1 - lam)``."""

    s: float = 1.0

    @property
    def spec(self):
        return "pow(%r)" % self.s

    def check(self, params):
        if not self.s > max(-1.0, -1.0 - params.lam):
            raise IntegrabilityError(
                "pow(%g) is not integrable near 0 for lambda=%g" % (self.s, params.lam), "near-zero"
            )

    def __call__(self, y):
        return np.asarray(y, dtype=float) ** self.s

    def closed_gamma(self, params, x):
        lam = params.lam
        return np.exp(
            math.lgamma(lam + self.s + 1.0) - math.lgamma(lam + 1.0) - self.s * np.log(params.p * x)
        )

    def bounds(self):
        return (0.0, 0.0) if self.s == 0 else None


@dataclass(frozen=True, repr=False)
class PolyExp(VerticalSymbol):
    """``(c0 + c1 y + ... + ck y^k) exp(-sigma y)``."""

    coeffs: tuple = (1.0,)
    sigma: float = 0.0

    @property
    def spec(self):
        return "poly(%s)*exp(%r)" % (",".join(repr(c) for c in self.coeffs), self.sigma)

    def check(self, params):
        if self.sigma < 0:
            raise IntegrabilityError("exp(sigma) grows for sigma < 0", "tail")

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return np.polyval(list(self.coeffs)[::-1], y) * np.exp(-self.sigma * y)

    def closed_gamma(self, params, x):
        lam = params.lam
        px = params.p * x
        base = np.exp(-(lam + 1.0) * np.log1p(self.sigma / px))
        total = np.zeros(np.shape(x))
        rising = 1.0
        for j, c in enumerate(self.coeffs):
            if j:
                rising *= lam + j
            total = total + c * rising / (px + self.sigma) ** j
        return base * total


@dataclass(frozen=True, repr=False)
class Sampled(VerticalSymbol):
    """Piecewise-linear symbol through ``(y_nodes, values)``.

    Below the first node the first value is held.  Beyond the last node the
    symbol continues as ``values[-1] exp(-tail (y - y_last))`` when
    ``tail > 0`` and is zero when ``tail`` is 0 or None (compact support).
    """

    y_nodes: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0]))
    values: np.ndarray = field(default_factory=lambda: np.array([1.0, 1.0]))
    tail: Optional[float] = None
    source: str = ""

    def __post_init__(self):
        y = np.array(self.y_nodes, dtype=float)
        v = np.array(self.values, dtype=float)
        if y.ndim != 1 or y.shape != v.shape or len(y) < 2:
            raise ValueError("sampled symbol needs >= 2 nodes and matching values")
        if not (y[0] >= 0 and np.all(np.diff(y) > 0)):
            raise ValueError("sampled symbol nodes must be >= 0 and increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("sampled symbol values must be finite")
        object.__setattr__(self, "y_nodes", y)
        object.__setattr__(self, "values", v)

    @property
    def spec(self):
        if self.source:
            return "csv(%s,tail=%r)" % (self.source, self.tail or 0.0)
        return "sampled(%d nodes)" % len(self.y_nodes)

    def check(self, params):
        if self.tail is not None and self.tail < 0:
            raise IntegrabilityError("sampled tail must decay (tail >= 0)", "tail")

    def _tail_rate(self):
        return self.tail if self.tail else None

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        out = np.interp(y, self.y_nodes, self.values)
        above = y > self.y_nodes[-1]
        rate = self._tail_rate()
        if rate is None:
            out = np.where(above, 0.0, out)
        else:
            out = np.where(above, self.values[-1] * np.exp(-rate * (y - self.y_nodes[-1])), out)
        return out

    def closed_gamma(self, params, x):
        a = params.lam + 1.0
        px = params.p * np.asarray(x, dtype=float)
        yn, v = self.y_nodes, self.values
        total = np.zeros(px.shape)
        if yn[0] > 0:
            total = total + v[0] * specfun._incgamma(a, yn[0] * px)[0]
        for k in range(len(yn) - 1):
            slope = (v[k + 1] - v[k]) / (yn[k + 1] - yn[k])
            icpt = v[k] - slope * yn[k]
            lo, hi = yn[k] * px, yn[k + 1] * px
            # a(y) = icpt + slope * u / (p x) on this piece
            total = total + icpt * _reg_diff(a, lo, hi) + slope * a / px * _reg_diff(a + 1.0, lo, hi)
        rate = self._tail_rate()
        if rate is not None and v[-1] != 0:
            _, _, log_q = specfun._incgamma(a, yn[-1] * px + rate * yn[-1])
            total = total + v[-1] * np.exp(rate * yn[-1] - a * np.log1p(rate / px) + log_q)
        return total

    def bounds(self):
        # both tail conventions end at 0
        return (min(float(self.values.min()), 0.0), max(float(self.values.max()), 0.0))


# -- parsing -----------------------------------------------------------------


def read_symbol_csv(path, tail=None) -> Sampled:
    """CSV with header ``y,a``."""
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip().replace(" ", "") != "y,a":
        raise ValueError("symbol CSV must start with header 'y,a'")
    data = np.loadtxt(text[1:], delimiter=",", ndmin=2)
    return Sampled(data[:, 0], data[:, 1], tail, source=str(path))


def parse_symbol(text: str) -> VerticalSymbol:
    """Parse ``const(c)``, ``exp(sigma[,c])``, ``ind(a,b)``, ``pow(s)``,
    ``poly(c0,...,ck)[*exp(sigma)]`` or ``csv(path[,tail=sigma])``."""
    calls = parse_product(text)
    head = calls[0]
    if len(calls) > 2:
        raise SpecParseError("too many factors", text, calls[2].column)
    if len(calls) == 2:
        if head.name != "poly" or calls[1].name != "exp":
            raise SpecParseError("only poly(...)*exp(sigma) products are allowed", text, calls[1].column)
        expect_args(calls[1], text, 1, 1)
        if not head.args:
            raise SpecParseError("poly() needs coefficients", text, head.column)
        return PolyExp(tuple(head.args), calls[1].args[0])
    name = head.name
    try:
        if name == "const":
            expect_args(head, text, 1, 1)
            return Const(head.args[0])
        if name == "exp":
            expect_args(head, text, 1, 2)
            return Exp(*head.args)
        if name == "ind":
            expect_args(head, text, 2, 2)
            return Indicator(*head.args)
        if name == "pow":
            expect_args(head, text, 1, 1)
            return Power(head.args[0])
        if name == "poly":
            if not head.args:
                raise SpecParseError("poly() needs coefficients", text, head.column)
            return PolyExp(tuple(head.args), 0.0)
        if name == "csv":
            expect_args(head, text, 1, 1, kw=("tail",))
            return read_symbol_csv(head.args[0], head.kwargs.get("tail"))
    except (ValueError, OSError) as exc:
        if isinstance(exc, SpecParseError):
            raise
        raise SpecParseError(str(exc), text, head.column) from None
    raise SpecParseError("unknown symbol form %r" % name, text, head.column)


# -- the spectral function ---------------------------------------------------


@functools.lru_cache(maxsize=32)
def _laguerre(n, lam):
    nodes, weights = gauss_laguerre(n, lam, normalized=True)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gamma_quadrature(a: VerticalSymbol, params: SpaceParams, x, n: int = 64):
    """``E[a(U/(p x))]`` by ``n``-point generalized Gauss-Laguerre in ``u``."""
    xa = _x_array(x)
    u, w = _laguerre(n, float(params.lam))
    vals = a(u[None, :] / (params.p * xa.reshape(-1, 1))) @ w
    return vals.reshape(xa.shape)


def gamma_of_symbol(a: VerticalSymbol, params: SpaceParams, x, method: str = "auto"):
    """The spectral function ``gamma_{a,lam}`` at ``x > 0`` (scalar or array).

    ``method`` is ``"closed"``, ``"quadrature"`` or ``"auto"`` (closed form
    when the symbol has one).
    """
    if method not in ("auto", "closed", "quadrature"):
        raise ValueError("unknown method %r" % method)
    a.check(params)
    xa = _x_array(x)
    vals = None
    if method != "quadrature":
        vals = a.closed_gamma(params, xa)
        if vals is None and method == "closed":
            raise ValueError("%r has no closed form" % a)
    if vals is None:
        vals = gamma_quadrature(a, params, xa)
    vals = np.asarray(vals, dtype=float).reshape(xa.shape)
    return float(vals) if np.ndim(x) == 0 else vals


@dataclass(frozen=True)
class SpectralFunction:
    params: SpaceParams
    x_nodes: np.ndarray
    values: np.ndarray
    closed_form: Optional[str] = None

    @classmethod
    def of(cls, a: VerticalSymbol, params: SpaceParams, x_nodes, method="auto"):
        x = _x_array(x_nodes)
        vals = gamma_of_symbol(a, params, x, method)
        if not np.all(np.isfinite(vals)):
            raise ArithmeticError("spectral function is not finite on the requested nodes")
        closed = a.spec if (method != "quadrature" and a.closed_gamma(params, x[:1]) is not None) else None
        return cls(params, x, np.asarray(vals), closed)


def apply_toeplitz(a: VerticalSymbol, phi: BoundaryDensity, params: SpaceParams) -> BoundaryDensity:
    """``T_a`` in the boundary picture: ``gamma_{a,lam}(xi) phi(xi)``."""
    gam = gamma_of_symbol(a, params, phi.xi_nodes)
    return phi.with_values(gam * phi.values)


# -- boundedness and spectrum ------------------------------------------------


def _aitken(s):
    """Limit estimate from the last three terms of ``s``; None if diverging."""
    s0, s1, s2 = s[-3:]
    d1, d2 = s1 - s0, s2 - s1
    if not (np.isfinite(s0) and np.isfinite(s1) and np.isfinite(s2)):
        return None
    if d1 == 0 or d2 == 0:
        return float(s2)
    if abs(d2) > abs(d1) * (1.0 + 1e-9):
        return None
    den = d2 - d1
    if den == 0:
        return float(s2)
    return float(s2 - d2 * d2 / den)


def _endpoint_limit(a, params, x_end, toward_zero):
    """Limit of gamma at an end of the sweep from a geometric probe sequence.

    Returns a float or +-inf.
    """
    ratio = 1.0 / 8.0 if toward_zero else 8.0
    probes = x_end * ratio ** np.arange(0, 6)
    vals = gamma_of_symbol(a, params, probes)
    diffs = np.abs(np.diff(vals))
    if np.all(diffs[1:] > diffs[:-1] * (1.0 + 1e-9)) and diffs[0] > 0:
        return math.copysign(math.inf, vals[-1] - vals[0])
    lim = _aitken(vals)
    if lim is None:
        return math.copysign(math.inf, vals[-1] - vals[0])
    return lim


@dataclass
class SpectrumReport:
    bounded: bool
    sup_abs: float
    range_components: list
    limits: tuple
    monotone: bool
    caveats: list = field(default_factory=list)

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, float) and math.isinf(v):
                return "inf" if v > 0 else "-inf"
            return v

        return {
            "bounded": self.bounded,
            "sup_abs": enc(self.sup_abs),
            "range_components": [[enc(lo), enc(hi)] for lo, hi in self.range_components],
            "limits": [enc(self.limits[0]), enc(self.limits[1])],
            "monotone": self.monotone,
            "caveats": list(self.caveats),
        }


def boundedness_and_spectrum(
    a: VerticalSymbol, params: SpaceParams, x_min: float = 1e-6, x_max: float = 1e6, n: int = 241
) -> SpectrumReport:
    """Sample gamma on a log sweep and estimate ``sup |gamma|`` and its range.

    gamma is continuous on ``(0, inf)``, so its range is an interval; its
    closure is reported as one component whose ends include the
    extrapolated limits at ``0+`` and ``inf``.
    """
    if not (0 < x_min < x_max):
        raise ValueError("need 0 < x_min < x_max")
    if math.log10(x_max / x_min) < 6:
        raise ValueError("the sweep must cover at least 6 decades")
    x = np.geomspace(x_min, x_max, n)
    vals = gamma_of_symbol(a, params, x)
    caveats = []
    if not np.all(np.isfinite(vals)):
        caveats.append("non-finite samples on the sweep")
    lim0 = _endpoint_limit(a, params, x_min, True)
    lim_inf = _endpoint_limit(a, params, x_max, False)
    finite = vals[np.isfinite(vals)]
    lo = min([float(finite.min())] + [lim0, lim_inf])
    hi = max([float(finite.max())] + [lim0, lim_inf])
    sup_abs = max(abs(lo), abs(hi))
    bounded = bool(math.isfinite(sup_abs) and np.all(np.isfinite(vals)))
    steps = np.diff(finite)
    scale = max(float(np.max(np.abs(finite))), 1e-300)
    tol = 1e-12 * scale
    monotone = bool(np.all(steps >= -tol) or np.all(steps <= tol))
    if not monotone:
        caveats.append("gamma is not monotone on the sweep; the range was taken over samples")
    return SpectrumReport(bounded, sup_abs, [(lo, hi)], (lim0, lim_inf), monotone, caveats)


# -- brute-force cross-check -------------------------------------------------


def toeplitz_direct_p2q2(
    a: VerticalSymbol, phi: BoundaryDensity, params: SpaceParams, grid: HalfPlaneGrid
) -> BoundaryDensity:
    """``R T_a R^{-1} phi`` computed literally: synthesize, multiply by
    ``a(y)``, project, analyze.  Only for ``p = q = 2``.

    The multiplier at each ``y`` node is the mean of ``a`` over the node's
    cell (midpoint to midpoint), so jumps in ``a`` cost second-order rather
    than first-order error.
    """
    from . import transforms
    from .densities import sample_density

    if params.p != 2 or params.q != 2:
        raise ValueError("the direct realization is implemented for p = q = 2 only")
    a.check(params)
    phi = sample_density(phi, grid)
    f = transforms.pw_synthesize(phi, params, grid)
    y = grid.y_nodes
    edges = np.concatenate(([0.0], 0.5 * (y[1:] + y[:-1]), [y[-1]]))
    af = f.with_values(f.values * a.cell_averages(edges)[None, :])
    projected = transforms.bergman_project(af, params)
    return transforms.pw_analyze(projected, params)


def relative_l2(a: BoundaryDensity, b: BoundaryDensity) -> float:
    ref = lq_norm(b, 2.0)
    diff = lq_norm(a.with_values(a.values - b.values), 2.0)
    return diff / ref if ref > 0 else diff
