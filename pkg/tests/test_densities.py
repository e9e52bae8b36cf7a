import math

import numpy as np
import pytest

from mfbergman import densities
from mfbergman.core import BoundaryDensity, make_grid, write_density
from mfbergman.grammar import SpecParseError, parse_product


def test_parse_product_structure():
    calls = parse_product(" poly(1, -2.5e-1) * ind(0.5,3) ")
    assert [c.name for c in calls] == ["poly", "ind"]
    assert calls[0].args == [1.0, -0.25] and calls[1].args == [0.5, 3.0]
    assert calls[1].column == 21
    (call,) = parse_product("csv(/tmp/a b.csv, tail=2)")
    assert call.args == ["/tmp/a b.csv"] and call.kwargs == {"tail": 2.0}


@pytest.mark.parametrize(
    "text,column",
    [("", 1), ("exp(", 5), ("(1)", 1), ("ind(1,)", 7), ("ind(1 2)", 5), ("ind(1,2) x", 10), ("ind(1,2)*", 10)],
)
def test_parse_product_errors(text, column):
    with pytest.raises(SpecParseError) as exc:
        parse_product(text)
    assert exc.value.column == column


def test_forms_evaluate():
    xi = np.array([0.5, 1.0, 1.5, 2.0, 2.5])
    np.testing.assert_array_equal(densities.Indicator(1, 2)(xi).real, [0, 1, 1, 1, 0])
    b = densities.Bump(1, 2)(xi).real
    assert b[2] == 1.0 and b[1] == 0 and b[3] == 0
    p = densities.PolyIndicator([1.0, 2.0], 1, 2)(xi).real
    np.testing.assert_allclose(p, [0, 3, 4, 5, 0])
    g = densities.Gaussian(1.0, 0.5)(xi).real
    assert g[1] == 1.0 and g[3] == pytest.approx(math.exp(-2))
    assert not np.any(densities.Zero()(xi))


def test_bump_is_smooth_at_edges():
    xi = np.linspace(1.0, 1.001, 50)
    b = densities.Bump(1.0, 4.0)(xi).real
    assert b.max() < 1e-100


@pytest.mark.parametrize(
    "text,cls",
    [
        ("ind(1,2)", densities.Indicator),
        ("bump(1,4)", densities.Bump),
        ("poly(1,0,2)*ind(0.5,3)", densities.PolyIndicator),
        ("gauss(2,0.3)", densities.Gaussian),
        ("zero()", densities.Zero),
    ],
)
def test_parse_density(text, cls):
    assert isinstance(densities.parse_density(text), cls)


@pytest.mark.parametrize("text", ["ind(2,1)", "bump(1)", "poly(1)*bump(1,2)", "wave(1)", "gauss(1,-1)", "poly()*ind(1,2)"])
def test_parse_density_errors(text):
    with pytest.raises(SpecParseError):
        densities.parse_density(text)


def test_csv_density_resampled(tmp_path, small_grid):
    path = tmp_path / "phi.csv"
    xi = np.linspace(0.5, 5, 200)
    write_density(path, BoundaryDensity(xi, np.sin(xi) + 0j))
    form = densities.parse_density("csv(%s)" % path)
    phi = densities.sample_density(form, small_grid)
    np.testing.assert_array_equal(phi.xi_nodes, densities.density_nodes(small_grid))
    inside = (phi.xi_nodes >= 0.5) & (phi.xi_nodes <= 5)
    np.testing.assert_allclose(phi.values[inside].real, np.sin(phi.xi_nodes[inside]), atol=1e-3)
    assert not np.any(phi.values[~inside])


def test_density_nodes_are_positive_dual_nodes():
    g = make_grid(40, 64, 10, 8)
    nodes = densities.density_nodes(g)
    assert len(nodes) == 31
    np.testing.assert_allclose(nodes, 2 * math.pi / 80 * np.arange(1, 32))


def test_smooth_suite():
    suite = densities.smooth_suite()
    assert len(suite) == 6
    kinds = {type(f) for f in suite}
    assert kinds == {densities.Indicator, densities.Bump, densities.PolyIndicator}
