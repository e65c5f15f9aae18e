import numpy as np
import pytest

from hermweb.metric import classify
from hermweb.specfile import ManifoldSpec, SpecError, load_spec, loads


FLAT = """
[manifold]
name = flat
n = 2
sizes = 8 8 1 1

[metric]
g[1][1] = 1
g[2][2] = 1
"""

BUMP = """
# a non-Kahler warmup example
[manifold]
name = bump
n = 2
sizes = 1 16 1 1   # only x2 active

[metric]
g[1][1] = 1 + 0.5*cos(2*pi*x2)
g[1][2] = 0 | 0
g[2][2] = 1
"""


def test_flat_spec_loads_and_classifies():
    spec = loads(FLAT)
    assert spec.name == "flat"
    assert spec.n == 2
    assert spec.sizes == (8, 8, 1, 1)
    g = spec.build_metric()
    rep = classify(g, 1e-10)
    assert rep.kahler and rep.balanced and rep.gauduchon


def test_bump_spec_with_comments_and_pairs():
    spec = loads(BUMP)
    g = spec.build_metric()
    x2 = spec.build_grid().coordinate(1)
    assert np.allclose(g.g[..., 0, 0], 1 + 0.5 * np.cos(2 * np.pi * x2))
    assert not classify(g, 1e-8).kahler


def test_conjugate_symmetry_fills_lower_triangle():
    text = FLAT.replace("g[2][2] = 1", "g[2][2] = 2\ng[1][2] = 0.1 | 0.05")
    g = loads(text).build_metric()
    assert np.allclose(g.g[..., 0, 1], 0.1 + 0.05j)
    assert np.allclose(g.g[..., 1, 0], 0.1 - 0.05j)


def test_reference_and_prescribed_sections():
    text = (
        FLAT
        + """
[reference]
g[1][1] = 2
g[2][2] = 2

[prescribed]
F = 0.01 * sin(2*pi*x1)
"""
    )
    spec = loads(text)
    grid = spec.build_grid()
    ref = spec.build_reference(grid)
    assert np.allclose(ref.g[..., 0, 0], 2.0)
    F = spec.build_F(grid)
    assert np.allclose(F.values.real, 0.01 * np.sin(2 * np.pi * grid.coordinate(0)) * np.ones(grid.shape))


def test_build_reference_none_when_absent():
    spec = loads(FLAT)
    assert spec.build_reference() is None
    assert spec.build_F() is None


@pytest.mark.parametrize(
    "mutate,needle",
    [
        (lambda t: t.replace("[manifold]", "[mainfold]"), "manifold"),
        (lambda t: t.replace("sizes = 8 8 1 1\n", ""), "sizes"),
        (lambda t: t.replace("[metric]", "[metrics]"), "metric"),
        (lambda t: t.replace("g[2][2] = 1\n", ""), "g[2][2]"),
        (lambda t: t.replace("g[1][1] = 1", "g[1][1] = -1"), "metric"),
        (lambda t: t.replace("g[1][1] = 1", "g[1][1] = 1 +"), "g[1][1]"),
        (lambda t: t.replace("g[1][1] = 1", "h[1][1] = 1"), "g[i][j]"),
        (lambda t: t.replace("g[1][1] = 1", "g[2][1] = 1"), "i <= j"),
        (lambda t: t.replace("sizes = 8 8 1 1", "sizes = 8 8 1"), "sizes"),
        (lambda t: t.replace("sizes = 8 8 1 1", "sizes = eight 8 1 1"), "manifold"),
        (lambda t: t + "\n[metric]\ng[1][1] = 1\n", "duplicate section"),
        (lambda t: t.replace("n = 2", "n = 2\nn = 3"), "duplicate key"),
        (lambda t: "stray = 1\n" + t, "before any section"),
        (lambda t: t.replace("g[1][1] = 1", "g[1][1] = 1 | 2 | 3"), "|"),
    ],
)
def test_spec_errors(mutate, needle):
    with pytest.raises(SpecError) as exc_info:
        loads(mutate(FLAT))
    assert needle in str(exc_info.value)


def test_prescribed_f_must_be_real():
    text = FLAT + "\n[prescribed]\nF = 1 | 1\n"
    with pytest.raises(SpecError):
        loads(text)


def test_periodicity_warning():
    text = FLAT.replace("g[1][1] = 1", "g[1][1] = 2 + x1")
    with pytest.warns(UserWarning, match="periodic"):
        loads(text)


def test_periodic_coefficient_no_warning():
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        loads(BUMP)


def test_load_spec_from_path(tmp_path):
    path = tmp_path / "flat.hwspec"
    path.write_text(FLAT, encoding="utf-8")
    spec = load_spec(path)
    assert isinstance(spec, ManifoldSpec)
    assert spec.source_text == FLAT
