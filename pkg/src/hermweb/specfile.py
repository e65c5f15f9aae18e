"""Manifold spec files: a line-oriented key-value format with bracketed
sections (documented byte-exactly in docs/spec-file-format.md).

    [manifold]
    name = bump2
    n = 2
    sizes = 64 64 1 1        # axis order x1..xn then y1..yn

    [metric]
    g[1][1] = 1 + 0.5*cos(2*pi*x2)
    g[1][2] = 0 | 0          # real part | imaginary part
    g[2][2] = 1

    [reference]              # optional Kahler reference metric
    g[1][1] = 1
    ...

    [prescribed]             # optional prescribed F
    F = ...

Only entries g[i][j] with j >= i are given; the lower triangle is filled by
conjugate symmetry.  '#' starts a comment.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import expr
from .grid import PeriodicGrid, ScalarField
from .metric import HermitianMetricField, MetricError

_SECTION = re.compile(r"\[([a-z_]+)\]\s*$")
_GKEY = re.compile(r"g\[([1-9])\]\[([1-9])\]$")

PERIODICITY_WARN_TOL = 1e-8


class SpecError(ValueError):
    pass


@dataclass
class ManifoldSpec:
    name: str
    n: int
    sizes: tuple[int, ...]
    metric_exprs: dict  # (i, j) 1-based upper triangle -> (re AST, im AST | None)
    reference_exprs: dict | None = None
    F_expr: object | None = None
    source_text: str = ""

    def build_grid(self) -> PeriodicGrid:
        return PeriodicGrid(self.n, self.sizes)

    def build_metric(self, grid: PeriodicGrid | None = None) -> HermitianMetricField:
        return self._build(self.metric_exprs, grid, "metric")

    def build_reference(self, grid: PeriodicGrid | None = None) -> HermitianMetricField | None:
        if self.reference_exprs is None:
            return None
        return self._build(self.reference_exprs, grid, "reference")

    def build_F(self, grid: PeriodicGrid | None = None) -> ScalarField | None:
        if self.F_expr is None:
            return None
        grid = grid or self.build_grid()
        _warn_if_aperiodic(self.F_expr, grid, "prescribed.F")
        return expr.evaluate(self.F_expr, grid)

    def _build(self, exprs: dict, grid: PeriodicGrid | None, section: str) -> HermitianMetricField:
        grid = grid or self.build_grid()
        n = self.n
        g = np.zeros(grid.shape + (n, n), dtype=np.complex128)
        for (i, j), (re_ast, im_ast) in exprs.items():
            path = f"{section}.g[{i}][{j}]"
            _warn_if_aperiodic(re_ast, grid, path)
            vals = expr.evaluate(re_ast, grid).values.real.astype(np.complex128)
            if im_ast is not None:
                _warn_if_aperiodic(im_ast, grid, path)
                vals = vals + 1j * expr.evaluate(im_ast, grid).values.real
            g[..., i - 1, j - 1] = vals
            if i != j:
                g[..., j - 1, i - 1] = np.conj(vals)
        try:
            return HermitianMetricField(grid, g)
        except MetricError as exc:
            raise SpecError(f"{section}: invalid metric: {exc}") from exc


def _warn_if_aperiodic(ast, grid: PeriodicGrid, path: str):
    """Spectral derivatives assume unit periodicity; warn on a wrap mismatch."""
    coords = grid.coordinates()
    base = expr.evaluate_on(ast, coords)
    for key in list(coords):
        shifted = dict(coords)
        c = np.asarray(coords[key], dtype=float)
        if c.size == 1:
            continue
        shifted[key] = c + 1.0
        diff = float(np.max(np.abs(expr.evaluate_on(ast, shifted) - base)))
        if diff > PERIODICITY_WARN_TOL:
            warnings.warn(
                f"{path}: value changes by {diff:.3e} under {key} -> {key}+1; "
                "spectral derivatives assume periodic coefficients",
                stacklevel=3,
            )


def _parse_value_pair(value: str, n: int, path: str):
    parts = value.split("|")
    if len(parts) > 2:
        raise SpecError(f"{path}: at most one '|' separating re | im parts")
    try:
        re_ast = expr.parse(parts[0], n)
        im_ast = expr.parse(parts[1], n) if len(parts) == 2 else None
    except expr.ExprSyntaxError as exc:
        raise SpecError(f"{path}: {exc}") from exc
    return re_ast, im_ast


def loads(text: str) -> ManifoldSpec:
    sections: dict[str, dict[str, str]] = {}
    current: dict[str, str] | None = None
    current_name = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            current_name = m.group(1)
            if current_name in sections:
                raise SpecError(f"line {lineno}: duplicate section [{current_name}]")
            current = sections.setdefault(current_name, {})
            continue
        if current is None:
            raise SpecError(f"line {lineno}: key-value pair before any section")
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in current:
            raise SpecError(f"line {lineno}: duplicate key {key!r} in [{current_name}]")
        current[key] = value

    man = sections.get("manifold")
    if man is None:
        raise SpecError("missing [manifold] section")
    for req in ("name", "n", "sizes"):
        if req not in man:
            raise SpecError(f"manifold.{req}: missing")
    try:
        n = int(man["n"])
        sizes = tuple(int(s) for s in man["sizes"].split())
    except ValueError as exc:
        raise SpecError(f"manifold: {exc}") from exc

    def metric_section(name: str) -> dict:
        raw = sections[name]
        out = {}
        for key, value in raw.items():
            m = _GKEY.match(key)
            if not m:
                raise SpecError(f"{name}.{key}: expected keys of the form g[i][j]")
            i, j = int(m.group(1)), int(m.group(2))
            if not (1 <= i <= j <= n):
                raise SpecError(f"{name}.{key}: need 1 <= i <= j <= n = {n}")
            out[(i, j)] = _parse_value_pair(value, n, f"{name}.g[{i}][{j}]")
        for i in range(1, n + 1):
            if (i, i) not in out:
                raise SpecError(f"{name}.g[{i}][{i}]: missing diagonal entry")
        return out

    if "metric" not in sections:
        raise SpecError("missing [metric] section")
    metric_exprs = metric_section("metric")
    reference_exprs = metric_section("reference") if "reference" in sections else None

    F_ast = None
    if "prescribed" in sections:
        if "F" not in sections["prescribed"]:
            raise SpecError("prescribed.F: missing")
        F_ast, im = _parse_value_pair(sections["prescribed"]["F"], n, "prescribed.F")
        if im is not None:
            raise SpecError("prescribed.F: must be a real expression")

    spec = ManifoldSpec(
        name=man["name"],
        n=n,
        sizes=sizes,
        metric_exprs=metric_exprs,
        reference_exprs=reference_exprs,
        F_expr=F_ast,
        source_text=text,
    )
    try:
        grid = spec.build_grid()
    except Exception as exc:
        raise SpecError(f"manifold.sizes: {exc}") from exc
    spec.build_metric(grid)  # validates Hermitian positivity up front
    if reference_exprs is not None:
        spec.build_reference(grid)
    return spec


def load_spec(path) -> ManifoldSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())
