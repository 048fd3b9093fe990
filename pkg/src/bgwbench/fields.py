"""Grid-sampled and closed-form fields on R^n (n = 1 or 2), plus quadrature.

Grid fields are node-centred: node ``x_i = (i - c) h`` owns the cell
``[x_i - h/2, x_i + h/2]^n``.  Outside its box a grid field is extended
by zero.  Analytic fields are integrated by the composite midpoint rule on
cells whose edges sit at integer multiples of ``h``.
"""

from __future__ import annotations

import ast
import csv
import io
import json
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "GridSpec", "GridField", "AnalyticField",
    "LogBump", "HolderCone", "Gaussian", "Polynomial", "Indicator", "Custom",
    "psi", "Ball", "Annulus", "Box", "Region",
    "eval_field", "sample", "box_integral", "region_measure", "translate",
    "polynomial_region_integral_exact", "field_from_descriptor",
]

MAX_ANALYTIC_CELLS = 1 << 25
_SUBDIV = 4  # subdivision depth 2 -> 4 sub-cells per axis


# --------------------------------------------------------------------------
# grids

@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``[-L, L]^n`` with spacing ``h``; contains the origin."""

    n: int
    L: float
    h: float

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"only n in {{1, 2}} is supported, got n={self.n}")
        if not (self.L > 0 and self.h > 0):
            raise ValueError("L and h must be positive")
        ratio = 2 * self.L / self.h
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"2L/h = {ratio} is not an integer")
        if round(ratio) % 2:
            # an odd cell count would put the origin between nodes
            raise ValueError("2L/h must be even so that the grid contains the origin")

    @property
    def N(self) -> int:
        """Nodes per axis."""
        return int(round(2 * self.L / self.h)) + 1

    @property
    def center(self) -> int:
        return (self.N - 1) // 2

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    def axis(self) -> np.ndarray:
        return (np.arange(self.N) - self.center) * self.h

    def coords(self) -> tuple[np.ndarray, ...]:
        ax = self.axis()
        if self.n == 1:
            return (ax,)
        return tuple(np.meshgrid(ax, ax, indexing="ij"))

    def origin_index(self) -> tuple[int, ...]:
        return (self.center,) * self.n

    def cell_box(self) -> tuple[float, float]:
        """Interval covered by the node cells along each axis."""
        half = (self.center + 0.5) * self.h
        return -half, half

    def to_json(self) -> dict:
        return {"n": self.n, "L": self.L, "h": self.h}


@dataclass(frozen=True, eq=False)
class GridField:
    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.spec.shape:
            v = v.reshape(self.spec.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.spec.n

    def at_origin(self) -> float:
        return float(self.values[self.spec.origin_index()])

    def sup_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def scaled(self, c: float) -> "GridField":
        return GridField(self.spec, c * self.values)

    def shifted(self, c: float) -> "GridField":
        return GridField(self.spec, self.values + c)

    def vanishes_on_boundary(self) -> bool:
        v = self.values
        if self.n == 1:
            return v[0] == 0 and v[-1] == 0
        return not (np.any(v[0]) or np.any(v[-1]) or np.any(v[:, 0]) or np.any(v[:, -1]))

    # serialisation -------------------------------------------------------
    def to_json(self) -> dict:
        return {**self.spec.to_json(), "values": [float(x) for x in self.values.ravel(order="C")]}

    @classmethod
    def from_json(cls, obj: dict) -> "GridField":
        spec = GridSpec(int(obj["n"]), float(obj["L"]), float(obj["h"]))
        return cls(spec, np.asarray(obj["values"], dtype=float).reshape(spec.shape))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["# n", self.n, "L", repr(self.spec.L), "h", repr(self.spec.h)])
        w.writerow(["i", "value"] if self.n == 1 else ["i", "j", "value"])
        for idx in np.ndindex(*self.spec.shape):
            w.writerow([*idx, format(float(self.values[idx]), ".17g")])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GridField":
        rows = list(csv.reader(io.StringIO(text)))
        head = rows[0]
        spec = GridSpec(int(head[1]), float(head[3]), float(head[5]))
        vals = np.zeros(spec.shape)
        for row in rows[2:]:
            if not row:
                continue
            *idx, v = row
            vals[tuple(int(i) for i in idx)] = float(v)
        return cls(spec, vals)


# --------------------------------------------------------------------------
# analytic families

def psi(r):
    """C^1 radial cutoff: 1 on [0, 1/4], cubic Hermite blend, 0 from 1/2 on."""
    r = np.asarray(r, dtype=float)
    t = np.clip((r - 0.25) / 0.25, 0.0, 1.0)
    return 1.0 - 3.0 * t ** 2 + 2.0 * t ** 3


def _radius(coords: Sequence[np.ndarray]) -> np.ndarray:
    if len(coords) == 1:
        return np.abs(coords[0])
    return np.sqrt(sum(np.square(c) for c in coords))


class AnalyticField:
    """Closed-form field; subclasses implement :meth:`evaluate`."""

    #: radius of a ball containing the support, ``None`` if unbounded
    support_radius: float | None = None

    def evaluate(self, coords: Sequence[np.ndarray]) -> np.ndarray:
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError

    def __call__(self, *coords):
        return self.evaluate([np.asarray(c, dtype=float) for c in coords])


@dataclass(frozen=True)
class LogBump(AnalyticField):
    """``-log(|x| + delta) * psi(|x|)``."""

    delta: float

    def __post_init__(self):
        if not 0 < self.delta < 0.25:
            raise ValueError("LogBump requires 0 < delta < 1/4")

    support_radius = 0.5

    def evaluate(self, coords):
        r = _radius(coords)
        return -np.log(r + self.delta) * psi(r)

    def descriptor(self):
        return {"family": "log_bump", "delta": self.delta}


@dataclass(frozen=True)
class HolderCone(AnalyticField):
    """``d(x)^eta`` with ``d(x) = min(|x|, max(2R - |x|, 0))``.

    A cone of height ``R^eta`` peaking on ``|x| = R``; its Hoelder-``eta``
    seminorm is exactly 1, attained by pairs ``(x, 0)`` with ``|x| <= R``.
    """

    eta: float
    radius: float = 1.0

    def __post_init__(self):
        if not 0 < self.eta < 1:
            raise ValueError("HolderCone requires eta in (0, 1)")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def support_radius(self):
        return 2 * self.radius

    def evaluate(self, coords):
        r = _radius(coords)
        d = np.minimum(r, np.maximum(2 * self.radius - r, 0.0))
        return d ** self.eta

    def descriptor(self):
        return {"family": "holder_cone", "eta": self.eta, "radius": self.radius}


@dataclass(frozen=True)
class Gaussian(AnalyticField):
    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def evaluate(self, coords):
        r = _radius(coords)
        return np.exp(-0.5 * (r / self.sigma) ** 2)

    def descriptor(self):
        return {"family": "gaussian", "sigma": self.sigma}


@dataclass(frozen=True)
class Polynomial(AnalyticField):
    """1D: ``coeffs[i] x^i``; 2D: ``coeffs[i][j] x^i y^j``."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _freeze(self.coeffs))

    @property
    def is_2d(self) -> bool:
        return bool(self.coeffs) and isinstance(self.coeffs[0], tuple)

    def evaluate(self, coords):
        if self.is_2d:
            x, y = coords
            out = np.zeros(np.broadcast(x, y).shape)
            for i, row in enumerate(self.coeffs):
                for j, c in enumerate(row):
                    if c:
                        out = out + float(c) * x ** i * y ** j
            return out
        if len(coords) != 1:
            if len(self.coeffs) > 1:
                raise ValueError("1D polynomial evaluated with 2D coordinates")
            coords = (np.zeros(np.broadcast(*coords).shape),)
        x = coords[0]
        out = np.zeros(np.shape(x))
        for c in reversed(self.coeffs):
            out = out * x + float(c)
        return out

    def descriptor(self):
        return {"family": "polynomial", "coeffs": _thaw(self.coeffs)}


def _freeze(c):
    if isinstance(c, (list, tuple)):
        return tuple(_freeze(x) for x in c)
    return c


def _thaw(c):
    if isinstance(c, tuple):
        return [_thaw(x) for x in c]
    return float(c) if isinstance(c, Fraction) else c


@dataclass(frozen=True)
class Indicator(AnalyticField):
    """Characteristic function of the box ``[lo, hi]`` (scalars for 1D)."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(np.atleast_1d(self.lo).astype(float))
        hi = tuple(np.atleast_1d(self.hi).astype(float))
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("Indicator needs lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def support_radius(self):
        return math.sqrt(sum(max(abs(a), abs(b)) ** 2 for a, b in zip(self.lo, self.hi)))

    def evaluate(self, coords):
        if len(coords) != len(self.lo):
            raise ValueError("dimension mismatch")
        inside = np.ones(np.broadcast(*coords).shape, dtype=bool)
        for c, a, b in zip(coords, self.lo, self.hi):
            inside &= (c >= a) & (c <= b)
        return inside.astype(float)

    def descriptor(self):
        return {"family": "indicator", "lo": list(self.lo), "hi": list(self.hi)}


_EXPR_NAMES = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "arctan",
                 "minimum", "maximum", "where", "pi", "cosh", "sinh", "clip")
}
_EXPR_NAMES["psi"] = psi
_EXPR_VARS = {"x", "y", "r"}
_EXPR_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load, ast.Constant,
               ast.Compare, ast.IfExp, ast.operator, ast.unaryop, ast.cmpop, ast.keyword)


def _check_expr(expr: str) -> None:
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as e:
        raise ValueError(f"bad field expression {expr!r}: {e.msg}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _EXPR_NODES):
            raise ValueError(f"field expression may not use {type(node).__name__}")
        if isinstance(node, ast.Name) and node.id not in _EXPR_NAMES and node.id not in _EXPR_VARS:
            raise ValueError(f"unknown name {node.id!r} in field expression")


@dataclass(frozen=True)
class Custom(AnalyticField):
    """Field from a callable or a numpy expression in ``x`` (and ``y``, ``r``).

    Expressions see only a small whitelist of numpy functions.
    """

    expr: Union[str, Callable]
    support: float | None = None

    def __post_init__(self):
        if isinstance(self.expr, str):
            _check_expr(self.expr)
        elif not callable(self.expr):
            raise TypeError("expr must be a string or a callable")

    @property
    def support_radius(self):
        return self.support

    def evaluate(self, coords):
        if callable(self.expr):
            return np.asarray(self.expr(*coords), dtype=float) * np.ones(np.broadcast(*coords).shape)
        names = dict(_EXPR_NAMES, x=coords[0], r=_radius(coords))
        if len(coords) > 1:
            names["y"] = coords[1]
        out = eval(self.expr, {"__builtins__": {}}, names)  # noqa: S307 - whitelisted namespace
        return np.asarray(out, dtype=float) * np.ones(np.broadcast(*coords).shape)

    def descriptor(self):
        if callable(self.expr):
            raise TypeError("callable Custom fields are not serialisable")
        return {"family": "custom", "expr": self.expr, "support": self.support}


Field = Union[GridField, AnalyticField]


def field_from_descriptor(d: dict) -> AnalyticField:
    """Inverse of ``AnalyticField.descriptor``."""
    fam = d.get("family")
    if fam == "log_bump":
        return LogBump(float(d["delta"]))
    if fam == "holder_cone":
        return HolderCone(float(d["eta"]), float(d.get("radius", 1.0)))
    if fam == "gaussian":
        return Gaussian(float(d.get("sigma", 1.0)))
    if fam == "polynomial":
        return Polynomial(d["coeffs"])
    if fam == "indicator":
        return Indicator(d["lo"], d["hi"])
    if fam == "custom":
        return Custom(d["expr"], d.get("support"))
    raise ValueError(f"unknown field family {fam!r}")


# --------------------------------------------------------------------------
# pointwise operations

def eval_field(f: Field, x) -> float:
    """Value of ``f`` at the point ``x`` (nearest node for grid fields)."""
    pt = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(f, GridField):
        if pt.size != f.n:
            raise ValueError("point dimension does not match field")
        lo, hi = f.spec.cell_box()
        if np.any(pt < -f.spec.L - 1e-12) or np.any(pt > f.spec.L + 1e-12):
            raise ValueError(f"point {pt} outside [-L, L]^n")
        idx = tuple(int(round(c / f.spec.h)) + f.spec.center for c in pt)
        return float(f.values[idx])
    return float(f.evaluate([np.asarray(c) for c in pt]))


def sample(f: AnalyticField, spec: GridSpec) -> GridField:
    return GridField(spec, f.evaluate(spec.coords()))


def translate(f: GridField, cells: Sequence[int]) -> GridField:
    """Shift a grid field by whole cells, filling vacated nodes with zero."""
    cells = tuple(int(c) for c in np.atleast_1d(cells))
    out = np.zeros_like(f.values)
    src = []
    dst = []
    for c, N in zip(cells, f.spec.shape):
        if c >= 0:
            src.append(slice(0, N - c))
            dst.append(slice(c, N))
        else:
            src.append(slice(-c, N))
            dst.append(slice(0, N + c))
    out[tuple(dst)] = f.values[tuple(src)]
    return GridField(f.spec, out)


# --------------------------------------------------------------------------
# regions and quadrature

@dataclass(frozen=True)
class Ball:
    """Open ball ``|x| < radius`` about the origin."""

    radius: float

    def contains(self, coords):
        return _radius(coords) < self.radius

    def intervals(self):
        return [(-self.radius, self.radius)]

    def extent(self):
        return self.radius


@dataclass(frozen=True)
class Annulus:
    """``r_in <= |x| < r_out`` about the origin."""

    r_in: float
    r_out: float

    def __post_init__(self):
        if not 0 <= self.r_in < self.r_out:
            raise ValueError("annulus needs 0 <= r_in < r_out")

    @classmethod
    def dyadic(cls, j: int) -> "Annulus":
        return cls(2.0 ** j, 2.0 ** (j + 1))

    def contains(self, coords):
        r = _radius(coords)
        return (r >= self.r_in) & (r < self.r_out)

    def intervals(self):
        return [(-self.r_out, -self.r_in), (self.r_in, self.r_out)]

    def extent(self):
        return self.r_out


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(np.atleast_1d(self.lo).astype(float)))
        object.__setattr__(self, "hi", tuple(np.atleast_1d(self.hi).astype(float)))

    def contains(self, coords):
        inside = np.ones(np.broadcast(*coords).shape, dtype=bool)
        for c, a, b in zip(coords, self.lo, self.hi):
            inside &= (c >= a) & (c < b)
        return inside

    def intervals(self):
        return [(self.lo[0], self.hi[0])]

    def extent(self):
        return max(max(abs(a), abs(b)) for a, b in zip(self.lo, self.hi))


Region = Union[Ball, Annulus, Box]


def region_measure(region: Region, n: int) -> float:
    if isinstance(region, Box):
        return float(np.prod([b - a for a, b in zip(region.lo[:n], region.hi[:n])]))
    unit = 2.0 if n == 1 else math.pi
    if isinstance(region, Ball):
        return unit * region.radius ** n
    return unit * (region.r_out ** n - region.r_in ** n)


def _region_bounds(region: Region, n: int) -> list[tuple[float, float]]:
    if isinstance(region, Box):
        return [(region.lo[i], region.hi[i]) for i in range(n)]
    e = region.extent()
    return [(-e, e)] * n


def _overlap_1d(centers: np.ndarray, h: float, intervals) -> np.ndarray:
    lo = centers - h / 2
    hi = centers + h / 2
    frac = np.zeros_like(centers)
    for a, b in intervals:
        frac += np.clip(np.minimum(hi, b) - np.maximum(lo, a), 0.0, None)
    return frac / h


def _overlap_fraction(axes: Sequence[np.ndarray], h: float, region: Region) -> np.ndarray:
    """Fraction of each cell (centred on the mesh of ``axes``) lying in ``region``."""
    if len(axes) == 1:
        if isinstance(region, Box):
            return _overlap_1d(axes[0], h, [(region.lo[0], region.hi[0])])
        return _overlap_1d(axes[0], h, region.intervals())
    if isinstance(region, Box):
        fx = _overlap_1d(axes[0], h, [(region.lo[0], region.hi[0])])
        fy = _overlap_1d(axes[1], h, [(region.lo[1], region.hi[1])])
        return np.outer(fx, fy)
    sub = (np.arange(_SUBDIV) + 0.5) / _SUBDIV - 0.5
    X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
    count = np.zeros(X.shape)
    for dx in sub:
        for dy in sub:
            count += region.contains((X + dx * h, Y + dy * h))
    return count / _SUBDIV ** 2


def _index_window(spec: GridSpec, lo: float, hi: float) -> slice:
    i0 = max(int(math.floor(lo / spec.h - 0.5)) + spec.center, 0)
    i1 = min(int(math.ceil(hi / spec.h + 0.5)) + spec.center + 1, spec.N)
    return slice(i0, max(i0, i1))


def region_nodes(f: GridField, region: Region, allow_outside: bool = True, with_coords: bool = False):
    """Values and quadrature weights of the grid nodes meeting ``region``.

    Returns ``(values, weights, outside_measure)`` where ``outside_measure``
    is the part of the region lying beyond the grid's cell box (where the
    field is zero by extension); with ``with_coords`` the node coordinates
    are appended.
    """
    spec = f.spec
    bounds = _region_bounds(region, spec.n)
    windows = tuple(_index_window(spec, a, b) for a, b in bounds)
    ax = spec.axis()
    axes = [ax[w] for w in windows]
    if any(a.size == 0 for a in axes):
        vals = np.zeros(0)
        w = np.zeros(0)
        coords = [np.zeros(0)] * spec.n
    else:
        w = _overlap_fraction(axes, spec.h, region).ravel() * spec.h ** spec.n
        vals = f.values[windows].ravel()
        mesh = axes if spec.n == 1 else np.meshgrid(*axes, indexing="ij")
        coords = [m.ravel() for m in mesh]
    lo, hi = spec.cell_box()
    total = region_measure(region, spec.n)
    inside = float(np.sum(w))
    outside = 0.0
    if any(a < lo or b > hi for a, b in bounds):
        outside = max(total - inside, 0.0)
    if inside == 0.0 and not allow_outside:
        raise ValueError("region does not meet the field domain")
    if with_coords:
        return vals, w, outside, coords
    return vals, w, outside


def analytic_nodes(f: AnalyticField, region: Region, h: float, n: int):
    """Values and weights for midpoint quadrature of ``f`` on ``region``.

    In 1D a cell cut by the region boundary is evaluated at the midpoint of
    the overlap segment, which keeps the rule second order.
    """
    if n == 1:
        mids, lens = [], []
        for a, b in region.intervals():
            i = np.arange(int(math.floor(a / h)), int(math.ceil(b / h)))
            lo = np.maximum(i * h, a)
            hi = np.minimum((i + 1) * h, b)
            ok = hi > lo
            mids.append(0.5 * (lo[ok] + hi[ok]))
            lens.append(hi[ok] - lo[ok])
        x = np.concatenate(mids)
        if x.size > MAX_ANALYTIC_CELLS:
            raise ValueError(f"region needs {x.size} cells at h={h}; sample onto a grid instead")
        return f.evaluate([x]), np.concatenate(lens)
    bounds = _region_bounds(region, n)
    axes = []
    for a, b in bounds:
        i0 = int(math.floor(a / h))
        i1 = int(math.ceil(b / h))
        axes.append((np.arange(i0, i1) + 0.5) * h)
    ncell = int(np.prod([a.size for a in axes]))
    if ncell > MAX_ANALYTIC_CELLS:
        raise ValueError(f"region needs {ncell} cells at h={h}; sample onto a grid instead")
    frac = _overlap_fraction(axes, h, region)
    mesh = axes if n == 1 else list(np.meshgrid(*axes, indexing="ij"))
    keep = frac > 0
    vals = f.evaluate(mesh)[keep]
    return vals, frac[keep] * h ** n


def box_integral(
    f: Field,
    region: Region,
    h: float | None = None,
    n: int | None = None,
    transform: Callable[[np.ndarray], np.ndarray] | None = None,
    extend: bool = False,
) -> float:
    """Quadrature of ``transform(f)`` (default ``f``) over ``region``.

    Grid fields use their own nodes; analytic fields need ``h`` (and ``n``
    unless it is 1).  One-dimensional polynomials without a transform take
    the exact closed-form path.  A region missing the grid altogether is an
    error unless ``extend`` (zero extension) is set.
    """
    if isinstance(f, GridField):
        vals, w, outside = region_nodes(f, region, allow_outside=extend)
        g = vals if transform is None else transform(vals)
        out = float(np.dot(w, g))
        if outside:
            g0 = 0.0 if transform is None else float(transform(np.zeros(1))[0])
            out += g0 * outside
        return out
    n = n or 1
    if isinstance(f, Polynomial) and n == 1 and not f.is_2d and transform is None:
        return float(polynomial_region_integral_exact(f.coeffs, region))
    if h is None:
        raise ValueError("analytic fields need a quadrature spacing h")
    vals, w = analytic_nodes(f, region, h, n)
    g = vals if transform is None else transform(vals)
    return float(np.dot(w, g))


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def polynomial_region_integral_exact(coeffs: Sequence, region: Region) -> Fraction:
    """Exact integral of a 1D polynomial over a ball, annulus or interval."""
    if isinstance(region, Box):
        pieces = [(region.lo[0], region.hi[0])]
    else:
        pieces = region.intervals()
    total = Fraction(0)
    for a, b in pieces:
        a, b = _frac(a), _frac(b)
        for i, c in enumerate(coeffs):
            c = _frac(c)
            if c:
                total += c * (b ** (i + 1) - a ** (i + 1)) / (i + 1)
    return total
