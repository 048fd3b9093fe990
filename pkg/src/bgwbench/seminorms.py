"""Estimators for the BMO, Hoelder, fractional Sobolev and weighted sup-integral norms.

Every estimator works on a :class:`~bgwbench.fields.GridField`; analytic
fields are sampled first (pass ``grid=``).  Sup-type quantities are lower
bounds over a finite candidate family; integral quantities are quadrature
approximations.  The ``meta`` of each report pins down the candidate
family, so a report is reproducible from its inputs.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .fields import (
    AnalyticField, Annulus, Ball, GridField, GridSpec, Field,
    box_integral, region_measure, region_nodes, sample,
)
from .parallel import chunked, exact_sum, ordered_map

__all__ = [
    "SeminormReport", "DerivativeGrid", "as_grid", "derivative_grid",
    "bmo_norm", "holder_seminorm", "sobolev_seminorm", "weighted_sup_integral",
    "weighted_integral_at", "annulus_average", "ball_average", "mean_oscillation",
    "split_order", "multi_indices",
]

LOWER_BOUND = "lower_bound"
QUADRATURE = "quadrature_approx"


@dataclass
class SeminormReport:
    kind: str
    value: float
    bias: str
    params: dict = dc_field(default_factory=dict)
    meta: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": self.params, "value": self.value,
                "bias": self.bias, "meta": self.meta}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


def as_grid(f: Field, grid: GridSpec | None = None) -> GridField:
    if isinstance(f, GridField):
        return f
    if grid is None:
        raise ValueError("analytic fields need a grid spec to be estimated")
    return sample(f, grid)


def _support_slices(values: np.ndarray, margin: int) -> tuple[slice, ...]:
    """Bounding box of the non-zero entries, padded by ``margin`` nodes."""
    nz = np.nonzero(values)
    if nz[0].size == 0:
        return tuple(slice(0, 1) for _ in values.shape)
    return tuple(
        slice(max(int(ix.min()) - margin, 0), min(int(ix.max()) + margin + 1, N))
        for ix, N in zip(nz, values.shape)
    )


# --------------------------------------------------------------------------
# BMO

def _window_starts(N: int, w: int, budget: int, anchors: Sequence[int]) -> np.ndarray:
    last = N - w
    if last + 1 <= budget:
        return np.arange(last + 1)
    # power-of-two stride: a larger budget always gives a superset
    stride = 1 << max(0, math.ceil(math.log2((last + 1) / budget)))
    starts = set(range(0, last + 1, stride)) | {last}
    for a in anchors:
        for frac in (0, 1, 2, 3):
            s = a - (frac * w) // 4
            starts.add(min(max(s, 0), last))
            starts.add(min(max(a - w + 1 + (frac * w) // 4, 0), last))
    return np.array(sorted(starts))


def _max_oscillation_1d(v: np.ndarray, w: int, starts: np.ndarray, chunk_elems: int = 1 << 22) -> tuple[float, int]:
    win = sliding_window_view(v, w)
    step = max(1, chunk_elems // w)
    best, arg = -1.0, int(starts[0])
    for i in range(0, starts.size, step):
        blk = win[starts[i:i + step]]
        osc = np.mean(np.abs(blk - blk.mean(axis=1, keepdims=True)), axis=1)
        j = int(np.argmax(osc))
        if osc[j] > best:
            best, arg = float(osc[j]), int(starts[i + j])
    return best, arg


def _max_oscillation_2d(v, w, si, sj, chunk_elems: int = 1 << 22):
    win = sliding_window_view(v, (w, w))
    step = max(1, chunk_elems // (w * w * sj.size))
    best, arg = -1.0, (int(si[0]), int(sj[0]))
    for i in range(0, si.size, step):
        blk = win[si[i:i + step]][:, sj]
        mean = blk.mean(axis=(2, 3), keepdims=True)
        osc = np.mean(np.abs(blk - mean), axis=(2, 3))
        a, b = np.unravel_index(int(np.argmax(osc)), osc.shape)
        if osc[a, b] > best:
            best, arg = float(osc[a, b]), (int(si[i + a]), int(sj[b]))
    return best, arg


def bmo_norm(
    f: Field,
    grid: GridSpec | None = None,
    budget: int | None = None,
    max_level: int | None = None,
) -> SeminormReport:
    """Largest mean oscillation ``avg_Q |f - (f)_Q|`` over dyadic-side cubes.

    Cubes have side ``2^t h`` (``t = 0 .. log2(2L/h)``) and sit on grid
    translations; per level and axis at most ``budget`` translations are
    used (evenly spaced, plus cubes around the extrema of ``f``).
    """
    g = as_grid(f, grid)
    n, N = g.n, g.spec.N
    if budget is None:
        budget = 256 if n == 1 else 24
    if budget < 1:
        raise ValueError("empty cube family")
    top = int(math.floor(math.log2(N)))
    if max_level is not None:
        top = min(top, max_level)
    v = g.values
    flat_max = np.unravel_index(int(np.argmax(v)), v.shape)
    flat_min = np.unravel_index(int(np.argmin(v)), v.shape)
    best, best_cube, counts = 0.0, None, []
    for t in range(top + 1):
        w = 2 ** t
        if n == 1:
            starts = _window_starts(N, w, budget, [flat_max[0], flat_min[0]])
            osc, s0 = _max_oscillation_1d(v, w, starts)
            counts.append(int(starts.size))
            cube = (s0,)
        else:
            si = _window_starts(N, w, budget, [flat_max[0], flat_min[0]])
            sj = _window_starts(N, w, budget, [flat_max[1], flat_min[1]])
            osc, cube = _max_oscillation_2d(v, w, si, sj)
            counts.append(int(si.size * sj.size))
        if osc > best:
            best, best_cube = osc, (t, cube)
    meta = {
        "grid": g.spec.to_json(), "cube_shape": "axis-aligned cube",
        "levels": top + 1, "budget_per_axis": budget, "cubes_per_level": counts,
    }
    if best_cube is not None:
        t, start = best_cube
        meta["argmax_side"] = 2 ** t * g.spec.h
        meta["argmax_start_index"] = list(start)
    return SeminormReport("bmo", best, LOWER_BOUND, {}, meta)


# --------------------------------------------------------------------------
# Hoelder

def _offsets_2d(M1: int, M2: int, max_offsets: int):
    offs = [(dx, dy) for dx in range(M1) for dy in range(-M2 + 1, M2) if dx > 0 or dy > 0]
    if len(offs) <= max_offsets:
        return offs, False
    # keep every short offset, then an even subsample of the rest
    offs.sort(key=lambda o: (o[0] ** 2 + o[1] ** 2, o))
    near = offs[: max_offsets // 2]
    far = offs[max_offsets // 2:]
    idx = np.round(np.linspace(0, len(far) - 1, max_offsets - len(near))).astype(int)
    return near + [far[i] for i in np.unique(idx)], True


def _pair_views(g: np.ndarray, dx: int, dy: int):
    M1, M2 = g.shape
    a = g[dx:, max(dy, 0):M2 + min(dy, 0)]
    b = g[:M1 - dx, max(-dy, 0):M2 - max(dy, 0)]
    return a, b


def holder_seminorm(
    f: Field,
    eta: float,
    grid: GridSpec | None = None,
    max_offsets: int = 20000,
    workers: int | None = 1,
) -> SeminormReport:
    """``max |f(x) - f(y)| / |x - y|^eta`` over distinct grid node pairs."""
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    g = as_grid(f, grid)
    if g.values.size < 2:
        raise ValueError("Hoelder seminorm needs at least two nodes")
    h = g.spec.h
    # the nearest zero node is always inside a one-node margin of the support
    v = g.values[_support_slices(g.values, 1)]
    subsampled = False
    if g.n == 1:
        M = v.size
        chunks = chunked(M - 1, 512)

        def run(rng):
            best, arg = 0.0, None
            for d in rng:
                d += 1
                m = float(np.max(np.abs(v[d:] - v[:-d]))) / (d * h) ** eta
                if m > best:
                    best, arg = m, d
            return best, arg
        parts = ordered_map(run, chunks, workers)
    else:
        offs, subsampled = _offsets_2d(*v.shape, max_offsets)
        chunks = [offs[r.start:r.stop] for r in chunked(len(offs), 512)]

        def run(block):
            best, arg = 0.0, None
            for dx, dy in block:
                a, b = _pair_views(v, dx, dy)
                m = float(np.max(np.abs(a - b))) / (h * math.hypot(dx, dy)) ** eta
                if m > best:
                    best, arg = m, (dx, dy)
            return best, arg
        parts = ordered_map(run, chunks, workers)
    value, arg = 0.0, None
    for m, a in parts:
        if m > value:
            value, arg = m, a
    meta = {"grid": g.spec.to_json(), "pairs": "all" if not subsampled else f"offset subsample ({max_offsets})",
            "argmax_offset": arg}
    return SeminormReport("holder", value, LOWER_BOUND, {"eta": eta}, meta)


# --------------------------------------------------------------------------
# derivatives and the fractional Sobolev seminorm

@dataclass
class DerivativeGrid:
    """Central-difference ``D^sigma f`` on the grid shrunk by ``order`` nodes per side."""

    order: int
    sigma: tuple[int, ...]
    field: GridField


def multi_indices(n: int, k: int) -> list[tuple[int, ...]]:
    if n == 1:
        return [(k,)]
    return [(i, k - i) for i in range(k, -1, -1)]


def derivative_grid(f: GridField, sigma: Sequence[int]) -> DerivativeGrid:
    sigma = tuple(int(s) for s in sigma)
    if len(sigma) != f.n or any(s < 0 for s in sigma):
        raise ValueError("bad multi-index")
    k = sum(sigma)
    if 2 * k >= f.spec.N:
        raise ValueError("grid too small for this derivative order")
    v = f.values
    h = f.spec.h
    for axis, s in enumerate(sigma):
        for _ in range(s):
            hi = [slice(None)] * f.n
            lo = [slice(None)] * f.n
            hi[axis] = slice(2, None)
            lo[axis] = slice(None, -2)
            v = (v[tuple(hi)] - v[tuple(lo)]) / (2 * h)
    # trim the less-differentiated axes so every axis loses k nodes per side
    trim = []
    for s in sigma:
        r = k - s
        trim.append(slice(r, v.shape[len(trim)] - r) if r else slice(None))
    v = v[tuple(trim)]
    spec = GridSpec(f.n, f.spec.L - k * h, h)
    return DerivativeGrid(k, sigma, GridField(spec, v))


def split_order(s: float, tol: float = 1e-9) -> tuple[int, float]:
    """``([s], s - [s])`` with near-integers snapped."""
    k = int(math.floor(s + tol))
    s1 = s - k
    if abs(s1) <= tol:
        s1 = 0.0
    return k, s1


def _tail_factor(shape, h: float, n: int, sp: float, angles: int = 256) -> np.ndarray:
    """``int_{y outside box} |x - y|^-(n+sp) dy`` for every node x of the box.

    The box is the union of the node cells.
    """
    if n == 1:
        M = shape[0]
        i = np.arange(M)
        right = (M - 1 - i) * h + h / 2
        left = i * h + h / 2
        return (right ** -sp + left ** -sp) / sp
    M1, M2 = shape
    th = (np.arange(angles) + 0.5) * (2 * math.pi / angles)
    c, s = np.cos(th), np.sin(th)
    xs = np.arange(M1) * h + h / 2  # distance to the low edge along axis 0
    ys = np.arange(M2) * h + h / 2
    out = np.empty(shape)
    with np.errstate(divide="ignore"):
        for a in range(M1):
            dxp = (M1 * h - xs[a]) / np.where(c > 0, c, np.nan)
            dxm = xs[a] / np.where(c < 0, -c, np.nan)
            tx = np.fmin(dxp, dxm)
            dyp = (M2 * h - ys[:, None]) / np.where(s > 0, s, np.nan)[None, :]
            dym = ys[:, None] / np.where(s < 0, -s, np.nan)[None, :]
            ty = np.fmin(dyp, dym)
            r = np.fmin(tx[None, :], ty)
            out[a] = np.sum(r ** -sp, axis=1) * (2 * math.pi / angles) / sp
    return out


def _gagliardo_p(
    g: GridField, s1: float, p: float, exclusion: float, extension: str, workers,
) -> tuple[float, dict]:
    h, n = g.spec.h, g.n
    expo = n + s1 * p
    if extension == "zero":
        v = g.values[_support_slices(g.values, 0)]
    else:
        v = g.values
    cell = h ** n
    square = p == 2

    def term(diff):
        a = np.abs(diff)
        return float(np.sum(a * a if square else a ** p))

    if n == 1:
        M = v.size
        dmin = max(1, int(math.ceil(exclusion / h - 1e-9)))
        ds = range(dmin, M)
        chunks = [ds[r.start:r.stop] for r in chunked(len(ds), 512)]

        def run(block):
            return [term(v[d:] - v[:-d]) * (d * h) ** -expo for d in block]
    else:
        offs = [(dx, dy) for dx in range(v.shape[0]) for dy in range(-v.shape[1] + 1, v.shape[1])
                if (dx > 0 or dy > 0) and h * math.hypot(dx, dy) >= exclusion * (1 - 1e-12)]
        chunks = [offs[r.start:r.stop] for r in chunked(len(offs), 512)]

        def run(block):
            out = []
            for dx, dy in block:
                a, b = _pair_views(v, dx, dy)
                out.append(term(a - b) * (h * math.hypot(dx, dy)) ** -expo)
            return out
    parts = ordered_map(run, chunks, workers)
    # ordered pairs: every unordered pair counted twice
    inside = 2.0 * cell * cell * exact_sum(itertools.chain.from_iterable(parts))
    tail = 0.0
    if extension == "zero" and s1 > 0:
        absp = np.abs(v) ** p
        tail = 2.0 * cell * exact_sum((absp * _tail_factor(v.shape, h, n, s1 * p)).ravel().tolist())
    return inside + tail, {"inside": inside, "tail": tail, "box_nodes": list(v.shape)}


def sobolev_seminorm(
    f: Field,
    s: float,
    p: float,
    exclusion: float | None = None,
    grid: GridSpec | None = None,
    extension: str = "auto",
    workers: int | None = 1,
) -> SeminormReport:
    """Homogeneous ``W^{s,p}`` seminorm.

    Non-integer ``s``: Gagliardo double sum over node pairs at distance
    ``>= exclusion`` (default ``h``) applied to every ``D^sigma f`` with
    ``|sigma| = [s]``.  Integer ``s``: sum of the ``L^p`` norms of those
    derivatives.

    ``extension="zero"`` treats the field as zero outside its grid and adds
    the pairs with one point outside in closed form; ``"none"`` restricts
    both points to the grid box; ``"auto"`` picks ``"zero"`` when the field
    vanishes on the grid boundary.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    if p < 1:
        raise ValueError("p must be >= 1")
    g = as_grid(f, grid)
    h = g.spec.h
    if exclusion is None:
        exclusion = h
    if exclusion < h * (1 - 1e-12):
        raise ValueError("exclusion radius must be at least h")
    if extension == "auto":
        extension = "zero" if g.vanishes_on_boundary() else "none"
    if extension not in ("zero", "none"):
        raise ValueError(f"unknown extension {extension!r}")
    k, s1 = split_order(s)
    parts, metas = [], []
    for sigma in multi_indices(g.n, k):
        dg = derivative_grid(g, sigma).field if k else g
        if s1 == 0:
            part = float(np.sum(np.abs(dg.values) ** p)) * h ** g.n
            metas.append({"sigma": list(sigma), "lp_p": part})
        else:
            part, m = _gagliardo_p(dg, s1, p, exclusion, extension, workers)
            metas.append({"sigma": list(sigma), **m})
        parts.append(part ** (1.0 / p))
    value = float(sum(parts))
    meta = {"grid": g.spec.to_json(), "k": k, "s1": s1, "exclusion": exclusion,
            "extension": extension, "terms": metas,
            "derivative_scheme": "iterated central differences" if k else None}
    return SeminormReport("sobolev", value, QUADRATURE, {"s": s, "p": p}, meta)


# --------------------------------------------------------------------------
# weighted sup-integral

def weighted_integral_at(f: GridField, alpha: float, z) -> float:
    """``int |f(y)| / (|z - y| + 1)^alpha dy`` by node quadrature."""
    v = np.abs(f.values)
    coords = f.spec.coords()
    z = np.atleast_1d(np.asarray(z, dtype=float))
    r = np.sqrt(sum((c - zc) ** 2 for c, zc in zip(coords, z)))
    return float(np.sum(v / (r + 1.0) ** alpha)) * f.spec.h ** f.n


def _default_z_candidates(g: GridField, budget: int) -> np.ndarray:
    ax = g.spec.axis()
    sl = _support_slices(g.values, 0)
    pts_axes = []
    for i, s in enumerate(sl):
        lo, hi = ax[s.start] - 2.0, ax[s.stop - 1] + 2.0
        idx = np.arange(max(int(np.floor(lo / g.spec.h)), -10 ** 9), int(np.ceil(hi / g.spec.h)) + 1)
        if idx.size > budget:
            idx = np.unique(np.round(np.linspace(idx[0], idx[-1], budget)).astype(int))
        pts_axes.append(idx * g.spec.h)
    mesh = np.meshgrid(*pts_axes, indexing="ij")
    cand = np.stack([m.ravel() for m in mesh], axis=1)
    peak = np.unravel_index(int(np.argmax(np.abs(g.values))), g.values.shape)
    extra = np.array([[0.0] * g.n, [ax[i] for i in peak]])
    return np.concatenate([cand, extra])


def weighted_sup_integral(
    f: Field,
    alpha: float,
    z_candidates=None,
    grid: GridSpec | None = None,
    budget: int | None = None,
    workers: int | None = 1,
) -> SeminormReport:
    """``max_z int |f(y)| / (|z - y| + 1)^alpha dy`` over candidate points ``z``.

    Default candidates cover the support's bounding box enlarged by 2 in
    every direction (at most ``budget`` per axis), plus the origin and the
    peak of ``|f|``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    g = as_grid(f, grid)
    if budget is None:
        budget = 257 if g.n == 1 else 33
    if z_candidates is None:
        z = _default_z_candidates(g, budget)
    else:
        z = np.asarray(z_candidates, dtype=float).reshape(-1, g.n)
    if z.shape[0] == 0:
        raise ValueError("empty candidate set")
    sl = _support_slices(g.values, 0)
    v = np.abs(g.values[sl]).ravel()
    coords = [c[sl].ravel() for c in g.spec.coords()]
    keep = v > 0
    v = v[keep]
    coords = [c[keep] for c in coords]
    cell = g.spec.h ** g.n

    def run(rng):
        out = []
        for i in rng:
            r = np.sqrt(sum((c - zc) ** 2 for c, zc in zip(coords, z[i])))
            out.append(float(np.sum(v / (r + 1.0) ** alpha)) * cell)
        return out
    vals = list(itertools.chain.from_iterable(ordered_map(run, chunked(z.shape[0], 64), workers)))
    i = int(np.argmax(vals)) if vals else 0
    meta = {"grid": g.spec.to_json(), "candidates": int(z.shape[0]),
            "argmax_z": [float(c) for c in z[i]]}
    return SeminormReport("weighted_sup", float(vals[i]), LOWER_BOUND, {"alpha": alpha}, meta)


# --------------------------------------------------------------------------
# averages over balls and dyadic annuli

def _average(f, region, h, n, extend, transform=None):
    if isinstance(f, GridField):
        n = f.n
        if extend is None:
            extend = f.vanishes_on_boundary()
        if not extend:
            lo, hi = f.spec.cell_box()
            e = region.extent()
            if e > hi + 1e-12:
                raise ValueError("region leaves the field domain")
    else:
        n = n or 1
    return box_integral(f, region, h=h, n=n, transform=transform, extend=extend) / region_measure(region, n)


def annulus_average(f: Field, j: int, h: float | None = None, n: int | None = None,
                    extend: bool | None = None) -> float:
    """Average of ``f`` over ``2^j <= |x| < 2^(j+1)``.

    ``extend=None`` zero-extends a grid field only when it vanishes on the
    grid boundary; otherwise a region leaving the domain is an error.
    """
    return _average(f, Annulus.dyadic(j), h, n, extend)


def ball_average(f: Field, rho: float, h: float | None = None, n: int | None = None,
                 extend: bool | None = None) -> float:
    """Average of ``f`` over ``|x| < rho``."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    return _average(f, Ball(rho), h, n, extend)


def mean_oscillation(f: Field, region, h=None, n=None, extend: bool = True) -> tuple[float, float]:
    """``(avg_region f, avg_region |f - avg_region f|)``."""
    mean = _average(f, region, h, n, extend)
    osc = _average(f, region, h, n, extend, transform=lambda v: np.abs(v - mean))
    return mean, osc
