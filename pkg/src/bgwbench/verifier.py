"""Replay of the BGW proof chains and the sharpness sweeps on ``f_delta``.

The theorems hold with non-constructive constants, so nothing here asserts
a particular ``C``.  Instead every step of the dyadic decompositions is
evaluated and the ordering it claims is checked, empirical constants are
reported, and the ``f_delta`` sweeps check boundedness / divergence of the
relevant ratios.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate

from .coeffs import DyadicCoefficients, solve_dyadic_system, telescoping_combine, triangle_bound
from .fields import (
    AnalyticField, Annulus, Ball, GridField, GridSpec, LogBump, Polynomial, box_integral,
    polynomial_region_integral_exact, region_measure, region_nodes, sample,
)
from .parallel import ordered_map
from .seminorms import (
    SeminormReport, as_grid, ball_average, annulus_average, bmo_norm, derivative_grid,
    holder_seminorm, mean_oscillation, multi_indices, sobolev_seminorm, split_order,
    weighted_integral_at, weighted_sup_integral,
)

__all__ = [
    "PreconditionError", "InequalityReport", "SharpnessSweep", "BallChain", "AnnulusConstants",
    "log_plus", "log2_plus", "m0_rule", "ball_telescoping_check", "bmo_step_bounds",
    "polynomial_annihilation_check", "lemma22_empirical_constant",
    "overlap_multiplicity", "overlap_multiplicity_check", "power_mean_step_check",
    "check_bgw_bmo", "check_bgw_sobolev", "sharpness_sweep", "default_sweep_grid",
    "loglog_slope",
]


class PreconditionError(ValueError):
    """An operation was called outside the hypotheses it needs."""


def log_plus(x: float) -> float:
    return math.log(x) if x >= 1 else 0.0


def log2_plus(x: float) -> float:
    return math.log2(x) if x >= 1 else 0.0


def m0_rule(log_arg: float, n: int, alpha: float, eta: float) -> int:
    """Dyadic depth ``floor(log2+(log_arg) / min(n - alpha, eta)) + 1``."""
    if not 0 < alpha < n:
        raise PreconditionError(f"alpha must lie in (0, n) = (0, {n}), got {alpha}")
    if not 0 < eta < 1:
        raise PreconditionError("eta must lie in (0, 1)")
    if log_arg < 0:
        raise PreconditionError("log argument must be non-negative")
    return int(math.floor(log2_plus(log_arg) / min(n - alpha, eta))) + 1


def _ball_unit(n: int) -> float:
    return 2.0 if n == 1 else math.pi


# --------------------------------------------------------------------------
# telescoping over balls

@dataclass
class BallChain:
    residual: float
    f0: float
    m0: int
    averages: dict
    endpoint_reference: dict
    route: str


def _reference_ball_average(f: AnalyticField, rho: float, n: int) -> float:
    if n == 1:
        val, _ = integrate.quad(lambda x: float(f(x)), -rho, rho, points=[0.0], limit=400,
                                epsabs=1e-15, epsrel=1e-13)
        return val / (2 * rho)
    val, _ = integrate.dblquad(lambda r, t: float(f(r * math.cos(t), r * math.sin(t))) * r,
                               0, 2 * math.pi, 0, rho, epsabs=1e-13, epsrel=1e-11)
    return val / (math.pi * rho ** 2)


def ball_telescoping_check(f, m0: int, h: float | None = None, n: int = 1) -> BallChain:
    """Residual of ``f(0) = f(0) - A_{-m0} + sum_j (A_j - A_{j+1}) + A_{m0}``.

    ``A_j`` is the average over ``B_{2^j}``.  The interior differences use
    grid / midpoint quadrature.  For analytic fields the two endpoint
    averages come from an independent reference (exact rationals for 1D
    polynomials, adaptive quadrature otherwise), so the residual measures
    the quadrature error carried along the chain.  For grid fields both
    routes coincide and the residual is pure round-off.
    """
    if m0 < 1:
        raise ValueError("m0 must be >= 1")
    js = range(-m0, m0 + 1)
    if isinstance(f, GridField):
        if f.spec.cell_box()[1] <= 0:
            raise PreconditionError("domain too small")
        A = {j: ball_average(f, 2.0 ** j, extend=True) for j in js}
        f0 = f.at_origin()
        chain = f0 - A[-m0] + math.fsum(A[j] - A[j + 1] for j in range(-m0, m0)) + A[m0]
        return BallChain(abs(f0 - chain), f0, m0, A, {}, "grid")
    if isinstance(f, Polynomial) and n == 1 and not f.is_2d:
        A = {j: polynomial_region_integral_exact(f.coeffs, Ball(2.0 ** j)) / Fraction(2) ** (j + 1)
             for j in js}
        f0 = Fraction(f.coeffs[0]) if f.coeffs else Fraction(0)
        chain = f0 - A[-m0] + sum((A[j] - A[j + 1] for j in range(-m0, m0)), Fraction(0)) + A[m0]
        return BallChain(float(abs(f0 - chain)), float(f0), m0,
                         {j: float(v) for j, v in A.items()}, {}, "exact")
    if h is None:
        raise ValueError("analytic fields need a quadrature spacing h")
    A = {j: ball_average(f, 2.0 ** j, h=h, n=n) for j in js}
    ref = {j: _reference_ball_average(f, 2.0 ** j, n) for j in (-m0, m0)}
    f0 = float(f(*([0.0] * n)))
    chain = f0 - ref[-m0] + math.fsum(A[j] - A[j + 1] for j in range(-m0, m0)) + ref[m0]
    return BallChain(abs(f0 - chain), f0, m0, A, ref, "midpoint+reference")


def bmo_step_bounds(f, m0: int, h: float | None = None, n: int = 1, tol: float = 1e-9) -> list[tuple[float, float, bool]]:
    """``(|A_j - A_{j+1}|, 2^n avg_{B_{j+1}} |f - A_{j+1}|, holds)`` for ``j = -m0 .. m0-1``."""
    if isinstance(f, GridField):
        n = f.n
    out = []
    for j in range(-m0, m0):
        small = ball_average(f, 2.0 ** j, h=h, n=n, extend=True)
        big, osc = mean_oscillation(f, Ball(2.0 ** (j + 1)), h=h, n=n)
        step = abs(small - big)
        bound = 2 ** n * osc
        out.append((step, bound, step <= bound + tol * (1.0 + abs(bound))))
    return out


# --------------------------------------------------------------------------
# exact and empirical checks for the annulus lemma

def polynomial_annihilation_check(k: int, l: int, coeffs: DyadicCoefficients | None = None) -> Fraction:
    """``sum_j a_j avg_{Omega_j} x^l`` in exact rationals (zero for ``l <= k``)."""
    if coeffs is None:
        coeffs = solve_dyadic_system(k)
    mono = [0] * l + [1]
    total = Fraction(0)
    for j, aj in enumerate(coeffs.a):
        lo, hi = Fraction(2) ** j, Fraction(2) ** (j + 1)
        integral = polynomial_region_integral_exact(mono, Annulus(float(lo), float(hi)))
        total += aj * integral / (2 * (hi - lo))
    return total


def _pair_mean_abs_diff(values: np.ndarray, weights: np.ndarray) -> float:
    """``sum_{a,b} w_a w_b |v_a - v_b| / (sum w)^2`` in O(N log N)."""
    order = np.argsort(values, kind="stable")
    v, w = values[order], weights[order]
    W = float(np.sum(w))
    if W == 0:
        return 0.0
    cw = np.cumsum(w) - w
    cwv = np.cumsum(w * v) - w * v
    return 2.0 * float(np.sum(w * (v * cw - cwv))) / (W * W)


def _enlarged_annulus(k: int, l: int) -> Annulus:
    return Annulus(2.0 ** (l - 1), 2.0 ** (k + l + 3))


def _dk_stats(dk: GridField, k: int, l: int) -> tuple[float, float]:
    """``(avg avg |g(y) - g(y')|, avg |g|)`` over ``E_l``, zero-extended."""
    vals, w, outside = region_nodes(dk, _enlarged_annulus(k, l), allow_outside=True)
    if outside:
        vals = np.append(vals, 0.0)
        w = np.append(w, outside)
    dd = _pair_mean_abs_diff(vals, w)
    single = float(np.dot(w, np.abs(vals)) / np.sum(w))
    return dd, single


def _annulus_combination(f: GridField, coeffs: DyadicCoefficients, l: int) -> float:
    return math.fsum(float(aj) * annulus_average(f, j + l, extend=True) for j, aj in enumerate(coeffs.a))


@dataclass
class AnnulusConstants:
    k: int
    constant_pair_osc: float  # sup |comb| / (2^{kl} avg avg |D^k f - D^k f|)
    constant_mean_abs: float  # sup |comb| / (2^{kl} avg |D^k f|)
    ratios: list = dc_field(default_factory=list)
    skipped: list = dc_field(default_factory=list)


def lemma22_empirical_constant(
    k: int,
    trial_fields: Sequence,
    ls: Iterable[int] = (-2, -1, 0, 1),
    h0: float = 2.0 ** -6,
    rel_tol: float = 1e-9,
) -> AnnulusConstants:
    """Empirical lower bound on the annulus-lemma constants (1D).

    Analytic trials are sampled per ``l`` on a grid of spacing ``2^l h0``
    covering ``E_l``; grid trials use their own grid and skip any ``l`` whose
    ``E_l`` leaves it.  Trials whose ``D^k`` is constant on ``E_l`` are skipped.
    """
    coeffs = solve_dyadic_system(k)
    res = AnnulusConstants(k, 0.0, 0.0)
    for t, trial in enumerate(trial_fields):
        for l in ls:
            if isinstance(trial, GridField):
                if trial.n != 1:
                    raise PreconditionError("the annulus lemma check is one-dimensional")
                g = trial
                if 2.0 ** (k + l + 3) > g.spec.L - (k + 1) * g.spec.h:
                    continue
            else:
                h = 2.0 ** l * h0
                L = 2.0 ** (k + l + 3) + (k + 2) * h
                g = sample(trial, GridSpec(1, L, h))
            comb = abs(_annulus_combination(g, coeffs, l))
            dk = derivative_grid(g, (k,)).field if k else g
            dd, single = _dk_stats(dk, k, l)
            scale = 2.0 ** (k * l)
            if dd <= rel_tol * (1.0 + single):
                res.skipped.append({"trial": t, "l": l, "numerator": comb})
                continue
            r2 = comb / (scale * dd)
            r1 = comb / (scale * single)
            res.ratios.append({"trial": t, "l": l, "pair_osc": r2, "mean_abs": r1})
            res.constant_pair_osc = max(res.constant_pair_osc, r2)
            res.constant_mean_abs = max(res.constant_mean_abs, r1)
    return res


def overlap_multiplicity(k: int, y) -> int:
    """Number of integers ``l`` with ``2^(l-1) <= |y| < 2^(k+l+3)``."""
    r = float(np.linalg.norm(np.atleast_1d(np.asarray(y, dtype=float))))
    if r == 0:
        raise ValueError("multiplicity at y = 0 is infinite")
    _, e = math.frexp(r)  # r in [2^(e-1), 2^e)
    return sum(1 for l in range(e - k - 6, e + 3)
               if math.ldexp(1.0, l - 1) <= r < math.ldexp(1.0, k + l + 3))


def overlap_multiplicity_check(k: int, sample_points) -> int:
    """Largest multiplicity over the sample; never exceeds ``k + 4``."""
    pts = list(sample_points)
    if not pts:
        raise ValueError("no sample points")
    return max(overlap_multiplicity(k, y) for y in pts)


def power_mean_step_check(c: Sequence[float], p: float, m0: int) -> bool:
    """``sum c_j^(1/p) <= (2 m0)^((p-1)/p) (sum c_j)^(1/p)`` for ``2 m0`` entries."""
    c = np.asarray(c, dtype=float)
    if c.size != 2 * m0:
        raise ValueError(f"expected {2 * m0} entries, got {c.size}")
    if np.any(c < 0):
        raise ValueError("entries must be non-negative")
    if p < 1:
        raise ValueError("p must be >= 1")
    lhs = math.fsum((c ** (1.0 / p)).tolist())
    rhs = (2 * m0) ** ((p - 1) / p) * math.fsum(c.tolist()) ** (1.0 / p)
    return lhs <= rhs * (1 + 1e-12)


# --------------------------------------------------------------------------
# the two inequalities

@dataclass
class InequalityReport:
    theorem: str
    lhs: float
    core_norm: float
    log_arg: float
    exponent: float
    ratio: float
    ratio_log2: float
    m0: int
    chain: dict
    norms: dict
    compact_support: dict | None = None
    params: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        return _jsonable({
            "theorem": self.theorem, "params": self.params, "lhs": self.lhs,
            "core_norm": self.core_norm, "log_arg": self.log_arg, "exponent": self.exponent,
            "ratio": self.ratio, "ratio_log2": self.ratio_log2, "m0": self.m0,
            "chain": self.chain, "norms": self.norms, "compact_support": self.compact_support,
        })

    def csv_row(self) -> dict:
        return {
            "theorem": self.theorem, "Linf": self.lhs, "core_norm": self.core_norm,
            "K_alpha": self.norms["weighted_sup"]["value"], "Holder": self.norms["holder"]["value"],
            "log_arg": self.log_arg, "m0": self.m0, "ratio": self.ratio, "ratio_log2": self.ratio_log2,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def bgw_ratio(lhs: float, core: float, log_arg: float, exponent: float, base2: bool = False) -> float:
    lg = log2_plus(log_arg) if base2 else log_plus(log_arg)
    return lhs / (1.0 + core * (1.0 + lg ** exponent))


def _require_decay(g: GridField) -> None:
    peak = g.sup_abs()
    v = g.values
    edge = np.abs(np.concatenate([v[0].ravel(), v[-1].ravel()] if g.n == 1 else
                                 [v[0], v[-1], v[:, 0], v[:, -1]]))
    if peak and float(np.max(edge)) > 1e-12 * peak:
        raise PreconditionError(
            "field must vanish on the grid boundary: its zero extension would be discontinuous "
            "and the Hoelder seminorm infinite")


def _support_radius(g: GridField) -> float:
    nz = np.nonzero(g.values)
    if nz[0].size == 0:
        return 0.0
    coords = [c[nz] for c in g.spec.coords()]
    return float(np.max(np.sqrt(sum(c * c for c in coords)))) + g.spec.h / 2


def _common_norms(g: GridField, eta: float, alpha: float, workers) -> tuple[dict, float, float, float]:
    H = holder_seminorm(g, eta, workers=workers)
    K = weighted_sup_integral(g, alpha, workers=workers)
    K0 = weighted_integral_at(g, alpha, [0.0] * g.n)
    return {"holder": H.to_json(), "weighted_sup": K.to_json(), "weighted_at_origin": K0}, H.value, K.value, K0


def check_bgw_bmo(f, eta: float, alpha: float, grid: GridSpec | None = None, workers: int | None = 1) -> InequalityReport:
    """Evaluate the BMO form of the inequality at the origin and replay its proof."""
    g = as_grid(f, grid)
    n = g.n
    if not 0 < alpha < n:
        raise PreconditionError(f"alpha must lie in (0, n) = (0, {n})")
    if not 0 < eta < 1:
        raise PreconditionError("eta must lie in (0, 1)")
    _require_decay(g)
    lhs = g.sup_abs()
    B = bmo_norm(g)
    norms, H, K, K0 = _common_norms(g, eta, alpha, workers)
    norms["bmo"] = B.to_json()
    log_arg = K + H
    m0 = m0_rule(K0 + H, n, alpha, eta)
    f0 = g.at_origin()

    tele = ball_telescoping_check(g, m0)
    steps = bmo_step_bounds(g, m0)
    rho = 2.0 ** -m0
    holder_term = mean_oscillation_about(g, Ball(rho), f0)
    holder_bound = H * rho ** eta * n / (n + eta)
    bmo_sum = math.fsum(s for s, _, _ in steps)
    R = 2.0 ** m0
    tail = abs(tele.averages[m0])
    tail_integral = _weighted_ball_integral(g, alpha, R)
    tail_bound = 2.0 ** alpha / _ball_unit(n) * R ** (alpha - n) * tail_integral
    gap = min(n - alpha, eta)
    chain = {
        "f0": f0,
        "telescoping_residual": tele.residual,
        "holder_term": holder_term, "holder_bound": holder_bound,
        "holder_holds": holder_term <= holder_bound * (1 + 1e-9) + 1e-12,
        "bmo_steps": [{"j": j, "step": s, "bound": b, "holds": ok}
                      for j, (s, b, ok) in zip(range(-m0, m0), steps)],
        "bmo_steps_hold": all(ok for _, _, ok in steps),
        "bmo_step_sum": bmo_sum, "bmo_sum_bound": 2 * m0 * 2 ** n * B.value,
        "tail_term": tail, "tail_bound": tail_bound,
        "tail_holds": tail <= tail_bound * (1 + 1e-9) + 1e-12,
        "decomposition_holds": abs(f0) <= (holder_term + bmo_sum + tail) * (1 + 1e-9) + 1e-12,
        "log_arg_at_origin": K0 + H,
        "scale_term": 2.0 ** (-m0 * gap) * (K0 + H),
        "depth_term": m0 * B.value,
    }
    chain["empirical_constant"] = (abs(f0) / (chain["scale_term"] + chain["depth_term"])
                                   if f0 else 0.0)
    Rs = _support_radius(g)
    cs = None
    if Rs > 0:
        arg2 = Rs ** (n - alpha + eta) + H
        cs = {"R": Rs, "log_arg": arg2, "ratio": bgw_ratio(lhs, B.value, arg2, 1.0)}
    return InequalityReport(
        "BGW_BMO", lhs, B.value, log_arg, 1.0, bgw_ratio(lhs, B.value, log_arg, 1.0),
        bgw_ratio(lhs, B.value, log_arg, 1.0, base2=True), m0, chain, norms, cs,
        {"eta": eta, "alpha": alpha, "n": n},
    )


def mean_oscillation_about(g: GridField, region, c: float) -> float:
    """``avg_region |f - c|``."""
    return box_integral(g, region, transform=lambda v: np.abs(v - c), extend=True) / region_measure(region, g.n)


def _weighted_ball_integral(g: GridField, alpha: float, R: float) -> float:
    """``int_{B_R} |f(y)| / (|y| + 1)^alpha dy``."""
    vals, w, _, coords = region_nodes(g, Ball(R), with_coords=True)
    r = np.sqrt(sum(c * c for c in coords))
    return float(np.dot(w, np.abs(vals) / (r + 1.0) ** alpha))


def check_bgw_sobolev(
    f, s: float, p: float, eta: float, alpha: float,
    grid: GridSpec | None = None, workers: int | None = 1,
) -> InequalityReport:
    """Evaluate the fractional-Sobolev form at the origin and replay its proof.

    Dispatches on ``s1 = s - [s]``: the Gagliardo route when ``s1 > 0``, the
    plain ``L^p`` route for integer ``s``.
    """
    g = as_grid(f, grid)
    n = g.n
    if abs(s * p - n) > 1e-9:
        raise PreconditionError(f"critical scaling sp = n violated: s*p = {s * p}, n = {n}")
    if not 0 < alpha < n:
        raise PreconditionError(f"alpha must lie in (0, n) = (0, {n})")
    if not 0 < eta < 1:
        raise PreconditionError("eta must lie in (0, 1)")
    _require_decay(g)
    k, s1 = split_order(s)
    lhs = g.sup_abs()
    W = sobolev_seminorm(g, s, p, workers=workers)
    norms, H, K, K0 = _common_norms(g, eta, alpha, workers)
    norms["sobolev"] = W.to_json()
    log_arg = K + H
    expo = (p - 1) / p
    m0 = m0_rule(K0 + H, n, alpha, eta)
    f0 = g.at_origin()
    coeffs = solve_dyadic_system(k)
    a = [float(x) for x in coeffs.a]

    b_seq = {l: annulus_average(g, l, extend=True) for l in range(-m0, k + m0 + 2)}
    near = [abs(b_seq[l] - f0) for l in range(-m0, k - m0 + 1)]
    combos = [math.fsum(a[j] * b_seq[j + l] for j in range(k + 2)) for l in range(-m0, m0)]
    far = [abs(b_seq[l]) for l in range(m0, k + m0 + 1)]
    T1, T2, T3 = math.fsum(near), math.fsum(abs(c) for c in combos), math.fsum(far)

    # the identity and its triangle bound, exactly, on the (rational) float data
    fb = Fraction(f0)
    fseq = {l: Fraction(v) for l, v in b_seq.items() if l <= k + m0}
    id_lhs, id_rhs = telescoping_combine(coeffs, fb, fseq, m0)
    tri_bound, tri_holds = triangle_bound(coeffs, fb, fseq, m0)

    holder_bound = math.fsum(2.0 ** ((l + 1) * eta) * H for l in range(-m0, k - m0 + 1))

    # middle term, one enlarged annulus at a time
    derivs = [derivative_grid(g, sig).field if k else g for sig in multi_indices(n, k)]
    per_l = []
    for l in range(-m0, m0):
        dd = single = 0.0
        for dk in derivs:
            d1, d2 = _dk_stats(dk, k, l)
            dd += d1
            single += d2
        per_l.append({"l": l, "combination": combos[l + m0],
                      "pair_oscillation": 2.0 ** (k * l) * dd, "mean_abs": 2.0 ** (k * l) * single})
    key = "pair_oscillation" if s1 > 0 else "mean_abs"
    lemma_sum = math.fsum(x[key] for x in per_l)
    lemma_const = max((abs(x["combination"]) / x[key] for x in per_l if x[key] > 0), default=0.0)
    c_terms = [x[key] ** p for x in per_l]
    pm_holds = power_mean_step_check(c_terms, p, m0)
    middle_scale = m0 ** expo * W.value if s1 > 0 else W.value

    R = 2.0 ** (k + m0 + 1)
    tail_integral = _weighted_ball_integral(g, alpha, R)
    tail_bound = ((2.0 ** (k + 2)) ** alpha / (_ball_unit(n) * (2 ** n - 1))
                  * 2.0 ** (-m0 * (n - alpha)) * tail_integral)
    gap = min(n - alpha, eta)
    inv = 1.0 / abs(float(coeffs.a_combined))
    sabs = float(coeffs.abs_sum)
    chain = {
        "case": "s1 in (0,1)" if s1 > 0 else "s1 = 0",
        "k": k, "s1": s1, "f0": f0,
        "coefficients": [str(x) for x in coeffs.a], "a_combined": str(coeffs.a_combined),
        "near_term": T1, "middle_term": T2, "far_term": T3,
        "identity_exact": id_lhs == id_rhs,
        "triangle_bound": float(tri_bound), "triangle_holds": bool(tri_holds),
        "triangle_float_bound": inv * (sabs * T1 + T2 + sabs * T3),
        "holder_bound": holder_bound, "holder_holds": T1 <= holder_bound * (1 + 1e-9) + 1e-12,
        "middle_per_l": per_l, "lemma_sum": lemma_sum, "lemma_constant": lemma_const,
        "power_mean_holds": pm_holds,
        "middle_scale": middle_scale,
        "middle_constant": (T2 / middle_scale) if middle_scale > 0 else 0.0,
        "lemma_sum_constant": (lemma_sum / middle_scale) if middle_scale > 0 else 0.0,
        "tail_bound": tail_bound, "tail_holds": T3 <= tail_bound * (1 + 1e-9) + 1e-12,
        "log_arg_at_origin": K0 + H,
        "scale_term": 2.0 ** (-m0 * gap) * (K0 + H),
        "depth_term": m0 ** expo * W.value,
    }
    chain["empirical_constant"] = (abs(f0) / (chain["scale_term"] + chain["depth_term"])
                                   if f0 else 0.0)
    Rs = _support_radius(g)
    cs = None
    if Rs > 0:
        arg2 = Rs ** (n - alpha + eta) + H
        cs = {"R": Rs, "log_arg": arg2, "ratio": bgw_ratio(lhs, W.value, arg2, expo)}
    return InequalityReport(
        "BGW_Sobolev", lhs, W.value, log_arg, expo, bgw_ratio(lhs, W.value, log_arg, expo),
        bgw_ratio(lhs, W.value, log_arg, expo, base2=True), m0, chain, norms, cs,
        {"s": s, "p": p, "eta": eta, "alpha": alpha, "n": n},
    )


# --------------------------------------------------------------------------
# sharpness sweep

def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def default_sweep_grid(deltas: Sequence[float], n: int = 1) -> GridSpec:
    """Grid on ``[-1, 1]^n`` with ``h`` the largest power of two ``<= min(delta) / 4``."""
    h = 2.0 ** math.floor(math.log2(min(deltas) / 4))
    return GridSpec(n, 1.0, h)


SWEEP_COLUMNS = [
    "delta", "Linf", "BMO", "Sobolev", "K_alpha", "Holder", "m0",
    "ratio1", "ratio_gamma", "ratio1_sobolev", "ratio_gamma_sobolev",
    "ratio1_log2", "ratio_gamma_log2", "ratio1_sobolev_log2", "ratio_gamma_sobolev_log2",
]


@dataclass
class SharpnessSweep:
    deltas: list
    rows: list
    fits: dict
    assertions: dict
    params: dict

    def to_json(self) -> dict:
        return _jsonable({"params": self.params, "deltas": self.deltas, "rows": self.rows,
                          "fits": self.fits, "assertions": self.assertions})

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])
        return buf.getvalue()

    @property
    def passed(self) -> bool:
        return all(a["holds"] for a in self.assertions.values())


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def _spread(v) -> float:
    v = np.asarray(v, float)
    return float(v.max() / v.min())


def sharpness_sweep(
    deltas: Sequence[float],
    n: int = 1,
    s: float = 0.5,
    p: float = 2.0,
    eta: float = 0.5,
    alpha: float = 0.5,
    gamma_test: float = 0.5,
    grid: GridSpec | None = None,
    workers: int | None = 1,
) -> SharpnessSweep:
    """All five quantities and the BGW ratios for ``f_delta`` over a delta sweep."""
    deltas = [float(d) for d in deltas]
    if len(deltas) < 2 or any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise PreconditionError("deltas must be strictly decreasing (at least two)")
    if abs(s * p - n) > 1e-9:
        raise PreconditionError(f"critical scaling sp = n violated: s*p = {s * p}, n = {n}")
    if not 0 < gamma_test < 1:
        raise PreconditionError("gamma_test must lie in (0, 1)")
    if grid is None:
        grid = default_sweep_grid(deltas, n)
    if min(deltas) < 4 * grid.h:
        raise PreconditionError(f"delta={min(deltas)} is below grid resolution (needs >= 4h = {4 * grid.h})")
    expo = (p - 1) / p

    def one(delta):
        g = sample(LogBump(delta), grid)
        lhs = g.sup_abs()
        B = bmo_norm(g).value
        W = sobolev_seminorm(g, s, p).value
        K = weighted_sup_integral(g, alpha).value
        H = holder_seminorm(g, eta).value
        arg = K + H
        K0 = weighted_integral_at(g, alpha, [0.0] * n)
        row = {"delta": delta, "Linf": lhs, "BMO": B, "Sobolev": W, "K_alpha": K, "Holder": H,
               "m0": m0_rule(K0 + H, n, alpha, eta)}
        for suffix, b2 in (("", False), ("_log2", True)):
            row["ratio1" + suffix] = bgw_ratio(lhs, B, arg, 1.0, b2)
            row["ratio_gamma" + suffix] = bgw_ratio(lhs, B, arg, gamma_test, b2)
            row["ratio1_sobolev" + suffix] = bgw_ratio(lhs, W, arg, expo, b2)
            row["ratio_gamma_sobolev" + suffix] = bgw_ratio(lhs, W, arg, gamma_test * expo, b2)
        return row

    rows = ordered_map(one, deltas, workers)
    col = {c: [r[c] for r in rows] for c in SWEEP_COLUMNS}
    logd = [-math.log(d) for d in deltas]
    fits = {
        "linf_slope": loglog_slope(logd, col["Linf"]),
        "sobolev_p_slope": loglog_slope(logd, np.asarray(col["Sobolev"]) ** p),
        "sobolev_p_linear": [float(c) for c in np.polyfit(logd, np.asarray(col["Sobolev"]) ** p, 1)],
        "bmo_spread": _spread(col["BMO"]),
        "k_spread": _spread(col["K_alpha"]),
        "holder_slope_vs_inv_delta": loglog_slope([1 / d for d in deltas], col["Holder"]),
        "ratio1_spread": _spread(col["ratio1"]),
        "ratio1_sobolev_spread": _spread(col["ratio1_sobolev"]),
        "gamma_growth": col["ratio_gamma"][-1] / col["ratio_gamma"][0],
        "gamma_sobolev_growth": col["ratio_gamma_sobolev"][-1] / col["ratio_gamma_sobolev"][0],
        "gamma_growth_log2": col["ratio_gamma_log2"][-1] / col["ratio_gamma_log2"][0],
    }

    def mono(v):
        return bool(all(b > a for a, b in zip(v, v[1:])))

    assertions = {
        "linf_slope": {"value": fits["linf_slope"], "holds": 0.9 <= fits["linf_slope"] <= 1.1},
        "bmo_bounded": {"value": fits["bmo_spread"], "holds": fits["bmo_spread"] <= 3},
        "sobolev_p_slope": {"value": fits["sobolev_p_slope"], "holds": 0.8 <= fits["sobolev_p_slope"] <= 1.2},
        "k_bounded": {"value": fits["k_spread"], "holds": fits["k_spread"] <= 3},
        "ratio1_bounded": {"value": fits["ratio1_spread"], "holds": fits["ratio1_spread"] <= 3},
        "ratio1_sobolev_bounded": {"value": fits["ratio1_sobolev_spread"],
                                   "holds": fits["ratio1_sobolev_spread"] <= 3},
        "gamma_diverges": {"value": fits["gamma_growth"],
                           "holds": mono(col["ratio_gamma"]) and fits["gamma_growth"] >= 2},
        "gamma_sobolev_diverges": {"value": fits["gamma_sobolev_growth"],
                                   "holds": mono(col["ratio_gamma_sobolev"]) and fits["gamma_sobolev_growth"] >= 2},
    }
    params = {"n": n, "s": s, "p": p, "eta": eta, "alpha": alpha, "gamma_test": gamma_test,
              "grid": grid.to_json(), "log": "natural log+ in ratios; *_log2 columns use log2+"}
    return SharpnessSweep(deltas, rows, fits, assertions, params)
