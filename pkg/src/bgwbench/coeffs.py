"""Exact dyadic coefficient systems and the telescoping identity.

All quantities are :class:`fractions.Fraction`; nothing here touches
floating point.  The coefficients ``a_0, ..., a_{k+1}`` are fixed by
``a_0 = 1`` and by requiring ``sum_j a_j 2^(j l) = 0`` for ``l = 0..k``,
so that the combination ``sum_j a_j b_{j+l}`` annihilates every sequence
``b_j = P(2^j)`` with ``deg P <= k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

__all__ = [
    "DyadicCoefficients",
    "solve_dyadic_system",
    "combined_coefficient_closed_form",
    "product_form_coefficients",
    "telescoping_combine",
    "triangle_bound",
    "residuals",
]


@dataclass(frozen=True)
class DyadicCoefficients:
    """Solution ``(a_0, ..., a_{k+1})`` of the dyadic system of order ``k``.

    ``a_combined`` is ``sum_{j=0}^{k} (k - j + 1) a_j``.
    """

    k: int
    a: tuple[Fraction, ...]
    a_combined: Fraction

    def __post_init__(self):
        if len(self.a) != self.k + 2:
            raise ValueError(f"expected {self.k + 2} coefficients, got {len(self.a)}")

    @property
    def abs_sum(self) -> Fraction:
        return sum((abs(x) for x in self.a), Fraction(0))

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "a": [[x.numerator, x.denominator] for x in self.a],
            "a_combined": [self.a_combined.numerator, self.a_combined.denominator],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "DyadicCoefficients":
        a = tuple(Fraction(int(p), int(q)) for p, q in obj["a"])
        p, q = obj["a_combined"]
        return cls(k=int(obj["k"]), a=a, a_combined=Fraction(int(p), int(q)))


def _combined(a: Sequence[Fraction], k: int) -> Fraction:
    return sum(((k - j + 1) * a[j] for j in range(k + 1)), Fraction(0))


def _bareiss_solve(m: list[list[int]], rhs: list[int]) -> list[Fraction]:
    """Solve a nonsingular integer system by fraction-free elimination.

    Intermediate entries stay integral (Bareiss); only the final back
    substitution produces fractions.
    """
    n = len(m)
    aug = [row[:] + [r] for row, r in zip(m, rhs)]
    prev = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if aug[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        if piv != c:
            aug[c], aug[piv] = aug[piv], aug[c]
        for r in range(c + 1, n):
            for col in range(c + 1, n + 1):
                # exact division is guaranteed by Sylvester's identity
                aug[r][col] = (aug[c][c] * aug[r][col] - aug[r][c] * aug[c][col]) // prev
            aug[r][c] = 0
        prev = aug[c][c]
    x = [Fraction(0)] * n
    for r in range(n - 1, -1, -1):
        s = Fraction(aug[r][n])
        for col in range(r + 1, n):
            s -= aug[r][col] * x[col]
        x[r] = s / aug[r][r]
    return x


def solve_dyadic_system(k: int) -> DyadicCoefficients:
    """Exact solution of ``sum_{j=0}^{k+1} a_j 2^(j l) = 0``, ``l = 0..k``, with ``a_0 = 1``.

    Examples
    --------
    >>> [str(x) for x in solve_dyadic_system(1).a]
    ['1', '-3/2', '1/2']
    """
    if isinstance(k, bool) or not isinstance(k, int) or k < 0:
        raise ValueError(f"k must be a non-negative integer, got {k!r}")
    # unknowns a_1..a_{k+1}; moving a_0 = 1 to the right-hand side
    m = [[2 ** (j * l) for j in range(1, k + 2)] for l in range(k + 1)]
    rest = _bareiss_solve(m, [-1] * (k + 1))
    a = (Fraction(1), *rest)
    return DyadicCoefficients(k=k, a=a, a_combined=_combined(a, k))


def combined_coefficient_closed_form(k: int) -> Fraction:
    """``2^(-k(k+1)/2) * prod_{l=1}^{k} (2^l - 1)``, the value of ``a_combined``.

    This carries the leading coefficient ``a_{k+1}`` that a bare
    ``prod (1 - 2^l)`` would miss.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    prod = 1
    for l in range(1, k + 1):
        prod *= 2 ** l - 1
    return Fraction(prod, 2 ** (k * (k + 1) // 2))


def product_form_coefficients(k: int) -> tuple[Fraction, ...]:
    """Coefficients of ``Q(x) = a_{k+1} prod_{l=0}^{k} (x - 2^l)`` scaled so ``Q(0) = 1``.

    Independent route to the same tuple as :func:`solve_dyadic_system`.
    """
    poly = [Fraction(1)]  # ascending powers
    for l in range(k + 1):
        root = 2 ** l
        nxt = [Fraction(0)] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i] -= root * c
            nxt[i + 1] += c
        poly = nxt
    scale = 1 / poly[0]
    return tuple(c * scale for c in poly)


def residuals(coeffs: DyadicCoefficients) -> list[Fraction]:
    """``sum_j a_j 2^(j l)`` for ``l = 0..k`` (all zero for a valid solution)."""
    return [
        sum((aj * 2 ** (j * l) for j, aj in enumerate(coeffs.a)), Fraction(0))
        for l in range(coeffs.k + 1)
    ]


def _check_indices(b_seq: Mapping[int, Fraction], k: int, m: int) -> None:
    if m < 1:
        raise ValueError("m must be >= 1")
    missing = [l for l in range(-m, k + m + 1) if l not in b_seq]
    if missing:
        raise IndexError(f"b_seq is missing indices {missing}")


def telescoping_combine(
    coeffs: DyadicCoefficients,
    b: Fraction,
    b_seq: Mapping[int, Fraction],
    m: int,
) -> tuple[Fraction, Fraction]:
    """Evaluate both sides of the dyadic telescoping identity.

    Returns ``(lhs, rhs)`` with::

        lhs = sum_{l=-m}^{m-1} sum_j a_j b_{j+l}
        rhs = sum_{l=m}^{k+m} [sum_{j=l-m+1}^{k+1} a_j] b_l
              + sum_{l=-m}^{k-m} [sum_{j=0}^{l+m} a_j] (b_l - b) + a_combined * b

    The two are equal for every input; each side is evaluated directly
    from its own formula.
    """
    k, a = coeffs.k, coeffs.a
    _check_indices(b_seq, k, m)
    lhs = Fraction(0)
    for l in range(-m, m):
        for j in range(k + 2):
            lhs += a[j] * b_seq[j + l]
    rhs = coeffs.a_combined * b
    for l in range(m, k + m + 1):
        rhs += sum(a[l - m + 1:k + 2], Fraction(0)) * b_seq[l]
    for l in range(-m, k - m + 1):
        rhs += sum(a[0:l + m + 1], Fraction(0)) * (b_seq[l] - b)
    return lhs, rhs


def triangle_bound(
    coeffs: DyadicCoefficients,
    b: Fraction,
    b_seq: Mapping[int, Fraction],
    m: int,
) -> tuple[Fraction, bool]:
    """Upper bound on ``|b|`` obtained from the identity by the triangle inequality.

    Returns ``(bound_value, |b| <= bound_value)``.
    """
    k, a = coeffs.k, coeffs.a
    _check_indices(b_seq, k, m)
    inv = 1 / abs(coeffs.a_combined)
    s_abs = coeffs.abs_sum
    near = sum((abs(b_seq[l] - b) for l in range(-m, k - m + 1)), Fraction(0))
    middle = sum(
        (abs(sum((a[j] * b_seq[j + l] for j in range(k + 2)), Fraction(0))) for l in range(-m, m)),
        Fraction(0),
    )
    far = sum((abs(b_seq[l]) for l in range(m, k + m + 1)), Fraction(0))
    bound = inv * s_abs * near + inv * middle + inv * s_abs * far
    return bound, abs(b) <= bound
