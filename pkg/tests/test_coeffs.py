import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bgwbench.coeffs import (
    DyadicCoefficients, combined_coefficient_closed_form, product_form_coefficients, residuals,
    solve_dyadic_system, telescoping_combine, triangle_bound,
)


def gauss_jordan_oracle(k):
    """Independent solve: plain Gauss-Jordan with pivoting on the unknowns a_1..a_{k+1}."""
    m = k + 1
    rows = [[Fraction(2) ** (j * l) for j in range(1, m + 1)] + [Fraction(-1)] for l in range(m)]
    for c in range(m):
        piv = next(r for r in range(c, m) if rows[r][c] != 0)
        rows[c], rows[piv] = rows[piv], rows[c]
        rows[c] = [x / rows[c][c] for x in rows[c]]
        for r in range(m):
            if r != c and rows[r][c]:
                fac = rows[r][c]
                rows[r] = [x - fac * y for x, y in zip(rows[r], rows[c])]
    return (Fraction(1),) + tuple(rows[r][m] for r in range(m))


@pytest.mark.parametrize("k, a, comb", [
    (0, (1, -1), 1),
    (1, (1, Fraction(-3, 2), Fraction(1, 2)), Fraction(1, 2)),
    (2, (1, Fraction(-7, 4), Fraction(7, 8), Fraction(-1, 8)), Fraction(3, 8)),
])
def test_solve_examples(k, a, comb):
    c = solve_dyadic_system(k)
    assert c.a == tuple(Fraction(x) for x in a)
    assert c.a_combined == comb


@pytest.mark.parametrize("k, expected", [(0, 1), (1, Fraction(1, 2)), (2, Fraction(3, 8))])
def test_closed_form_examples(k, expected):
    assert combined_coefficient_closed_form(k) == expected


def test_k2_matches_product_form():
    # Q(x) = -(1/8)(x-1)(x-2)(x-4)
    assert product_form_coefficients(2) == solve_dyadic_system(2).a


@pytest.mark.parametrize("k", range(9))
def test_invariants(k):
    c = solve_dyadic_system(k)
    assert c.a[0] == 1
    assert all(r == 0 for r in residuals(c))
    assert c.a == gauss_jordan_oracle(k)
    assert c.a_combined != 0
    assert c.a_combined == sum((k - j + 1) * c.a[j] for j in range(k + 1))
    assert c.a_combined == -sum(j * c.a[j] for j in range(1, k + 2))
    assert c.a_combined == combined_coefficient_closed_form(k)
    assert c.a == product_form_coefficients(k)
    assert all(x.denominator > 0 and math.gcd(abs(x.numerator), x.denominator) == 1 for x in c.a)


@pytest.mark.parametrize("k", range(9))
def test_sign_alternation(k):
    a = solve_dyadic_system(k).a
    assert all(x * y < 0 for x, y in zip(a, a[1:]))


@pytest.mark.parametrize("bad", [-1, 1.5, "2"])
def test_solve_rejects(bad):
    with pytest.raises(ValueError):
        solve_dyadic_system(bad)


def test_json_roundtrip():
    c = solve_dyadic_system(4)
    assert DyadicCoefficients.from_json(c.to_json()) == c


def test_telescoping_k0_is_plain_difference():
    c = solve_dyadic_system(0)
    seq = {-1: Fraction(5, 3), 0: Fraction(-2), 1: Fraction(7, 11)}
    lhs, rhs = telescoping_combine(c, Fraction(9), seq, 1)
    assert lhs == rhs == seq[-1] - seq[1]


def test_telescoping_k2_m3_random():
    rng = random.Random(3)
    c = solve_dyadic_system(2)
    seq = {l: Fraction(rng.randint(-99, 99), rng.randint(1, 30)) for l in range(-3, 6)}
    assert len(seq) == 9
    lhs, rhs = telescoping_combine(c, Fraction(rng.randint(-9, 9), 7), seq, 3)
    assert lhs == rhs


@pytest.mark.parametrize("k, m", [(0, 1), (3, 2), (5, 8)])
def test_telescoping_zero(k, m):
    seq = {l: Fraction(0) for l in range(-m, k + m + 1)}
    assert telescoping_combine(solve_dyadic_system(k), Fraction(0), seq, m) == (0, 0)


def test_telescoping_missing_index():
    with pytest.raises((IndexError, KeyError)):
        telescoping_combine(solve_dyadic_system(1), Fraction(0), {0: Fraction(1)}, 2)


def test_triangle_examples():
    c = solve_dyadic_system(1)
    bound, holds = triangle_bound(c, Fraction(0), {l: Fraction(l) for l in range(-2, 4)}, 2)
    assert holds and bound >= 0
    rng = random.Random(11)
    seq = {l: Fraction(rng.randint(-40, 40), rng.randint(1, 9)) for l in range(-2, 4)}
    assert triangle_bound(c, Fraction(rng.randint(-5, 5)), seq, 2)[1]


def test_triangle_step_sequence_k0():
    c = solve_dyadic_system(0)
    b, m = Fraction(3, 2), 2
    seq = {l: (b if -m <= l <= 0 - m else Fraction(0)) for l in range(-m, m + 1)}
    bound, holds = triangle_bound(c, b, seq, m)
    # near and far terms vanish; the middle sum has the single entry |b|
    assert holds and bound == abs(b)


rationals = st.fractions(min_value=-100, max_value=100, max_denominator=50)


@settings(max_examples=1000, deadline=None)
@given(k=st.integers(0, 5), m=st.integers(1, 8), b=rationals, data=st.data())
def test_identities_property(k, m, b, data):
    seq = {l: data.draw(rationals) for l in range(-m, k + m + 1)}
    c = solve_dyadic_system(k)
    lhs, rhs = telescoping_combine(c, b, seq, m)
    assert lhs == rhs
    assert triangle_bound(c, b, seq, m)[1]
