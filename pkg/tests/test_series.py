import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pfaffred.errors import NotUnitError, TruncationInsufficient
from pfaffred.scalars import QQ
from pfaffred.series import Series, divide_exact, series_exp

INF = math.inf


def x(n=2, i=0):
    return Series.variable(n, i, QQ)


def test_polynomial_arithmetic_is_exact():
    s = (x() + x(i=1)) * (x() - x(i=1))
    t = x() * x() - x(i=1) * x(i=1)
    assert s.exact
    assert s == t
    assert str(s) == "x1^2 - x2^2"


def test_mul_window_rule():
    a = Series.constant(1, 1, QQ).clipped((3,))     # known below x^3
    b = Series.variable(1, 0, QQ)                   # exact, lo = 0... times x
    prod = a * b.mul_monomial((1,))                 # a * x^2
    assert prod.hi == (5,)
    assert prod.lo == (2,)


def test_truncated_zero_is_not_proven_zero():
    z = Series.zero(1, QQ, hi=(4,))
    assert z.is_zero() and not z.exact
    v, limited = z.valuation(0)
    assert v == INF and limited
    v, limited = Series.zero(1, QQ).valuation(0)
    assert v == INF and not limited


def test_coefficient_beyond_window_raises():
    a = Series.constant(1, 7, QQ).clipped((2,))
    assert a.coefficient((1,)) == 0
    with pytest.raises(TruncationInsufficient):
        a.coefficient((2,))


def test_geometric_inverse():
    one_minus_x = Series.constant(1, 1, QQ) - x(n=1)
    inv = one_minus_x.invert_unit(hi=(6,))
    for k in range(6):
        assert inv.coefficient((k,)) == 1
    assert (inv * one_minus_x) == 1


def test_invert_unit_bivariate():
    u = Series.constant(2, 1, QQ) + x() + x(i=1) * 2
    inv = u.invert_unit(hi=(4, 4))
    assert (u * inv) == 1
    with pytest.raises(NotUnitError):
        (u - 1).invert_unit(hi=(4, 4))


def test_partial_derivative():
    s = x() * x() * x(i=1)                     # x1^2 x2
    d = s.partial_derivative(0)
    assert d == x() * x(i=1) * 2
    assert s.partial_derivative(1) == x() * x()


def test_derivative_shrinks_window():
    s = Series.constant(1, 1, QQ).clipped((5,))
    assert s.partial_derivative(0).hi == (4,)


def test_restrict_and_project():
    s = Series.constant(2, 3, QQ) + x() * 2 + x() * x(i=1)
    r = s.restrict([1])
    assert r == Series.constant(2, 3, QQ) + x() * 2
    p = s.project_to_var(0)
    assert p.nvars == 1
    assert p.coefficient((1,)) == 2


def test_restrict_pole_raises():
    s = x().mul_monomial((0, -1))              # x1/x2
    with pytest.raises(NotUnitError):
        s.restrict([1])
    # restricting the non-polar variable is fine
    assert s.restrict([0]).is_zero()


def test_coeff_in_xi():
    s = x() * x(i=1) + x(i=1) * x(i=1) * 5
    c1 = s.coeff_in_xi(1, 1)
    assert c1 == x()
    assert s.coeff_in_xi(1, 2) == 5


def test_ramify_scales_exponents():
    s = Series.monomial(1, (-2,), 3, QQ) + x(n=1)
    r = s.ramify(0, 2)
    assert r.coefficient((-4,)) == 3
    assert r.coefficient((2,)) == 1
    assert r.coefficient((1,)) == 0


def test_agrees_on_common_window_only():
    a = Series.constant(1, 1, QQ).clipped((3,))
    b = Series.constant(1, 1, QQ) + Series.monomial(1, (5,), 9, QQ)
    assert a == b          # the x^5 term sits outside a's window
    c = Series.constant(1, 1, QQ) + x(n=1)
    assert a != c


def test_divide_exact_polynomial():
    num = x() * x() - x(i=1) * x(i=1)
    den = x() - x(i=1)
    q = divide_exact(num, den)
    assert q is not None and q.exact
    assert q == x() + x(i=1)


def test_divide_exact_laurent_quotient():
    q = divide_exact(x(), x(i=1))
    assert q is not None
    assert q.coefficient((1, -1)) == 1


def test_divide_exact_failure():
    num = Series.constant(1, 1, QQ)
    den = Series.constant(1, 1, QQ) - x(n=1)
    assert divide_exact(num, den) is None      # 1/(1-x) is not polynomial
    # but the windowed version yields the truncated geometric series
    qw = divide_exact(num.clipped((5,)), den)
    assert qw is not None
    assert qw.coefficient((4,)) == 1


def test_series_exp_matches_log_derivative():
    g = x(n=1) * Fraction(1, 2)
    e = series_exp(g, hi=(7,))
    # d/dx exp(g) = g' exp(g)
    lhs = e.partial_derivative(0)
    rhs = g.partial_derivative(0) * e
    assert lhs == rhs
    assert e.coefficient((2,)) == Fraction(1, 8)


def test_series_exp_rejects_polar_argument():
    g = Series.monomial(1, (-1,), 1, QQ)
    with pytest.raises(NotUnitError):
        series_exp(g, hi=(3,))


coeffs = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@st.composite
def polys(draw, nvars=2, max_deg=3):
    n_terms = draw(st.integers(0, 5))
    terms = {}
    for _ in range(n_terms):
        exp = tuple(draw(st.integers(0, max_deg)) for _ in range(nvars))
        terms[exp] = QQ.scalar(draw(coeffs))
    return Series(nvars, terms, QQ)


@given(polys(), polys(), polys())
@settings(max_examples=60)
def test_ring_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    assert a - a == 0


@given(polys(), polys())
@settings(max_examples=60)
def test_product_divides_back(a, b):
    if a.is_zero() or b.is_zero():
        return
    q = divide_exact(a * b, b)
    assert q is not None
    assert q == a


@given(polys())
@settings(max_examples=40)
def test_unit_inverse_roundtrip(a):
    u = a * Series.variable(2, 0, QQ) + 1      # force unit constant term
    inv = u.invert_unit(hi=(5, 5))
    assert u * inv == 1
