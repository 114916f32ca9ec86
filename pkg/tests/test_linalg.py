from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pfaffred.errors import NotInvertibleError
from pfaffred.linalg import ConstMatrix, SeriesMatrix, generalized_eigenspaces
from pfaffred.scalars import QQ, poly_eval
from pfaffred.series import Series


def cm(rows):
    return ConstMatrix([[QQ.scalar(Fraction(v)) for v in r] for r in rows], QQ)


def sm(rows, nvars=2):
    out = []
    for r in rows:
        out.append([v if isinstance(v, Series) else Series.constant(nvars, v, QQ)
                    for v in r])
    return SeriesMatrix(out, nvars, QQ)


X1 = Series.variable(2, 0, QQ)
X2 = Series.variable(2, 1, QQ)


def test_const_product_and_identity():
    a = cm([[1, 2], [3, 4]])
    assert a * ConstMatrix.identity(2, QQ) == a
    b = cm([[0, 1], [1, 0]])
    assert (a * b) == cm([[2, 1], [4, 3]])


def test_rref_rank_kernel():
    a = cm([[1, 2, 3], [2, 4, 6], [1, 0, 1]])
    assert a.rank() == 2
    ker = a.kernel_basis()
    assert len(ker) == 1
    v = ker[0]
    for row in a.rows:
        acc = QQ.zero()
        for c, x in zip(row, v):
            acc = acc + c * x
        assert acc.is_zero()


def test_solve_vec():
    a = cm([[2, 0], [0, 3]])
    x = a.solve_vec([QQ.scalar(4), QQ.scalar(9)])
    assert x == [QQ.scalar(2), QQ.scalar(3)]
    # inconsistent system
    b = cm([[1, 1], [1, 1]])
    assert b.solve_vec([QQ.scalar(0), QQ.scalar(1)]) is None


def test_inverse_and_failure():
    a = cm([[1, 2], [3, 5]])
    inv = a.inverse()
    assert a * inv == ConstMatrix.identity(2, QQ)
    with pytest.raises(NotInvertibleError):
        cm([[1, 2], [2, 4]]).inverse()


def test_charpoly_companion():
    # companion matrix of t^2 - t - 1
    a = cm([[0, 1], [1, 1]])
    p = a.charpoly()
    assert [c.to_fraction() for c in p] == [Fraction(-1), Fraction(-1), Fraction(1)]
    # Cayley-Hamilton
    acc = ConstMatrix.zeros(2, 2, QQ)
    for k, c in enumerate(p):
        acc = acc + a.power(k) * c
    assert acc.is_zero()


def test_generalized_eigenspaces_jordan():
    # eigenvalue 2 with a 2x2 Jordan block, eigenvalue -1 simple
    a = cm([[2, 1, 0], [0, 2, 0], [0, 0, -1]])
    roots = [(QQ.scalar(2), 2), (QQ.scalar(-1), 1)]
    V, sizes = generalized_eigenspaces(a, roots)
    assert sizes == [2, 1]
    B = V.inverse() * a * V
    # block triangular with the right diagonal
    assert B.rows[0][2].is_zero() and B.rows[1][2].is_zero()
    assert B.rows[2][0].is_zero() and B.rows[2][1].is_zero()
    assert B.rows[2][2] == -1


def test_series_matrix_product():
    a = sm([[1, X1], [0, 1]])
    b = sm([[1, -X1], [0, 1]])
    assert a * b == SeriesMatrix.identity(2, 2, QQ)


def test_determinant_exact():
    a = sm([[1 + X1, X2], [X2, 1 - X1]])
    det = a.determinant()
    assert det == Series.constant(2, 1, QQ) - X1 * X1 - X2 * X2


def test_determinant_windowed():
    a = sm([[(1 + X1).clipped((3, 3)), X2], [X2, 1 - X1]])
    det = a.determinant()
    assert not det.exact
    assert det.coefficient((0, 1)) == 0
    assert det.coefficient((2, 0)) == -1


def test_rank_generic_sees_series_pivots():
    a = sm([[X1, X2], [X1 * X2, X2 * X2]])  # second row = x2 * first
    assert a.rank_generic() == 1
    b = sm([[X1, X2], [X2, X1]])
    assert b.rank_generic() == 2


def test_adjugate_inverse_unimodular():
    a = sm([[1, X1 + X2], [0, 1]])
    inv = a.adjugate_inverse()
    assert inv is not None and inv.exact
    assert a * inv == SeriesMatrix.identity(2, 2, QQ)


def test_adjugate_inverse_monomial_det():
    # diagonal monomial: det = x1^2, cofactors divide exactly
    a = sm([[X1, Series.zero(2, QQ)], [Series.zero(2, QQ), X1]])
    inv = a.adjugate_inverse()
    assert inv is not None
    assert inv.rows[0][0].coefficient((-1, 0)) == 1
    assert a * inv == SeriesMatrix.identity(2, 2, QQ)


def test_adjugate_inverse_refuses_nonmonomial_det():
    a = sm([[1 + X1, Series.zero(2, QQ)], [Series.zero(2, QQ), 1]])
    assert a.adjugate_inverse() is None   # 1/(1+x1) is not polynomial


def test_neumann_inverse_matches_window():
    a = sm([[(1 + X1).clipped((4, 4)), X2.clipped((4, 4))], [0, 1]]).clipped((4, 4))
    inv = a.inverse()
    prod = a * inv
    assert prod == SeriesMatrix.identity(2, 2, QQ)


def test_series_matrix_derivative_and_restrict():
    a = sm([[X1 * X2, X1], [1, X2]])
    da = a.partial_derivative(0)
    assert da.rows[0][0] == X2
    assert da.rows[1][1].is_zero()
    r = a.restrict([1])
    assert r.rows[0][0].is_zero() and r.rows[1][0] == 1


entries = st.integers(-3, 3)


@given(st.lists(st.lists(entries, min_size=3, max_size=3), min_size=3, max_size=3))
@settings(max_examples=50)
def test_charpoly_roots_vs_det(rows):
    a = cm(rows)
    p = a.charpoly()
    # p(0) = det(-A) = (-1)^3 det(A); compare against series determinant
    det = a.to_series(1).determinant()
    assert poly_eval(p, QQ.zero()) == -det.constant_term()


@given(st.lists(st.lists(entries, min_size=2, max_size=2), min_size=2, max_size=2),
       st.lists(st.lists(entries, min_size=2, max_size=2), min_size=2, max_size=2))
@settings(max_examples=50)
def test_det_multiplicative(r1, r2):
    a, b = sm(r1), sm(r2)
    assert (a * b).determinant() == a.determinant() * b.determinant()
