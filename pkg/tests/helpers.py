"""Shared constructors for the bivariate test systems."""

from pfaffred.linalg import SeriesMatrix
from pfaffred.scalars import QQ
from pfaffred.series import Series
from pfaffred.system import PfaffianSystem


def poly1(termmap):
    """Univariate polynomial from {k: coeff}."""
    return Series(1, {(k,): QQ.scalar(c) for k, c in termmap.items()}, QQ)


def mat1(grid):
    rows = [[cell if isinstance(cell, Series) else poly1(
        cell if isinstance(cell, dict) else {0: cell})
        for cell in row] for row in grid]
    return SeriesMatrix(rows, 1, QQ)


def sys1(grid, p, var="x"):
    return PfaffianSystem([var], [p], [mat1(grid)], QQ)


def poly2(termmap):
    """Bivariate polynomial from {(e1, e2): coeff}."""
    return Series(2, {e: QQ.scalar(c) for e, c in termmap.items()}, QQ)


def mat2(grid):
    rows = [[poly2(cell) if isinstance(cell, dict) else poly2({(0, 0): cell})
             for cell in row] for row in grid]
    return SeriesMatrix(rows, 2, QQ)


def hyper_system():
    """The 2x2 bivariate system with ranks (3,2) used throughout.

    x1^4 dF/dx1 = [[x1^3+x1^2+x2, x2^2], [-1, x1^3+x1^2-x2]] F
    x2^3 dF/dx2 = [[x2^2-2x2-6, x2^3], [-2x2, -3x2^2-2x2-6]] F
    """
    A1 = mat2([
        [{(3, 0): 1, (2, 0): 1, (0, 1): 1}, {(0, 2): 1}],
        [{(0, 0): -1}, {(3, 0): 1, (2, 0): 1, (0, 1): -1}],
    ])
    A2 = mat2([
        [{(0, 2): 1, (0, 1): -2, (0, 0): -6}, {(0, 3): 1}],
        [{(0, 1): -2}, {(0, 2): -3, (0, 1): -2, (0, 0): -6}],
    ])
    return PfaffianSystem(["x1", "x2"], [3, 2], [A1, A2], QQ)


def shifted_system():
    """The same system after removing both exponential parts; ranks (3,1).

    x1^4 dF/dx1 = [[x1^3+x2, x2^2], [-1, x1^3-x2]] F
    x2^2 dF/dx2 = [[x2, x2^2], [-2, -3x2]] F
    """
    A1 = mat2([
        [{(3, 0): 1, (0, 1): 1}, {(0, 2): 1}],
        [{(0, 0): -1}, {(3, 0): 1, (0, 1): -1}],
    ])
    A2 = mat2([
        [{(0, 1): 1}, {(0, 2): 1}],
        [{(0, 0): -2}, {(0, 1): -3}],
    ])
    return PfaffianSystem(["x1", "x2"], [3, 1], [A1, A2], QQ)


def poly3(termmap):
    return Series(3, {e: QQ.scalar(c) for e, c in termmap.items()}, QQ)


def mat3(grid):
    rows = [[poly3(cell) if isinstance(cell, dict) else poly3({(0, 0, 0): cell})
             for cell in row] for row in grid]
    return SeriesMatrix(rows, 3, QQ)


def triple_system():
    """2x2 system in three variables, ranks (1,2,0), one regular direction.

    x1^2 dF/dx1 = [[(x1x2x3+1)(x1-1), x3(x1-1)],
                   [x1x2(1-2x1+x1x2x3-x1^2x2x3), x1x2x3(1-x1)]] F
    x2^3 dF/dx2 = [[(2+3x2)(x1x2x3+1), x3(2+3x2)],
                   [-x1x2(3x1x2^2x3+2x1x2x3+x2^2+3x2+2), -x1x2x3(2+3x2)]] F
    x3   dF/dx3 = [[1, 0], [-x1x2, 0]] F
    """
    A1 = mat3([
        [{(2, 1, 1): 1, (1, 1, 1): -1, (1, 0, 0): 1, (0, 0, 0): -1},
         {(1, 0, 1): 1, (0, 0, 1): -1}],
        [{(1, 1, 0): 1, (2, 1, 0): -2, (2, 2, 1): 1, (3, 2, 1): -1},
         {(1, 1, 1): 1, (2, 1, 1): -1}],
    ])
    A2 = mat3([
        [{(1, 1, 1): 2, (0, 0, 0): 2, (1, 2, 1): 3, (0, 1, 0): 3},
         {(0, 0, 1): 2, (0, 1, 1): 3}],
        [{(2, 3, 1): -3, (2, 2, 1): -2, (1, 3, 0): -1, (1, 2, 0): -3, (1, 1, 0): -2},
         {(1, 1, 1): -2, (1, 2, 1): -3}],
    ])
    A3 = mat3([
        [1, 0],
        [{(1, 1, 0): -1}, 0],
    ])
    return PfaffianSystem(["x1", "x2", "x3"], [1, 2, 0], [A1, A2, A3], QQ)
