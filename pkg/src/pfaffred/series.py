"""Sparse truncated multivariate (Laurent) series over exact scalars.

A Series stores a dict mapping exponent tuples to nonzero scalars plus a
per-variable validity window [lo_i, hi_i).  Coefficients of monomials
with every exponent below hi are exactly as stored; lo_i is a hard
support floor (no terms exist below it, which is what makes elements of
the monomial localization representable).  A series known exactly (a
polynomial, closed under all arithmetic performed on it) carries an
infinite window; a series that merely prints as zero while hi is finite
is a truncation-limited zero, not a proven one.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import DimensionError, NotUnitError, TruncationInsufficient
from .scalars import FieldTower, Scalar

INF = math.inf

Monomial = tuple


def _norm_window(nvars, lo, hi):
    if lo is None:
        lo = (0,) * nvars
    if hi is None:
        hi = (INF,) * nvars
    lo, hi = tuple(lo), tuple(hi)
    if len(lo) != nvars or len(hi) != nvars:
        raise DimensionError("window length does not match variable count")
    return lo, hi


def grlex_key(exp):
    # graded, then x1-major within a grade
    return (sum(exp), tuple(-e for e in exp))


class Series:
    __slots__ = ("nvars", "terms", "lo", "hi", "tower")

    def __init__(self, nvars: int, terms: dict, tower: FieldTower, lo=None, hi=None):
        self.nvars = nvars
        self.tower = tower
        self.lo, self.hi = _norm_window(nvars, lo, hi)
        clean = {}
        for exp, c in terms.items():
            if c.is_zero():
                continue
            if any(e < l for e, l in zip(exp, self.lo)):
                raise DimensionError("term below the support floor")
            if any(e >= h for e, h in zip(exp, self.hi)):
                continue  # do not store terms in the unknown region
            clean[tuple(exp)] = c
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, nvars, tower, lo=None, hi=None):
        return cls(nvars, {}, tower, lo, hi)

    @classmethod
    def constant(cls, nvars, value, tower):
        c = tower.scalar(value)
        return cls(nvars, {(0,) * nvars: c}, tower)

    @classmethod
    def monomial(cls, nvars, exp, value, tower):
        c = tower.scalar(value)
        lo = tuple(min(0, e) for e in exp)
        return cls(nvars, {tuple(exp): c}, tower, lo=lo)

    @classmethod
    def variable(cls, nvars, i, tower):
        exp = tuple(1 if j == i else 0 for j in range(nvars))
        return cls(nvars, {exp: tower.one()}, tower)

    # -- basic predicates --------------------------------------------------

    @property
    def exact(self) -> bool:
        return all(h == INF for h in self.hi)

    def is_zero(self) -> bool:
        """Zero within the window.  Combine with .exact for a proof."""
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in exp) for exp in self.terms)

    def constant_term(self) -> Scalar:
        if any(h <= 0 for h in self.hi):
            raise TruncationInsufficient("constant term outside validity window")
        return self.terms.get((0,) * self.nvars, self.tower.zero())

    def coefficient(self, exp) -> Scalar:
        exp = tuple(exp)
        if any(e >= h for e, h in zip(exp, self.hi)):
            raise TruncationInsufficient("coefficient beyond truncation")
        return self.terms.get(exp, self.tower.zero())

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    def support_min(self):
        """Componentwise minimum exponent of the support (None when zero)."""
        if not self.terms:
            return None
        cols = zip(*self.terms.keys())
        return tuple(min(c) for c in cols)

    def effective_floor(self):
        """Best provable support floor: the actual one for exact series."""
        if self.exact and self.terms:
            return self.support_min()
        return self.lo

    def valuation(self, i: int):
        """(valuation in x_i, truncation_limited).  inf for windowed zero."""
        if not self.terms:
            return INF, not self.exact
        return min(e[i] for e in self.terms), False

    def total_valuation(self):
        if not self.terms:
            return INF
        return min(sum(e) for e in self.terms)

    # -- window helpers ----------------------------------------------------

    def with_window(self, lo=None, hi=None):
        lo = self.lo if lo is None else tuple(lo)
        hi = self.hi if hi is None else tuple(hi)
        return Series(self.nvars, self.terms, self.tower, lo, hi)

    def clipped(self, hi):
        """Explicitly forget terms at or above hi."""
        hi = tuple(min(a, b) for a, b in zip(self.hi, hi))
        return Series(self.nvars, self.terms, self.tower, self.lo, hi)

    def _check_compat(self, other):
        if self.nvars != other.nvars:
            raise DimensionError("variable counts differ")

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            other = Series.constant(self.nvars, other, self.tower)
        if not isinstance(other, Series):
            return NotImplemented
        self._check_compat(other)
        lo = tuple(min(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        terms = dict(self.terms)
        for exp, c in other.terms.items():
            s = terms.get(exp)
            terms[exp] = c if s is None else s + c
        return Series(self.nvars, terms, common_tower_of(self, other), lo, hi)

    __radd__ = __add__

    def __neg__(self):
        return Series(self.nvars, {e: -c for e, c in self.terms.items()},
                      self.tower, self.lo, self.hi)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            other = Series.constant(self.nvars, other, self.tower)
        if not isinstance(other, Series):
            return NotImplemented
        return self.__add__(-other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Scalar)):
            c = self.tower.scalar(other)
            if c.is_zero():
                return Series.zero(self.nvars, self.tower, self.lo, self.hi)
            return Series(self.nvars, {e: v * c for e, v in self.terms.items()},
                          self.tower, self.lo, self.hi)
        if not isinstance(other, Series):
            return NotImplemented
        self._check_compat(other)
        fla, flb = self.effective_floor(), other.effective_floor()
        lo = tuple(a + b for a, b in zip(fla, flb))
        hi = tuple(min(ha + lb, hb + la)
                   for ha, hb, la, lb in zip(self.hi, other.hi, fla, flb))
        tower = common_tower_of(self, other)
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                if any(e >= h for e, h in zip(exp, hi)):
                    continue
                prod = c1 * c2
                s = terms.get(exp)
                terms[exp] = prod if s is None else s + prod
        return Series(self.nvars, terms, tower, lo, hi)

    __rmul__ = __mul__

    def mul_monomial(self, exp, coeff=1):
        """Multiply by coeff * x^exp (exp may be negative); shifts the window."""
        exp = tuple(exp)
        c = self.tower.scalar(coeff)
        lo = tuple(l + e for l, e in zip(self.lo, exp))
        hi = tuple(h + e for h, e in zip(self.hi, exp))
        terms = {tuple(a + b for a, b in zip(t, exp)): v * c
                 for t, v in self.terms.items()}
        return Series(self.nvars, terms, self.tower, lo, hi)

    def partial_derivative(self, i: int):
        terms = {}
        for exp, c in self.terms.items():
            if exp[i] == 0:
                continue
            ne = exp[:i] + (exp[i] - 1,) + exp[i + 1:]
            terms[ne] = c * exp[i]
        lo = self.lo[:i] + (self.lo[i] - 1 if self.lo[i] != -INF else -INF,) + self.lo[i + 1:]
        hi = self.hi[:i] + (self.hi[i] - 1 if self.hi[i] != INF else INF,) + self.hi[i + 1:]
        return Series(self.nvars, terms, self.tower, lo, hi)

    def restrict(self, zero_vars):
        """Set the listed variables to 0."""
        zero_vars = set(zero_vars)
        for i in zero_vars:
            if self.hi[i] <= 0:
                raise TruncationInsufficient("restriction outside validity window")
            if self.lo[i] < 0 and any(e[i] < 0 for e in self.terms):
                raise NotUnitError("restricting a pole to the origin")
        terms = {e: c for e, c in self.terms.items()
                 if all(e[i] == 0 for i in zero_vars)}
        lo = tuple(0 if i in zero_vars else l for i, l in enumerate(self.lo))
        hi = tuple(INF if i in zero_vars else h for i, h in enumerate(self.hi))
        return Series(self.nvars, terms, self.tower, lo, hi)

    def coeff_in_xi(self, i: int, k: int):
        """The x_i^k coefficient, as a series in the remaining variables."""
        if k >= self.hi[i]:
            raise TruncationInsufficient("coefficient beyond truncation")
        terms = {e[:i] + (0,) + e[i + 1:]: c
                 for e, c in self.terms.items() if e[i] == k}
        lo = tuple(0 if j == i else l for j, l in enumerate(self.lo))
        hi = tuple(INF if j == i else h for j, h in enumerate(self.hi))
        return Series(self.nvars, terms, self.tower, lo, hi)

    def ramify(self, i: int, m: int):
        """Substitute x_i -> t^m (exponent scaling in slot i)."""
        if m < 1:
            raise ValueError("ramification index must be positive")
        if m == 1:
            return self
        terms = {e[:i] + (e[i] * m,) + e[i + 1:]: c for e, c in self.terms.items()}
        scale = lambda v: v * m if v not in (INF, -INF) else v
        lo = self.lo[:i] + (scale(self.lo[i]),) + self.lo[i + 1:]
        hi = self.hi[:i] + (scale(self.hi[i]),) + self.hi[i + 1:]
        return Series(self.nvars, terms, self.tower, lo, hi)

    def project_to_var(self, i: int):
        """Restrict all other variables to 0 and reindex to one variable."""
        r = self.restrict([j for j in range(self.nvars) if j != i])
        terms = {(e[i],): c for e, c in r.terms.items()}
        return Series(1, terms, self.tower, (r.lo[i],), (r.hi[i],))

    def embed_vars(self, nvars: int, slot: int):
        """View a univariate series inside an nvars-variable ring."""
        if self.nvars != 1:
            raise DimensionError("embed_vars expects a univariate series")
        mk = lambda e: tuple(e if j == slot else 0 for j in range(nvars))
        terms = {mk(e[0]): c for e, c in self.terms.items()}
        lo = tuple(self.lo[0] if j == slot else 0 for j in range(nvars))
        hi = tuple(self.hi[0] if j == slot else INF for j in range(nvars))
        return Series(nvars, terms, self.tower, lo, hi)

    def lift_tower(self, tower: FieldTower):
        return Series(self.nvars, {e: tower.embed(c) for e, c in self.terms.items()},
                      tower, self.lo, self.hi)

    def invert_unit(self, hi=None):
        """Multiplicative inverse of a unit (nonzero constant term)."""
        c0 = self.constant_term()
        if c0.is_zero():
            raise NotUnitError("series has zero constant term")
        if self.is_constant():
            inv = Series.constant(self.nvars, 1, self.tower) * c0.inverse()
            return inv if hi is None else inv.clipped(hi)
        if hi is None:
            hi = self.hi
        hi = tuple(min(a, b) for a, b in zip(self.hi, hi))
        if any(h == INF for h in hi):
            raise TruncationInsufficient(
                "inverse of a non-constant unit needs a finite target window")
        inv0 = c0.inverse()
        rest = [(e, c) for e, c in self.terms.items() if any(x != 0 for x in e)]
        out = {(0,) * self.nvars: inv0}
        max_total = sum(h - 1 for h in hi)
        # graded recursion: b_g = -c0^{-1} * sum_{0<k<=g} a_k b_{g-k}
        by_grade: dict[int, dict] = {0: dict(out)}
        for g in range(1, max_total + 1):
            level: dict = {}
            for e1, c1 in rest:
                g1 = sum(e1)
                if g1 > g:
                    continue
                prev = by_grade.get(g - g1)
                if not prev:
                    continue
                for e2, c2 in prev.items():
                    exp = tuple(a + b for a, b in zip(e1, e2))
                    if any(x >= h for x, h in zip(exp, hi)):
                        continue
                    prod = c1 * c2
                    s = level.get(exp)
                    level[exp] = prod if s is None else s + prod
            level = {e: -(inv0 * c) for e, c in level.items() if not c.is_zero()}
            if level:
                by_grade[g] = level
                out.update(level)
        return Series(self.nvars, out, self.tower, (0,) * self.nvars, hi)

    # -- comparisons -------------------------------------------------------

    def agrees(self, other) -> bool:
        """Equality of stored content on the common validity window."""
        if isinstance(other, (int, Fraction, Scalar)):
            other = Series.constant(self.nvars, other, self.tower)
        self._check_compat(other)
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        inside = lambda e: all(x < h for x, h in zip(e, hi))
        for e, c in self.terms.items():
            if inside(e) and other.terms.get(e, c - c) != c:
                return False
        for e, c in other.terms.items():
            if inside(e) and self.terms.get(e, c - c) != c:
                return False
        return True

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Scalar, Series)):
            return self.agrees(other)
        return NotImplemented

    __hash__ = None  # window-relative equality is not hash-compatible

    # -- io ----------------------------------------------------------------

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exp, c in self.sorted_terms():
            mono = "*".join(
                f"x{i + 1}" + (f"^{e}" if e != 1 else "")
                for i, e in enumerate(exp) if e != 0)
            cs = str(c)
            if mono:
                if cs == "1":
                    parts.append(mono)
                elif cs == "-1":
                    parts.append(f"-{mono}")
                else:
                    cs = f"({cs})" if "+" in cs or " " in cs else cs
                    parts.append(f"{cs}*{mono}")
            else:
                parts.append(f"({cs})" if " " in cs else cs)
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"Series({self})"


def common_tower_of(a: Series, b: Series) -> FieldTower:
    from .scalars import common_tower
    return common_tower(a.tower, b.tower)


def divide_exact(a: Series, b: Series):
    """q with q*b = a, by graded elimination against b's least term.

    Returns None when no such quotient exists within the window (a
    monomial of the running remainder is not divisible by b's least
    term, or the remainder fails to vanish).  Exact inputs give an exact
    quotient; otherwise the quotient window is shifted by b's valuation.
    """
    if a.is_zero():
        lo = tuple(x - y for x, y in zip(a.lo, b.lo))
        hi = tuple((h - v if h != INF else INF)
                   for h, v in zip(a.hi, b.support_min() or b.lo))
        return Series.zero(a.nvars, a.tower, lo, hi)
    if b.is_zero():
        return None
    b_sorted = b.sorted_terms()
    lead_exp, lead_c = b_sorted[0]
    lead_inv = lead_c.inverse()
    hi = tuple((INF if min(ha, hb) == INF else min(ha, hb) - l)
               for ha, hb, l in zip(a.hi, b.hi, lead_exp))
    # for exact inputs the top graded parts multiply, bounding the quotient
    dmax = INF
    if a.exact and b.exact:
        dmax = max(sum(e) for e in a.terms) - max(sum(e) for e in b.terms)
    rem = dict(a.terms)
    quot: dict = {}
    guard = 0
    while rem:
        guard += 1
        if guard > 100000:
            return None
        exp = min(rem, key=grlex_key)
        c = rem.pop(exp)
        qe = tuple(x - y for x, y in zip(exp, lead_exp))
        if sum(qe) > dmax:
            return None
        if any(q >= h for q, h in zip(qe, hi)):
            continue  # beyond quotient knowledge; remainder tail is unknowable
        qc = c * lead_inv
        quot[qe] = qc
        for be, bc in b_sorted[1:]:
            te = tuple(x + y for x, y in zip(qe, be))
            if any(t >= h for t, h in zip(te, a.hi)):
                continue
            s = rem.get(te, a.tower.zero()) - qc * bc
            if s.is_zero():
                rem.pop(te, None)
            else:
                rem[te] = s
    if quot:
        support = tuple(min(c) for c in zip(*quot.keys()))
        lo = tuple(min(s, la - l) for s, la, l in zip(support, a.lo, lead_exp))
    else:
        lo = tuple(la - l for la, l in zip(a.lo, lead_exp))
    return Series(a.nvars, quot, a.tower, lo, hi)


def series_exp(g: Series, hi=None):
    """exp(g) for a series with zero constant term and no polar part."""
    if any(l < 0 for l in g.lo) or any(e < 0 for exp in g.terms for e in exp):
        raise NotUnitError("series_exp needs a nonnegative support")
    if not g.constant_term().is_zero():
        raise ValueError("series_exp expects zero constant term")
    if hi is None:
        hi = g.hi
    hi = tuple(min(a, b) for a, b in zip(g.hi, hi))
    if g.is_zero():
        return Series.constant(g.nvars, 1, g.tower).with_window(hi=hi) \
            if all(h != INF for h in hi) else Series.constant(g.nvars, 1, g.tower)
    if any(h == INF for h in hi):
        raise TruncationInsufficient("exp needs a finite target window")
    out = Series.constant(g.nvars, 1, g.tower).clipped(hi)
    gk = out
    k = 0
    max_total = sum(h - 1 for h in hi)
    fact = 1
    while True:
        k += 1
        fact *= k
        gk = (gk * g).clipped(hi)
        if gk.is_zero() or k > max_total:
            break
        out = out + gk * Fraction(1, fact)
    return out
