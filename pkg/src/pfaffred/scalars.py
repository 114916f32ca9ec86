"""Exact scalars: rationals and one optional quadratic extension.

Every scalar lives in a `FieldTower`, which is either plain Q or
Q(alpha) for a monic irreducible quadratic minimal polynomial.  Scalars
store their coordinate vector with respect to the basis (1, alpha, ...).
Rationals embed canonically into any tower, so mixed arithmetic with
ints/Fractions is allowed; mixing two distinct nontrivial towers is not.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import FieldExtensionError

Rational = Fraction


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"not a rational value: {x!r}")


def fraction_sqrt(q: Fraction):
    """Exact square root of a rational, or None."""
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def ceil_fraction(q) -> int:
    q = _as_fraction(q)
    return -((-q.numerator) // q.denominator)


class MinimalPolynomial:
    """Monic univariate polynomial over Q, stored low to high degree."""

    def __init__(self, coeffs):
        coeffs = tuple(_as_fraction(c) for c in coeffs)
        if len(coeffs) < 2 or coeffs[-1] != 1:
            raise FieldExtensionError("minimal polynomial must be monic of degree >= 1")
        self.coeffs = coeffs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_irreducible_quadratic(self) -> bool:
        if self.degree != 2:
            return False
        c0, c1, _ = self.coeffs
        return fraction_sqrt(c1 * c1 - 4 * c0) is None

    def __eq__(self, other):
        return isinstance(other, MinimalPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"MinimalPolynomial({list(self.coeffs)})"


class FieldTower:
    """Shared extension context.  Degree 1 means plain Q."""

    def __init__(self, minpoly: MinimalPolynomial | None = None, max_degree: int = 2):
        if minpoly is not None:
            if minpoly.degree > max_degree:
                raise FieldExtensionError("unsupported field tower: degree above cap")
            if minpoly.degree != 2 or not minpoly.is_irreducible_quadratic():
                raise FieldExtensionError(
                    "unsupported field tower: only irreducible quadratics may be adjoined"
                )
        self.minpoly = minpoly
        self.max_degree = max_degree

    @property
    def degree(self) -> int:
        return 1 if self.minpoly is None else self.minpoly.degree

    def adjoin(self, minpoly) -> "FieldTower":
        if not isinstance(minpoly, MinimalPolynomial):
            minpoly = MinimalPolynomial(minpoly)
        if self.minpoly is not None:
            raise FieldExtensionError("unsupported field tower: already extended")
        return FieldTower(minpoly, self.max_degree)

    def scalar(self, value) -> "Scalar":
        if isinstance(value, Scalar):
            return self.embed(value)
        v = _as_fraction(value)
        return Scalar((v,) + (Fraction(0),) * (self.degree - 1), self)

    def from_coeffs(self, coeffs) -> "Scalar":
        coeffs = tuple(_as_fraction(c) for c in coeffs)
        if len(coeffs) != self.degree:
            raise FieldExtensionError("coordinate vector has wrong length for tower")
        return Scalar(coeffs, self)

    def zero(self) -> "Scalar":
        return self.scalar(0)

    def one(self) -> "Scalar":
        return self.scalar(1)

    def generator(self) -> "Scalar":
        if self.degree == 1:
            raise FieldExtensionError("plain Q has no generator")
        return Scalar((Fraction(0), Fraction(1)), self)

    def embed(self, s: "Scalar") -> "Scalar":
        if s.tower is self or s.tower.minpoly == self.minpoly:
            return Scalar(s.coeffs, self)
        if s.tower.degree == 1:
            return self.scalar(s.coeffs[0])
        if self.degree == 1 and s.is_rational():
            return self.scalar(s.coeffs[0])
        raise FieldExtensionError("mismatched extension contexts")

    def __eq__(self, other):
        return isinstance(other, FieldTower) and self.minpoly == other.minpoly

    def __hash__(self):
        return hash(self.minpoly)

    def __repr__(self):
        return "FieldTower(Q)" if self.minpoly is None else f"FieldTower(Q[a]/{self.minpoly!r})"


QQ = FieldTower()


def common_tower(a: FieldTower, b: FieldTower) -> FieldTower:
    if a == b:
        return a
    if a.degree == 1:
        return b
    if b.degree == 1:
        return a
    raise FieldExtensionError("mismatched extension contexts")


class Scalar:
    """Element of the tower's field, coordinates over (1, alpha)."""

    __slots__ = ("coeffs", "tower")

    def __init__(self, coeffs, tower: FieldTower):
        self.coeffs = coeffs
        self.tower = tower

    def _coerce(self, other):
        if isinstance(other, Scalar):
            t = common_tower(self.tower, other.tower)
            return t.embed(self), t.embed(other)
        if isinstance(other, (int, Fraction)):
            return self, self.tower.scalar(other)
        return None

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise FieldExtensionError("scalar is not rational")
        return self.coeffs[0]

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Scalar(tuple(x + y for x, y in zip(a.coeffs, b.coeffs)), a.tower)

    __radd__ = __add__

    def __neg__(self):
        return Scalar(tuple(-x for x in self.coeffs), self.tower)

    def __sub__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Scalar(tuple(x - y for x, y in zip(a.coeffs, b.coeffs)), a.tower)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        t = a.tower
        if t.degree == 1:
            return Scalar((a.coeffs[0] * b.coeffs[0],), t)
        # quadratic: alpha^2 = -m1*alpha - m0
        m0, m1, _ = t.minpoly.coeffs
        a0, a1 = a.coeffs
        b0, b1 = b.coeffs
        hi = a1 * b1
        return Scalar((a0 * b0 - hi * m0, a0 * b1 + a1 * b0 - hi * m1), t)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.is_zero():
            raise ZeroDivisionError("scalar inverse of zero")
        t = self.tower
        if t.degree == 1:
            return Scalar((1 / self.coeffs[0],), t)
        m0, m1, _ = t.minpoly.coeffs
        a0, a1 = self.coeffs
        # conjugate of a0 + a1*alpha is (a0 - a1*m1) - a1*alpha; norm is rational
        norm = a0 * a0 - a0 * a1 * m1 + a1 * a1 * m0
        return Scalar(((a0 - a1 * m1) / norm, -a1 / norm), t)

    def __truediv__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return a * b.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def conjugate(self) -> "Scalar":
        t = self.tower
        if t.degree == 1:
            return self
        m1 = t.minpoly.coeffs[1]
        a0, a1 = self.coeffs
        return Scalar((a0 - a1 * m1, -a1), t)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        if isinstance(other, Scalar):
            try:
                a, b = self._coerce(other)
            except FieldExtensionError:
                return False
            return a.coeffs == b.coeffs
        return NotImplemented

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash(self.coeffs)

    def sort_key(self):
        """Total order used for canonical eigenvalue ordering."""
        if self.is_rational():
            return (0, self.coeffs[0], Fraction(0))
        a0, a1 = self.coeffs
        return (1, -a1, a0)

    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        if self.is_rational():
            return str(self.coeffs[0])
        a0, a1 = self.coeffs
        parts = []
        if a0 != 0:
            parts.append(str(a0))
        if a1 != 0:
            parts.append(f"{a1}*a" if a1 != 1 else "a")
        return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# univariate polynomials over Scalar, low-to-high coefficient lists


def poly_trim(p):
    while p and p[-1].is_zero():
        p = p[:-1]
    return list(p)


def poly_degree(p) -> int:
    return len(p) - 1


def poly_add(p, q):
    if not p and not q:
        return []
    n = max(len(p), len(q))
    t = p[0].tower if p else q[0].tower
    out = []
    for k in range(n):
        a = p[k] if k < len(p) else t.zero()
        b = q[k] if k < len(q) else t.zero()
        out.append(a + b)
    return poly_trim(out)

def poly_scale(p, c):
    return poly_trim([x * c for x in p])


def poly_mul(p, q):
    if not p or not q:
        return []
    t = p[0].tower
    out = [t.zero()] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a.is_zero():
            continue
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return poly_trim(out)


def poly_eval(p, x: Scalar) -> Scalar:
    acc = x.tower.zero()
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_divmod(p, q):
    """Exact division over the field; q must be nonzero."""
    q = poly_trim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    p = poly_trim(p)
    t = q[-1].tower
    inv_lead = q[-1].inverse()
    quot = [t.zero()] * max(0, len(p) - len(q) + 1)
    rem = list(p)
    while len(rem) >= len(q) and rem:
        c = rem[-1] * inv_lead
        k = len(rem) - len(q)
        quot[k] = c
        for j, b in enumerate(q):
            rem[k + j] = rem[k + j] - c * b
        rem = poly_trim(rem)
    return poly_trim(quot), rem


def poly_deriv(p):
    return poly_trim([c * k for k, c in enumerate(p)][1:])


def poly_monic(p):
    p = poly_trim(p)
    if not p:
        return p
    return poly_scale(p, p[-1].inverse())


def poly_gcd(p, q):
    p, q = poly_trim(p), poly_trim(q)
    while q:
        _, r = poly_divmod(p, q)
        p, q = q, r
    return poly_monic(p)


def squarefree_part(p):
    d = poly_deriv(p)
    if not d:
        return poly_monic(p)
    g = poly_gcd(p, d)
    if poly_degree(g) == 0:
        return poly_monic(p)
    quot, rem = poly_divmod(p, g)
    assert not rem
    return poly_monic(quot)


def _divisors(n: int):
    n = abs(n)
    small, large = [], []
    k = 1
    while k * k <= n:
        if n % k == 0:
            small.append(k)
            if k != n // k:
                large.append(n // k)
        k += 1
    return small + large[::-1]


def _rational_root_candidates(p):
    """Candidate rational roots of a Q-coefficient polynomial."""
    fracs = [c.to_fraction() for c in p]
    lcm = 1
    for f in fracs:
        lcm = lcm * f.denominator // math.gcd(lcm, f.denominator)
    ints = [int(f * lcm) for f in fracs]
    while ints and ints[0] == 0:
        ints = ints[1:]
    if not ints:
        return []
    a0, an = ints[0], ints[-1]
    cands = {Fraction(0)}
    for r in _divisors(a0):
        for s in _divisors(an):
            cands.add(Fraction(r, s))
            cands.add(Fraction(-r, s))
    return sorted(cands)


def _deflate_root(p, root: Scalar):
    """Divide out (x - root) as often as it is a root; returns (p, mult)."""
    mult = 0
    t = root.tower
    lin = [-root, t.one()]
    while p and poly_eval(p, root).is_zero() and poly_degree(p) >= 1:
        p, rem = poly_divmod(p, lin)
        assert not rem
        mult += 1
    return p, mult


def _sqrt_in_tower(D: Scalar):
    """Square root of D inside its (quadratic) tower, or None."""
    t = D.tower
    if t.degree == 1:
        r = fraction_sqrt(D.coeffs[0])
        return None if r is None else t.scalar(r)
    m0, m1, _ = t.minpoly.coeffs
    D0, D1 = D.coeffs
    # (a + b*alpha)^2 = (a^2 - b^2*m0) + (2ab - b^2*m1) alpha
    if D1 == 0:
        r = fraction_sqrt(D0)
        if r is not None:
            return t.scalar(r)
    # b != 0: substitute a = (D1 + b^2*m1)/(2b); let s = b^2:
    # s^2*(m1^2 - 4*m0) + s*(2*D1*m1 - 4*D0) + D1^2 = 0
    A = m1 * m1 - 4 * m0
    B = 2 * D1 * m1 - 4 * D0
    C = D1 * D1
    disc = B * B - 4 * A * C
    rd = fraction_sqrt(disc)
    if rd is None:
        return None
    for s in ((-B + rd) / (2 * A), (-B - rd) / (2 * A)):
        if s <= 0:
            continue
        b = fraction_sqrt(s)
        if b is None:
            continue
        a = (D1 + s * m1) / (2 * b)
        cand = t.from_coeffs((a, b))
        if cand * cand == D:
            return cand
    return None


def roots_of_charpoly(p, max_ext_degree: int = 2):
    """All roots of a monic polynomial over the current tower.

    Returns (roots, tower) where roots is a list of (Scalar, multiplicity)
    in canonical order and tower is the (possibly extended) field.  Raises
    FieldExtensionError when the splitting field is out of policy.
    """
    p = poly_trim(p)
    if not p:
        raise ValueError("zero polynomial has no well-defined roots")
    tower = p[0].tower
    p = poly_monic(p)
    total = poly_degree(p)
    roots: list[tuple[Scalar, int]] = []

    def extract_known_roots(p):
        found = []
        work = p
        progress = True
        while progress and poly_degree(work) >= 1:
            progress = False
            if all(c.is_rational() for c in work):
                cands = _rational_root_candidates(work)
            else:
                conj = [c.conjugate() for c in work]
                norm = poly_mul(work, conj)
                cands = _rational_root_candidates(norm)
            for cand in cands:
                r = work[0].tower.scalar(cand)
                if poly_eval(work, r).is_zero():
                    work, m = _deflate_root(work, r)
                    found.append((r, m))
                    progress = True
                    break
        return work, found

    p, found = extract_known_roots(p)
    roots.extend(found)

    while poly_degree(p) >= 1:
        s = squarefree_part(p)
        if poly_degree(s) == 1:
            r = -s[0]
            p, m = _deflate_root(p, r)
            roots.append((r, m))
            continue
        if poly_degree(s) >= 3:
            raise FieldExtensionError("eigenvalue field unsupported")
        # irreducible-over-the-tower quadratic remainder
        c0, c1, _ = poly_monic(s)
        D = c1 * c1 - 4 * c0
        if tower.degree == 1:
            mp = MinimalPolynomial([c0.to_fraction(), c1.to_fraction(), 1])
            if max_ext_degree < 2:
                raise FieldExtensionError("eigenvalue field unsupported")
            tower = tower.adjoin(mp)
            p = [tower.embed(c) for c in p]
            alpha = tower.generator()
            r1, r2 = alpha, -tower.embed(c1) - alpha
        else:
            rd = _sqrt_in_tower(D)
            if rd is None:
                raise FieldExtensionError("eigenvalue field unsupported")
            two = tower.scalar(2)
            r1, r2 = (-c1 + rd) / two, (-c1 - rd) / two
        for r in (r1, r2):
            p, m = _deflate_root(p, r)
            if m == 0:
                raise FieldExtensionError("eigenvalue field unsupported")
            roots.append((r, m))

    assert sum(m for _, m in roots) == total
    roots.sort(key=lambda rm: rm[0].sort_key())
    return roots, tower
