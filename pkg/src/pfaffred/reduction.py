"""Transformation constructors for the reduction pipeline.

The rank-reduction loop alternates three kinds of moves on one
component at a time: unimodular column reductions of the leading
coefficient (computed over the power-series ring in the remaining
variables, with basis columns certified by integral cofactors), a
unimodular reorganization Q of the reduced pencil, and diagonal
monomial shearings.  Each move is applied to the full system through
apply_gauge so weak compatibility is verified rather than assumed.

Splitting decouples a component whose constant term has at least two
distinct eigenvalues into two diagonal blocks; the off-diagonal blocks
of the coupling transformation solve Riccati-type equations grade by
grade, jointly over all components.  Eigenvalue shifting and
ramification are the remaining primitive moves of the full reduction.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .errors import (
    ColumnModuleNotFree,
    InputError,
    ReductionError,
    ResonanceError,
    RowModuleNotFree,
    TruncationInsufficient,
)
from .linalg import ConstMatrix, SeriesMatrix, generalized_eigenspaces
from .scalars import Scalar, roots_of_charpoly
from .series import INF, Series
from .system import (
    GaugeTransformation,
    PfaffianSystem,
    apply_gauge,
    normalize_poincare,
)


# ---------------------------------------------------------------------------
# integral cofactors (module membership by coefficient comparison)
# ---------------------------------------------------------------------------

def _monomials_of_grade(slots, g, nvars):
    """All exponent tuples of total degree g supported on the given slots."""
    if not slots:
        return [(0,) * nvars] if g == 0 else []
    out = []

    def rec(idx, rem, acc):
        if idx == len(slots) - 1:
            exp = [0] * nvars
            for s, v in zip(slots, acc + [rem]):
                exp[s] = v
            out.append(tuple(exp))
            return
        for v in range(rem + 1):
            rec(idx + 1, rem - v, acc + [v])

    rec(0, g, [])
    return out


def _graded_piece(s: Series, g: int):
    return {e: c for e, c in s.terms.items() if sum(e) == g}


def integral_cofactors(B: SeriesMatrix, vcol, ell: int, slots):
    """Solve B c = v for c over the series ring, degree by degree.

    B is square with det(B) != 0 over the fraction field; the defining
    identities det(B) c_i = det(B_i) pin c uniquely, and are solved by
    coefficient comparison.  Grades run far enough that a window of
    ell+1 in each free variable is honest.  Returns (cofactors, info);
    cofactors is None when some grade is inconsistent, which certifies
    that v is not an integral combination at this truncation.
    """
    tower = B.tower
    nvars = B.nvars
    D = B.determinant()
    if D.is_zero():
        if D.exact:
            raise InputError("basis determinant vanishes")
        raise TruncationInsufficient(
            "basis determinant vanishes within the window")
    k = D.total_valuation()
    depth = max(1, len(slots)) * ell
    win = min((h for h in B.window_hi()), default=INF)
    if win != INF and win <= depth + k:
        raise TruncationInsufficient(
            f"cofactor solve needs data beyond total degree {depth + k}")
    Dk = _graded_piece(D, k)
    r = B.nrows
    cof = []
    all_exact = True
    for i in range(r):
        Ri = B.with_col(i, vcol).determinant()
        c_terms: dict = {}
        residual = Ri
        inconsistent = None
        for g in range(depth + 1):
            target = _graded_piece(residual, k + g)
            unknowns = _monomials_of_grade(slots, g, nvars)
            if not unknowns:
                if target:
                    inconsistent = g
                break
            rows = sorted({tuple(a + b for a, b in zip(de, ue))
                           for de in Dk for ue in unknowns}
                          | set(target.keys()))
            row_ix = {m: j for j, m in enumerate(rows)}
            M = ConstMatrix.zeros(len(rows), len(unknowns), tower)
            for uj, ue in enumerate(unknowns):
                for de, dc in Dk.items():
                    m = tuple(a + b for a, b in zip(de, ue))
                    M.rows[row_ix[m]][uj] = M.rows[row_ix[m]][uj] + dc
            b = [target.get(m, tower.zero()) for m in rows]
            x = M.solve_vec(b)
            if x is None:
                inconsistent = g
                break
            grade_terms = {ue: xv for ue, xv in zip(unknowns, x)
                           if not xv.is_zero()}
            if grade_terms:
                c_terms.update(grade_terms)
                piece = Series(nvars, grade_terms, tower)
                residual = residual - D * piece
            if residual.is_zero() and residual.exact:
                break
        if inconsistent is not None:
            return None, {"exact": False, "checked_to": ell,
                          "inconsistent_at": inconsistent, "column": i}
        ci = Series(nvars, c_terms, tower)
        if not (D.exact and Ri.exact and (D * ci - Ri).is_zero()
                and (D * ci - Ri).exact):
            all_exact = False
            hi = tuple(ell + 1 if j in slots else INF for j in range(nvars))
            ci = ci.with_window(hi=hi)
        cof.append(ci)
    # the Cramer identities pin c over the fraction field; confirm the
    # column relation directly as far as the data allows
    for t in range(r):
        e = sum((B.rows[t][i] * cof[i] for i in range(r)),
                Series.zero(nvars, tower)) - vcol[t]
        if not e.is_zero():
            return None, {"exact": False, "checked_to": ell,
                          "inconsistent_at": e.total_valuation(), "column": t}
    return cof, {"exact": all_exact, "checked_to": ell,
                 "inconsistent_at": None}


def _rank_at_origin(M: SeriesMatrix):
    try:
        return M.constant_term().rank()
    except TruncationInsufficient:
        return -1


def _square_from_rows(cols: SeriesMatrix):
    """Pick rows making the column set square and nonsingular over K."""
    chosen = []
    rows_left = list(range(cols.nrows))
    work = {i: list(cols.rows[i]) for i in rows_left}
    for c in range(cols.ncols):
        piv = next((i for i in rows_left if not work[i][c].is_zero()), None)
        if piv is None:
            continue
        chosen.append(piv)
        rows_left.remove(piv)
        pe = work[piv][c]
        for i in rows_left:
            if not work[i][c].is_zero():
                f = work[i][c]
                work[i] = [pe * a - f * b for a, b in zip(work[i], work[piv])]
    chosen.sort()
    return cols.submatrix(chosen, range(cols.ncols)), chosen


def _basis_candidates(A0: SeriesMatrix, r: int):
    """Column subsets, residue-rank-r first, then by determinant valuation."""
    d = A0.ncols
    scored = []
    for sub in itertools.combinations(range(d), r):
        cols = A0.submatrix(range(A0.nrows), sub)
        if _rank_at_origin(cols) == r:
            scored.append((0, 0, sub))
            continue
        if cols.rank_generic() < r:
            continue
        B, _ = _square_from_rows(cols)
        scored.append((1, B.determinant().total_valuation(), sub))
    scored.sort()
    return [s[2] for s in scored]


def _module_column_basis(A0: SeriesMatrix, r: int, ell: int, slots):
    """(basis subset, {other column -> cofactors}), or raises.

    ColumnModuleNotFree when the data is exact and no subset admits
    integral cofactors for all remaining columns; TruncationInsufficient
    when the data is truncated, since the same failure could then be an
    artifact of the window.
    """
    d = A0.ncols
    nontrivial = [j for j in range(d)
                  if any(not A0.rows[t][j].is_zero() for t in range(A0.nrows))]
    for sub in _basis_candidates(A0, r):
        basis_cols = A0.submatrix(range(A0.nrows), sub)
        B, rows = _square_from_rows(basis_cols)
        ok = True
        relations = {}
        for j in nontrivial:
            if j in sub:
                continue
            cof, _info = integral_cofactors(
                B, [A0.rows[t][j] for t in rows], ell, slots)
            if cof is None:
                ok = False
                break
            resid = [sum((basis_cols.rows[t][c] * cof[c] for c in range(r)),
                         Series.zero(A0.nvars, A0.tower)) - A0.rows[t][j]
                     for t in range(A0.nrows)]
            if any(not e.is_zero() for e in resid):
                ok = False
                break
            relations[j] = cof
        if ok:
            return sub, relations
    if A0.exact:
        raise ColumnModuleNotFree("column module not free")
    raise TruncationInsufficient(
        "no column basis certified at this truncation")


# ---------------------------------------------------------------------------
# column reduction to the three-block leading form
# ---------------------------------------------------------------------------

class ColumnReduction:
    __slots__ = ("gauge", "r", "v", "A0_reduced")

    def __init__(self, gauge, r, v, A0_reduced):
        self.gauge = gauge
        self.r = r
        self.v = v
        self.A0_reduced = A0_reduced


def _basis_permutation_gauge(sub, d, nvars, tower):
    order = list(sub) + [j for j in range(d) if j not in sub]
    P = SeriesMatrix.zeros(d, d, nvars, tower)
    Pinv = SeriesMatrix.zeros(d, d, nvars, tower)
    one = Series.constant(nvars, 1, tower)
    for new, old in enumerate(order):
        P.rows[old][new] = one
        Pinv.rows[new][old] = one
    return GaugeTransformation(P, Pinv, check=False)


def _elimination_gauge(relations, sub, d, nvars, tower):
    """I with -c_{kj} at (basis k, nonbasis j), in permuted coordinates."""
    order = list(sub) + [j for j in range(d) if j not in sub]
    pos = {old: new for new, old in enumerate(order)}
    E = SeriesMatrix.identity(d, nvars, tower)
    Einv = SeriesMatrix.identity(d, nvars, tower)
    for j, cof in relations.items():
        for k_idx, k in enumerate(sub):
            if not cof[k_idx].is_zero():
                E.rows[pos[k]][pos[j]] = -cof[k_idx]
                Einv.rows[pos[k]][pos[j]] = cof[k_idx]
    return GaugeTransformation(E, Einv, check=False)


def column_reduce(A0: SeriesMatrix, i: int, ell: int) -> ColumnReduction:
    """Unimodular U with U^{-1} A0 U in the three-block leading form:
    columns r..d vanish, and columns v..r vanish in the top r rows.

    A0 must be free of x_i; U has entries in the series ring of the
    remaining variables and determinant +-1.
    """
    d = A0.ncols
    nvars, tower = A0.nvars, A0.tower
    slots = [j for j in range(nvars) if j != i]
    r = A0.rank_generic()
    if r == 0 or r == d:
        g = GaugeTransformation.identity(d, nvars, tower)
        return ColumnReduction(g, r, r, A0)
    sub, relations = _module_column_basis(A0, r, ell, slots)
    g1 = _basis_permutation_gauge(sub, d, nvars, tower)
    g1 = g1.compose(_elimination_gauge(relations, sub, d, nvars, tower))
    A0r = g1.T_inv * A0 * g1.T
    for t in range(d):
        for j in range(r, d):
            if not A0r.rows[t][j].is_zero():
                raise ReductionError("column elimination left a nonzero tail")
    B11 = A0r.submatrix(range(r), range(r))
    v = B11.rank_generic()
    if 0 < v < r:
        sub2, rel2 = _module_column_basis(B11, v, ell, slots)
        g2 = _basis_permutation_gauge(sub2, r, nvars, tower)
        g2 = g2.compose(_elimination_gauge(rel2, sub2, r, nvars, tower))
        T = SeriesMatrix.block([
            [g2.T, SeriesMatrix.zeros(r, d - r, nvars, tower)],
            [SeriesMatrix.zeros(d - r, r, nvars, tower),
             SeriesMatrix.identity(d - r, nvars, tower)]])
        Tinv = SeriesMatrix.block([
            [g2.T_inv, SeriesMatrix.zeros(r, d - r, nvars, tower)],
            [SeriesMatrix.zeros(d - r, r, nvars, tower),
             SeriesMatrix.identity(d - r, nvars, tower)]])
        g1 = g1.compose(GaugeTransformation(T, Tinv, check=False))
        A0r = Tinv * A0r * T
    for t in range(r):
        for j in range(v, r):
            if not A0r.rows[t][j].is_zero():
                raise ReductionError("reduced form violates the block pattern")
    return ColumnReduction(g1, r, v, A0r)


# ---------------------------------------------------------------------------
# the reduction pencil and its vanishing test
# ---------------------------------------------------------------------------

class MoserData:
    __slots__ = ("r", "v", "rho", "theta", "theta_zero", "theta_limited",
                 "G", "A0", "A1")

    def __init__(self, r, v, theta, theta_zero, theta_limited, G, A0, A1):
        self.r = r
        self.v = v
        self.rho = None
        self.theta = theta          # over (x, lambda); lambda is the last slot
        self.theta_zero = theta_zero
        self.theta_limited = theta_limited
        self.G = G                  # lambda lives in slot i
        self.A0 = A0
        self.A1 = A1


def _append_slot(s: Series) -> Series:
    terms = {e + (0,): c for e, c in s.terms.items()}
    return Series(s.nvars + 1, terms, s.tower, s.lo + (0,), s.hi + (INF,))


def _swap_to_last(s: Series, i: int) -> Series:
    """Move slot-i content of s into a fresh last slot."""
    ext = _append_slot(s)
    terms = {}
    for e, c in ext.terms.items():
        e2 = list(e)
        e2[-1], e2[i] = e2[i], 0
        terms[tuple(e2)] = c
    lo, hi = list(ext.lo), list(ext.hi)
    lo[-1], lo[i] = lo[i], 0
    hi[-1], hi[i] = hi[i], INF
    return Series(ext.nvars, terms, ext.tower, tuple(lo), tuple(hi))


def moser_data(S: PfaffianSystem, i: int, colred: ColumnReduction,
               certify_order: int | None = None) -> MoserData:
    """Assemble the lambda-pencil of component i and test its vanishing.

    The pencil takes its first r columns from the leading coefficient
    and the rest from the next one, with lambda added on the trailing
    diagonal.  Its determinant must equal the trace polynomial
    x_i^r det(lambda I + A_{i,0}/x_i + A_{i,1}) at x_i = 0; the identity
    is asserted outright, catching block-form corruption early.

    A determinant that vanishes only within a finite window counts as
    vanishing when the window still covers certify_order; with no budget
    given, anything short of exactness is reported truncation-limited.
    """
    d, n, tower = S.d, S.n, S.tower
    r = colred.r
    A0 = S.coeff(i, 0)
    A1 = S.coeff(i, 1)
    lam = Series.variable(n, i, tower)
    G = SeriesMatrix.zeros(d, d, n, tower)
    for t in range(d):
        for j in range(d):
            if j < r:
                G.rows[t][j] = A0.rows[t][j]
            else:
                G.rows[t][j] = A1.rows[t][j] + (lam if t == j
                                                else Series.zero(n, tower))
    detG = G.determinant()
    A0e = A0.map(_append_slot)
    A1e = A1.map(_append_slot)
    lam_e = Series.variable(n + 1, n, tower)
    shift = tuple(-1 if k == i else 0 for k in range(n + 1))
    P = SeriesMatrix.zeros(d, d, n + 1, tower)
    for t in range(d):
        for j in range(d):
            P.rows[t][j] = A0e.rows[t][j].mul_monomial(shift) + A1e.rows[t][j]
            if t == j:
                P.rows[t][j] = P.rows[t][j] + lam_e
    theta = P.determinant().mul_monomial(
        tuple(r if k == i else 0 for k in range(n + 1)))
    theta = theta.restrict([i])
    if not theta.agrees(_swap_to_last(detG, i)):
        raise ReductionError("pencil determinant disagrees with the trace "
                             "polynomial; block form is corrupt")
    zero = theta.is_zero()
    limited = zero and not theta.exact
    if limited and certify_order is not None:
        limited = any(h != INF and h <= certify_order for h in theta.hi)
    return MoserData(r, colred.v, theta, zero, limited, G, A0, A1)


def moser_rank(S: PfaffianSystem, i: int) -> Fraction:
    """p_i + rank(A_{i,0})/d, floored at zero."""
    m = Fraction(S.p[i]) + Fraction(S.coeff(i, 0).rank_generic(), S.d)
    return m if m > 0 else Fraction(0)


# ---------------------------------------------------------------------------
# the unimodular pencil reorganization Q
# ---------------------------------------------------------------------------

def _hstack(parts):
    parts = [p for p in parts if p is not None and p.ncols > 0]
    if not parts:
        return None
    if len(parts) == 1:
        return parts[0]
    return SeriesMatrix.block([parts])


def build_Q(S: PfaffianSystem, i: int, md: MoserData, order: int = 10):
    """Unimodular Q = Diag(I_r, Q33) reorganizing the vanished pencil.

    Q33 eliminates the rows of the lower 32-block that are integral
    combinations of the others and moves them to the bottom rho
    coordinates, taking the largest rho for which both rank conditions
    of the sheared pencil hold.  With an empty core (v = 0) the reduced
    form needs no reorganization at all and rho = 0.  Raises
    RowModuleNotFree when the row module admits no basis, and
    ReductionError when every arrangement fails the rank conditions.
    """
    d, n, tower = S.d, S.n, S.tower
    r, v = md.r, md.v
    if S.p[i] < 1 or r < 1 or r >= d:
        raise InputError("pencil reorganization needs p >= 1 and 0 < r < d")
    if v == r:
        raise ReductionError("vanishing pencil with an invertible core")
    A0, A1 = md.A0, md.A1
    m = d - r
    if v == 0:
        md2 = MoserData(r, v, md.theta, md.theta_zero, md.theta_limited,
                        md.G, A0, A1)
        md2.rho = 0
        return GaugeTransformation.identity(d, n, tower), md2
    slots = [k for k in range(n) if k != i]
    a32 = A0.submatrix(range(r, d), range(v, r))
    E = SeriesMatrix.identity(m, n, tower)
    Einv = SeriesMatrix.identity(m, n, tower)
    basis_rows = []
    rowrank = a32.rank_generic()
    if rowrank:
        try:
            sub, relations = _module_column_basis(
                a32.transpose(), rowrank, order, slots)
        except ColumnModuleNotFree as exc:
            raise RowModuleNotFree("row module not free") from exc
        basis_rows = list(sub)
        for j, cof in relations.items():
            for k_idx, k in enumerate(sub):
                if not cof[k_idx].is_zero():
                    E.rows[j][k] = -cof[k_idx]
                    Einv.rows[j][k] = cof[k_idx]
    cleared = [t for t in range(m) if t not in basis_rows]

    def candidate(bottom):
        order33 = [t for t in range(m) if t not in bottom] + list(bottom)
        perm = SeriesMatrix.zeros(m, m, n, tower)
        one = Series.constant(n, 1, tower)
        for new, old in enumerate(order33):
            perm.rows[new][old] = one
        q33i = perm * E
        q33 = Einv * perm.transpose()
        Q = SeriesMatrix.block([
            [SeriesMatrix.identity(r, n, tower),
             SeriesMatrix.zeros(r, m, n, tower)],
            [SeriesMatrix.zeros(m, r, n, tower), q33]])
        Qinv = SeriesMatrix.block([
            [SeriesMatrix.identity(r, n, tower),
             SeriesMatrix.zeros(r, m, n, tower)],
            [SeriesMatrix.zeros(m, r, n, tower), q33i]])
        return GaugeTransformation(Q, Qinv, check=False)

    for rho in range(len(cleared), -1, -1):
        for chosen in itertools.combinations(cleared, rho):
            g = candidate(list(chosen))
            A0n = g.T_inv * A0 * g.T
            A1n = g.T_inv * A1 * g.T
            if not all(A0n.rows[t][j].is_zero()
                       for t in range(d - rho, d) for j in range(v, r)):
                continue
            top = _hstack([
                A0n.submatrix(range(r), range(v)) if v else None,
                A1n.submatrix(range(r), range(r, d - rho))
                if d - rho > r else None])
            rk_top = top.rank_generic() if top is not None else 0
            if rk_top >= r:
                continue
            if rho:
                bot = _hstack([
                    A0n.submatrix(range(d - rho, d), range(v)) if v else None,
                    A1n.submatrix(range(d - rho, d), range(r, d - rho))
                    if d - rho > r else None])
                if bot is not None and top is not None:
                    both = SeriesMatrix.block([[top], [bot]])
                    if both.rank_generic() != rk_top:
                        continue
                elif bot is not None and not bot.is_zero():
                    continue
            md2 = MoserData(r, v, md.theta, md.theta_zero, md.theta_limited,
                            md.G, A0n, A1n)
            md2.rho = rho
            return g, md2
    raise ReductionError("unable to reach the sheared pencil form; "
                         "rank conditions fail for every kernel choice")


def build_shearing(i: int, r: int, rho: int, d: int, nvars, tower):
    """Diag(x_i I_r, I_{d-r-rho}, x_i I_rho)."""
    e_i = tuple(1 if k == i else 0 for k in range(nvars))
    zero = (0,) * nvars
    exps = [e_i] * r + [zero] * (d - r - rho) + [e_i] * rho
    return GaugeTransformation.diagonal_monomial(exps, nvars, tower)


# ---------------------------------------------------------------------------
# rank reduction loops
# ---------------------------------------------------------------------------

def _apply_checked(S, g, steps, kind, i):
    rep = apply_gauge(S, g)
    if not rep.weakly_compatible:
        raise ReductionError(
            f"integrability structure violated: {kind} on component {i} "
            "broke normal crossings")
    steps.append({"kind": kind, "component": i, "gauge": g,
                  "p_before": list(S.p), "p_after": list(rep.system.p)})
    return rep.system


def rank_reduce(S: PfaffianSystem, order: int = 10,
                certify_order: int | None = None):
    """Lower every Poincare rank to its minimal integer value.

    Per component: column-reduce the leading coefficient; while the
    pencil determinant vanishes and p stays positive, reorganize with Q
    and shear, renormalizing as the valuation allows.  Returns
    (gauge, system, steps).  certify_order is the window depth at which
    pencil vanishing is accepted on truncated data (default: order).
    """
    if certify_order is None:
        certify_order = order
    S, _ = normalize_poincare(S)
    total = GaugeTransformation.identity(S.d, S.n, S.tower)
    steps = []
    for i in range(S.n):
        guard = (S.p[i] + 1) * S.d + S.d
        it = 0
        while S.p[i] > 0 and not S.trivial[i]:
            it += 1
            if it > guard:
                raise ReductionError(
                    f"rank reduction did not stabilize on component {i}")
            try:
                colred = column_reduce(S.coeff(i, 0), i, order)
            except (ColumnModuleNotFree, TruncationInsufficient) as exc:
                exc.args = (f"component {i}: {exc.args[0]}",)
                raise
            if not colred.gauge.is_identity():
                S = _apply_checked(S, colred.gauge, steps, "column_reduce", i)
                total = total.compose(colred.gauge)
            if colred.r == 0:
                S, _ = normalize_poincare(S)
                steps.append({"kind": "renormalize", "component": i,
                              "gauge": None, "p_before": None,
                              "p_after": list(S.p)})
                continue
            md = moser_data(S, i, colred, certify_order)
            if md.theta_limited:
                raise TruncationInsufficient(
                    f"component {i}: pencil vanishing is truncation-limited")
            if not md.theta_zero:
                break
            gq, md = build_Q(S, i, md, order)
            if not gq.is_identity():
                S = _apply_checked(S, gq, steps, "pencil_reorganize", i)
                total = total.compose(gq)
            p_before = S.p[i]
            shear = build_shearing(i, md.r, md.rho, S.d, S.n, S.tower)
            S = _apply_checked(S, shear, steps, "shear", i)
            total = total.compose(shear)
            if (S.p[i] >= p_before
                    and S.coeff(i, 0).rank_generic() >= colred.r):
                raise ReductionError(
                    f"shearing failed to make progress on component {i}")
    return total, S, steps


def rank_reduce_alt(S: PfaffianSystem, order: int = 10):
    """Levelt-style loop: always shear the full rank block.

    The sterile-iteration counter resets whenever p drops; d-1 sterile
    rounds in a row certify that the current p is minimal.
    """
    S, _ = normalize_poincare(S)
    total = GaugeTransformation.identity(S.d, S.n, S.tower)
    steps = []
    for i in range(S.n):
        j = 0
        while j < S.d - 1 and S.p[i] > 0 and not S.trivial[i]:
            colred = column_reduce(S.coeff(i, 0), i, order)
            if not colred.gauge.is_identity():
                S = _apply_checked(S, colred.gauge, steps, "column_reduce", i)
                total = total.compose(colred.gauge)
            if colred.r == 0:
                S, _ = normalize_poincare(S)
                steps.append({"kind": "renormalize", "component": i,
                              "gauge": None, "p_before": None,
                              "p_after": list(S.p)})
                continue
            p_before = S.p[i]
            shear = build_shearing(i, colred.r, 0, S.d, S.n, S.tower)
            S = _apply_checked(S, shear, steps, "shear", i)
            total = total.compose(shear)
            j = 0 if S.p[i] < p_before else j + 1
    return total, S, steps


# ---------------------------------------------------------------------------
# splitting along an eigenvalue decomposition
# ---------------------------------------------------------------------------

def split(S: PfaffianSystem, i: int, order: int = 10):
    """Decouple component i by the eigenvalues of its constant term.

    The constant term must have at least two distinct eigenvalues; the
    first in canonical order drives the top block.  Off-diagonal
    couplings are removed grade by grade, jointly over all components,
    and certified exact when the defining equations close polynomially.
    Returns (gauge, top, bottom, whole) where top and bottom are
    standalone systems on the diagonal blocks and whole is the full
    block-diagonalized system, possibly over an extended field.
    """
    n, d = S.n, S.d
    C = S.A[i].constant_term()
    roots, tower = roots_of_charpoly(C.charpoly())
    if len(roots) < 2:
        raise InputError("constant term has a single eigenvalue; "
                         "splitting needs at least two")
    if tower is not S.tower:
        S = S.lift_tower(tower)
        C = C.lift_tower(tower)
    V, sizes = generalized_eigenspaces(C, roots)
    d1 = sizes[0]
    gV = GaugeTransformation.from_constant(V, n)
    repV = apply_gauge(S, gV)
    if not repV.weakly_compatible:
        raise ReductionError("constant conjugation broke normal crossings")
    S = repV.system
    tower = S.tower

    rs1, rs2 = list(range(d1)), list(range(d1, d))
    a = []
    for k in range(n):
        Ak = S.A[k]
        a.append((Ak.submatrix(rs1, rs1), Ak.submatrix(rs1, rs2),
                  Ak.submatrix(rs2, rs1), Ak.submatrix(rs2, rs2)))
    a11_0 = [blk[0].constant_term() for blk in a]
    a22_0 = [blk[3].constant_term() for blk in a]

    P = SeriesMatrix.zeros(d1, d - d1, n, tower)
    Q = SeriesMatrix.zeros(d - d1, d1, n, tower)

    def riccati(X, up, k):
        """a11 X + a12 - X a22 - X a21 X - x_k^{p_k+1} dX/dx_k,
        with the blocks mirrored for the lower coupling."""
        b11, b12, b21, b22 = a[k]
        if not up:
            b11, b12, b21, b22 = b22, b21, b12, b11
        ei = tuple(S.p[k] + 1 if kk == k else 0 for kk in range(n))
        return (b11 * X + b12 - X * b22 - X * b21 * X
                - X.partial_derivative(k).mul_monomial(ei))

    def stack_solve(C1, C2, shifts, rhs_list, rows, cols):
        nuk = rows * cols
        big_rows = []
        for k in range(n):
            Mk = ConstMatrix.zeros(nuk, nuk, tower)
            for rr in range(rows):
                for cc in range(cols):
                    ci = rr * cols + cc
                    for r2 in range(rows):
                        Mk.rows[r2 * cols + cc][ci] = \
                            Mk.rows[r2 * cols + cc][ci] + C1[k].rows[r2][rr]
                    for c2 in range(cols):
                        Mk.rows[rr * cols + c2][ci] = \
                            Mk.rows[rr * cols + c2][ci] - C2[k].rows[cc][c2]
                    Mk.rows[ci][ci] = Mk.rows[ci][ci] - shifts[k]
            big_rows.extend(Mk.rows)
        big = ConstMatrix(big_rows, tower)
        rhs = [x for b in rhs_list for x in b]
        sol = big.solve_vec(rhs)
        if sol is None:
            raise ResonanceError("off-diagonal elimination is inconsistent; "
                                 "integrability invariant breached")
        return sol

    # solve only inside the box the input windows can serve: every
    # monomial read below stays strictly under W in each variable, so
    # the couplings are correct on the whole box and may be clipped to it
    W = [order + 1] * n
    for blocks in a:
        for M in blocks:
            wh = M.window_hi()
            for kk in range(n):
                if wh[kk] != INF and wh[kk] < W[kk]:
                    W[kk] = wh[kk]

    certified = False
    for g in range(1, sum(w - 1 for w in W) + 1):
        resP = [riccati(P, True, k) for k in range(n)]
        resQ = [riccati(Q, False, k) for k in range(n)]
        if all(m.is_zero() and m.exact for m in resP + resQ):
            certified = True
            break
        addP: dict = {}
        addQ: dict = {}
        for beta in _monomials_of_grade(list(range(n)), g, n):
            if any(beta[kk] >= W[kk] for kk in range(n)):
                continue
            shifts = [tower.scalar(beta[k]) if S.p[k] == 0 else tower.zero()
                      for k in range(n)]
            rhs_up = [[-resP[k].rows[rr][cc].coefficient(beta)
                       for rr in range(d1) for cc in range(d - d1)]
                      for k in range(n)]
            solP = stack_solve(a11_0, a22_0, shifts, rhs_up, d1, d - d1)
            rhs_dn = [[-resQ[k].rows[rr][cc].coefficient(beta)
                       for rr in range(d - d1) for cc in range(d1)]
                      for k in range(n)]
            solQ = stack_solve(a22_0, a11_0, shifts, rhs_dn, d - d1, d1)
            for rr in range(d1):
                for cc in range(d - d1):
                    val = solP[rr * (d - d1) + cc]
                    if not val.is_zero():
                        addP.setdefault((rr, cc), {})[beta] = val
            for rr in range(d - d1):
                for cc in range(d1):
                    val = solQ[rr * d1 + cc]
                    if not val.is_zero():
                        addQ.setdefault((rr, cc), {})[beta] = val
        if addP:
            inc = SeriesMatrix.zeros(d1, d - d1, n, tower)
            for (rr, cc), terms in addP.items():
                inc.rows[rr][cc] = Series(n, terms, tower)
            P = P + inc
        if addQ:
            inc = SeriesMatrix.zeros(d - d1, d1, n, tower)
            for (rr, cc), terms in addQ.items():
                inc.rows[rr][cc] = Series(n, terms, tower)
            Q = Q + inc
    if not certified:
        certified = all(
            m.is_zero() and m.exact
            for k in range(n)
            for m in (riccati(P, True, k), riccati(Q, False, k)))
    hi_solve = tuple(W)
    if not certified:
        P = P.clipped(hi_solve)
        Q = Q.clipped(hi_solve)
    T = SeriesMatrix.block([
        [SeriesMatrix.identity(d1, n, tower), P],
        [Q, SeriesMatrix.identity(d - d1, n, tower)]])
    gT = GaugeTransformation(T, hi=None if certified else hi_solve)
    rep = apply_gauge(S, gT)
    if not rep.weakly_compatible:
        raise ReductionError("splitting transformation broke normal crossings")
    whole = rep.system
    for k in range(n):
        if not (whole.A[k].submatrix(rs1, rs2).is_zero()
                and whole.A[k].submatrix(rs2, rs1).is_zero()):
            raise ResonanceError("off-diagonal residue after splitting")
    top = PfaffianSystem(S.vars, whole.p,
                         [whole.A[k].submatrix(rs1, rs1) for k in range(n)],
                         tower)
    bottom = PfaffianSystem(S.vars, whole.p,
                            [whole.A[k].submatrix(rs2, rs2) for k in range(n)],
                            tower)
    return gV.compose(gT), top, bottom, whole


# ---------------------------------------------------------------------------
# eigenvalue shifting and ramification
# ---------------------------------------------------------------------------

def eigen_shift(S: PfaffianSystem, i: int, gamma: Scalar):
    """Strip the scalar exponential growth gamma/x_i^{p_i}.

    A_i loses gamma I; the exponential part of component i gains the
    term -(gamma/p_i) x_i^{-p_i}, returned as (power, coefficient).
    """
    if gamma.is_zero():
        raise InputError("eigenvalue shift with gamma = 0")
    p = S.p[i]
    if p == 0:
        raise InputError("eigenvalue shift on a regular component")
    gI = SeriesMatrix.identity(S.d, S.n, S.tower) * gamma
    A = list(S.A)
    A[i] = A[i] - gI
    out = PfaffianSystem(S.vars, S.p, A, S.tower, S.trivial)
    out, _ = normalize_poincare(out)
    return (p, -gamma * Fraction(1, p)), out


def ramify_system(S: PfaffianSystem, i: int, m: int) -> PfaffianSystem:
    """Substitute x_i = t^m; component i picks up the chain-rule factor m."""
    if m < 1:
        raise InputError("ramification index must be >= 1")
    if m == 1:
        return S
    A = [M.ramify(i, m) for M in S.A]
    A[i] = A[i] * m
    p = list(S.p)
    p[i] = m * p[i]
    return PfaffianSystem(S.vars, p, A, S.tower, S.trivial)
