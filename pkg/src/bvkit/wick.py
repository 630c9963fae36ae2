"""Perturbative Gaussian BV pushforward by explicit Wick contraction.

Given an action split into an invertible quadratic form on fluctuation
generators plus an interaction, the effective action on the remaining
(residual) generators is

    S' = -i hbar log < exp((i/hbar) V) >_Gaussian,

computed as a sum over connected contraction clusters.  Symmetry factors
come from explicit enumeration of pairings of the labeled legs, never from
graph-isomorphism counting; coefficients are exact in the rational backend.

Termination is by the combined grading (residual leg count) + (loop order):
every interaction term must carry positive grading excess, which rules out
bare fluctuation tadpoles and quadratic corrections (those belong in the
quadratic part).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from . import linal
from .graded import Generator
from .scalars import HbarScalar, QQi, as_hbar, scalar_is_zero
from .superpoly import SuperPolynomial, exp_nilpotent, mono_parity

import numpy as np


class NonInvertibleQuadraticForm(ValueError):
    pass


class OrderOverflow(ValueError):
    pass


@dataclass(frozen=True)
class SplitAction:
    """quadratic: fluctuation-only degree-2 part (hbar-free coefficients);
    interaction: everything else; fluctuations: the integration variables."""

    quadratic: SuperPolynomial
    interaction: SuperPolynomial
    fluctuations: tuple

    def __post_init__(self):
        fl = set(self.fluctuations)
        if not self.quadratic.generators() <= fl:
            raise ValueError("quadratic part must involve only fluctuations")
        for m in self.quadratic.terms:
            if mono_parity(m) != 0:
                raise ValueError("quadratic part must be even")
        for m in self.interaction.terms:
            if mono_parity(m) != 0:
                raise ValueError("interaction terms must be even")


@dataclass(frozen=True)
class GaussianPrefactor:
    """Raw normalization of the free integral: the odd (Berezin) factor is an
    exact hbar monomial; the even sector is reported as (dimension, det Q)
    and left to the caller's measure convention."""

    odd_value: HbarScalar
    even_dim: int
    even_det: object


@dataclass(frozen=True)
class PushforwardResult:
    effective: SuperPolynomial
    prefactor: GaussianPrefactor


def berezin_top_coefficient(p: SuperPolynomial, odd_gens) -> HbarScalar:
    """Coefficient of the full sorted product of odd_gens (engine convention)."""
    odds = tuple(sorted(odd_gens, key=lambda g: g.name))
    return p.coefficient(((), odds))


def _covariance(action: SplitAction):
    """C_{ab} = i hbar (Q^{-1})_{ab} with Q_ab = (-1)^{|a||b|} d_a d_b S2."""
    gens = action.fluctuations
    n = len(gens)
    exact = True
    Q = [[None] * n for _ in range(n)]
    for i, a in enumerate(gens):
        for j, b in enumerate(gens):
            c = action.quadratic.derive(b).derive(a).constant_term().coeff(0)
            if isinstance(c, complex):
                exact = False
            if a.parity and b.parity:
                c = -c
            Q[i][j] = c
    evens = [i for i, g in enumerate(gens) if not g.parity]
    odds = [i for i, g in enumerate(gens) if g.parity]
    # parity blocks must be separately invertible
    def block(idx):
        return [[Q[i][j] for j in idx] for i in idx]
    if exact:
        qmat = [[_to_qqi(Q[i][j]) for j in range(n)] for i in range(n)]
        for idx in (evens, odds):
            if idx and not _qqi_det_nonzero(block_q(qmat, idx)):
                raise NonInvertibleQuadraticForm("quadratic form singular on fluctuations")
        inv = linal.inverse(qmat) if n else []
        C = [[HbarScalar({1: QQi(0, 1) * inv[i][j]}) if inv and inv[i][j] else HbarScalar.zero()
              for j in range(n)] for i in range(n)]
        det_even = _qqi_det(block_q(qmat, evens)) if evens else QQi(1)
    else:
        qm = np.array([[complex(_to_c(Q[i][j])) for j in range(n)] for i in range(n)])
        for idx in (evens, odds):
            if idx:
                sub = qm[np.ix_(idx, idx)]
                if abs(np.linalg.det(sub)) < 1e-13:
                    raise NonInvertibleQuadraticForm("quadratic form singular on fluctuations")
        inv = np.linalg.inv(qm) if n else np.zeros((0, 0))
        C = [[HbarScalar({1: 1j * inv[i][j]}) if abs(inv[i][j]) > 0 else HbarScalar.zero()
              for j in range(n)] for i in range(n)]
        det_even = complex(np.linalg.det(qm[np.ix_(evens, evens)])) if evens else 1.0
    index = {g: i for i, g in enumerate(gens)}
    return C, index, det_even


def block_q(q, idx):
    return [[q[i][j] for j in idx] for i in idx]


def _to_qqi(c):
    if isinstance(c, QQi):
        return c
    if isinstance(c, (int, Fraction)):
        return QQi(c)
    raise TypeError("expected exact scalar")


def _to_c(c):
    return complex(c) if isinstance(c, QQi) else c


def _qqi_det(m):
    if not m:
        return QQi(1)
    return linal.det(m)


def _qqi_det_nonzero(m):
    return bool(_qqi_det(m))


@dataclass
class _Vertex:
    """One interaction term, split into residual content and fluctuation legs."""

    coeff: HbarScalar
    res_mono: tuple           # residual-only monomial
    legs: tuple               # fluctuation generators with multiplicity, in order
    res_parity: int
    legs_parity: int
    grade: Fraction           # r + f/2 - 1 + min hbar power of the coefficient
    r: int
    f: int


def _split_terms(action: SplitAction):
    fl = set(action.fluctuations)
    verts = []
    for (evens, odds), coeff in action.interaction.terms.items():
        res_evens, leg_list = [], []
        for g, k in evens:
            if g in fl:
                leg_list += [g] * k
            else:
                res_evens.append((g, k))
        res_odds, leg_odds = [], []
        sign = 1
        # extract fluctuation odds to the right: count res-odds they pass
        seen_res = 0
        for g in odds:
            if g in fl:
                leg_odds.append(g)
            else:
                res_odds.append(g)
                # every fluct odd already extracted passed this residual odd
                sign *= (-1) ** len(leg_odds)
        legs = tuple(leg_list + leg_odds)
        r = sum(k for _, k in res_evens) + len(res_odds)
        f = len(legs)
        if f == 0 and r == 0:
            raise OrderOverflow("constant term in the interaction")
        if f in (1, 2) and r == 0:
            dmin = min(coeff.powers())
            if dmin <= 0:
                raise OrderOverflow(
                    "pure fluctuation term of degree <= 2: fold it into the quadratic part")
        dmin = min(coeff.powers())
        grade = Fraction(r) + Fraction(f, 2) - 1 + max(0, dmin)
        verts.append(_Vertex(
            coeff=coeff if sign > 0 else -coeff,
            res_mono=(tuple(res_evens), tuple(res_odds)),
            legs=legs,
            res_parity=len(res_odds) & 1,
            legs_parity=len(leg_odds) & 1,
            grade=grade, r=r, f=f))
    return verts


def _connected_pairings(slots, C, index):
    """Sum over complete pairings of (gen, vertex) slots whose contraction
    graph is connected; returns a list of (value, edges-connect-all bool)."""
    n_vert = 1 + max((v for _, v in slots), default=0)

    results = []

    def rec(remaining, acc_value, parent):
        if not acc_value:
            return
        if not remaining:
            # connectivity via union-find parents
            roots = {_find(parent, v) for v in range(n_vert)}
            if len(roots) == 1:
                results.append(acc_value)
            return
        g0, v0 = remaining[0]
        sign = 1
        for j in range(1, len(remaining)):
            gj, vj = remaining[j]
            cval = C[index[g0]][index[gj]]
            if not cval.is_zero():
                par2 = dict(parent)
                _union(par2, v0, vj)
                val = acc_value * cval
                if sign < 0:
                    val = -val
                rec(remaining[1:j] + remaining[j + 1:], val, par2)
            if gj.parity:
                sign = -sign

    if n_vert == 0:
        return HbarScalar.one()
    rec(list(slots), HbarScalar.one(), {v: v for v in range(n_vert)})
    total = HbarScalar.zero()
    for v in results:
        total = total + v
    return total


def _find(parent, x):
    while parent[x] != x:
        x = parent[x]
    return x


def _union(parent, a, b):
    ra, rb = _find(parent, a), _find(parent, b)
    parent[ra] = rb


def pushforward_series(action: SplitAction, order: int,
                       hbar_order: int | None = None) -> PushforwardResult:
    """Effective action on residual generators to the given order.

    `order` caps both the residual polynomial degree and the hbar (loop)
    order of S'; hbar_order overrides the latter.  Raises OrderOverflow when
    the interaction grading cannot terminate the expansion.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    H = order if hbar_order is None else hbar_order
    C, index, det_even = _covariance(action)
    verts = _split_terms(action)

    if any(v.grade <= 0 for v in verts if v.f >= 1):
        raise OrderOverflow("interaction term with nonpositive grading excess")

    budget = Fraction(order) + H - 1
    W = SuperPolynomial.zero()
    for combo in _multisets(verts, order, budget):
        contrib = _cluster_value(combo, verts, C, index)
        if contrib is not None:
            W = W + contrib

    eff = W * HbarScalar({1: QQi(0, -1)})   # -i hbar log<...>
    eff = _truncate(eff, order, H)

    odd_fl = [g for g in action.fluctuations if g.parity]
    quad_odd = SuperPolynomial(
        {m: c for m, c in action.quadratic.terms.items() if m[1]})
    if odd_fl:
        z_odd = berezin_top_coefficient(
            exp_nilpotent(quad_odd * HbarScalar({-1: QQi(0, 1)})), odd_fl)
    else:
        z_odd = HbarScalar.one()
    even_dim = sum(1 for g in action.fluctuations if not g.parity)
    return PushforwardResult(
        effective=eff,
        prefactor=GaussianPrefactor(odd_value=z_odd, even_dim=even_dim,
                                    even_det=det_even))


def _multisets(verts, res_budget, grade_budget):
    """Vertex multisets that can form a connected diagram within the budgets.

    Pruning: cumulative residual degree and grading budgets; at completion the
    total leg count must be even, the diagram needs at least n - 1 contraction
    edges (sum f >= 2(n-1)), and single-leg vertices are tree leaves, so at
    most 2 + sum_{f>=3}(f - 2) of them fit in one connected diagram.
    """
    out = []
    n_terms = len(verts)

    def emit(combo):
        n = len(combo)
        ftot = sum(verts[i].f for i in combo)
        f1 = sum(1 for i in combo if verts[i].f == 1)
        branch = sum(verts[i].f - 2 for i in combo if verts[i].f >= 3)
        if (ftot % 2 == 0 and ftot >= 2 * (n - 1)
                and f1 <= 2 + branch
                and not (n > 1 and any(verts[i].f == 0 for i in combo))):
            out.append(tuple(combo))

    def rec(idx, combo, res, grade):
        if idx >= n_terms:
            return
        rec(idx + 1, combo, res, grade)        # skip this term
        v = verts[idx]
        cr, cg = res, grade
        taken = list(combo)
        while True:
            cr += v.r
            cg += v.grade
            if cr > res_budget or cg > grade_budget:
                break
            taken = taken + [idx]
            emit(taken)                        # each multiset formed exactly once
            rec(idx + 1, taken, cr, cg)
            if v.f == 0:
                break                          # residual-only vertices sit alone

    rec(0, [], Fraction(0), Fraction(0))
    return out


def _cluster_value(combo, verts, C, index):
    vs = [verts[i] for i in combo]
    n = len(vs)
    # multiplicity factor 1 / prod(mult!)
    mult = Fraction(1)
    for _, grp in itertools.groupby(combo):
        m = len(list(grp))
        for t in range(2, m + 1):
            mult /= t
    # moving residual parts of later vertices left past leg blocks of earlier
    # ones: sign = prod over i<j of (-1)^{legs_parity_i * res_parity_j}
    acc = 0
    for i in range(n):
        for j in range(i + 1, n):
            acc += vs[i].legs_parity * vs[j].res_parity
    res = SuperPolynomial.scalar(1)
    for v in vs:
        res = res * SuperPolynomial({v.res_mono: HbarScalar.one()})
        if res.is_zero():
            return None
    slots = []
    for vi, v in enumerate(vs):
        slots += [(g, vi) for g in v.legs]
    moment = _connected_pairings(tuple(slots), C, index)
    if moment.is_zero():
        return None
    coeff = HbarScalar.one()
    for v in vs:
        coeff = coeff * v.coeff
    cpow = HbarScalar({-n: QQi(0, 1) ** n})   # (i/hbar)^n
    contrib = res * (coeff * cpow * moment * QQi(mult))
    return -contrib if acc % 2 else contrib


def _truncate(p: SuperPolynomial, order: int, hmax: int) -> SuperPolynomial:
    out = {}
    for m, c in p.terms.items():
        deg = sum(k for _, k in m[0]) + len(m[1])
        if deg > order:
            continue
        kept = HbarScalar({k: v for k, v in c.terms.items() if k <= hmax})
        if not kept.is_zero():
            out[m] = kept
    return SuperPolynomial(out)
