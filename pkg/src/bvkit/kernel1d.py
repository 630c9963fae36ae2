"""Exact 1D two-point kernels and their gluing calculus.

A kernel eta(t1, t2) on a 1-manifold is stored region-wise: the manifold is a
chain of rational charts, and for every ordered chart pair there is a bivariate
polynomial with rational coefficients (same-chart pairs split into t1 < t2 and
t1 > t2; the diagonal itself carries only the jump datum, so the step function
is never evaluated at zero).  Boundary endpoints are polarized: label 1 means
eta vanishes when the first argument sits there, label 2 when the second does.

Gluing follows the four-case composition formula: restriction on each piece,
zero across the interface one way, composition through the interface plus an
inverse-interface-pairing correction the other way.  Interface points carry
the orientation weight they inherit as boundary points of the left piece.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linal

# ---------------------------------------------------------------------------
# rational polynomials in one and two variables


class Poly1:
    """Dense univariate polynomial over Fraction."""

    __slots__ = ("c",)

    def __init__(self, coeffs: Sequence = ()):
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "c", tuple(c))

    def __setattr__(self, *a):
        raise AttributeError("Poly1 is immutable")

    @staticmethod
    def const(x) -> "Poly1":
        return Poly1([Fraction(x)])

    @staticmethod
    def t() -> "Poly1":
        return Poly1([0, 1])

    def __add__(self, o):
        o = o if isinstance(o, Poly1) else Poly1.const(o)
        n = max(len(self.c), len(o.c))
        return Poly1([(self.c[i] if i < len(self.c) else 0)
                      + (o.c[i] if i < len(o.c) else 0) for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return Poly1([-x for x in self.c])

    def __sub__(self, o):
        return self + (-(o if isinstance(o, Poly1) else Poly1.const(o)))

    def __mul__(self, o):
        if not isinstance(o, Poly1):
            return Poly1([x * Fraction(o) for x in self.c])
        out = [Fraction(0)] * (len(self.c) + len(o.c))
        for i, a in enumerate(self.c):
            for j, b in enumerate(o.c):
                out[i + j] += a * b
        return Poly1(out)

    __rmul__ = __mul__

    def __call__(self, t):
        v = Fraction(0) if isinstance(t, (int, Fraction)) else 0.0
        for a in reversed(self.c):
            v = v * t + (a if isinstance(t, (int, Fraction)) else float(a))
        return v

    def shift(self, s) -> "Poly1":
        """p(t) -> p(t - s)."""
        s = Fraction(s)
        out = Poly1()
        tm = Poly1.const(1)
        base = Poly1([-s, 1])
        for a in self.c:
            out = out + tm * a
            tm = tm * base
        return out

    def deriv(self) -> "Poly1":
        return Poly1([i * a for i, a in enumerate(self.c)][1:])

    def integ(self) -> "Poly1":
        return Poly1([Fraction(0)] + [a / (i + 1) for i, a in enumerate(self.c)])

    def integrate(self, lo, hi):
        F = self.integ()
        return F(Fraction(hi)) - F(Fraction(lo))

    def is_zero(self) -> bool:
        return not self.c

    def __eq__(self, o):
        o = o if isinstance(o, Poly1) else Poly1.const(o)
        return self.c == o.c

    def __hash__(self):
        return hash(self.c)

    def __repr__(self):
        if not self.c:
            return "0"
        return " + ".join(f"{a}*t^{i}" if i else f"{a}"
                          for i, a in enumerate(self.c) if a)


class Poly2:
    """Bivariate polynomial over Fraction, keys (deg_t1, deg_t2)."""

    __slots__ = ("c",)

    def __init__(self, coeffs=None):
        d = {}
        if coeffs:
            for k, v in coeffs.items():
                v = Fraction(v)
                if v:
                    d[(int(k[0]), int(k[1]))] = v
        object.__setattr__(self, "c", d)

    def __setattr__(self, *a):
        raise AttributeError("Poly2 is immutable")

    @staticmethod
    def const(x) -> "Poly2":
        return Poly2({(0, 0): Fraction(x)})

    @staticmethod
    def t1() -> "Poly2":
        return Poly2({(1, 0): 1})

    @staticmethod
    def t2() -> "Poly2":
        return Poly2({(0, 1): 1})

    @staticmethod
    def separable(p: Poly1, q: Poly1) -> "Poly2":
        return Poly2({(i, j): a * b for i, a in enumerate(p.c)
                      for j, b in enumerate(q.c) if a * b})

    def __add__(self, o):
        o = o if isinstance(o, Poly2) else Poly2.const(o)
        d = dict(self.c)
        for k, v in o.c.items():
            d[k] = d.get(k, Fraction(0)) + v
        return Poly2(d)

    __radd__ = __add__

    def __neg__(self):
        return Poly2({k: -v for k, v in self.c.items()})

    def __sub__(self, o):
        return self + (-(o if isinstance(o, Poly2) else Poly2.const(o)))

    def __mul__(self, o):
        if not isinstance(o, Poly2):
            return Poly2({k: v * Fraction(o) for k, v in self.c.items()})
        d = {}
        for (i1, j1), a in self.c.items():
            for (i2, j2), b in o.c.items():
                k = (i1 + i2, j1 + j2)
                d[k] = d.get(k, Fraction(0)) + a * b
        return Poly2(d)

    __rmul__ = __mul__

    def __call__(self, t1, t2):
        exact = isinstance(t1, (int, Fraction)) and isinstance(t2, (int, Fraction))
        v = Fraction(0) if exact else 0.0
        for (i, j), a in self.c.items():
            term = (a if exact else float(a))
            v = v + term * t1 ** i * t2 ** j
        return v

    def d1(self) -> "Poly2":
        return Poly2({(i - 1, j): a * i for (i, j), a in self.c.items() if i})

    def d2(self) -> "Poly2":
        return Poly2({(i, j - 1): a * j for (i, j), a in self.c.items() if j})

    def at_t1(self, t) -> Poly1:
        t = Fraction(t)
        out = {}
        for (i, j), a in self.c.items():
            out[j] = out.get(j, Fraction(0)) + a * t ** i
        n = max(out, default=-1) + 1
        return Poly1([out.get(j, Fraction(0)) for j in range(n)])

    def at_t2(self, t) -> Poly1:
        t = Fraction(t)
        out = {}
        for (i, j), a in self.c.items():
            out[i] = out.get(i, Fraction(0)) + a * t ** j
        n = max(out, default=-1) + 1
        return Poly1([out.get(i, Fraction(0)) for i in range(n)])

    def diag(self) -> Poly1:
        """p(t, t)."""
        out = {}
        for (i, j), a in self.c.items():
            out[i + j] = out.get(i + j, Fraction(0)) + a
        n = max(out, default=-1) + 1
        return Poly1([out.get(k, Fraction(0)) for k in range(n)])

    def shift(self, s1, s2) -> "Poly2":
        """p(t1, t2) -> p(t1 - s1, t2 - s2)."""
        out = Poly2()
        for (i, j), a in self.c.items():
            base1 = Poly1([-Fraction(s1), 1])
            base2 = Poly1([-Fraction(s2), 1])
            p1 = Poly1.const(1)
            for _ in range(i):
                p1 = p1 * base1
            p2 = Poly1.const(1)
            for _ in range(j):
                p2 = p2 * base2
            out = out + Poly2.separable(p1, p2) * a
        return out

    def is_zero(self) -> bool:
        return not self.c

    def __eq__(self, o):
        o = o if isinstance(o, Poly2) else Poly2.const(o)
        return self.c == o.c

    def __repr__(self):
        if not self.c:
            return "0"
        return " + ".join(f"{a}*t1^{i}*t2^{j}" for (i, j), a in sorted(self.c.items()))


# ---------------------------------------------------------------------------
# manifolds, forms, kernels

D1, D2 = 1, 2  # polarization labels for boundary endpoints


@dataclass(frozen=True)
class Manifold1D:
    """A chain of rational charts forming an interval or a circle."""

    kind: str                      # "interval" | "circle"
    charts: tuple                  # ((lo, hi), ...) consecutive Fractions
    left_label: int | None = None  # polarization at the left/right endpoint
    right_label: int | None = None

    def __post_init__(self):
        assert self.kind in ("interval", "circle")
        for (a, b) in self.charts:
            assert a < b
        for (a, b), (c, d) in zip(self.charts, self.charts[1:]):
            assert b == c, "charts must be consecutive"
        if self.kind == "interval":
            assert self.left_label in (D1, D2) and self.right_label in (D1, D2)
        else:
            assert self.left_label is None and self.right_label is None

    @property
    def lo(self) -> Fraction:
        return self.charts[0][0]

    @property
    def hi(self) -> Fraction:
        return self.charts[-1][1]

    def boundary(self):
        """(coordinate, orientation weight, polarization label) per endpoint."""
        if self.kind == "circle":
            return []
        return [(self.lo, -1, self.left_label), (self.hi, +1, self.right_label)]

    def chart_of(self, t) -> int:
        t = Fraction(t) if isinstance(t, (int, Fraction)) else t
        for i, (a, b) in enumerate(self.charts):
            if a <= t <= b:
                return i
        raise ValueError(f"{t} outside the manifold")

    def shifted(self, s) -> "Manifold1D":
        s = Fraction(s)
        return Manifold1D(self.kind,
                          tuple((a + s, b + s) for a, b in self.charts),
                          self.left_label, self.right_label)


def interval(label_left: int, label_right: int, lo=0, hi=1) -> Manifold1D:
    return Manifold1D("interval", ((Fraction(lo), Fraction(hi)),),
                      label_left, label_right)


@dataclass(frozen=True)
class PiecewiseForm:
    """Degree 0 or 1 form with one rational polynomial per chart.

    May be discontinuous across interior chart interfaces (glued
    representatives are), but is single-valued on each closed chart.
    """

    manifold: Manifold1D
    degree: int
    pieces: tuple  # Poly1 per chart

    def __post_init__(self):
        assert self.degree in (0, 1)
        assert len(self.pieces) == len(self.manifold.charts)

    def value_at(self, t, chart: int | None = None):
        """Point value; degree-1 forms restrict to zero at points."""
        if self.degree == 1:
            return Fraction(0)
        if chart is None:
            chart = self.manifold.chart_of(t)
        return self.pieces[chart](Fraction(t))

    def integral(self):
        """Integral over the manifold (nonzero only in degree 1)."""
        if self.degree == 0:
            return Fraction(0)
        tot = Fraction(0)
        for (a, b), p in zip(self.manifold.charts, self.pieces):
            tot += p.integrate(a, b)
        return tot

    def __add__(self, o: "PiecewiseForm") -> "PiecewiseForm":
        assert self.degree == o.degree and self.manifold == o.manifold
        return PiecewiseForm(self.manifold, self.degree,
                             tuple(p + q for p, q in zip(self.pieces, o.pieces)))

    def __mul__(self, s) -> "PiecewiseForm":
        return PiecewiseForm(self.manifold, self.degree,
                             tuple(p * Fraction(s) for p in self.pieces))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.pieces)

    def __eq__(self, o):
        return (self.manifold == o.manifold and self.degree == o.degree
                and all(p == q for p, q in zip(self.pieces, o.pieces)))


def form_product_integral(a: PiecewiseForm, b: PiecewiseForm):
    """integral over M of a wedge b (nonzero only when degrees sum to 1)."""
    assert a.manifold == b.manifold
    if a.degree + b.degree != 1:
        return Fraction(0)
    tot = Fraction(0)
    for (lo, hi), p, q in zip(a.manifold.charts, a.pieces, b.pieces):
        tot += (p * q).integrate(lo, hi)
    return tot


@dataclass(frozen=True)
class CohomologyBasis:
    """Representatives chi_i (vanishing on label-1 boundary) and duals chi^i
    (vanishing on label-2 boundary) with integral pairing delta^i_j."""

    chi: tuple        # PiecewiseForm, the 'a'-side classes
    chi_dual: tuple   # PiecewiseForm, the 'b'-side classes

    def __post_init__(self):
        assert len(self.chi) == len(self.chi_dual)

    def check_pairing(self):
        n = len(self.chi)
        for i in range(n):
            for j in range(n):
                want = Fraction(1 if i == j else 0)
                got = form_product_integral(self.chi_dual[i], self.chi[j])
                if got != want:
                    raise ValueError(f"basis pairing <chi^{i}, chi_{j}> = {got} != {want}")

    def betti(self) -> list[int]:
        """dim H^j of the label-1 relative complex, j = 0, 1."""
        out = [0, 0]
        for f in self.chi:
            out[f.degree] += 1
        return out


class KernelError(ValueError):
    pass


ORDER_LT, ORDER_GT, ORDER_ALL = "lt", "gt", "all"


class PiecewiseKernel:
    """eta(t1, t2) as region polynomials plus the diagonal jump."""

    def __init__(self, manifold: Manifold1D, regions: dict, jump=Fraction(1)):
        self.manifold = manifold
        self.jump = Fraction(jump)
        nc = len(manifold.charts)
        full = {}
        for c1 in range(nc):
            for c2 in range(nc):
                if c1 == c2:
                    keys = [(c1, c2, ORDER_LT), (c1, c2, ORDER_GT)]
                else:
                    keys = [(c1, c2, ORDER_ALL)]
                for k in keys:
                    full[k] = regions.get(k, Poly2())
        for k in regions:
            if k not in full:
                raise KernelError(f"region key {k} inconsistent with the chart layout")
        self.regions = full

    # -- evaluation --------------------------------------------------------
    def eval(self, t1, t2):
        c1 = self.manifold.chart_of(t1)
        c2 = self.manifold.chart_of(t2)
        if c1 == c2:
            if t1 == t2:
                raise KernelError("kernel is not defined on the diagonal")
            key = (c1, c2, ORDER_GT if t1 > t2 else ORDER_LT)
        else:
            key = (c1, c2, ORDER_ALL)
        return self.regions[key](t1, t2)

    def second_at_end(self, coord, end: str) -> list[Poly1]:
        """eta(., coord) with coord a manifold endpoint; one Poly1 per chart of t1."""
        coord = Fraction(coord)
        nc = len(self.manifold.charts)
        cy = nc - 1 if end == "right" else 0
        out = []
        for c1 in range(nc):
            if c1 == cy:
                key = (c1, cy, ORDER_LT if end == "right" else ORDER_GT)
            else:
                key = (c1, cy, ORDER_ALL)
            out.append(self.regions[key].at_t2(coord))
        return out

    def first_at_end(self, coord, end: str) -> list[Poly1]:
        """eta(coord, .) with coord a manifold endpoint; one Poly1 per chart of t2."""
        coord = Fraction(coord)
        nc = len(self.manifold.charts)
        cy = nc - 1 if end == "right" else 0
        out = []
        for c2 in range(nc):
            if c2 == cy:
                key = (cy, c2, ORDER_GT if end == "right" else ORDER_LT)
            else:
                key = (cy, c2, ORDER_ALL)
            out.append(self.regions[key].at_t1(coord))
        return out

    # -- defining properties -------------------------------------------------
    def check_jump(self):
        for c in range(len(self.manifold.charts)):
            gap = (self.regions[(c, c, ORDER_GT)].diag()
                   - self.regions[(c, c, ORDER_LT)].diag())
            if gap != Poly1.const(self.jump):
                raise KernelError(f"diagonal jump on chart {c} is {gap}, expected {self.jump}")

    def check_boundary(self):
        for coord, w, label in self.manifold.boundary():
            end = "right" if w > 0 else "left"
            if label == D1:
                for p in self.first_at_end(coord, end):
                    if not p.is_zero():
                        raise KernelError(f"eta({coord}, .) != 0 on the label-1 endpoint")
            else:
                for p in self.second_at_end(coord, end):
                    if not p.is_zero():
                        raise KernelError(f"eta(., {coord}) != 0 on the label-2 endpoint")

    def check(self, basis: CohomologyBasis | None = None):
        self.check_jump()
        self.check_boundary()
        if basis is not None:
            basis.check_pairing()
            rem = d_decomposition_remainder(self, basis)
            if rem:
                raise KernelError(f"d eta decomposition remainder nonzero: {rem}")

    def __eq__(self, o):
        return (self.manifold == o.manifold and self.jump == o.jump
                and self.regions == o.regions)

    # -- serialization ---------------------------------------------------------
    def to_json(self) -> str:
        man = {
            "kind": self.manifold.kind,
            "charts": [[str(a), str(b)] for a, b in self.manifold.charts],
            "left_label": self.manifold.left_label,
            "right_label": self.manifold.right_label,
        }
        regions = []
        for (c1, c2, order), p in sorted(self.regions.items()):
            regions.append({"charts": [c1, c2], "order": order,
                            "poly": [[i, j, str(v)] for (i, j), v in sorted(p.c.items())]})
        return json.dumps({"schema": 1, "manifold": man, "regions": regions,
                           "jump": str(self.jump)}, indent=1)

    @staticmethod
    def from_json(text: str) -> "PiecewiseKernel":
        doc = json.loads(text)
        man = doc["manifold"]
        manifold = Manifold1D(man["kind"],
                              tuple((Fraction(a), Fraction(b)) for a, b in man["charts"]),
                              man["left_label"], man["right_label"])
        regions = {}
        for r in doc["regions"]:
            p = Poly2({(i, j): Fraction(v) for i, j, v in r["poly"]})
            regions[(r["charts"][0], r["charts"][1], r["order"])] = p
        return PiecewiseKernel(manifold, regions, Fraction(doc["jump"]))


# ---------------------------------------------------------------------------
# the four standard kernels (printed closed forms)


def standard_kernel(kind: str) -> tuple[PiecewiseKernel, CohomologyBasis]:
    """The printed 1D kernels: interval-12, interval-11, interval-22, circle.

    interval-12:  -Theta(t2 - t1), endpoints (left=2, right=1), no cohomology;
    interval-11:  Theta(t1 - t2) - t1, both endpoints label 1, basis {dt | 1};
    interval-22:  -Theta(t2 - t1) + t2, both endpoints label 2, basis {1 | dt};
    circle:       Theta(t1 - t2) - t1 + t2 - 1/2, basis {1, dt | dt, 1}.
    """
    one = Poly2.const(1)
    t1p, t2p = Poly2.t1(), Poly2.t2()
    if kind == "interval-12":
        m = interval(D2, D1)
        k = PiecewiseKernel(m, {(0, 0, ORDER_GT): Poly2(),
                                (0, 0, ORDER_LT): -one})
        basis = CohomologyBasis((), ())
    elif kind == "interval-11":
        m = interval(D1, D1)
        k = PiecewiseKernel(m, {(0, 0, ORDER_GT): one - t1p,
                                (0, 0, ORDER_LT): -t1p})
        basis = CohomologyBasis(
            (PiecewiseForm(m, 1, (Poly1.const(1),)),),
            (PiecewiseForm(m, 0, (Poly1.const(1),)),))
    elif kind == "interval-22":
        m = interval(D2, D2)
        k = PiecewiseKernel(m, {(0, 0, ORDER_GT): t2p,
                                (0, 0, ORDER_LT): t2p - one})
        basis = CohomologyBasis(
            (PiecewiseForm(m, 0, (Poly1.const(1),)),),
            (PiecewiseForm(m, 1, (Poly1.const(1),)),))
    elif kind == "circle":
        m = Manifold1D("circle", ((Fraction(0), Fraction(1)),))
        half = Poly2.const(Fraction(1, 2))
        k = PiecewiseKernel(m, {(0, 0, ORDER_GT): one - t1p + t2p - half,
                                (0, 0, ORDER_LT): -t1p + t2p - half})
        basis = CohomologyBasis(
            (PiecewiseForm(m, 0, (Poly1.const(1),)),
             PiecewiseForm(m, 1, (Poly1.const(1),))),
            (PiecewiseForm(m, 1, (Poly1.const(1),)),
             PiecewiseForm(m, 0, (Poly1.const(1),))))
    else:
        raise ValueError(f"unknown kernel kind {kind!r}")
    k.check(basis)
    return k, basis


# ---------------------------------------------------------------------------
# d eta = sum_i (-1)^{deg chi_i} chi_i(t1) chi^i(t2)      (d = 1)


def d_decomposition_remainder(kernel: PiecewiseKernel, basis: CohomologyBasis) -> dict:
    """Region-wise remainder of  d eta - sum_i (-1)^{deg chi_i} chi_i x chi^i.

    Empty dict means the decomposition holds exactly.  The dt1 component of
    the right-hand side collects the degree-1 chi_i, the dt2 component the
    degree-0 ones.
    """
    nc = len(kernel.manifold.charts)
    want1 = [[Poly2() for _ in range(nc)] for _ in range(nc)]
    want2 = [[Poly2() for _ in range(nc)] for _ in range(nc)]
    for chi, chid in zip(basis.chi, basis.chi_dual):
        for c1 in range(nc):
            for c2 in range(nc):
                block = Poly2.separable(chi.pieces[c1], chid.pieces[c2])
                if chi.degree == 1:
                    want1[c1][c2] = want1[c1][c2] + (-block)
                else:
                    want2[c1][c2] = want2[c1][c2] + block
    bad = {}
    for (c1, c2, order), p in kernel.regions.items():
        r1 = p.d1() - want1[c1][c2]
        r2 = p.d2() - want2[c1][c2]
        if not r1.is_zero():
            bad[(c1, c2, order, "dt1")] = r1
        if not r2.is_zero():
            bad[(c1, c2, order, "dt2")] = r2
    return bad


# ---------------------------------------------------------------------------
# gluing


@dataclass
class GlueSide:
    kernel: PiecewiseKernel
    basis: CohomologyBasis


@dataclass
class BasisTransform:
    """Change of representative basis on one glued piece.

    rows of `dual` express the new b-side classes in the old chi_dual basis;
    rows of `primal` the new a-side classes in the old chi basis.  The first
    `kept` rows survive the gluing (in glued-basis order); the remaining rows
    are the redshirt combinations that get integrated out.
    """

    dual: list
    primal: list
    kept: int


@dataclass
class GluedData:
    kernel: PiecewiseKernel
    basis: CohomologyBasis
    lam: list                 # interface pairing matrix Lambda
    v: list                   # Lambda^{-1}
    det_lambda: Fraction
    ber_lambda: Fraction
    redshirt_even: int        # redshirt pair counts by ghost parity (k = 1 bookkeeping)
    redshirt_odd: int
    side1: BasisTransform
    side2: BasisTransform
    interface: list           # (coordinate in M1, coordinate in M2, weight)
    shift2: Fraction


class GlueError(ValueError):
    pass


def _eval_rows_at_points(forms, coords) -> list[list[Fraction]]:
    """Point values of the degree-0 part of each form; degree-1 rows vanish."""
    rows = []
    for f in forms:
        if f.degree == 0:
            rows.append([f.value_at(c) for c in coords])
        else:
            rows.append([Fraction(0)] * len(coords))
    return rows


def _combo_form(forms, coeffs) -> PiecewiseForm:
    out = None
    deg = None
    for f, c in zip(forms, coeffs):
        if c == 0:
            continue
        if deg is None:
            deg = f.degree
        if f.degree != deg:
            raise GlueError("mixed-degree combination of representatives")
        out = f * c if out is None else out + f * c
    if out is None:
        # zero combination; degree is conventional
        m = forms[0].manifold if forms else None
        return PiecewiseForm(m, 0, tuple(Poly1() for _ in m.charts))
    return out


def glue(left: GlueSide, right: GlueSide, both_ends: bool = False) -> GluedData:
    """Glue the right end of `left` to the left end of `right`.

    With both_ends=True the remaining pair of endpoints is glued as well and
    the result is a circle.  The interface must carry opposite polarizations:
    label 1 on the left piece, label 2 on the right piece.
    """
    m1 = left.kernel.manifold
    m2r = right.kernel.manifold
    if m1.kind != "interval" or m2r.kind != "interval":
        raise GlueError("glue expects interval pieces")
    if m1.right_label != D1 or m2r.left_label != D2:
        raise GlueError("polarization mismatch at the interface")
    if both_ends and (m1.left_label != D1 or m2r.right_label != D2):
        raise GlueError("polarization mismatch at the second interface")

    shift = m1.hi - m2r.lo
    m2 = m2r.shifted(shift)
    k2 = _shift_kernel(right.kernel, shift)
    basis2 = CohomologyBasis(
        tuple(_shift_form(f, shift) for f in right.basis.chi),
        tuple(_shift_form(f, shift) for f in right.basis.chi_dual))

    # interface points: (M1 coordinate, M2 coordinate, weight from M1 orientation)
    interface = [(m1.hi, m2.lo, Fraction(1))]
    if both_ends:
        interface.append((m1.lo, m2.hi, Fraction(-1)))

    coords1 = [p[0] for p in interface]
    coords2 = [p[1] for p in interface]
    weights = [p[2] for p in interface]

    tau1 = _eval_rows_at_points(left.basis.chi_dual, coords1)   # H_D2(M1) -> values
    tau2 = _eval_rows_at_points(basis2.chi, coords2)            # H_D1(M2) -> values

    L1 = linal.row_space_basis(tau1) if tau1 else []
    L2 = linal.row_space_basis(tau2) if tau2 else []

    def perp(rows):
        # orthogonal complement w.r.t. the weighted point pairing
        if not rows:
            return linal.mat_identity(len(interface))
        mat = [[r[j] * weights[j] for j in range(len(weights))] for r in rows]
        return linal.kernel_basis(mat)

    L2perp = perp(L2)
    L1perp = perp(L1)
    cap1 = linal.intersect_row_spaces(L1, L2perp) if L1 else []
    cap2 = linal.intersect_row_spaces(L2, L1perp) if L2 else []
    L1x = linal.complement_in_span(cap1, L1)
    L2x = linal.complement_in_span(cap2, L2)
    if len(L1x) != len(L2x):
        raise GlueError("redshirt spaces of the two sides do not match")
    r = len(L1x)

    # sections: redshirt representatives as combinations of the original bases
    red1 = [linal.solve(linal.mat_t(tau1), list(v)) for v in L1x]
    red2 = [linal.solve(linal.mat_t(tau2), list(v)) for v in L2x]
    if any(x is None for x in red1 + red2):
        raise GlueError("failed to lift interface classes")
    red1_forms = [_combo_form(left.basis.chi_dual, c) for c in red1]
    red2_forms = [_combo_form(basis2.chi, c) for c in red2]

    lam = [[sum(w * f2.value_at(c2) * f1.value_at(c1)
                for (c1, c2, w) in interface)
            for f2 in red2_forms] for f1 in red1_forms]
    if r:
        det_lambda = linal.det(lam)
        if det_lambda == 0:
            raise GlueError("interface pairing matrix Lambda is singular")
        v = linal.inverse(lam)
    else:
        det_lambda = Fraction(1)
        v = []
    # 0-form redshirt pairs carry odd ghost numbers in the k = 1 bookkeeping
    ber_lambda = Fraction(1) / det_lambda
    redshirt_even, redshirt_odd = 0, 2 * r

    side1 = _split_side(left.basis, red1, dual_side=True)
    side2 = _split_side(basis2, red2, dual_side=False)

    glued_kernel = _glued_kernel(left.kernel, k2, m1, m2, interface,
                                 red1_forms, red2_forms, v, both_ends)
    glued_basis = _glued_basis(left, basis2, m1, m2, interface, side1, side2,
                               glued_kernel, k2, both_ends)

    glued_kernel.check(glued_basis)
    return GluedData(kernel=glued_kernel, basis=glued_basis, lam=lam, v=v,
                     det_lambda=det_lambda, ber_lambda=ber_lambda,
                     redshirt_even=redshirt_even, redshirt_odd=redshirt_odd,
                     side1=side1, side2=side2, interface=interface, shift2=shift)


def _shift_form(f: PiecewiseForm, s) -> PiecewiseForm:
    return PiecewiseForm(f.manifold.shifted(s), f.degree,
                         tuple(p.shift(s) for p in f.pieces))


def _shift_kernel(k: PiecewiseKernel, s) -> PiecewiseKernel:
    return PiecewiseKernel(k.manifold.shifted(s),
                           {key: p.shift(s, s) for key, p in k.regions.items()},
                           k.jump)


def _split_side(basis: CohomologyBasis, red_rows: list, dual_side: bool) -> BasisTransform:
    """Split one side's basis into kept + redshirt combinations.

    dual_side=True splits the chi_dual family (side 1), else the chi family
    (side 2).  Kept rows are chosen among the original basis vectors and then
    corrected so that kept-primal / kept-dual stay integral-dual exactly.
    """
    n = len(basis.chi)
    ident = linal.mat_identity(n)
    red = [list(map(Fraction, row)) for row in red_rows]
    kept = linal.complement_in_span(red, ident)
    # annihilator of the redshirts on the conjugate family
    ann = linal.kernel_basis(red) if red else ident
    # Gram correction: make <kept_a, ann_b> = delta exactly
    gram = [[sum(ka[i] * ab[i] for i in range(n)) for ab in ann] for ka in kept]
    ginv = linal.inverse(gram) if kept else []
    kept_corr = linal.mat_mul(ginv, kept) if kept else []
    if dual_side:
        return BasisTransform(dual=kept_corr + red, primal=ann, kept=len(kept))
    return BasisTransform(dual=ann, primal=kept_corr + red, kept=len(kept))


def _glued_kernel(k1, k2, m1, m2, interface, red1_forms, red2_forms, v,
                  both_ends) -> PiecewiseKernel:
    n1 = len(m1.charts)
    n2 = len(m2.charts)
    charts = m1.charts + m2.charts
    if both_ends:
        man = Manifold1D("circle", charts)
    else:
        man = Manifold1D("interval", charts, m1.left_label, m2.right_label)
    r = len(red1_forms)

    def end1(coord):
        return "right" if coord == m1.hi else "left"

    def end2(coord):
        return "right" if coord == m2.hi else "left"

    # precompute eta_1(. , y) and eta_2(y, .) per interface point
    eta1_at = {}
    eta2_at = {}
    for (c1, c2, w) in interface:
        eta1_at[(c1, c2)] = k1.second_at_end(c1, end1(c1))
        eta2_at[(c1, c2)] = k2.first_at_end(c2, end2(c2))

    # sums over the interface entering the correction terms
    # A_i(t1)  = sum_y w_y eta1(t1, y) chi2x_i(y)        (per M1 chart)
    # B_j(t2)  = sum_y w_y chi1x_j(y) eta2(y, t2)        (per M2 chart)
    A = [[Poly1() for _ in range(n1)] for _ in range(r)]
    B = [[Poly1() for _ in range(n2)] for _ in range(r)]
    for i in range(r):
        for (c1, c2, w) in interface:
            val2 = red2_forms[i].value_at(c2)
            for c in range(n1):
                A[i][c] = A[i][c] + eta1_at[(c1, c2)][c] * (w * val2)
    for j in range(r):
        for (c1, c2, w) in interface:
            val1 = red1_forms[j].value_at(c1)
            for c in range(n2):
                B[j][c] = B[j][c] + eta2_at[(c1, c2)][c] * (w * val1)

    regions = {}
    # case 1: both points on M1
    for c1 in range(n1):
        for c2 in range(n1):
            keys = ([(c1, c2, ORDER_LT), (c1, c2, ORDER_GT)] if c1 == c2
                    else [(c1, c2, ORDER_ALL)])
            for key in keys:
                p = k1.regions[key]
                for i in range(r):
                    for j in range(r):
                        corr = Poly2.separable(A[i][c1], _deg0_piece(red1_forms[j], c2))
                        p = p - corr * v[i][j]
                regions[key] = p
    # case 2: both points on M2 (chart indices offset by n1)
    for c1 in range(n2):
        for c2 in range(n2):
            keys = ([(c1, c2, ORDER_LT), (c1, c2, ORDER_GT)] if c1 == c2
                    else [(c1, c2, ORDER_ALL)])
            for key in keys:
                p = k2.regions[key]
                for i in range(r):
                    for j in range(r):
                        corr = Poly2.separable(_deg0_piece(red2_forms[i], c1), B[j][c2])
                        p = p - corr * v[i][j]
                regions[(key[0] + n1, key[1] + n1, key[2])] = p
    # case 3: first point on M2, second on M1 -> pure cohomology block
    for c1 in range(n2):
        for c2 in range(n1):
            p = Poly2()
            for i in range(r):
                for j in range(r):
                    p = p + Poly2.separable(_deg0_piece(red2_forms[i], c1),
                                            _deg0_piece(red1_forms[j], c2)) * v[i][j]
            regions[(c1 + n1, c2, ORDER_ALL)] = p
    # case 4: first point on M1, second on M2 -> composition through the interface
    for c1 in range(n1):
        for c2 in range(n2):
            p = Poly2()
            for (cc1, cc2, w) in interface:
                p = p - Poly2.separable(eta1_at[(cc1, cc2)][c1],
                                        eta2_at[(cc1, cc2)][c2]) * w
            for i in range(r):
                for j in range(r):
                    p = p + Poly2.separable(A[i][c1], B[j][c2]) * v[i][j]
            regions[(c1, c2 + n1, ORDER_ALL)] = p
    return PiecewiseKernel(man, regions, k1.jump)


def _deg0_piece(form: PiecewiseForm, chart: int) -> Poly1:
    if form.degree != 0:
        return Poly1()
    return form.pieces[chart]


def _glued_basis(left: GlueSide, basis2: CohomologyBasis, m1, m2, interface,
                 side1: BasisTransform, side2: BasisTransform,
                 glued_kernel: PiecewiseKernel, k2: PiecewiseKernel,
                 both_ends) -> CohomologyBasis:
    n1c = len(m1.charts)
    n2c = len(m2.charts)
    man = glued_kernel.manifold
    zero1 = [Poly1()] * n1c
    zero2 = [Poly1()] * n2c

    def end1(coord):
        return "right" if coord == m1.hi else "left"

    def end2(coord):
        return "right" if coord == m2.hi else "left"

    chi = []
    chi_dual = []
    # side-1 kept primal classes (annihilator rows), extended by zero to M2
    for row in side1.primal:
        f = _combo_form(left.basis.chi, row)
        chi.append(PiecewiseForm(man, f.degree, tuple(f.pieces) + tuple(zero2)))
    # side-2 kept primal classes, extended into M1 through eta_1
    for row in side2.primal[:side2.kept]:
        f = _combo_form(basis2.chi, row)
        ext = [Poly1() for _ in range(n1c)]
        if f.degree == 0:
            for (c1, c2, w) in interface:
                pieces = left.kernel.second_at_end(c1, end1(c1))
                val = f.value_at(c2)
                for c in range(n1c):
                    ext[c] = ext[c] - pieces[c] * (w * val)
        chi.append(PiecewiseForm(man, f.degree, tuple(ext) + tuple(f.pieces)))
    # side-1 kept dual classes, extended into M2 through eta_2
    for row in side1.dual[:side1.kept]:
        f = _combo_form(left.basis.chi_dual, row)
        ext = [Poly1() for _ in range(n2c)]
        if f.degree == 0:
            for (c1, c2, w) in interface:
                pieces = k2.first_at_end(c2, end2(c2))
                val = f.value_at(c1)
                for c in range(n2c):
                    ext[c] = ext[c] - pieces[c] * (w * val)
        chi_dual.append(PiecewiseForm(man, f.degree, tuple(f.pieces) + tuple(ext)))
    # side-2 kept dual classes (annihilator rows), extended by zero to M1
    for row in side2.dual:
        f = _combo_form(basis2.chi_dual, row)
        chi_dual.append(PiecewiseForm(man, f.degree, tuple(zero1) + tuple(f.pieces)))

    basis = CohomologyBasis(tuple(chi), tuple(chi_dual))
    return basis
