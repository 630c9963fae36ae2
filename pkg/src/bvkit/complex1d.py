"""Holonomy-twisted cellular cochains on N-gons, the interpolation/evaluation
retraction onto them, edge-merging aggregations, and the minimal retraction
onto twisted cohomology.

Cochains are flattened vectors: a degree-0 cochain lists a Lie-algebra
coefficient per vertex, a degree-1 per edge, with the quasi-periodic wrap
x_N = Ad_U x_0.  The dual complex is ordered (vertex duals, edge duals) and
pairs with the primal one by the antidiagonal identity, so adjoints are
plain conjugated transposes.  The doubled space C + C_dual[-2] is where the
retractions compatible with the pairing live; their b-side blocks are the
adjoints of the a-side blocks and the axioms are verified as matrix
identities on construction.

Everything is exact when the twist matrix is rational (numpy object arrays
over Fraction); float twists switch the same code to float64 with an SVD
rank threshold where a kernel has to be computed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linal
from .kernel1d import Poly1


def _is_exact(a: np.ndarray) -> bool:
    return a.dtype == object


def _eye(n, exact: bool) -> np.ndarray:
    if exact:
        return np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)],
                        dtype=object)
    return np.eye(n)


def _zeros(n, m, exact: bool) -> np.ndarray:
    if exact:
        return np.array([[Fraction(0)] * m for _ in range(n)], dtype=object)
    return np.zeros((n, m))


def _inv(a: np.ndarray) -> np.ndarray:
    if _is_exact(a):
        return np.array(linal.inverse([list(r) for r in a]), dtype=object)
    return np.linalg.inv(a)


def _kernel(a: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Rows span the right null space; exact or SVD-thresholded."""
    if _is_exact(a):
        rows = linal.kernel_basis([list(r) for r in a])
        return (np.array(rows, dtype=object) if rows
                else np.zeros((0, a.shape[1]), dtype=object))
    u, s, vt = np.linalg.svd(a)
    cut = rtol * (s[0] if len(s) else 1.0)
    null = vt[[i for i in range(vt.shape[0]) if i >= len(s) or s[i] <= cut]]
    return null


def _max_abs(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    if _is_exact(a):
        return float(max(abs(x) for x in a.ravel()))
    return float(np.max(np.abs(a)))


@dataclass(frozen=True)
class PolygonComplex:
    """Circle cut into N cells, coefficients in R^n twisted by Ad_U."""

    N: int
    n: int
    ad: np.ndarray                  # n x n twist matrix
    positions: tuple = None         # t_0 = 0 < ... < t_{N-1} < t_N = 1

    def __post_init__(self):
        assert self.N >= 1
        if self.positions is None:
            object.__setattr__(self, "positions",
                               tuple(Fraction(k, self.N) for k in range(self.N + 1)))
        assert len(self.positions) == self.N + 1
        assert self.positions[0] == 0 and self.positions[-1] == 1
        for a, b in zip(self.positions, self.positions[1:]):
            assert a < b

    @property
    def exact(self) -> bool:
        return _is_exact(self.ad)

    @property
    def dim(self) -> int:
        return self.N * self.n

    def d0(self) -> np.ndarray:
        """Coboundary on degree-0 cochains: (dx)_k = x_{k+1} - x_k, x_N = Ad x_0."""
        N, n = self.N, self.n
        ex = self.exact
        D = _zeros(N * n, N * n, ex)
        I = _eye(n, ex)
        for k in range(N):
            D[k * n:(k + 1) * n, k * n:(k + 1) * n] = -I
            if k + 1 < N:
                D[k * n:(k + 1) * n, (k + 1) * n:(k + 2) * n] = I
            else:
                D[k * n:(k + 1) * n, 0:n] = D[k * n:(k + 1) * n, 0:n] + self.ad
        return D


def coboundary(c: PolygonComplex, x: np.ndarray) -> np.ndarray:
    """Degree-0 cochain to degree-1 cochain by the twisted cellular coboundary."""
    x = np.asarray(x)
    if x.shape != (c.dim,):
        raise ValueError("coboundary expects a degree-0 cochain (flattened)")
    return c.d0() @ x


# ---------------------------------------------------------------------------
# doubled retractions between cochain complexes


@dataclass
class CochainRetraction:
    """Retraction (i, p, K) between doubled twisted-cochain complexes.

    Primal blocks act on C^0 + C^1 (flattened, vertex block first); the dual
    blocks are their pairing adjoints, J M^T J with J the antidiagonal
    identity.  verify() checks the retraction axioms on the doubled space.
    """

    src: PolygonComplex
    tgt: PolygonComplex
    i0: np.ndarray       # C^0(tgt) -> C^0(src)
    i1: np.ndarray
    p0: np.ndarray       # C^0(src) -> C^0(tgt)
    p1: np.ndarray
    K: np.ndarray        # C^1(src) -> C^0(src)

    # -- primal assembled blocks ------------------------------------------
    def i_primal(self) -> np.ndarray:
        return _block2(self.i0, None, None, self.i1)

    def p_primal(self) -> np.ndarray:
        return _block2(self.p0, None, None, self.p1)

    def k_primal(self) -> np.ndarray:
        z = _zeros(self.K.shape[0], self.K.shape[0], _is_exact(self.K))
        z2 = _zeros(self.K.shape[1], self.K.shape[1], _is_exact(self.K))
        return _block2(z, self.K, None, z2)

    def d_mat(self, c: PolygonComplex) -> np.ndarray:
        d = c.d0()
        z = _zeros(c.dim, c.dim, c.exact)
        return _block2(z, None, d, z)

    # -- doubled maps -------------------------------------------------------
    def doubled(self):
        """(I, P, K, D_src, D_tgt) on C + C_dual with adjoint b-side blocks."""
        ip, pp, kp = self.i_primal(), self.p_primal(), self.k_primal()
        ds, dt = self.d_mat(self.src), self.d_mat(self.tgt)
        I = _blockdiag(ip, _adj(pp))
        P = _blockdiag(pp, _adj(ip))
        K = _blockdiag(kp, _adj(kp))
        DS = _blockdiag(ds, _adj(ds))
        DT = _blockdiag(dt, _adj(dt))
        return I, P, K, DS, DT

    def verify(self, tol: float = 1e-12):
        I, P, K, DS, DT = self.doubled()
        ns, nt = DS.shape[0], DT.shape[0]
        ex = _is_exact(I)
        checks = {
            "p.i = id": P @ I - _eye(nt, ex),
            "dK+Kd = id - i.p": DS @ K + K @ DS - _eye(ns, ex) + I @ P,
            "K.K = 0": K @ K,
            "K.i = 0": K @ I,
            "p.K = 0": P @ K,
            "chain map i": DS @ I - I @ DT,
            "chain map p": DT @ P - P @ DS,
        }
        for name, m in checks.items():
            err = _max_abs(np.asarray(m))
            if err > (0 if ex else tol):
                raise AssertionError(f"retraction axiom '{name}' fails by {err}")
        return True


def _block2(a, b, c, d) -> np.ndarray:
    """[[a, b], [c, d]] with None meaning a zero block of matching shape."""
    ref = next(m for m in (a, b, c, d) if m is not None)
    ex = _is_exact(ref)
    n0 = a.shape[0] if a is not None else b.shape[0]
    n1 = c.shape[0] if c is not None else (d.shape[0] if d is not None else 0)
    m0 = a.shape[1] if a is not None else (c.shape[1] if c is not None else 0)
    m1 = b.shape[1] if b is not None else (d.shape[1] if d is not None else 0)
    if a is None:
        a = _zeros(n0, m0, ex)
    if b is None:
        b = _zeros(n0, m1, ex)
    if c is None:
        c = _zeros(n1, m0, ex)
    if d is None:
        d = _zeros(n1, m1, ex)
    top = np.concatenate([a, b], axis=1)
    bot = np.concatenate([c, d], axis=1)
    return np.concatenate([top, bot], axis=0)


def _blockdiag(a, b) -> np.ndarray:
    return _block2(a, None, None, b)


def _adj(m: np.ndarray) -> np.ndarray:
    """Pairing adjoint J m^T J for the antidiagonal-identity pairing."""
    n_out, n_in = m.shape
    mt = m.T
    # J swaps the degree-0 and degree-1 halves
    h_in, h_out = n_in // 2, n_out // 2
    sw_in = np.concatenate([mt[:, h_out:], mt[:, :h_out]], axis=1)
    return np.concatenate([sw_in[h_in:, :], sw_in[:h_in, :]], axis=0)


# ---------------------------------------------------------------------------
# aggregation: merge edges [k, k+1] and [k+1, k+2]


def aggregation(c: PolygonComplex, k: int, kappa) -> CochainRetraction:
    """The edge-merging retraction agg_k^kappa from T_N onto T_{N-1} cochains.

    kappa in [0, 1] interpolates between the two one-sided collapses.  For
    k = N-1 (the merge across the base point) the printed maps are conjugated
    by the vertex-relabeling isomorphism, which carries the twist.
    """
    N, n = c.N, c.n
    if N < 2:
        raise ValueError("aggregation needs N >= 2")
    if not 0 <= k <= N - 1:
        raise ValueError("vertex index out of range")
    ex = c.exact
    kq = Fraction(kappa) if ex else float(kappa)
    if ex and not 0 <= kq <= 1:
        raise ValueError("kappa must lie in [0, 1]")
    tgt = PolygonComplex(N - 1, n, c.ad)
    if k == N - 1:
        rot_src = _rotation(c)
        rot_tgt = _rotation(tgt)
        base = _aggregation_plain(c, tgt, N - 2, kq)
        out = CochainRetraction(
            src=c, tgt=tgt,
            i0=_inv(rot_src[0]) @ base.i0 @ rot_tgt[0],
            i1=_inv(rot_src[1]) @ base.i1 @ rot_tgt[1],
            p0=_inv(rot_tgt[0]) @ base.p0 @ rot_src[0],
            p1=_inv(rot_tgt[1]) @ base.p1 @ rot_src[1],
            K=_inv(rot_src[0]) @ base.K @ rot_src[1])
        out.verify()
        return out
    return _aggregation_plain(c, tgt, k, kq)


def _aggregation_plain(c: PolygonComplex, tgt: PolygonComplex, k: int,
                       kq) -> CochainRetraction:
    N, n = c.N, c.n
    ex = c.exact
    one = Fraction(1) if ex else 1.0
    I = _eye(n, ex)

    i0 = _zeros(N * n, (N - 1) * n, ex)
    i1 = _zeros(N * n, (N - 1) * n, ex)
    p0 = _zeros((N - 1) * n, N * n, ex)
    p1 = _zeros((N - 1) * n, N * n, ex)
    K = _zeros(N * n, N * n, ex)

    def blk(M, r, cc, val):
        M[r * n:(r + 1) * n, cc * n:(cc + 1) * n] = \
            M[r * n:(r + 1) * n, cc * n:(cc + 1) * n] + val

    # inclusion on vertices: l <= k copy; vertex k+1 interpolates; l >= k+1 shift
    for l in range(0, k + 1):
        blk(i0, l, l, I)
    blk(i0, k + 1, k, I * (one - kq))
    if k + 1 <= N - 2:
        blk(i0, k + 1, k + 1, I * kq)
    else:
        # x_{k+1} on the target wraps: x_N = Ad x_0
        blk(i0, k + 1, 0, c.ad * kq)
    for l in range(k + 1, N - 1):
        blk(i0, l + 1, l, I)
    # inclusion on edges: merged edge splits kappa / (1 - kappa)
    for l in range(0, k):
        blk(i1, l, l, I)
    blk(i1, k, k, I * kq)
    blk(i1, k + 1, k, I * (one - kq))
    for l in range(k + 1, N - 1):
        blk(i1, l + 1, l, I)

    # projection on vertices: drop vertex k+1
    for l in range(0, k + 1):
        blk(p0, l, l, I)
    for l in range(k + 2, N):
        blk(p0, l - 1, l, I)
    # projection on edges: merge additively
    for l in range(0, k):
        blk(p1, l, l, I)
    blk(p1, k, k, I)
    blk(p1, k, k + 1, I)
    for l in range(k + 2, N):
        blk(p1, l - 1, l, I)

    # homotopy: edge difference feeds the dropped vertex
    blk(K, k + 1, k, I * (one - kq))
    blk(K, k + 1, k + 1, -I * kq)

    r = CochainRetraction(src=c, tgt=tgt, i0=i0, i1=i1, p0=p0, p1=p1, K=K)
    r.verify()
    return r


def _rotation(c: PolygonComplex):
    """Relabeling x'_l = x_{l+1} of vertices and edges; an iso of the twisted complex."""
    N, n = c.N, c.n
    ex = c.exact
    R0 = _zeros(N * n, N * n, ex)
    R1 = _zeros(N * n, N * n, ex)
    I = _eye(n, ex)
    for l in range(N - 1):
        R0[l * n:(l + 1) * n, (l + 1) * n:(l + 2) * n] = I
        R1[l * n:(l + 1) * n, (l + 1) * n:(l + 2) * n] = I
    R0[(N - 1) * n:, 0:n] = c.ad
    R1[(N - 1) * n:, 0:n] = c.ad
    return R0, R1


def compose_retractions(r1: CochainRetraction, r2: CochainRetraction) -> CochainRetraction:
    """(i1, p1, K1) then (i2, p2, K2):  (i1 i2, p2 p1, K1 + i1 K2 p1)."""
    if r1.tgt.N != r2.src.N:
        raise ValueError("retractions do not compose")
    out = CochainRetraction(
        src=r1.src, tgt=r2.tgt,
        i0=r1.i0 @ r2.i0, i1=r1.i1 @ r2.i1,
        p0=r2.p0 @ r1.p0, p1=r2.p1 @ r1.p1,
        K=r1.K + r1.i0 @ r2.K @ r1.p1)
    out.verify()
    return out


# ---------------------------------------------------------------------------
# minimal retraction for N = 1


@dataclass
class MinimalRetraction:
    """Retraction of C_U(T_1) onto the twisted cohomology g_U in both degrees.

    i embeds g_U, p projects orthogonally, K inverts (Ad - id) on the
    complement.  Doubling works exactly as for CochainRetraction.
    """

    complex: PolygonComplex
    basis: np.ndarray      # rows span g_U
    i0: np.ndarray
    p0: np.ndarray
    K: np.ndarray

    def verify(self, tol: float = 1e-12):
        ex = _is_exact(self.i0)
        n = self.complex.n
        d = np.asarray(self.complex.ad) - _eye(n, ex)
        checks = {
            "p.i = id": self.p0 @ self.i0 - _eye(self.i0.shape[1], ex),
            "Kd = id - ip (deg 0)": self.K @ d - _eye(n, ex) + self.i0 @ self.p0,
            "dK = id - ip (deg 1)": d @ self.K - _eye(n, ex) + self.i0 @ self.p0,
            "K.i = 0": self.K @ self.i0,
            "p.K = 0": self.p0 @ self.K,
        }
        for name, m in checks.items():
            err = _max_abs(np.asarray(m))
            if err > (0 if ex else tol):
                raise AssertionError(f"minimal retraction axiom '{name}' fails by {err}")
        return True


class RankDecisionError(ArithmeticError):
    """The float kernel of (Ad - id) sits too close to the SVD threshold."""


def minimal_retraction(c: PolygonComplex, rtol: float = 1e-9) -> MinimalRetraction:
    """Split g = g_U + g_U^perp and invert (Ad - id) on the complement."""
    if c.N != 1:
        raise ValueError("minimal retraction is defined on the one-cell complex")
    n = c.n
    ex = c.exact
    d = np.asarray(c.ad) - _eye(n, ex)
    ker = _kernel(d, rtol)
    if not ex:
        s = np.linalg.svd(d, compute_uv=False)
        near = [x for x in s if rtol * s[0] * 0.1 < x < rtol * s[0] * 10]
        if near:
            raise RankDecisionError(f"singular values {near} straddle the threshold")
    m = ker.shape[0]
    if ex:
        i0 = np.array([[ker[j][i] for j in range(m)] for i in range(n)], dtype=object) \
            if m else np.zeros((n, 0), dtype=object)
        gram = np.array(linal.mat_mul([list(r) for r in ker],
                                      [list(r) for r in i0]), dtype=object) \
            if m else np.zeros((0, 0), dtype=object)
        p0 = (_inv(gram) @ ker) if m else np.zeros((0, n), dtype=object)
    else:
        i0 = ker.T
        p0 = np.linalg.pinv(i0)
    # orthogonal projector onto the complement, then invert d there
    proj = _eye(n, ex) - i0 @ p0
    if ex:
        # solve d y = (id - P) x with y in the complement: d restricted is invertible
        A = [list(r) for r in d]
        cols = []
        rhsM = proj
        for jcol in range(n):
            rhs = [rhsM[i][jcol] for i in range(n)]
            sol = _solve_in_complement(A, rhs, ker)
            cols.append(sol)
        K = np.array([[cols[j][i] for j in range(n)] for i in range(n)], dtype=object)
    else:
        K = np.linalg.pinv(d) @ proj
    out = MinimalRetraction(complex=c, basis=ker, i0=i0, p0=p0, K=K)
    out.verify()
    return out


def _solve_in_complement(A, rhs, ker):
    """Solution of A y = rhs constrained to be pairing-orthogonal to ker(A)."""
    M = [list(r) for r in A] + [list(kv) for kv in ker]
    b = list(rhs) + [Fraction(0)] * len(ker)
    sol = linal.solve(M, b)
    if sol is None:
        raise ArithmeticError("inconsistent system in minimal retraction")
    return sol


# ---------------------------------------------------------------------------
# the continuum retraction: interpolation / evaluation / explicit homotopy


@dataclass(frozen=True)
class CellForm:
    """Piecewise-polynomial form on the cells of a PolygonComplex.

    f holds the 0-form components per cell (n polynomials each), g the
    1-form coefficient.  Rational coefficients only; continuity of f across
    vertices (with the twisted wrap) is what the retraction identities need
    and is the caller's responsibility for hand-built data.
    """

    complex: PolygonComplex
    f: tuple
    g: tuple

    def __add__(self, o: "CellForm") -> "CellForm":
        return CellForm(self.complex,
                        tuple(tuple(a + b for a, b in zip(fa, fb))
                              for fa, fb in zip(self.f, o.f)),
                        tuple(tuple(a + b for a, b in zip(ga, gb))
                              for ga, gb in zip(self.g, o.g)))

    def __sub__(self, o: "CellForm") -> "CellForm":
        return self + o * Fraction(-1)

    def __mul__(self, s) -> "CellForm":
        return CellForm(self.complex,
                        tuple(tuple(a * Fraction(s) for a in fa) for fa in self.f),
                        tuple(tuple(a * Fraction(s) for a in ga) for ga in self.g))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return (all(a.is_zero() for fa in self.f for a in fa)
                and all(a.is_zero() for ga in self.g for a in ga))

    def f_continuous(self) -> bool:
        c = self.complex
        for k in range(c.N):
            t_next = c.positions[k + 1]
            right = [self.f[k][i](t_next) for i in range(c.n)]
            if k + 1 < c.N:
                left = [self.f[k + 1][i](t_next) for i in range(c.n)]
            else:
                x0 = [self.f[0][i](c.positions[0]) for i in range(c.n)]
                left = list(np.asarray(c.ad) @ np.array(x0, dtype=object))
            if right != left:
                return False
        return True


def zero_cellform(c: PolygonComplex) -> CellForm:
    z = tuple(tuple(Poly1() for _ in range(c.n)) for _ in range(c.N))
    return CellForm(c, z, z)


@dataclass
class PolygonSampling:
    """The retraction (i, p, K): piecewise forms <-> cellular cochains.

    i interpolates linearly, p samples vertices and integrates edges, K is
    the per-cell primitive corrected to vanish at both cell endpoints.  The
    doubled, pairing-compatible retraction has these on the a-side and their
    pairing adjoints on the b-side; i_dual below realizes the only adjoint
    needed concretely (dual cochains out of a form, by integration).
    """

    complex: PolygonComplex

    def include(self, x: np.ndarray) -> CellForm:
        c = self.complex
        N, n = c.N, c.n
        x = np.asarray(x, dtype=object)
        fv, gv = [], []
        for k in range(N):
            t0, t1 = c.positions[k], c.positions[k + 1]
            dt = t1 - t0
            xk = x[k * n:(k + 1) * n]
            if k + 1 < N:
                xk1 = x[(k + 1) * n:(k + 2) * n]
            else:
                xk1 = np.asarray(c.ad) @ x[0:n]
            xe = x[(N + k) * n:(N + k + 1) * n]
            up = Poly1([-t0, 1]) * Fraction(1, 1)
            down = Poly1([t1, -1])
            fv.append(tuple(down * (Fraction(xk[i]) / dt) + up * (Fraction(xk1[i]) / dt)
                            for i in range(n)))
            gv.append(tuple(Poly1.const(Fraction(xe[i]) / dt) for i in range(n)))
        return CellForm(c, tuple(fv), tuple(gv))

    def project(self, w: CellForm) -> np.ndarray:
        c = self.complex
        N, n = c.N, c.n
        out = [Fraction(0)] * (2 * N * n)
        for k in range(N):
            t0, t1 = c.positions[k], c.positions[k + 1]
            for i in range(n):
                out[k * n + i] = w.f[k][i](t0)
                out[(N + k) * n + i] = w.g[k][i].integrate(t0, t1)
        return np.array(out, dtype=object)

    def homotopy(self, w: CellForm) -> CellForm:
        c = self.complex
        N, n = c.N, c.n
        fv = []
        for k in range(N):
            t0, t1 = c.positions[k], c.positions[k + 1]
            dt = t1 - t0
            comp = []
            for i in range(n):
                g = w.g[k][i]
                F = g.integ()
                prim = F - Poly1.const(F(t0))
                total = g.integrate(t0, t1)
                comp.append(prim - Poly1([-t0, 1]) * (total / dt))
            fv.append(tuple(comp))
        zg = tuple(tuple(Poly1() for _ in range(n)) for _ in range(N))
        return CellForm(c, tuple(fv), zg)

    def differential(self, w: CellForm) -> CellForm:
        c = self.complex
        zf = tuple(tuple(Poly1() for _ in range(c.n)) for _ in range(c.N))
        return CellForm(c, zf,
                        tuple(tuple(p.deriv() for p in fk) for fk in w.f))

    def i_dual(self, w: CellForm) -> np.ndarray:
        """Adjoint of `include` w.r.t. the Poincare / intersection pairings."""
        c = self.complex
        N, n = c.N, c.n
        out = [Fraction(0)] * (2 * N * n)
        for k in range(N):
            for i in range(n):
                e = np.zeros(2 * N * n, dtype=object)
                e[:] = Fraction(0)
                e[k * n + i] = Fraction(1)
                out_edge = poincare_pairing(w, self.include(e))
                # pairs with the dual edge e^v_{k-1,k}
                out[(N + k) * n + i] = out_edge
                e[k * n + i] = Fraction(0)
                e[(N + k) * n + i] = Fraction(1)
                out[k * n + i] = poincare_pairing(w, self.include(e))
        return np.array(out, dtype=object)

    def verify(self):
        c = self.complex
        N, n = c.N, c.n
        # p.i = id on the cochain basis
        for j in range(2 * N * n):
            e = np.array([Fraction(int(t == j)) for t in range(2 * N * n)], dtype=object)
            got = self.project(self.include(e))
            assert all(a == b for a, b in zip(got, e)), "p.i != id"
            hk = self.homotopy(self.include(e))
            assert hk.is_zero(), "K.i != 0"
        # remaining identities on a spanning probe set of degree <= 3
        for w in _probe_forms(c):
            assert w.f_continuous()
            lhs = (self.differential(self.homotopy(w))
                   + self.homotopy(self.differential(w)))
            rhs = w - self.include(self.project(w))
            assert (lhs - rhs).is_zero(), "dK + Kd != id - ip"
            kk = self.homotopy(self.homotopy(w))
            assert kk.is_zero(), "K^2 != 0"
            pk = self.project(self.homotopy(w))
            assert all(x == 0 for x in pk), "p.K != 0"
        return True


def poincare_pairing(a: CellForm, b: CellForm):
    """integral over the circle of a ^ b with the Euclidean coefficient metric."""
    c = a.complex
    tot = Fraction(0)
    for k in range(c.N):
        t0, t1 = c.positions[k], c.positions[k + 1]
        for i in range(c.n):
            tot += (a.f[k][i] * b.g[k][i] + a.g[k][i] * b.f[k][i]).integrate(t0, t1)
    return tot


def _probe_forms(c: PolygonComplex):
    """Continuous piecewise data spanning degrees <= 3: twisted hats, cell
    bumps vanishing at the cell ends, and free 1-form pieces."""
    N, n = c.N, c.n
    probes = []
    for j in range(N * n):
        e = np.array([Fraction(int(t == j)) for t in range(2 * N * n)], dtype=object)
        probes.append(PolygonSampling(c).include(e))     # twisted hat functions
    for k in range(N):
        t0, t1 = c.positions[k], c.positions[k + 1]
        bump = Poly1([-t0, 1]) * Poly1([t1, -1])
        for i in range(n):
            for extra in (Poly1.const(1), Poly1([0, 1])):
                fv = [[Poly1() for _ in range(n)] for _ in range(N)]
                fv[k][i] = bump * extra
                gv = tuple(tuple(Poly1() for _ in range(n)) for _ in range(N))
                probes.append(CellForm(c, tuple(tuple(r) for r in fv), gv))
            for extra in (Poly1.const(1), Poly1([0, 1]), Poly1([0, 0, 1]), Poly1([0, 0, 0, 1])):
                gvl = [[Poly1() for _ in range(n)] for _ in range(N)]
                gvl[k][i] = extra
                fz = tuple(tuple(Poly1() for _ in range(n)) for _ in range(N))
                probes.append(CellForm(c, fz, tuple(tuple(r) for r in gvl)))
    return probes


def polygon_retraction(c: PolygonComplex) -> PolygonSampling:
    """Interpolation/evaluation/homotopy retraction onto polygon cochains.

    Verifies the retraction axioms exactly on construction (rational data).
    """
    if not c.exact:
        raise ValueError("the continuum retraction is exact-only; use rational data")
    s = PolygonSampling(c)
    s.verify()
    return s
