"""Finite-dimensional Lie algebra data with invariant metric, and holonomies
acting in the adjoint representation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class LieAlgebra:
    """Structure constants f[a][b][c] with [x, y]^a = f^a_{bc} x^b y^c and an
    invariant metric kappa.  All defining identities are asserted on
    construction; exact when the data is exact."""

    name: str
    f: np.ndarray       # (n, n, n)
    kappa: np.ndarray   # (n, n)

    def __post_init__(self):
        n = self.dim
        f, k = self.f, self.kappa
        tol = 0.0 if f.dtype == object else 1e-12

        def chk(val, msg):
            err = abs(val)
            if (err > tol) if tol else bool(val):
                raise ValueError(f"{self.name}: {msg} (residual {val})")

        for a in range(n):
            for b in range(n):
                chk(k[a][b] - k[b][a], "metric not symmetric")
                for c in range(n):
                    chk(f[a][b][c] + f[a][c][b], "antisymmetry fails")
        # Jacobi: [x,[y,z]] + cyclic = 0 on basis triples
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    for a in range(n):
                        s = sum(self.f[a][b][e] * self.f[e][c][d]
                                + self.f[a][c][e] * self.f[e][d][b]
                                + self.f[a][d][e] * self.f[e][b][c]
                                for e in range(n))
                        chk(s, "Jacobi fails")
        # invariance <[x,y],z> + <y,[x,z]> = 0
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    s = sum(self.f[a][b][c] * k[a][d] + k[c][a] * self.f[a][b][d]
                            for a in range(n))
                    chk(s, "metric not invariant")
        if self.f.dtype == object:
            from . import linal
            if linal.det([list(r) for r in k]) == 0:
                raise ValueError("metric degenerate")
        else:
            if abs(np.linalg.det(np.asarray(k, dtype=float))) < 1e-12:
                raise ValueError("metric degenerate")

    @property
    def dim(self) -> int:
        return self.f.shape[0]

    @property
    def rank(self) -> int:
        # built-ins only: dimension of a Cartan subalgebra
        return self.dim if self.is_abelian else 1

    @property
    def is_abelian(self) -> bool:
        if self.f.dtype == object:
            return all(not x for x in self.f.ravel())
        return bool(np.all(self.f == 0))

    def ad(self, x) -> np.ndarray:
        """(ad_x)_{a d} = f^a_{b d} x^b."""
        x = np.asarray(x)
        n = self.dim
        return np.array([[sum(self.f[a][b][d] * x[b] for b in range(n))
                          for d in range(n)] for a in range(n)])

    def bracket(self, x, y) -> np.ndarray:
        return self.ad(x) @ np.asarray(y)

    def inner(self, x, y):
        return np.asarray(x) @ self.kappa @ np.asarray(y)


def abelian(n: int) -> LieAlgebra:
    f = np.array([[[Fraction(0)] * n for _ in range(n)] for _ in range(n)],
                 dtype=object)
    k = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)],
                 dtype=object)
    return LieAlgebra("abelian", f, k)


def su2(exact: bool = True) -> LieAlgebra:
    """su(2) ~ so(3) in the orthonormal basis: f^a_{bc} = epsilon_{abc}, kappa = id."""
    n = 3
    eps = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
           (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}
    if exact:
        f = np.array([[[Fraction(eps.get((a, b, c), 0)) for c in range(n)]
                       for b in range(n)] for a in range(n)], dtype=object)
        k = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)],
                     dtype=object)
    else:
        f = np.zeros((n, n, n))
        for (a, b, c), v in eps.items():
            f[a][b][c] = v
        k = np.eye(n)
    return LieAlgebra("su2", f, k)


@dataclass(frozen=True)
class Holonomy:
    """Adjoint action of a group element; must preserve metric and bracket."""

    algebra: LieAlgebra
    ad_u: np.ndarray

    def __post_init__(self):
        L, U = self.algebra, np.asarray(self.ad_u)
        n = L.dim
        exact = U.dtype == object and L.f.dtype == object
        tol = 0.0 if exact else 1e-12

        def chk(val, msg):
            if (abs(val) > tol) if tol else bool(val):
                raise ValueError(f"holonomy: {msg} (residual {val})")

        g = U.T @ np.asarray(L.kappa) @ U - np.asarray(L.kappa)
        for v in np.asarray(g).ravel():
            chk(v, "does not preserve the metric")
        # Ad[x, y] = [Ad x, Ad y] on basis pairs
        for b in range(n):
            for c in range(n):
                eb = U[:, b]
                ec = U[:, c]
                lhs = U @ np.array([L.f[a][b][c] for a in range(n)])
                rhs = L.bracket(eb, ec)
                for v in np.asarray(lhs - rhs).ravel():
                    chk(v, "does not preserve the bracket")


def identity_holonomy(L: LieAlgebra) -> Holonomy:
    n = L.dim
    if L.f.dtype == object:
        ad = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)],
                      dtype=object)
    else:
        ad = np.eye(n)
    return Holonomy(L, ad)


def su2_rotation(axis: int, cos, sin, exact: bool = True) -> Holonomy:
    """Rotation about a coordinate axis; rational (cos, sin) on the unit
    circle give an exact holonomy (e.g. 3/5, 4/5)."""
    if exact:
        c, s = Fraction(cos), Fraction(sin)
        if c * c + s * s != 1:
            raise ValueError("cos^2 + sin^2 must be exactly 1 in exact mode")
        one, zero = Fraction(1), Fraction(0)
    else:
        c, s = float(cos), float(sin)
        one, zero = 1.0, 0.0
    i, j = [t for t in range(3) if t != axis]
    m = [[one if a == b else zero for b in range(3)] for a in range(3)]
    m[i][i], m[i][j], m[j][i], m[j][j] = c, -s, s, c
    ad = np.array(m, dtype=object if exact else float)
    return Holonomy(su2(exact=exact), ad)


def su2_axis_angle(axis_vec, angle: float) -> Holonomy:
    """Rodrigues rotation about an arbitrary axis (float backend)."""
    u = np.asarray(axis_vec, dtype=float)
    u = u / np.linalg.norm(u)
    K = np.array([[0, -u[2], u[1]], [u[2], 0, -u[0]], [-u[1], u[0], 0]])
    ad = np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * (K @ K)
    return Holonomy(su2(exact=False), ad)
