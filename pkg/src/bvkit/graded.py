"""Graded index bookkeeping, supermatrices and the Berezinian."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .scalars import HbarScalar, as_hbar, HBAR_ONE


@dataclass(frozen=True, order=True)
class Generator:
    """A named coordinate with an integer ghost number; parity is derived."""

    name: str
    ghost: int = 0

    @property
    def parity(self) -> int:
        return self.ghost & 1

    @property
    def is_odd(self) -> bool:
        return bool(self.ghost & 1)

    def __repr__(self):
        return f"{self.name}[{self.ghost}]"


def superdimension(basis: Sequence[Generator]) -> int:
    """Signed dimension count sum_i (-1)^{ghost_i}."""
    return sum((-1) ** g.ghost for g in basis)


class OddBlockSingular(ArithmeticError):
    """The odd-odd block of a supermatrix is singular."""


def _det_bareiss(m: list[list[HbarScalar]]) -> HbarScalar:
    """Fraction-free determinant; all divisions are exact in the Laurent ring."""
    n = len(m)
    if n == 0:
        return HBAR_ONE
    a = [row[:] for row in m]
    sign = 1
    prev = HBAR_ONE
    for k in range(n - 1):
        if a[k][k].is_zero():
            for r in range(k + 1, n):
                if not a[r][k].is_zero():
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return HbarScalar.zero()
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                a[i][j] = num.div_exact(prev)
        prev = a[k][k]
    det = a[n - 1][n - 1]
    return det if sign > 0 else -det


def _adjugate(m: list[list[HbarScalar]]) -> list[list[HbarScalar]]:
    n = len(m)
    if n == 0:
        return []
    adj = [[HbarScalar.zero()] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[m[r][c] for c in range(n) if c != j]
                     for r in range(n) if r != i]
            d = _det_bareiss(minor)
            adj[j][i] = d if (i + j) % 2 == 0 else -d
    return adj


def _matmul(a, b):
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    out = [[HbarScalar.zero()] * m for _ in range(n)]
    for i in range(n):
        for j in range(m):
            s = HbarScalar.zero()
            for t in range(k):
                s = s + a[i][t] * b[t][j]
            out[i][j] = s
    return out


class SuperMatrix:
    """Matrix with parity-graded row/column indices and HbarScalar entries.

    The block structure (A: even-even, B: even-odd, C: odd-even, D: odd-odd)
    is read off from the generator parities.  Entries are plain scalars; the
    'odd' blocks of a formal supermatrix are represented numerically, which
    is all the Berezinian formula consumes.
    """

    def __init__(self, rows: Sequence[Generator], cols: Sequence[Generator],
                 entries):
        self.rows = tuple(rows)
        self.cols = tuple(cols)
        self.entries = [[as_hbar(entries[i][j]) for j in range(len(cols))]
                        for i in range(len(rows))]

    def _block(self, rp: int, cp: int) -> list[list[HbarScalar]]:
        ri = [i for i, g in enumerate(self.rows) if g.parity == rp]
        ci = [j for j, g in enumerate(self.cols) if g.parity == cp]
        return [[self.entries[i][j] for j in ci] for i in ri]

    @property
    def even_dim(self) -> tuple[int, int]:
        return (sum(1 for g in self.rows if g.parity == 0),
                sum(1 for g in self.cols if g.parity == 0))

    @property
    def odd_dim(self) -> tuple[int, int]:
        return (sum(1 for g in self.rows if g.parity == 1),
                sum(1 for g in self.cols if g.parity == 1))

    def is_parity_preserving(self) -> bool:
        for i, gr in enumerate(self.rows):
            for j, gc in enumerate(self.cols):
                if gr.parity != gc.parity and not self.entries[i][j].is_zero():
                    return False
        return True

    def __matmul__(self, other: "SuperMatrix") -> "SuperMatrix":
        if self.cols != other.rows:
            raise ValueError("generator mismatch in supermatrix product")
        return SuperMatrix(self.rows, other.cols,
                           _matmul(self.entries, other.entries))

    @staticmethod
    def identity(gens: Sequence[Generator]) -> "SuperMatrix":
        n = len(gens)
        e = [[HBAR_ONE if i == j else HbarScalar.zero() for j in range(n)]
             for i in range(n)]
        return SuperMatrix(gens, gens, e)


def berezinian(m: SuperMatrix) -> HbarScalar:
    """Ber(m) = det(A - B D^{-1} C) / det(D); det(A) for purely even m.

    Multiplicative under composition of parity-preserving supermatrices.
    Raises OddBlockSingular when D is singular.
    """
    if m.even_dim[0] != m.even_dim[1] or m.odd_dim[0] != m.odd_dim[1]:
        raise ValueError("supermatrix must be square per parity block")
    A = m._block(0, 0)
    B = m._block(0, 1)
    C = m._block(1, 0)
    D = m._block(1, 1)
    nA, nD = len(A), len(D)
    if nD == 0:
        return _det_bareiss(A)
    detD = _det_bareiss(D)
    if detD.is_zero():
        raise OddBlockSingular("odd block singular")
    if nA == 0:
        return HBAR_ONE.div_exact(detD)
    # A - B D^{-1} C, cleared of denominators:  M = A*detD - B*adj(D)*C
    adjD = _adjugate(D)
    BDC = _matmul(_matmul(B, adjD), C)
    M = [[A[i][j] * detD - BDC[i][j] for j in range(nA)] for i in range(nA)]
    num = _det_bareiss(M)
    den = detD ** nA * detD
    return num.div_exact(den)
