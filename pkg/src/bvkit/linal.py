"""Small exact linear algebra over Fraction/QQi, list-of-lists representation.

numpy handles the float backend elsewhere; these routines exist so that rank
decisions and inverses in the rational backend are exact, never thresholded.
"""

from __future__ import annotations

from fractions import Fraction


def mat_zero(n, m, zero=Fraction(0)):
    return [[zero] * m for _ in range(n)]


def mat_identity(n, one=Fraction(1), zero=Fraction(0)):
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    n, k = len(a), len(b)
    m = len(b[0]) if k else 0
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            s = None
            for t in range(k):
                p = a[i][t] * b[t][j]
                s = p if s is None else s + p
            row.append(s if s is not None else Fraction(0))
        out.append(row)
    return out


def mat_vec(a, v):
    out = []
    for i in range(len(a)):
        s = Fraction(0)
        for j in range(len(v)):
            s = s + a[i][j] * v[j]
        out.append(s)
    return out


def mat_t(a):
    return [list(col) for col in zip(*a)] if a else []


def rref(a):
    """Reduced row echelon form; returns (R, pivot_columns)."""
    R = [row[:] for row in a]
    n = len(R)
    m = len(R[0]) if n else 0
    pivots = []
    r = 0
    for c in range(m):
        pr = None
        for i in range(r, n):
            if R[i][c]:
                pr = i
                break
        if pr is None:
            continue
        R[r], R[pr] = R[pr], R[r]
        pv = R[r][c]
        R[r] = [x / pv for x in R[r]]
        for i in range(n):
            if i != r and R[i][c]:
                f = R[i][c]
                R[i] = [x - f * y for x, y in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == n:
            break
    return R, pivots


def row_space_basis(a):
    R, pivots = rref(a)
    return [R[i] for i in range(len(pivots))]


def kernel_basis(a):
    """Basis of the right null space {x : a x = 0}."""
    n = len(a)
    m = len(a[0]) if n else 0
    R, pivots = rref(a)
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * m
        v[f] = Fraction(1)
        for r, c in enumerate(pivots):
            v[c] = -R[r][f]
        basis.append(v)
    return basis


def solve(a, b):
    """One solution x of a x = b, or None if inconsistent."""
    n = len(a)
    m = len(a[0]) if n else 0
    aug = [a[i][:] + [b[i]] for i in range(n)]
    R, pivots = rref(aug)
    if m in pivots:
        return None
    x = [Fraction(0)] * m
    for r, c in enumerate(pivots):
        x[c] = R[r][m]
    return x


def inverse(a):
    n = len(a)
    aug = [a[i][:] + mat_identity(n)[i] for i in range(n)]
    R, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [R[i][n:] for i in range(n)]


def det(a):
    n = len(a)
    if n == 0:
        return Fraction(1)
    M = [row[:] for row in a]
    d = Fraction(1)
    for c in range(n):
        pr = None
        for i in range(c, n):
            if M[i][c]:
                pr = i
                break
        if pr is None:
            return Fraction(0)
        if pr != c:
            M[c], M[pr] = M[pr], M[c]
            d = -d
        d = d * M[c][c]
        inv = 1 / M[c][c]
        for i in range(c + 1, n):
            if M[i][c]:
                f = M[i][c] * inv
                M[i] = [x - f * y for x, y in zip(M[i], M[c])]
    return d


def in_span(rows, v) -> bool:
    if not rows:
        return not any(v)
    return solve(mat_t(rows), list(v)) is not None


def intersect_row_spaces(a_rows, b_rows):
    """Basis of span(a) ∩ span(b), rows over Fraction."""
    if not a_rows or not b_rows:
        return []
    m = len(a_rows[0])
    # x in both spans: x = u A = v B; solve [A^T | -B^T] (u,v)^T = 0
    big = [[a_rows[r][c] for r in range(len(a_rows))] +
           [-b_rows[r][c] for r in range(len(b_rows))] for c in range(m)]
    out = []
    for w in kernel_basis(big):
        u = w[:len(a_rows)]
        x = [sum(u[r] * a_rows[r][c] for r in range(len(a_rows))) for c in range(m)]
        if any(x):
            out.append(x)
    return row_space_basis(out)


def complement_in_span(sub_rows, space_rows):
    """Rows of `space` extending span(sub) to span(space); greedy, deterministic."""
    cur = [r[:] for r in sub_rows]
    out = []
    for v in space_rows:
        if not in_span(cur, v):
            out.append(list(v))
            cur.append(list(v))
    return out
