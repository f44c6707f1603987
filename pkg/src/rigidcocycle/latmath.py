"""Small exact lattice utilities: HNF, Smith form with transforms, LLL,
Fincke-Pohst enumeration. Everything works over int / Fraction; dimensions in
this package never exceed ~20, so textbook algorithms are fine.
"""

from __future__ import annotations

import math
from fractions import Fraction


# -- Hermite normal form ------------------------------------------------------


def hnf_rows(rows):
    """Row Hermite normal form of the lattice generated by integer rows.

    Returns a list of nonzero rows, upper-echelon, positive pivots, entries
    above each pivot reduced into [0, pivot).
    """
    A = [list(map(int, r)) for r in rows]
    if not A:
        return []
    m = len(A[0])
    res = []
    col = 0
    while col < m and A:
        # gcd-eliminate the current column
        while True:
            nz = [i for i, r in enumerate(A) if r[col] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda i: abs(A[i][col]))
            i0 = nz[0]
            for i in nz[1:]:
                q = A[i][col] // A[i0][col]
                A[i] = [x - q * y for x, y in zip(A[i], A[i0])]
        nz = [i for i, r in enumerate(A) if r[col] != 0]
        if nz:
            i0 = nz[0]
            piv = A.pop(i0)
            if piv[col] < 0:
                piv = [-x for x in piv]
            res.append(piv)
        col += 1
    # reduce above pivots
    for k in range(len(res) - 1, -1, -1):
        pcol = next(j for j, x in enumerate(res[k]) if x != 0)
        for i in range(k):
            q = res[i][pcol] // res[k][pcol]
            if q:
                res[i] = [x - q * y for x, y in zip(res[i], res[k])]
    return res


def solve_integer(basis_rows, target):
    """Express target as an integer combination of basis rows, or None.

    basis_rows: list of n linearly independent rational vectors of length m.
    """
    coeffs = solve_rational(basis_rows, target)
    if coeffs is None:
        return None
    out = []
    for c in coeffs:
        c = Fraction(c)
        if c.denominator != 1:
            return None
        out.append(int(c))
    return out


def solve_rational(basis_rows, target):
    """Solve x * B = target over Q for a full-row-rank B, or None."""
    n = len(basis_rows)
    m = len(basis_rows[0])
    # augmented system: columns are equations
    M = [[Fraction(basis_rows[i][j]) for i in range(n)] for j in range(m)]
    t = [Fraction(x) for x in target]
    piv_rows = []
    x = [Fraction(0)] * n
    rows = list(range(m))
    colptr = 0
    for colptr in range(n):
        pr = None
        for r in rows:
            if r not in piv_rows and M[r][colptr] != 0:
                pr = r
                break
        if pr is None:
            return None
        piv_rows.append(pr)
        inv = 1 / M[pr][colptr]
        M[pr] = [v * inv for v in M[pr]]
        t[pr] *= inv
        for r in range(m):
            if r != pr and M[r][colptr] != 0:
                f = M[r][colptr]
                M[r] = [v - f * w for v, w in zip(M[r], M[pr])]
                t[r] -= f * t[pr]
    for k, pr in enumerate(piv_rows):
        x[k] = t[pr]
    # consistency check
    for j in range(m):
        s = sum(x[i] * Fraction(basis_rows[i][j]) for i in range(n))
        if s != Fraction(target[j]):
            return None
    return x


# -- Smith normal form with transforms ---------------------------------------


def smith_normal_form(A):
    """Return (U, S, V) with U*A*V = S diagonal, U, V unimodular, ints.

    A is a list of lists of ints (n x m).
    """
    S = [list(map(int, row)) for row in A]
    n = len(S)
    m = len(S[0]) if n else 0
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    V = [[int(i == j) for j in range(m)] for i in range(m)]

    def row_op(i, k, q):  # row i -= q * row k
        S[i] = [x - q * y for x, y in zip(S[i], S[k])]
        U[i] = [x - q * y for x, y in zip(U[i], U[k])]

    def col_op(j, k, q):  # col j -= q * col k
        for r in range(n):
            S[r][j] -= q * S[r][k]
        for r in range(m):
            V[r][j] -= q * V[r][k]

    def swap_rows(i, k):
        S[i], S[k] = S[k], S[i]
        U[i], U[k] = U[k], U[i]

    def swap_cols(j, k):
        for r in range(n):
            S[r][j], S[r][k] = S[r][k], S[r][j]
        for r in range(m):
            V[r][j], V[r][k] = V[r][k], V[r][j]

    t = 0
    while t < min(n, m):
        # find a pivot
        piv = None
        for i in range(t, n):
            for j in range(t, m):
                if S[i][j] != 0:
                    if piv is None or abs(S[i][j]) < abs(S[piv[0]][piv[1]]):
                        piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        while True:
            done = True
            for i in range(t + 1, n):
                if S[i][t] != 0:
                    q = S[i][t] // S[t][t]
                    row_op(i, t, q)
                    if S[i][t] != 0:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, m):
                if S[t][j] != 0:
                    q = S[t][j] // S[t][t]
                    col_op(j, t, q)
                    if S[t][j] != 0:
                        swap_cols(t, j)
                        done = False
            if done:
                break
        # divisibility fix-up
        redo = False
        for i in range(t + 1, n):
            for j in range(t + 1, m):
                if S[i][j] % S[t][t] != 0:
                    S[t] = [x + y for x, y in zip(S[t], S[i])]
                    U[t] = [x + y for x, y in zip(U[t], U[i])]
                    redo = True
                    break
            if redo:
                break
        if redo:
            continue
        if S[t][t] < 0:
            S[t] = [-x for x in S[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return U, S, V


# -- LLL ----------------------------------------------------------------------


def lll_reduce(basis, delta=Fraction(99, 100)):
    """LLL-reduce integer/rational row vectors; returns the new basis."""
    B = [[Fraction(x) for x in row] for row in basis]
    n = len(B)

    def gso():
        Bs = []
        mu = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            v = list(B[i])
            for j in range(i):
                d = _dot(Bs[j], Bs[j])
                mu[i][j] = _dot(B[i], Bs[j]) / d if d else Fraction(0)
                v = [a - mu[i][j] * b for a, b in zip(v, Bs[j])]
            Bs.append(v)
        return Bs, mu

    Bs, mu = gso()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = _round_half(mu[k][j])
            if q:
                B[k] = [a - q * b for a, b in zip(B[k], B[j])]
                Bs, mu = gso()
        lhs = _dot(Bs[k], Bs[k])
        rhs = (delta - mu[k][k - 1] ** 2) * _dot(Bs[k - 1], Bs[k - 1])
        if lhs >= rhs:
            k += 1
        else:
            B[k], B[k - 1] = B[k - 1], B[k]
            Bs, mu = gso()
            k = max(k - 1, 1)
    return B


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _round_half(x: Fraction) -> int:
    return int((2 * x + 1) // 2) if x >= 0 else -int((2 * (-x) + 1) // 2)


# -- Fincke-Pohst enumeration -------------------------------------------------


def rational_cholesky(G):
    """q(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2 decomposition over Q.

    G must be symmetric positive definite with Fraction entries.
    """
    n = len(G)
    Q = [[Fraction(G[i][j]) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            Q[j][i] = Q[i][j]
            Q[i][j] = Q[i][j] / Q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                Q[k][l] -= Q[k][i] * Q[i][l]
    for i in range(n):
        if Q[i][i] <= 0:
            raise ValueError("form is not positive definite")
    return Q


def fincke_pohst(G, bound):
    """All integer vectors x != 0 with x^T G x <= bound (one of each +-pair).

    G: symmetric positive definite matrix (Fraction or float entries); bound
    numeric. Works in float with a small slack, so the output may contain a few
    vectors slightly beyond the bound; callers filter by an exact criterion.
    """
    n = len(G)
    Gf = [[float(G[i][j]) for j in range(n)] for i in range(n)]
    Q = _float_cholesky(Gf)
    slack = 1e-9 * float(bound) + 1e-9
    x = [0] * n
    out = []

    def recurse(i, remaining):
        c = 0.0
        for j in range(i + 1, n):
            if x[j]:
                c += Q[i][j] * x[j]
        lim = (remaining + slack) / Q[i][i]
        if lim < 0:
            return
        s = math.sqrt(lim)
        lo = math.ceil(-c - s - 1e-12)
        hi = math.floor(-c + s + 1e-12)
        for xi in range(lo, hi + 1):
            x[i] = xi
            used = Q[i][i] * (xi + c) ** 2
            if used > remaining + slack:
                continue
            if i == 0:
                if any(x) and _positive_rep(x):
                    out.append(tuple(x))
            else:
                recurse(i - 1, remaining - used)
        x[i] = 0

    recurse(n - 1, float(bound))
    out.sort()
    return out


def fincke_pohst_affine(G, center, bound):
    """All integer vectors m with (m - center)^T G (m - center) <= bound.

    Float arithmetic with slack; callers apply an exact filter afterwards.
    """
    n = len(G)
    Q = _float_cholesky([[float(G[i][j]) for j in range(n)] for i in range(n)])
    mu = [float(c) for c in center]
    slack = 1e-9 * float(bound) + 1e-9
    x = [0] * n
    out = []

    def recurse(i, remaining):
        c = -mu[i]
        for j in range(i + 1, n):
            c += Q[i][j] * (x[j] - mu[j])
        lim = (remaining + slack) / Q[i][i]
        if lim < 0:
            return
        s = math.sqrt(lim)
        lo = math.ceil(-c - s - 1e-12)
        hi = math.floor(-c + s + 1e-12)
        for xi in range(lo, hi + 1):
            x[i] = xi
            used = Q[i][i] * (xi + c) ** 2
            if used > remaining + slack:
                continue
            if i == 0:
                out.append(tuple(x))
            else:
                recurse(i - 1, remaining - used)
        x[i] = 0

    recurse(n - 1, float(bound))
    out.sort()
    return out


def _float_cholesky(G):
    n = len(G)
    Q = [row[:] for row in G]
    for i in range(n):
        if Q[i][i] <= 0:
            raise ValueError("form is not positive definite")
        for j in range(i + 1, n):
            Q[j][i] = Q[i][j]
            Q[i][j] = Q[i][j] / Q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                Q[k][l] -= Q[k][i] * Q[i][l]
    return Q


def _positive_rep(v):
    for a in v:
        if a > 0:
            return True
        if a < 0:
            return False
    return False


