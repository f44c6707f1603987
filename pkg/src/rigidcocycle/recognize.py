"""Numerical recognition of assembled invariants: matching against roots of
known integer polynomials up to fundamental-unit contributions, and
LLL-based integer-relation search over fixture S-unit logarithms with
support extraction.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .errors import (
    FixtureInsufficientPrecision,
    NoRoot,
    RamifiedOrRepeatedRoots,
)
from .padic import PadicQuadNumber, QuadContext

__all__ = [
    "padic_roots",
    "RecognitionResult",
    "verify_against_polynomial",
    "RecognitionFixture",
    "load_fixture",
    "lll_recognize",
    "lll_reduce",
    "factor_support",
]


def _poly_eval(coeffs, x):
    """Horner evaluation; coeffs ascending (c0 + c1 x + ...)."""
    out = None
    for c in reversed(coeffs):
        out = (out * x + c) if out is not None else x.ctx.element(
            c, 0, x.prec)
    return out


def _poly_derivative(coeffs):
    return [n * c for n, c in enumerate(coeffs)][1:]


def _qpoly_eval(qcoeffs, x):
    out = x.ctx.zero(x.prec)
    for c in reversed(qcoeffs):
        out = out * x + c
    return out


def _residue_roots(qcoeffs, ctx):
    """Roots of the reduced polynomial in F_{p^2}, as residue pairs."""
    p = ctx.p
    res = [c.residue_pair() for c in qcoeffs]
    out = []
    for x0 in range(p):
        for x1 in range(p):
            acc = (0, 0)
            for c in reversed(res):
                acc = ctx.res_mul(acc, (x0, x1))
                acc = ((acc[0] + c[0]) % p, (acc[1] + c[1]) % p)
            if acc == (0, 0):
                out.append((x0, x1))
    return out


def _taylor_shift(qcoeffs, r):
    """Coefficients of f(x + r) by iterated synthetic division."""
    b = list(qcoeffs)
    n = len(b)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            b[j] = b[j] + b[j + 1] * r
    return b


def _roots_rec(qcoeffs, ctx, N, depth):
    if depth > N:
        raise RamifiedOrRepeatedRoots(
            "root branches failed to separate; polynomial not squarefree "
            "at the working precision"
        )
    p = ctx.p
    prec = qcoeffs[0].prec
    dq = [c * n for n, c in enumerate(qcoeffs)][1:]
    out = []
    for x0, x1 in _residue_roots(qcoeffs, ctx):
        r = ctx.element(x0, x1, prec)
        if _qpoly_eval(dq, r).valuation() == 0:
            x = r
            for _ in range(prec.bit_length() + 3):
                fx = _qpoly_eval(qcoeffs, x)
                if fx.is_zero():
                    break
                x = x - fx / _qpoly_eval(dq, x)
            if not _qpoly_eval(qcoeffs, x).is_zero():
                raise NoRoot("Newton iteration failed to converge")
            out.append(x)
            continue
        # residue collision: substitute x = r + p y, strip the content,
        # and recurse
        shifted = _taylor_shift(qcoeffs, r)
        scaled = [c * ctx.element(p ** i, 0, prec)
                  for i, c in enumerate(shifted)]
        k = min(c.valuation() for c in scaled if not c.is_zero())
        inv = ctx.element(Fraction(1, p ** k), 0, prec)
        sub = [c * inv for c in scaled]
        for y in _roots_rec(sub, ctx, N, depth + 1):
            out.append(r + y * ctx.element(p, 0, prec))
    return out


def padic_roots(coeffs, ctx: QuadContext, N: int):
    """All roots of a squarefree integer polynomial (ascending
    coefficients) that are integral in the unramified quadratic field of
    ctx, to precision at least N: residue search in F_{p^2} with
    branch-and-rescale lifting for residue collisions."""
    buf = N + 2 * len(coeffs) + 10
    qcoeffs = [ctx.element(c, 0, buf) for c in coeffs]
    roots = _roots_rec(qcoeffs, ctx, N, 0)
    for r in roots:
        assert r.prec >= N, "precision buffer exhausted during root lifting"
        assert _qpoly_eval([ctx.element(c, 0, N) for c in coeffs],
                           PadicQuadNumber(ctx, r.a0.with_prec(N),
                                           r.a1.with_prec(N))).is_zero()
    return roots


def factor_support(n: int):
    """Sorted prime support of a nonzero integer."""
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


class RecognitionResult:
    def __init__(self, status, exponents=None, support=None, residual=0,
                 detail=None):
        assert status in ("matched", "unmatched")
        self.status = status
        self.exponents = exponents
        self.support = sorted(support) if support else []
        self.residual = residual
        self.detail = detail or {}

    def __repr__(self):
        return (f"RecognitionResult({self.status}, exp={self.exponents}, "
                f"support={self.support}, residual={self.residual})")


def _centered_int(x, bound):
    """The integer n with |n| <= bound congruent to the PadicNumber x, or
    None."""
    if x.is_zero():
        return 0
    if x.val < 0:
        return None
    m = x.p ** x.prec
    n = x.lift() % m
    if n > m // 2:
        n -= m
    if abs(n) > bound or abs(n) * 2 >= m:
        return None
    return n


def _divisors(n):
    n = abs(n)
    return sorted(d for d in range(1, n + 1) if n % d == 0)


def verify_against_polynomial(J, poly_coeffs, unit_logs, bound=10, slack=5):
    """Match J against log_p of a root of the polynomial up to integer
    combinations of the supplied unit logarithms and the scaling ambiguity:
    searches d | e*m and exponents |a_i| <= bound with
    J/d = log(root) + sum a_i log(u_i) mod p^(N - slack).

    Roots of unity contribute log 0, so they need no handling. On a match
    the support is the prime support of the polynomial's leading
    coefficient."""
    value = J.value
    ctx = value.ctx
    N = value.prec
    roots = padic_roots(poly_coeffs, ctx, N)
    l1, l2 = unit_logs
    # norm +-1 units have trace-zero logarithms, so the two logs are
    # Q_p-dependent: enumerate the first exponent and solve for the second
    # in whichever coordinate of l2 is largest
    coord = 1 if l2.a1.val <= l2.a0.val else 0
    l2c = l2.a1 if coord else l2.a0
    best = RecognitionResult("unmatched", residual=0)
    for d in _divisors(J.e * J.m):
        cand = value * ctx.element(Fraction(1, d), 0, N)
        for k, r in enumerate(roots):
            t = cand - r.log()
            for ai in range(-bound, bound + 1):
                rem = t - l1 * ai
                if rem.is_zero():
                    bi = 0
                else:
                    rc = rem.a1 if coord else rem.a0
                    if l2c.is_zero():
                        bi = 0
                    else:
                        bi = _centered_int(rc / l2c, bound)
                    if bi is None:
                        continue
                resid = rem - l2 * bi
                rv = N if resid.is_zero() else min(N, resid.valuation())
                if rv > best.residual:
                    status = "matched" if rv >= N - slack else "unmatched"
                    best = RecognitionResult(
                        status, exponents=(ai, bi),
                        support=factor_support(poly_coeffs[-1])
                        if status == "matched" else [],
                        residual=rv,
                        detail={"root_index": k, "scaling": d},
                    )
    return best


class RecognitionFixture:
    """S-unit logarithm data for one compositum of two real quadratic
    fields, in the canonical quadratic context of the run."""

    def __init__(self, gens, p, prec, units):
        self.gens = tuple(gens)
        self.p = p
        self.prec = prec
        self.units = list(units)  # dicts: label, support, log digit pair

    def logs_in(self, ctx: QuadContext):
        if ctx.p != self.p:
            raise FixtureInsufficientPrecision(
                f"fixture is for p={self.p}, run uses p={ctx.p}"
            )
        out = []
        for u in self.units:
            a0, a1 = int(u["log"][0]), int(u["log"][1])
            out.append(ctx.element(a0, a1, self.prec))
        return out

    def to_json(self):
        return json.dumps({
            "field": {"gens": list(self.gens)},
            "p": self.p,
            "prec": self.prec,
            "units": self.units,
        }, indent=1)


def load_fixture(path) -> RecognitionFixture:
    with open(path) as fh:
        data = json.load(fh)
    return RecognitionFixture(data["field"]["gens"], data["p"],
                              data["prec"], data["units"])


# -- LLL ----------------------------------------------------------------------


def lll_reduce(basis, delta=Fraction(99, 100)):
    """Integer LLL on a list of integer row vectors (returns a new list)."""
    b = [list(v) for v in basis]
    n = len(b)

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def gso():
        mu = [[Fraction(0)] * n for _ in range(n)]
        B = [Fraction(0)] * n
        star = [None] * n
        for i in range(n):
            star[i] = [Fraction(x) for x in b[i]]
            for j in range(i):
                if B[j] == 0:
                    continue
                mu[i][j] = sum(
                    Fraction(x) * y for x, y in zip(b[i], star[j])
                ) / B[j]
                star[i] = [x - mu[i][j] * y
                           for x, y in zip(star[i], star[j])]
            B[i] = sum(x * x for x in star[i])
        return mu, B, star

    mu, B, star = gso()
    k = 1
    while k < n:
        # size reduction
        for j in range(k - 1, -1, -1):
            q = mu[k][j]
            r = int(q) if q.denominator == 1 else round(q)
            if r != 0:
                b[k] = [x - r * y for x, y in zip(b[k], b[j])]
                mu, B, star = gso()
        if B[k] >= (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            mu, B, star = gso()
            k = max(k - 1, 1)
    return b


def _val_int(n, p, cap):
    if n == 0:
        return cap
    v = 0
    while n % p == 0 and v < cap:
        n //= p
        v += 1
    return v


def lll_recognize(J, fixture: RecognitionFixture, slack=5, height_bound=50,
                  delta=Fraction(99, 100)):
    """Search for an integer relation g*(J/d) + sum n_i log(u_i) = 0 mod
    p^N with g = +-1 via lattice reduction, scanning the scaling
    ambiguity d | e*m as in verify_against_polynomial; on success the
    support is the union of the supports of the units appearing."""
    value = J.value
    ctx = value.ctx
    N = min(value.prec, fixture.prec)
    if fixture.prec < value.prec - slack:
        raise FixtureInsufficientPrecision(
            f"fixture precision {fixture.prec} below run precision "
            f"{value.prec}"
        )
    logs = fixture.logs_in(ctx)
    mod = ctx.p ** N

    def pair(x):
        a0, a1 = x.digits_pair()
        return a0 % mod, a1 % mod

    k = len(logs)
    base_rows = []
    for i, lg in enumerate(logs):
        x, y = pair(lg)
        base_rows.append([0] * i + [1] + [0] * (k - i) + [x, y])
    best = RecognitionResult("unmatched", residual=0)
    for d in _divisors(getattr(J, "e", 1) * getattr(J, "m", 1)):
        cand = value * ctx.element(Fraction(1, d), 0, N)
        rows = list(base_rows)
        x, y = pair(cand)
        rows.append([0] * k + [1, x, y])
        rows.append([0] * (k + 1) + [mod, 0])
        rows.append([0] * (k + 1) + [0, mod])
        red = lll_reduce(rows, delta)
        for v in red:
            g = v[k]
            if abs(g) != 1:
                continue
            exps = [gi * (-g) for gi in v[:k]]
            if any(abs(e) > height_bound for e in exps):
                continue
            rv = min(_val_int(v[k + 1], ctx.p, N),
                     _val_int(v[k + 2], ctx.p, N))
            if rv < N - slack:
                continue
            support = set()
            labels = {}
            for e, u in zip(exps, fixture.units):
                if e != 0:
                    support.update(u["support"])
                    labels[u["label"]] = e
            if rv > best.residual or best.status == "unmatched":
                best = RecognitionResult("matched", exponents=labels,
                                         support=support, residual=rv,
                                         detail={"scaling": d})
        if best.status == "matched":
            break
    return best
