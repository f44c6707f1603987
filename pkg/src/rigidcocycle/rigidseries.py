"""The coefficient module of overconvergent cocycles: power series in (p*x)
with integral coefficients in the unramified quadratic extension, truncated at
degree M and stored modulo p^W.

Series multiplication packs coefficient vectors into single big integers so
that Python's large-integer product does the convolution.
"""

from __future__ import annotations

import math

from .errors import (
    NonZeroDegree,
    NotInSigma0,
    PointInUnitDisc,
    PrecisionUnderflow,
)
from .padic import PadicNumber, PadicQuadNumber

__all__ = [
    "RigidSeries",
    "act_weight2",
    "action_columns",
    "ActionOperator",
    "eta",
    "integrate",
    "default_truncation",
]


def default_truncation(p: int, N: int) -> int:
    """Truncation degree certifying N output digits after integration."""
    return N + max(1, math.ceil(math.log(max(N, 2)) / math.log(p))) + 2


def _lift_pair(q: PadicQuadNumber, W: int):
    """Integer pair (mod p^W) of an integral element known to precision W."""
    if q.a0.val < 0 or (not q.a1.is_zero() and q.a1.val < 0):
        raise PrecisionUnderflow("non-integral coefficient")
    if q.prec < W:
        raise PrecisionUnderflow(
            f"coefficient precision {q.prec} below working precision {W}"
        )
    m = q.p ** W
    return (q.a0.lift() % m, q.a1.lift() % m)


def _lift_scalar(x: PadicNumber, W: int) -> int:
    if x.val < 0:
        raise PrecisionUnderflow("non-integral scalar")
    if x.prec < W:
        raise PrecisionUnderflow("scalar precision below working precision")
    return x.lift() % (x.p ** W)


class RigidSeries:
    """f(x) = sum c_n (p x)^n, coefficients integer pairs modulo p^W in the
    quadratic context ctx."""

    __slots__ = ("ctx", "W", "coeffs")

    def __init__(self, ctx, W: int, coeffs):
        self.ctx = ctx
        self.W = W
        m = ctx.p ** W
        self.coeffs = [(a % m, b % m) for a, b in coeffs]

    @property
    def M(self) -> int:
        return len(self.coeffs) - 1

    @property
    def p(self) -> int:
        return self.ctx.p

    @classmethod
    def zeros(cls, ctx, W: int, M: int):
        return cls(ctx, W, [(0, 0)] * (M + 1))

    @classmethod
    def from_quad_coeffs(cls, ctx, W: int, quads, M=None):
        coeffs = [_lift_pair(q, W) for q in quads]
        if M is not None:
            coeffs += [(0, 0)] * (M + 1 - len(coeffs))
        return cls(ctx, W, coeffs)

    def coeff(self, n: int) -> PadicQuadNumber:
        a, b = self.coeffs[n]
        return self.ctx.element(a, b, self.W)

    def _check(self, other):
        if self.ctx != other.ctx or self.W != other.W or self.M != other.M:
            raise ValueError("mismatched series parameters")

    def __add__(self, other):
        self._check(other)
        return RigidSeries(self.ctx, self.W, [
            (a0 + b0, a1 + b1)
            for (a0, a1), (b0, b1) in zip(self.coeffs, other.coeffs)
        ])

    def __sub__(self, other):
        self._check(other)
        return RigidSeries(self.ctx, self.W, [
            (a0 - b0, a1 - b1)
            for (a0, a1), (b0, b1) in zip(self.coeffs, other.coeffs)
        ])

    def __neg__(self):
        return RigidSeries(self.ctx, self.W,
                           [(-a, -b) for a, b in self.coeffs])

    def scale_int(self, k: int):
        return RigidSeries(self.ctx, self.W,
                           [(k * a, k * b) for a, b in self.coeffs])

    def scale(self, q: PadicQuadNumber):
        """Multiply by a fixed integral element."""
        s, c = self.ctx.s, self.ctx.c
        q0, q1 = _lift_pair(q, self.W)
        out = []
        for a0, a1 in self.coeffs:
            cross = a1 * q1
            out.append((a0 * q0 + c * cross, a0 * q1 + a1 * q0 + s * cross))
        return RigidSeries(self.ctx, self.W, out)

    def __mul__(self, other):
        self._check(other)
        n = self.M + 1
        m = self.p ** self.W
        B = 2 * m.bit_length() + n.bit_length() + 3
        mask = (1 << B) - 1

        def pack(vals):
            out = 0
            shift = 0
            for v in vals:
                out |= v << shift
                shift += B
            return out

        A0 = pack([c[0] for c in self.coeffs])
        A1 = pack([c[1] for c in self.coeffs])
        B0 = pack([c[0] for c in other.coeffs])
        B1 = pack([c[1] for c in other.coeffs])
        P00 = A0 * B0
        P11 = A1 * B1
        PS = (A0 + A1) * (B0 + B1)
        s, c = self.ctx.s, self.ctx.c
        out = []
        for k in range(n):
            sh = B * k
            p00 = (P00 >> sh) & mask
            p11 = (P11 >> sh) & mask
            cross = ((PS >> sh) & mask) - p00 - p11
            out.append(((p00 + c * p11) % m, (cross + s * p11) % m))
        return RigidSeries(self.ctx, self.W, out)

    def val_lambda(self) -> int:
        """min_n v_p(c_n); W for the zero series."""
        best = self.W
        p = self.p
        for a, b in self.coeffs:
            for x in (a, b):
                if x:
                    v = 0
                    while x % p == 0 and v < best:
                        x //= p
                        v += 1
                    best = min(best, v)
            if best == 0:
                return 0
        return best

    def is_zero_mod(self, k: int) -> bool:
        m = self.p ** min(k, self.W)
        return all(a % m == 0 and b % m == 0 for a, b in self.coeffs)

    def eq_mod(self, other, k: int) -> bool:
        return (self - other).is_zero_mod(k)

    def eval_at(self, z: PadicQuadNumber) -> PadicQuadNumber:
        """Value at a point with v(z) >= 0 (Horner in y = p*z)."""
        y = z * self.ctx.element(self.p, 0, z.prec)
        out = self.ctx.zero(min(self.W, z.prec))
        for a, b in reversed(self.coeffs):
            out = out * y + self.ctx.element(a, b, self.W)
        return out

    def __repr__(self):
        return f"RigidSeries(p={self.p}, M={self.M}, W={self.W})"


def _sigma0_entries(sigma, splitting, W: int):
    """(a, b, c, d) integer lifts of iota_p(sigma) with the level structure
    checked: a unit, c divisible by p, b and d integral."""
    mat = splitting.iota(sigma)
    a, b = mat[0][0], mat[0][1]
    c, d = mat[1][0], mat[1][1]
    if a.is_zero() or a.val != 0:
        raise NotInSigma0("upper-left entry is not a unit")
    if not c.is_zero() and c.val < 1:
        raise NotInSigma0("lower-left entry not divisible by p")
    if b.val < 0 or d.val < 0:
        raise NotInSigma0("non-integral entries")
    return (_lift_scalar(a, W), _lift_scalar(b, W),
            _lift_scalar(c, W), _lift_scalar(d, W))


def _action_data(sigma, splitting, ctx, W: int, M: int):
    """(det, minv, ratio): det and the series 1/(a - (c/p)y) and
    p*sigma^{-1}x expressed in y = p*x, as mod-p^W series."""
    p = ctx.p
    m = p ** W
    a, b, c, d = _sigma0_entries(sigma, splitting, W)
    det = (a * d - b * c) % m
    cp = (c // p) % m
    ainv = pow(a, -1, m)
    # 1/(a - (c/p) y) = a^{-1} sum ((c/p) a^{-1} y)^n
    r = (cp * ainv) % m
    minv = []
    acc = ainv
    for _ in range(M + 1):
        minv.append((acc, 0))
        acc = (acc * r) % m
    minv = RigidSeries(ctx, W, minv)
    # p * sigma^{-1}x = (d y - p b) / (a - (c/p) y)
    num = RigidSeries.zeros(ctx, W, M)
    num.coeffs[0] = ((-p * b) % m, 0)
    num.coeffs[1] = (d % m, 0)
    return det, minv, num * minv


def act_weight2(sigma, f: RigidSeries, splitting) -> RigidSeries:
    """Weight-two action: (sigma f)(x) = det * (a - c x)^{-2} f(sigma^{-1} x)
    with [[a,b],[c,d]] = iota_p(sigma); requires a unit and c in p Z_p."""
    W, M = f.W, f.M
    det, minv, ratio = _action_data(sigma, splitting, f.ctx, W, M)
    out = RigidSeries.zeros(f.ctx, W, M)
    t = RigidSeries.zeros(f.ctx, W, M)
    t.coeffs[0] = (1, 0)
    for n in range(M + 1):
        cn = f.coeffs[n]
        if cn != (0, 0):
            out = out + t.scale(f.ctx.element(cn[0], cn[1], W))
        if n < M:
            t = t * ratio
    return (out * minv * minv).scale_int(det)


def action_columns(sigma, splitting, ctx, W: int, M: int):
    """Columns of the weight-two action in the monomial basis: entry n is
    sigma acting on (p x)^n, as a RigidSeries."""
    det, minv, ratio = _action_data(sigma, splitting, ctx, W, M)
    pref = (minv * minv).scale_int(det)
    cols = []
    t = RigidSeries.zeros(ctx, W, M)
    t.coeffs[0] = (1, 0)
    for n in range(M + 1):
        cols.append(pref * t)
        if n < M:
            t = t * ratio
    return cols


class ActionOperator:
    """Weight-two action of a fixed semigroup element, stored as packed
    column vectors so that applying it is one pass of scalar-times-bigint
    multiplications."""

    __slots__ = ("ctx", "W", "M", "m", "B", "C0", "C1")

    def __init__(self, sigma, splitting, ctx, W: int, M: int):
        cols = action_columns(sigma, splitting, ctx, W, M)
        self.ctx, self.W, self.M = ctx, W, M
        m = ctx.p ** W
        self.m = m
        B = 2 * m.bit_length() + (M + 1).bit_length() + 4
        self.B = B
        self.C0 = []
        self.C1 = []
        for col in cols:
            p0 = p1 = 0
            shift = 0
            for a, b in col.coeffs:
                p0 |= a << shift
                p1 |= b << shift
                shift += B
            self.C0.append(p0)
            self.C1.append(p1)

    def apply(self, f: RigidSeries) -> RigidSeries:
        if f.ctx != self.ctx or f.W != self.W or f.M != self.M:
            raise ValueError("mismatched series parameters")
        m, B = self.m, self.B
        s, c = self.ctx.s, self.ctx.c
        acc0 = acc1 = 0
        for n, (c0, c1) in enumerate(f.coeffs):
            if c0 == 0 and c1 == 0:
                continue
            C0, C1 = self.C0[n], self.C1[n]
            if c1:
                acc0 += c0 * C0 + (c * c1 % m) * C1
                acc1 += c1 * C0 + ((c0 + s * c1) % m) * C1
            else:
                acc0 += c0 * C0
                acc1 += c0 * C1
        mask = (1 << B) - 1
        out = []
        for k in range(self.M + 1):
            sh = B * k
            out.append((((acc0 >> sh) & mask) % m, ((acc1 >> sh) & mask) % m))
        return RigidSeries(self.ctx, self.W, out)


def _terms(D):
    return D.terms if hasattr(D, "terms") else list(D)


def eta(D, ctx, W: int, M: int) -> RigidSeries:
    """dlog image of a degree-zero divisor supported where v(z) <= -1:
    1/(x - z) expanded as -sum (p x)^n p^{-n} z^{-(n+1)}."""
    terms = _terms(D)
    if sum(mlt for _, mlt in terms) != 0:
        raise NonZeroDegree("eta needs a degree-zero divisor")
    out = RigidSeries.zeros(ctx, W, M)
    p = ctx.p
    m = p ** W
    for z, mlt in terms:
        if z.valuation() > -1:
            raise PointInUnitDisc(f"divisor point {z} has valuation > -1")
        zi = z.inverse()
        acc = zi
        coeffs = []
        for n in range(M + 1):
            # c_n = -p^{-n} z^{-(n+1)}: shift the valuation down by n
            a0, a1 = acc.a0, acc.a1
            if a0.val < n or (not a1.is_zero() and a1.val < n):
                raise PointInUnitDisc("divisor point too close to the disc")
            if acc.prec < W + n:
                raise PrecisionUnderflow("divisor point precision too low")
            c0 = (-(a0.lift() // p ** n)) % m
            c1 = (-(a1.lift() // p ** n)) % m
            coeffs.append((c0, c1))
            acc = acc * zi
        out = out + RigidSeries(ctx, W, coeffs).scale_int(mlt)
    return out


def integrate(f: RigidSeries, D) -> PadicQuadNumber:
    """Pairing of f with a degree-zero divisor on the principal affinoid:
    (f, Q - P) -> F(P) - F(Q) for the termwise antiderivative F."""
    terms = _terms(D)
    if sum(mlt for _, mlt in terms) != 0:
        raise NonZeroDegree("integration needs a degree-zero divisor")
    ctx, W, p, M = f.ctx, f.W, f.p, f.M
    total = ctx.zero(W)
    for z, mlt in terms:
        if z.valuation() < 0:
            raise PointInUnitDisc("integration point outside the affinoid")
        zpow = z
        val = ctx.zero(min(W, z.prec))
        for n in range(M + 1):
            zpow = zpow if n == 0 else zpow * z
            cn = f.coeffs[n]
            if cn != (0, 0):
                term = ctx.element(cn[0] * p ** n, cn[1] * p ** n, W + n)
                val = val + (term * zpow) / (n + 1)
        total = total - mlt * val
    # tail bound: terms beyond M have valuation > M - v_p(M+2)-ish
    tail = M + 1 - max(1, math.ceil(math.log(M + 2) / math.log(p)))
    cap = min(W, tail)
    return PadicQuadNumber(ctx, total.a0.with_prec(min(total.prec, cap)),
                           total.a1.with_prec(min(total.prec, cap)))
