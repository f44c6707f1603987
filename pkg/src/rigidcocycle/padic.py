"""Exact arithmetic in Z_p, Q_p and the unramified quadratic extension Q_{p^2}.

Numbers carry an absolute precision N (they are known modulo p^N) and the
usual ultrametric propagation rules are applied by every operation, so a
result never claims more digits than its inputs justify.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    EvenPrimeUnsupported,
    NoRoot,
    NonUnitInput,
    PrecisionUnderflow,
    ZeroInput,
)

__all__ = [
    "PadicNumber",
    "QuadContext",
    "PadicQuadNumber",
    "hensel_sqrt",
    "teichmuller",
    "iwasawa_log",
]


def _val_of_int(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0 undefined")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


class PadicNumber:
    """An element of Q_p known modulo p^prec (absolute precision).

    Stored as unit * p^val with the unit kept modulo p^(prec - val).
    The zero-at-precision element has unit == 0 and val == prec.
    """

    __slots__ = ("p", "val", "unit", "prec")

    def __init__(self, p: int, val: int, unit: int, prec: int):
        if prec <= val and unit != 0:
            unit = 0
        if unit == 0:
            val = prec
        else:
            unit %= p ** (prec - val)
            if unit == 0:
                val = prec
            elif unit % p == 0:
                # re-normalize: shift p-powers out of the unit part
                shift = _val_of_int(unit, p)
                val += shift
                unit //= p ** shift
                unit %= max(p ** (prec - val), 1)
                if prec <= val:
                    unit = 0
                    val = prec
        self.p = p
        self.val = val
        self.unit = unit
        self.prec = prec

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_int(cls, n: int, p: int, prec: int) -> "PadicNumber":
        if n == 0:
            return cls(p, prec, 0, prec)
        v = _val_of_int(n, p)
        return cls(p, v, n // p**v, prec)

    @classmethod
    def from_fraction(cls, q, p: int, prec: int) -> "PadicNumber":
        q = Fraction(q)
        if q == 0:
            return cls(p, prec, 0, prec)
        num, den = q.numerator, q.denominator
        v = 0
        while num % p == 0:
            num //= p
            v += 1
        while den % p == 0:
            den //= p
            v -= 1
        m = p ** max(prec - v, 1)
        unit = num * pow(den, -1, m) % m
        return cls(p, v, unit, prec)

    @classmethod
    def zero(cls, p: int, prec: int) -> "PadicNumber":
        return cls(p, prec, 0, prec)

    @classmethod
    def one(cls, p: int, prec: int) -> "PadicNumber":
        return cls(p, 0, 1, prec)

    # -- basic queries --------------------------------------------------------

    def is_zero(self) -> bool:
        """True when the element is indistinguishable from 0 at its precision."""
        return self.unit == 0

    def is_unit(self) -> bool:
        return self.unit != 0 and self.val == 0

    def lift(self) -> int:
        """Canonical integer lift in [0, p^prec), valid when val >= 0."""
        if self.unit == 0:
            return 0
        if self.val < 0:
            raise ValueError("negative valuation has no integer lift")
        return self.unit * self.p**self.val % self.p**self.prec

    def residue(self) -> int:
        """Image in the residue field F_p (requires val >= 0)."""
        if self.unit == 0:
            return 0
        if self.val < 0:
            raise ValueError("negative valuation")
        return 0 if self.val > 0 else self.unit % self.p

    def rel_prec(self) -> int:
        return self.prec - self.val

    def with_prec(self, prec: int) -> "PadicNumber":
        """Truncate (never extend knowledge) to absolute precision prec."""
        if prec >= self.prec:
            # claiming more digits than known is only legal for exact reuse;
            # keep the known ones
            return PadicNumber(self.p, self.val, self.unit, self.prec)
        return PadicNumber(self.p, self.val, self.unit, prec)

    # -- arithmetic -----------------------------------------------------------

    def _check(self, other: "PadicNumber"):
        if self.p != other.p:
            raise ValueError("mixed primes")

    def __add__(self, other):
        if isinstance(other, int):
            other = PadicNumber.from_int(other, self.p, self.prec)
        if not isinstance(other, PadicNumber):
            return NotImplemented
        self._check(other)
        prec = min(self.prec, other.prec)
        p = self.p
        if self.unit == 0:
            return other.with_prec(prec)
        if other.unit == 0:
            return self.with_prec(prec)
        v = min(self.val, other.val)
        m = p ** max(prec - v, 1)
        s = (self.unit * p ** (self.val - v) + other.unit * p ** (other.val - v)) % m
        return PadicNumber(p, v, s, prec)

    __radd__ = __add__

    def __neg__(self):
        if self.unit == 0:
            return self
        return PadicNumber(self.p, self.val, -self.unit, self.prec)

    def __sub__(self, other):
        if isinstance(other, int):
            other = PadicNumber.from_int(other, self.p, self.prec)
        if not isinstance(other, PadicNumber):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            other = PadicNumber.from_int(other, self.p, self.prec)
        if not isinstance(other, PadicNumber):
            return NotImplemented
        self._check(other)
        p = self.p
        if self.unit == 0 or other.unit == 0:
            # 0 * x is known mod p^(prec_of_zero + v(x))
            z, x = (self, other) if self.unit == 0 else (other, self)
            return PadicNumber.zero(p, z.prec + (x.val if x.unit else 0))
        v = self.val + other.val
        rel = min(self.rel_prec(), other.rel_prec())
        prec = v + rel
        return PadicNumber(p, v, self.unit * other.unit % p**rel, prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicNumber":
        if self.unit == 0:
            raise ZeroInput("cannot invert zero at precision")
        rel = self.rel_prec()
        m = self.p**rel
        return PadicNumber(self.p, -self.val, pow(self.unit, -1, m), rel - self.val)

    def __truediv__(self, other):
        if isinstance(other, int):
            other = PadicNumber.from_int(other, self.p, self.prec)
        if not isinstance(other, PadicNumber):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n == 0:
            return PadicNumber.one(self.p, self.prec)
        base = self if n > 0 else self.inverse()
        out = base
        for _ in range(abs(n) - 1):
            out = out * base
        return out

    # -- comparisons ----------------------------------------------------------

    def eq_at(self, other: "PadicNumber", digits: int | None = None) -> bool:
        """Equality modulo p^digits (default: the common known precision)."""
        d = (self - other)
        if digits is None:
            return d.unit == 0
        return d.unit == 0 or d.val >= digits

    def __eq__(self, other):
        if isinstance(other, int):
            other = PadicNumber.from_int(other, self.p, self.prec)
        if not isinstance(other, PadicNumber):
            return NotImplemented
        return self.eq_at(other)

    def __hash__(self):
        raise TypeError("PadicNumber carries precision; not hashable")

    def __repr__(self):
        if self.unit == 0:
            return f"O({self.p}^{self.prec})"
        return f"{self.unit}*{self.p}^{self.val} + O({self.p}^{self.prec})"

    def digits_str(self) -> str:
        """Decimal string of the canonical lift (val >= 0 required)."""
        return str(self.lift())


# -- Q_p operations -----------------------------------------------------------


def _ensure_padic(a, p=None, prec=None):
    if isinstance(a, PadicNumber):
        return a
    return PadicNumber.from_fraction(a, p, prec)


def hensel_sqrt(a, prec: int | None = None):
    """Square root in Q_p or Q_{p^2} with a deterministic sign convention.

    For Q_p the chosen root has leading residue equal to the smaller lift in
    {1, ..., p-1}; raises NoRoot if the leading residue is a non-square.
    """
    if isinstance(a, PadicQuadNumber):
        return a.sqrt(prec)
    if not isinstance(a, PadicNumber):
        raise TypeError("expected a p-adic number")
    p = a.p
    if p == 2:
        raise EvenPrimeUnsupported("p = 2 is out of scope")
    if prec is None:
        prec = a.prec
    if a.unit == 0:
        raise ZeroInput("sqrt of zero-at-precision")
    if a.val % 2 != 0:
        raise NoRoot("odd valuation")
    u = a.unit
    r0 = pow(u, (p - 1) // 2, p)
    if r0 != 1:
        raise NoRoot(f"{u % p} is a non-square mod {p}")
    s = pow(u, (p + 1) // 4, p) if p % 4 == 3 else _sqrt_mod_p(u % p, p)
    # Newton lifting x -> (x + u/x)/2
    rel = prec - a.val // 2
    k = 1
    m = p
    while k < rel:
        k = min(2 * k, rel)
        m = p**k
        s = (s + u * pow(s, -1, m)) % m * pow(2, -1, m) % m
    if min(s % p, p - s % p) != s % p:
        s = m - s
    return PadicNumber(p, a.val // 2, s, a.val // 2 + rel)


def _sqrt_mod_p(u: int, p: int) -> int:
    # p is tiny in scope; direct search is fine
    for x in range(1, p):
        if x * x % p == u % p:
            return x
    raise NoRoot(f"{u} is a non-square mod {p}")


def teichmuller(a: "PadicNumber | PadicQuadNumber"):
    """Teichmuller lift: the root of unity congruent to a mod p (a must be a unit)."""
    if isinstance(a, PadicQuadNumber):
        return a.teichmuller()
    if a.val != 0 or a.unit == 0:
        raise NonUnitInput("teichmuller needs a p-adic unit")
    p, prec = a.p, a.prec
    m = p**prec
    x = a.unit % m
    while True:
        y = pow(x, p, m)
        if y == x:
            break
        x = y
    return PadicNumber(p, 0, x, prec)


def iwasawa_log(u: "PadicNumber | PadicQuadNumber"):
    """p-adic logarithm with the Iwasawa branch log_p(p) = 0."""
    if isinstance(u, PadicQuadNumber):
        return u.log()
    if u.unit == 0:
        raise ZeroInput("log of zero")
    p, prec = u.p, u.prec
    one_unit = PadicNumber(p, 0, u.unit, u.rel_prec()) / teichmuller(
        PadicNumber(p, 0, u.unit, u.rel_prec())
    )
    return _log_one_unit(one_unit - 1, p, one_unit.prec)


def _log_one_unit(z: PadicNumber, p: int, prec: int) -> PadicNumber:
    # log(1+z) = sum (-1)^(n+1) z^n / n for v(z) >= 1
    if z.unit == 0:
        return PadicNumber.zero(p, prec)
    assert z.val >= 1
    pad = _log_pad(p, prec)
    out = PadicNumber.zero(p, prec)
    term = PadicNumber.one(p, prec + pad)
    zz = z.with_prec(prec + pad)
    n = 1
    while n * zz.val < prec + pad:
        term = term * zz
        contrib = term / n
        out = out + (contrib if n % 2 == 1 else -contrib)
        n += 1
    return out.with_prec(prec)


def _log_pad(p: int, prec: int) -> int:
    pad = 2
    while p**pad < prec + pad:
        pad += 1
    return pad


# -- unramified quadratic extension ------------------------------------------


class QuadContext:
    """The extension Q_p[alpha] with alpha^2 = s*alpha + c, irreducible mod p."""

    __slots__ = ("p", "s", "c")

    def __init__(self, p: int, s: int, c: int):
        if p == 2:
            raise EvenPrimeUnsupported("p = 2 is out of scope")
        disc = (s * s + 4 * c) % p
        if pow(disc, (p - 1) // 2, p) != p - 1:
            raise ValueError(
                f"x^2 - {s}x - {c} is reducible mod {p}; not an inert generator"
            )
        self.p = p
        self.s = s
        self.c = c

    def __eq__(self, other):
        return (
            isinstance(other, QuadContext)
            and (self.p, self.s, self.c) == (other.p, other.s, other.c)
        )

    def __hash__(self):
        return hash((self.p, self.s, self.c))

    def __repr__(self):
        return f"QuadContext(p={self.p}, alpha^2 = {self.s}*alpha + {self.c})"

    # element constructors

    def element(self, a0, a1=0, prec: int | None = None) -> "PadicQuadNumber":
        if prec is None:
            prec = a0.prec if isinstance(a0, PadicNumber) else 60
        if not isinstance(a0, PadicNumber):
            a0 = PadicNumber.from_fraction(a0, self.p, prec)
        if not isinstance(a1, PadicNumber):
            a1 = PadicNumber.from_fraction(a1, self.p, prec)
        return PadicQuadNumber(self, a0, a1)

    def zero(self, prec: int) -> "PadicQuadNumber":
        return self.element(0, 0, prec)

    def one(self, prec: int) -> "PadicQuadNumber":
        return self.element(1, 0, prec)

    def alpha(self, prec: int) -> "PadicQuadNumber":
        return self.element(0, 1, prec)

    # residue field F_{p^2} as pairs (x0, x1) mod p

    def res_mul(self, x, y):
        p, s, c = self.p, self.s, self.c
        x0, x1 = x
        y0, y1 = y
        return ((x0 * y0 + c * x1 * y1) % p, (x0 * y1 + x1 * y0 + s * x1 * y1) % p)

    def res_pow(self, x, n: int):
        out = (1, 0)
        base = x
        while n:
            if n & 1:
                out = self.res_mul(out, base)
            base = self.res_mul(base, base)
            n >>= 1
        return out


class PadicQuadNumber:
    """Element a0 + a1*alpha of the unramified quadratic extension."""

    __slots__ = ("ctx", "a0", "a1")

    def __init__(self, ctx: QuadContext, a0: PadicNumber, a1: PadicNumber):
        prec = min(a0.prec, a1.prec)
        self.ctx = ctx
        self.a0 = a0.with_prec(prec)
        self.a1 = a1.with_prec(prec)

    # -- queries --------------------------------------------------------------

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def prec(self) -> int:
        return min(self.a0.prec, self.a1.prec)

    def valuation(self) -> int:
        """min of coordinate valuations (alpha is a unit in the unramified case)."""
        return min(self.a0.val, self.a1.val)

    def is_zero(self) -> bool:
        return self.a0.is_zero() and self.a1.is_zero()

    def in_base_field(self) -> bool:
        return self.a1.is_zero()

    def residue_pair(self):
        """Image in F_{p^2} as a pair mod p (valuation >= 0 required)."""
        return (self.a0.residue(), self.a1.residue())

    def in_A0(self) -> bool:
        """Principal-affinoid membership: integral coordinates, unit alpha-part."""
        return self.a0.val >= 0 and self.a1.val == 0 and not self.a1.is_zero()

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, PadicQuadNumber):
            if other.ctx != self.ctx:
                raise ValueError("mixed quadratic contexts")
            return other
        if isinstance(other, PadicNumber):
            return PadicQuadNumber(
                self.ctx, other, PadicNumber.zero(self.p, other.prec)
            )
        if isinstance(other, (int, Fraction)):
            return self.ctx.element(other, 0, self.prec)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return PadicQuadNumber(self.ctx, self.a0 + o.a0, self.a1 + o.a1)

    __radd__ = __add__

    def __neg__(self):
        return PadicQuadNumber(self.ctx, -self.a0, -self.a1)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        s, c = self.ctx.s, self.ctx.c
        x0, x1, y0, y1 = self.a0, self.a1, o.a0, o.a1
        cross = x1 * y1
        return PadicQuadNumber(
            self.ctx,
            x0 * y0 + c * cross,
            x0 * y1 + x1 * y0 + s * cross,
        )

    __rmul__ = __mul__

    def conjugate(self) -> "PadicQuadNumber":
        """Galois conjugate a0 + a1*(s - alpha)."""
        return PadicQuadNumber(self.ctx, self.a0 + self.ctx.s * self.a1, -self.a1)

    def norm(self) -> PadicNumber:
        s, c = self.ctx.s, self.ctx.c
        return self.a0 * self.a0 + s * self.a0 * self.a1 - c * self.a1 * self.a1

    def trace(self) -> PadicNumber:
        return 2 * self.a0 + self.ctx.s * self.a1

    def inverse(self) -> "PadicQuadNumber":
        if self.is_zero():
            raise ZeroInput("cannot invert zero at precision")
        n = self.norm()
        conj = self.conjugate()
        ninv = n.inverse()
        return PadicQuadNumber(self.ctx, conj.a0 * ninv, conj.a1 * ninv)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n == 0:
            return self.ctx.one(self.prec)
        base = self if n > 0 else self.inverse()
        n = abs(n)
        out = self.ctx.one(base.prec)
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def eq_at(self, other, digits: int | None = None) -> bool:
        o = self._coerce(other)
        d = self - o
        if digits is None:
            return d.is_zero()
        return (d.a0.is_zero() or d.a0.val >= digits) and (
            d.a1.is_zero() or d.a1.val >= digits
        )

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.eq_at(o)

    def __hash__(self):
        raise TypeError("PadicQuadNumber carries precision; not hashable")

    def __repr__(self):
        return f"({self.a0!r}) + ({self.a1!r})*alpha"

    # -- analytic operations --------------------------------------------------

    def sqrt(self, prec: int | None = None) -> "PadicQuadNumber":
        """Newton square root; deterministic seed choice in F_{p^2}."""
        if self.is_zero():
            raise ZeroInput("sqrt of zero-at-precision")
        if prec is None:
            prec = self.prec
        v = self.valuation()
        if v % 2 != 0:
            raise NoRoot("odd valuation")
        p = self.p
        a = self * self.ctx.element(Fraction(1, p**v), 0, self.prec - v)
        target = a.residue_pair()
        seed = None
        for x0 in range(p):
            for x1 in range(p):
                if self.ctx.res_mul((x0, x1), (x0, x1)) == target:
                    seed = (x0, x1)
                    break
            if seed:
                break
        if seed is None:
            raise NoRoot("leading residue is not a square in F_{p^2}")
        # canonical choice: lexicographically smaller of the two seeds
        other = ((p - seed[0]) % p, (p - seed[1]) % p)
        if other < seed:
            seed = other
        x = self.ctx.element(seed[0], seed[1], prec - v // 2)
        half = self.ctx.element(Fraction(1, 2), 0, prec - v // 2)
        for _ in range(prec.bit_length() + 2):
            nxt = (x + a / x) * half
            if nxt.eq_at(x):
                x = nxt
                break
            x = nxt
        pv = self.ctx.element(p ** (v // 2), 0, prec)
        return x * pv

    def teichmuller(self) -> "PadicQuadNumber":
        if self.valuation() != 0:
            raise NonUnitInput("teichmuller needs a unit")
        p = self.p
        x = self
        # x -> x^(p^2) gains one digit of agreement per step
        for _ in range(self.prec + 4):
            y = x ** (p * p)
            if y.eq_at(x):
                return y
            x = y
        return x

    def log(self) -> "PadicQuadNumber":
        """Iwasawa logarithm: log(unit part / teichmuller part)."""
        if self.is_zero():
            raise ZeroInput("log of zero")
        v = self.valuation()
        u = self * self.ctx.element(Fraction(1, self.p**v), 0, self.prec - v)
        one_unit = u / u.teichmuller()
        z = one_unit - 1
        prec = one_unit.prec
        pad = _log_pad(self.p, prec)
        out = self.ctx.zero(prec)
        if z.is_zero():
            return out
        term = self.ctx.one(prec + pad)
        z = PadicQuadNumber(
            self.ctx, z.a0.with_prec(prec + pad), z.a1.with_prec(prec + pad)
        )
        n = 1
        while n * max(z.valuation(), 1) < prec + pad:
            term = term * z
            contrib = term * self.ctx.element(
                Fraction((-1) ** (n + 1), n), 0, prec + pad
            )
            out = out + contrib
            n += 1
        return PadicQuadNumber(self.ctx, out.a0.with_prec(prec), out.a1.with_prec(prec))

    def digits_pair(self):
        """(lift of a0, lift of a1) for serialization; integral elements only."""
        return (self.a0.lift(), self.a1.lift())
