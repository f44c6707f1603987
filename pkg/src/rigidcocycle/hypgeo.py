"""Certified hyperbolic geometry in the unit-disc model.

Complex interval arithmetic on top of mpmath's real interval type. All
predicates either certify an answer or raise PrecisionExhausted so the caller
can rebuild everything at higher precision.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath

from .errors import PrecisionExhausted

iv = mpmath.iv


def set_precision(bits: int):
    iv.prec = bits


def ivf(x):
    if isinstance(x, Fraction):
        return iv.mpf(x.numerator) / iv.mpf(x.denominator)
    return iv.mpf(x)


class CIV:
    """Complex number with interval real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re = re if isinstance(re, iv.mpf().__class__) else ivf(re)
        self.im = im if isinstance(im, iv.mpf().__class__) else ivf(im)

    def __add__(self, o):
        o = _c(o)
        return CIV(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return CIV(-self.re, -self.im)

    def __sub__(self, o):
        o = _c(o)
        return CIV(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return _c(o) - self

    def __mul__(self, o):
        o = _c(o)
        return CIV(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def conj(self):
        return CIV(self.re, -self.im)

    def abs2(self):
        return self.re * self.re + self.im * self.im

    def __truediv__(self, o):
        o = _c(o)
        d = o.abs2()
        n = self * o.conj()
        return CIV(n.re / d, n.im / d)

    def __rtruediv__(self, o):
        return _c(o) / self

    def midpoint_complex(self):
        return complex(float(mpmath.mpf(self.re.mid)), float(mpmath.mpf(self.im.mid)))

    def __repr__(self):
        return f"CIV({self.re}, {self.im})"


def _c(x):
    if isinstance(x, CIV):
        return x
    if isinstance(x, complex):
        return CIV(x.real, x.imag)
    return CIV(x, 0)


def civ_from_fractions(re: Fraction, im: Fraction) -> CIV:
    return CIV(ivf(re), ivf(im))


# -- certified comparisons ----------------------------------------------------


def cert_lt(x, y):
    """True / False if certified, else raise PrecisionExhausted."""
    if x < y:
        return True
    if x >= y:
        return False
    raise PrecisionExhausted("ambiguous comparison")


def try_lt(x, y):
    """True / False / None (ambiguous)."""
    if x < y:
        return True
    if x >= y:
        return False
    return None


def sign_or_none(x):
    if x > 0:
        return 1
    if x < 0:
        return -1
    return None


# -- circles ------------------------------------------------------------------


class Circle:
    """Euclidean circle |z - c| = r inside the disc model (geodesic when
    orthogonal to the unit circle)."""

    __slots__ = ("c", "r", "r2", "tag")

    def __init__(self, c: CIV, r, tag=None):
        self.c = c
        self.r = r
        self.r2 = r * r
        self.tag = tag

    def side(self, z: CIV):
        """+1 strictly outside, -1 strictly inside, None ambiguous."""
        return sign_or_none((z - self.c).abs2() - self.r2)

    def outside_with_tol(self, z: CIV, tol) -> bool:
        """z certainly not deeper than tol inside the circle."""
        d = (z - self.c).abs2() - self.r2
        return not (d < -tol)


def isometric_circle(alpha: CIV, beta: CIV):
    """Isometric circle of the disc motion z -> (az+b)/(conj(b) z + conj(a)):
    |conj(beta) z + conj(alpha)| = 1; None if beta ~ 0 (rotation about 0)."""
    b2 = beta.abs2()
    s = sign_or_none(b2)
    if s is None or s == 0:
        return None
    center = -alpha.conj() / beta.conj()
    r = iv.sqrt(1 / b2)
    return Circle(center, r)


def circle_intersections(c1: Circle, c2: Circle):
    """The two intersection points, or None if certified disjoint/nested,
    raising PrecisionExhausted on tangency-level ambiguity."""
    dvec = c2.c - c1.c
    d2 = dvec.abs2()
    if sign_or_none(d2) is None:
        raise PrecisionExhausted("coincident circle centers")
    a = (d2 + c1.r2 - c2.r2) / 2  # times d
    h2 = c1.r2 * d2 - a * a  # h^2 d^2
    s = sign_or_none(h2)
    if s is None:
        raise PrecisionExhausted("near-tangent circles")
    if s < 0:
        return None
    base = c1.c + CIV(a / d2, 0) * dvec
    scale = iv.sqrt(h2) / d2
    perp = CIV(-dvec.im * scale, dvec.re * scale)
    return (base + perp, base - perp)


def angle_advance(ref: CIV, z: CIV):
    """Interval angle in (0, 2pi) from direction ref to direction z (ccw)."""
    w = z * ref.conj()
    ang = iv.atan2(w.im, w.re)
    # normalize into (0, 2pi); ambiguous when w points along +x (advance ~ 0/2pi)
    if ang.delta > iv.pi:
        raise PrecisionExhausted("angle near branch cut")
    if ang > 0:
        return ang
    if ang < 0:
        return ang + 2 * iv.pi
    raise PrecisionExhausted("zero angular advance")


def mobius_disc(alpha: CIV, beta: CIV, z: CIV) -> CIV:
    return (alpha * z + beta) / (beta.conj() * z + alpha.conj())


def atanh_iv(x):
    return iv.log((1 + x) / (1 - x)) / 2


def tanh_iv(x):
    e = iv.exp(2 * x)
    return (e - 1) / (e + 1)


def geodesic_midpoint(w1: CIV, w2: CIV) -> CIV:
    """Hyperbolic midpoint of two disc points."""
    # move w1 to 0, halve the distance to the image of w2, move back
    u = (w2 - w1) / (CIV(1, 0) - w1.conj() * w2)
    r2 = u.abs2()
    if sign_or_none(r2) is None:
        return w1
    r = iv.sqrt(r2)
    t = tanh_iv(atanh_iv(r) / 2)
    m = u * CIV(t / r, 0)
    return (m + w1) / (CIV(1, 0) + w1.conj() * m)
