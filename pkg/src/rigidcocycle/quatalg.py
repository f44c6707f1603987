"""Rational quaternion algebras B = (a,b / Q), orders, the splittings at p and
at infinity, and bounded-norm element enumeration.

Conventions: i^2 = a, j^2 = b, k = ij = -ji. Reduced norm
nrd = t^2 - a x^2 - b y^2 + ab z^2, reduced trace trd = 2t.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath

from .errors import RamifiedPrime, SearchExhausted
from .latmath import fincke_pohst, hnf_rows, solve_integer, solve_rational
from .padic import PadicNumber, hensel_sqrt

__all__ = [
    "QuaternionAlgebra",
    "QuaternionElement",
    "QuaternionOrder",
    "LocalSplitting",
    "RealSplitting",
    "maximal_order",
    "eichler_order",
    "local_splitting",
    "enumerate_by_norm",
    "find_up_cosets",
    "find_atkin_lehner",
]


def _prime_factors(n: int):
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


def _legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _hilbert_odd(a: Fraction, b: Fraction, p: int) -> int:
    """Hilbert symbol (a,b)_p for odd p."""
    va, vb = 0, 0
    an, bn = Fraction(a), Fraction(b)
    while an.numerator % p == 0:
        an /= p
        va += 1
    while an.denominator % p == 0:
        an *= p
        va -= 1
    while bn.numerator % p == 0:
        bn /= p
        vb += 1
    while bn.denominator % p == 0:
        bn *= p
        vb -= 1
    u = int(an.numerator * pow(an.denominator, -1, p)) % p
    v = int(bn.numerator * pow(bn.denominator, -1, p)) % p
    eps = (-1) ** ((p - 1) // 2 * (va * vb))
    s = eps * _legendre(u, p) ** vb * _legendre(v, p) ** va
    return s


class QuaternionAlgebra:
    """B = (a, b / Q) with i^2 = a, j^2 = b."""

    __slots__ = ("a", "b", "_disc")

    def __init__(self, a, b):
        self.a = Fraction(a)
        self.b = Fraction(b)
        if self.a == 0 or self.b == 0:
            raise ValueError("structure constants must be nonzero")
        self._disc = None

    def __eq__(self, other):
        return isinstance(other, QuaternionAlgebra) and (self.a, self.b) == (
            other.a,
            other.b,
        )

    def __hash__(self):
        return hash(("quatalg", self.a, self.b))

    def __repr__(self):
        return f"QuaternionAlgebra({self.a}, {self.b})"

    def ramified_primes(self):
        """Finite ramified primes, via Hilbert symbols (product formula for 2)."""
        cands = set(
            _prime_factors(self.a.numerator * self.a.denominator)
            + _prime_factors(self.b.numerator * self.b.denominator)
        )
        cands.discard(2)
        ram = [p for p in sorted(cands) if _hilbert_odd(self.a, self.b, p) == -1]
        inf_ram = self.a < 0 and self.b < 0
        if (len(ram) + (1 if inf_ram else 0)) % 2 == 1:
            ram = sorted(ram + [2])
        return ram

    @property
    def discriminant(self) -> int:
        if self._disc is None:
            d = 1
            for p in self.ramified_primes():
                d *= p
            self._disc = d
        return self._disc

    def is_indefinite(self) -> bool:
        return self.a > 0 or self.b > 0

    def element(self, t, x=0, y=0, z=0) -> "QuaternionElement":
        return QuaternionElement(self, t, x, y, z)

    def one(self):
        return self.element(1)

    def gens(self):
        return self.element(0, 1), self.element(0, 0, 1), self.element(0, 0, 0, 1)


class QuaternionElement:
    """t + x i + y j + z k with exact rational coordinates. Immutable, hashable."""

    __slots__ = ("alg", "t", "x", "y", "z")

    def __init__(self, alg, t, x=0, y=0, z=0):
        object.__setattr__(self, "alg", alg)
        object.__setattr__(self, "t", Fraction(t))
        object.__setattr__(self, "x", Fraction(x))
        object.__setattr__(self, "y", Fraction(y))
        object.__setattr__(self, "z", Fraction(z))

    def __setattr__(self, *args):
        raise AttributeError("immutable")

    def coords(self):
        return (self.t, self.x, self.y, self.z)

    def __eq__(self, other):
        if not isinstance(other, QuaternionElement):
            if isinstance(other, (int, Fraction)):
                other = self.alg.element(other)
            else:
                return NotImplemented
        return self.alg == other.alg and self.coords() == other.coords()

    def __hash__(self):
        return hash((self.alg, self.coords()))

    def __repr__(self):
        return f"({self.t} + {self.x}i + {self.y}j + {self.z}k)"

    def _co(self, other):
        if isinstance(other, QuaternionElement):
            return other
        if isinstance(other, (int, Fraction)):
            return self.alg.element(other)
        return None

    def __add__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        return QuaternionElement(
            self.alg, self.t + o.t, self.x + o.x, self.y + o.y, self.z + o.z
        )

    __radd__ = __add__

    def __neg__(self):
        return QuaternionElement(self.alg, -self.t, -self.x, -self.y, -self.z)

    def __sub__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        a, b = self.alg.a, self.alg.b
        t1, x1, y1, z1 = self.coords()
        t2, x2, y2, z2 = o.coords()
        return QuaternionElement(
            self.alg,
            t1 * t2 + a * x1 * x2 + b * y1 * y2 - a * b * z1 * z2,
            t1 * x2 + x1 * t2 - b * y1 * z2 + b * z1 * y2,
            t1 * y2 + y1 * t2 + a * x1 * z2 - a * z1 * x2,
            t1 * z2 + z1 * t2 + x1 * y2 - y1 * x2,
        )

    def __rmul__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        return o * self

    def conjugate(self):
        return QuaternionElement(self.alg, self.t, -self.x, -self.y, -self.z)

    def nrd(self) -> Fraction:
        a, b = self.alg.a, self.alg.b
        t, x, y, z = self.coords()
        return t * t - a * x * x - b * y * y + a * b * z * z

    def trd(self) -> Fraction:
        return 2 * self.t

    def inverse(self):
        n = self.nrd()
        if n == 0:
            raise ZeroDivisionError("zero-divisor or zero element")
        c = self.conjugate()
        return QuaternionElement(self.alg, c.t / n, c.x / n, c.y / n, c.z / n)

    def __pow__(self, n: int):
        if n == 0:
            return self.alg.one()
        base = self if n > 0 else self.inverse()
        out = self.alg.one()
        for _ in range(abs(n)):
            out = out * base
        return out

    def is_scalar(self):
        return self.x == 0 and self.y == 0 and self.z == 0


class QuaternionOrder:
    """Z-order given by a 4-element basis (rows of rational coordinates)."""

    __slots__ = ("alg", "basis", "_red_disc")

    def __init__(self, alg, basis, check=True):
        self.alg = alg
        self.basis = tuple(basis)
        self._red_disc = None
        if check:
            if not self.contains(alg.one()):
                raise ValueError("order must contain 1")
            for u in self.basis:
                for v in self.basis:
                    if not self.contains(u * v):
                        raise ValueError("basis not multiplicatively closed")

    def basis_rows(self):
        return [list(e.coords()) for e in self.basis]

    def coordinates(self, elem):
        """Integer coordinates of elem in the order basis, or None."""
        return solve_integer(self.basis_rows(), list(elem.coords()))

    def contains(self, elem) -> bool:
        return self.coordinates(elem) is not None

    def reduced_discriminant(self) -> int:
        if self._red_disc is None:
            g = [
                [Fraction((u * v).trd()) for v in self.basis] for u in self.basis
            ]
            d = _det4(g)
            r = _fraction_sqrt(abs(d))
            self._red_disc = int(r)
        return self._red_disc

    def element_from_coords(self, c):
        out = self.alg.element(0)
        for ci, e in zip(c, self.basis):
            out = out + Fraction(ci) * e
        return out

    def __repr__(self):
        return f"QuaternionOrder({self.basis})"


def _det4(g):
    n = len(g)
    M = [row[:] for row in g]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det *= M[c][c]
        inv = 1 / M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] * inv
            if f:
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return det


def _fraction_sqrt(f: Fraction) -> Fraction:
    n = math.isqrt(f.numerator)
    d = math.isqrt(f.denominator)
    if n * n != f.numerator or d * d != f.denominator:
        raise ValueError(f"{f} is not a rational square")
    return Fraction(n, d)


# -- order construction -------------------------------------------------------


def _lattice_from_rows(rows):
    """Canonical basis (HNF over a common denominator) of the Q-span lattice."""
    den = 1
    for r in rows:
        for x in r:
            den = den * Fraction(x).denominator // math.gcd(
                den, Fraction(x).denominator
            )
    int_rows = [[int(Fraction(x) * den) for x in r] for r in rows]
    H = hnf_rows(int_rows)
    return [[Fraction(x, den) for x in r] for r in H]


def _close_under_multiplication(alg, rows, max_iter=12):
    """Multiplicative closure of a lattice containing 1; None if it grows unboundedly."""
    cur = _lattice_from_rows(rows)
    for _ in range(max_iter):
        elems = [alg.element(*r) for r in cur]
        prods = [list((u * v).coords()) for u in elems for v in elems]
        new = _lattice_from_rows(cur + prods)
        if new == cur:
            return cur
        cur = new
    return None


def maximal_order(alg: QuaternionAlgebra) -> QuaternionOrder:
    """A maximal order containing Z<1,i,j,k>, by p-saturation at bad primes."""
    rows = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    order = QuaternionOrder(alg, [alg.element(*r) for r in rows], check=False)
    target = alg.discriminant
    while order.reduced_discriminant() != target:
        ratio = order.reduced_discriminant() // target
        improved = False
        for p in _prime_factors(ratio):
            cand = _saturate_at(alg, order, p)
            if cand is not None:
                order = cand
                improved = True
                break
        if not improved:
            raise ValueError("saturation failed; non-maximal order is stuck")
    return order

def _saturate_at(alg, order, p):
    """Try to enlarge the order at p by adjoining integral elements of (1/p)O."""
    base = order.basis_rows()
    n = len(base)
    for mask in range(1, p**n):
        c = []
        mm = mask
        for _ in range(n):
            c.append(mm % p)
            mm //= p
        vec = [Fraction(sum(c[i] * Fraction(base[i][j]) for i in range(n)), p) for j in range(4)]
        x = alg.element(*vec)
        if x.trd().denominator != 1 or x.nrd().denominator != 1:
            continue
        if order.contains(x):
            continue
        closed = _close_under_multiplication(alg, base + [list(vec)])
        if closed is None:
            continue
        cand = QuaternionOrder(alg, [alg.element(*r) for r in closed], check=False)
        # must still be integral (discriminant a positive integer multiple of target)
        try:
            rd = cand.reduced_discriminant()
        except ValueError:
            continue
        if rd < order.reduced_discriminant() and rd % alg.discriminant == 0:
            return cand
    return None


def eichler_order(alg, maximal, splitting, p):
    """Level-p Eichler order inside a maximal order: elements whose image at p
    is upper triangular mod p (lower-left entry divisible by p)."""
    rows = []
    for e in maximal.basis:
        m = splitting.iota(e)
        c = m[1][0]
        rows.append((e, c))
    # kernel of the mod-p map e -> lower-left entry mod p, as a sublattice
    # build integer matrix of the map on basis coords
    vecs = []
    for e, c in rows:
        vecs.append(int(c.lift() % p))
    kernel_rows = []
    n = len(rows)
    # sublattice of Z^n: {v : sum v_i vecs_i = 0 mod p} generated by p*e_i and
    # differences; use HNF of the (n+1) x n stack trick
    stack = []
    for i in range(n):
        stack.append([p if i == j else 0 for j in range(n)])
    # add combinations killing the functional: for each i with vecs[i] != 0
    # pair with a reference index
    ref = next((i for i in range(n) if vecs[i] % p != 0), None)
    if ref is None:
        return QuaternionOrder(alg, maximal.basis, check=False)
    inv = pow(vecs[ref], -1, p)
    for i in range(n):
        if i == ref:
            continue
        row = [0] * n
        row[i] = 1
        row[ref] = (-vecs[i] * inv) % p
        stack.append(row)
    H = hnf_rows(stack)
    basis = [maximal.element_from_coords(r) for r in H]
    return QuaternionOrder(alg, basis, check=False)


# -- p-adic splitting ---------------------------------------------------------


def _mat_mul(A, B):
    return [
        [A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]],
        [A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]],
    ]


def _mat_add(A, B):
    return [[A[i][j] + B[i][j] for j in range(2)] for i in range(2)]


def _mat_scal(c, A):
    return [[c * A[i][j] for j in range(2)] for i in range(2)]


def _mat_inv(A):
    det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    dinv = det.inverse()
    return [[A[1][1] * dinv, -A[0][1] * dinv], [-A[1][0] * dinv, A[0][0] * dinv]]


class LocalSplitting:
    """Splitting B tensor Q_p = M_2(Q_p) normalized so the given maximal order
    maps onto M_2(Z_p)."""

    __slots__ = ("alg", "p", "prec", "I", "J", "K")

    def __init__(self, alg, p, prec, I, J):
        self.alg = alg
        self.p = p
        self.prec = prec
        self.I = I
        self.J = J
        self.K = _mat_mul(I, J)

    def iota(self, elem: QuaternionElement):
        """2x2 PadicNumber matrix image of elem."""
        p, N = self.p, self.prec
        t = PadicNumber.from_fraction(elem.t, p, N)
        out = [[t, PadicNumber.zero(p, N)], [PadicNumber.zero(p, N), t]]
        for c, M in ((elem.x, self.I), (elem.y, self.J), (elem.z, self.K)):
            if c:
                cc = PadicNumber.from_fraction(c, p, N)
                out = _mat_add(out, _mat_scal(cc, M))
        return out


def _padic_is_square(q: Fraction, p: int):
    """If q is a square in Q_p, return a square root as a PadicNumber factory."""
    v = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    if v % 2 != 0:
        return False
    u = num * pow(den, -1, p) % p
    if u % p == 0:
        return False
    return pow(u, (p - 1) // 2, p) == 1


def local_splitting(alg: QuaternionAlgebra, R: QuaternionOrder, p: int, N: int) -> LocalSplitting:
    """Construct iota_p with iota_p(R tensor Z_p) = M_2(Z_p)."""
    if p == 2:
        raise RamifiedPrime("p = 2 unsupported")
    if alg.discriminant % p == 0:
        raise RamifiedPrime(f"{p} divides the discriminant {alg.discriminant}")
    a, b = alg.a, alg.b
    i, j, k = alg.gens()
    one = PadicNumber.one(p, N)
    zero = PadicNumber.zero(p, N)

    if _padic_is_square(a, p):
        w, v = i, j
        s = hensel_sqrt(PadicNumber.from_fraction(a, p, N))
    elif _padic_is_square(b, p):
        w, v = j, i
        s = hensel_sqrt(PadicNumber.from_fraction(b, p, N))
    else:
        # solve x^2 - a y^2 = b in Q_p; then w = x j + y k satisfies w^2 = b^2
        x, y = _solve_conic(a, b, p, N)
        return _splitting_from_conic(alg, R, p, N, x, y,
                                     PadicNumber.from_fraction(b, p, N))

    # direct case: w diagonalizes, v anticommutes with w, q = v^2 scalar
    q = PadicNumber.from_fraction((v * v).t, p, N)
    Wm = [[s, zero], [zero, -s]]
    Vm = [[zero, one], [q, zero]]
    # express i, j in the basis {1, w, v, wv} (here trivially i,j in {w,v})
    if w == i:
        I = Wm
        J = Vm
    else:
        I = Vm
        J = Wm
    sp = LocalSplitting(alg, p, N, I, J)
    return _normalize_to_m2zp(sp, R)


def _solve_conic(a: Fraction, b: Fraction, p: int, N: int):
    """x^2 - a y^2 = b over Q_p by Hensel from a smooth F_p point.

    Requires a, b p-adic units with a a non-square (true in the calling context
    after clearing squares is not needed for in-scope algebras)."""
    am = int(Fraction(a).numerator * pow(Fraction(a).denominator, -1, p)) % p
    bm = int(Fraction(b).numerator * pow(Fraction(b).denominator, -1, p)) % p
    sol = None
    for y0 in range(p):
        r = (bm + am * y0 * y0) % p
        if r == 0:
            continue
        if pow(r, (p - 1) // 2, p) == 1:
            x0 = next(x for x in range(p) if x * x % p == r)
            sol = (x0, y0)
            break
    if sol is None:
        raise SearchExhausted("no smooth mod-p point on the conic (unexpected)")
    x0, y0 = sol
    # Hensel lift x: f(x) = x^2 - a y0^2 - b, f'(x0) = 2 x0 != 0 mod p
    aa = PadicNumber.from_fraction(a, p, N)
    bb = PadicNumber.from_fraction(b, p, N)
    yy = PadicNumber.from_int(y0, p, N)
    target = bb + aa * yy * yy
    xx = hensel_sqrt(target)
    return xx, yy


def _splitting_from_conic(alg, R, p, N, x, y, b_p):
    """Splitting when neither a nor b is a p-adic square: w = x j + y k obeys
    w^2 = b^2; v = i anticommutes with w."""
    a = PadicNumber.from_fraction(alg.a, p, N)
    one = PadicNumber.one(p, N)
    zero = PadicNumber.zero(p, N)
    # matrices in the basis {1, w, v, wv}: w -> diag(b, -b), v -> [[0,1],[a,0]]
    Wm = [[b_p, zero], [zero, -b_p]]
    Vm = [[zero, one], [a, zero]]
    WVm = _mat_mul(Wm, Vm)
    # recover images of j and k: w = x j + y k and (anticommuting partner)
    # wv = (x j + y k) i = x (j i) + y (k i) = -x k + ... compute in B with
    # p-adic coefficients directly via linear algebra on coordinates.
    # Coordinates of {1, w, v, wv} in the basis {1, i, j, k}:
    #   1 = (1,0,0,0); w = (0,0,x,y); v = (0,1,0,0); wv = w * i.
    # w*i: (x j + y k) * i: j i = -k, k i = (ij)i = -a j  => wv = (0,0,-a y,-x)
    M = [
        [one, zero, zero, zero],
        [zero, zero, x, y],
        [zero, one, zero, zero],
        [zero, zero, -(a * y), -x],
    ]
    inv = _inv4_padic(M, p, N)
    basics = [[[one, zero], [zero, one]], Wm, Vm, WVm]

    def img(idx):
        # row idx of inv gives the {1,w,v,wv}-coordinates of the basis
        # quaternion e_idx (rows of M are the images of 1, w, v, wv)
        out = [[zero, zero], [zero, zero]]
        for r in range(4):
            out = _mat_add(out, _mat_scal(inv[idx][r], basics[r]))
        return out

    I = img(1)
    J = img(2)
    sp = LocalSplitting(alg, p, N, I, J)
    return _normalize_to_m2zp(sp, R)


def _inv4_padic(M, p, N):
    n = 4
    A = [row[:] + [PadicNumber.from_int(1 if r == c else 0, p, N) for c in range(n)]
         for r, row in enumerate(M)]
    for c in range(n):
        piv = max(range(c, n), key=lambda r: -A[r][c].val if not A[r][c].is_zero() else -10**9)
        if A[piv][c].is_zero():
            raise ZeroDivisionError("singular matrix")
        A[c], A[piv] = A[piv], A[c]
        inv = A[c][c].inverse()
        A[c] = [v * inv for v in A[c]]
        for r in range(n):
            if r != c and not A[r][c].is_zero():
                f = A[r][c]
                A[r] = [v - f * w for v, w in zip(A[r], A[c])]
    return [row[n:] for row in A]


def _normalize_to_m2zp(sp: LocalSplitting, R: QuaternionOrder) -> LocalSplitting:
    """Conjugate so that the order image is exactly M_2(Z_p): find a stable
    lattice in Q_p^2 under the order's image and change basis to it."""
    p, N = sp.p, sp.prec
    mats = [sp.iota(e) for e in R.basis]
    # lattice basis columns, start with standard
    one = PadicNumber.one(p, N)
    zero = PadicNumber.zero(p, N)
    cols = [[one, zero], [zero, one]]
    for _ in range(40):
        new_cols = list(cols)
        for m in mats:
            for c in cols:
                new_cols.append([m[0][0] * c[0] + m[0][1] * c[1],
                                 m[1][0] * c[0] + m[1][1] * c[1]])
        reduced = _col_hnf_padic(new_cols, p, N)
        if _same_lattice(reduced, cols):
            break
        cols = reduced
    P = [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]
    Pinv = _mat_inv(P)
    I = _mat_mul(Pinv, _mat_mul(sp.I, P))
    J = _mat_mul(Pinv, _mat_mul(sp.J, P))
    out = LocalSplitting(sp.alg, p, N, I, J)
    _verify_m2zp(out, R)
    return out


def _col_hnf_padic(cols, p, N):
    """Column reduction of a list of Q_p^2 vectors to a 2-column lattice basis."""
    work = [c[:] for c in cols if not (c[0].is_zero() and c[1].is_zero())]
    # pivot in row 0: minimal valuation
    best = min(work, key=lambda c: min(c[0].val if not c[0].is_zero() else 10**9,
                                       c[1].val if not c[1].is_zero() else 10**9))
    # choose pivot row
    r0 = 0 if (not best[0].is_zero() and (best[1].is_zero() or best[0].val <= best[1].val)) else 1
    piv1 = min(work, key=lambda c: c[r0].val if not c[r0].is_zero() else 10**9)
    v1 = piv1[:]
    rest = []
    for c in work:
        if c is piv1:
            continue
        if not c[r0].is_zero():
            f = c[r0] / v1[r0]
            c = [c[0] - f * v1[0], c[1] - f * v1[1]]
        rest.append(c)
    r1 = 1 - r0
    nonzero = [c for c in rest if not c[r1].is_zero()]
    if not nonzero:
        raise ZeroDivisionError("degenerate lattice")
    v2 = min(nonzero, key=lambda c: c[r1].val)
    # normalize to p-power leading entries for canonical form
    u1 = PadicNumber(p, 0, pow(v1[r0].unit, -1, p ** v1[r0].rel_prec()), v1[r0].rel_prec())
    u2 = PadicNumber(p, 0, pow(v2[r1].unit, -1, p ** v2[r1].rel_prec()), v2[r1].rel_prec())
    v1 = [x * u1 for x in v1]
    v2 = [x * u2 for x in v2]
    # reduce v1 against v2 in row r1
    if not v1[r1].is_zero() and v1[r1].val >= v2[r1].val:
        f = v1[r1] / v2[r1]
        v1 = [v1[0] - f * v2[0], v1[1] - f * v2[1]]
    return [v1, v2]


def _same_lattice(c1, c2):
    # both in reduced form: compare valuations of pivots and the off entries
    for u, v in zip(c1, c2):
        for x, y in zip(u, v):
            if x.is_zero() != y.is_zero():
                return False
            if not x.is_zero() and x.val != y.val:
                return False
            if not (x - y).is_zero() and (x - y).val < min(x.prec, y.prec) - 2:
                return False
    return True


def _verify_m2zp(sp: LocalSplitting, R: QuaternionOrder):
    rows = []
    for e in R.basis:
        m = sp.iota(e)
        for i in range(2):
            for j in range(2):
                if not m[i][j].is_zero() and m[i][j].val < 0:
                    raise RamifiedPrime("order image not integral after normalization")
        rows.append([m[0][0], m[0][1], m[1][0], m[1][1]])
    # the 4x4 coordinate matrix must be invertible over Z_p
    det = _det4_padic(rows)
    if det.is_zero() or det.val != 0:
        raise RamifiedPrime("order image is not all of M_2(Z_p)")


def _det4_padic(rows):
    n = 4
    M = [r[:] for r in rows]
    det = None
    sign = 1
    for c in range(n):
        piv = None
        for r in range(c, n):
            if not M[r][c].is_zero():
                if piv is None or M[r][c].val < M[piv][c].val:
                    piv = r
        if piv is None:
            return M[0][0] - M[0][0]  # zero at precision
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            sign = -sign
        d = M[c][c]
        det = d if det is None else det * d
        inv = d.inverse()
        for r in range(c + 1, n):
            if not M[r][c].is_zero():
                f = M[r][c] * inv
                M[r] = [v - f * w for v, w in zip(M[r], M[c])]
    return det if sign == 1 else -det


# -- real splitting and enumeration ------------------------------------------


class RealSplitting:
    """iota_inf with interval-certified entries; requires a > 0."""

    def __init__(self, alg: QuaternionAlgebra, prec_bits: int = 100):
        if alg.a <= 0:
            raise ValueError("real splitting here needs a > 0")
        self.alg = alg
        self.prec_bits = prec_bits

    def iota(self, elem: QuaternionElement):
        """2x2 matrix of mpmath.iv intervals: i -> diag(sqrt a, -sqrt a),
        j -> [[0,1],[b,0]]."""
        iv = mpmath.iv
        old = iv.prec
        iv.prec = self.prec_bits
        try:
            sa = iv.sqrt(iv.mpf(self.alg.a.numerator) / iv.mpf(self.alg.a.denominator))
            t, x, y, z = [iv.mpf(c.numerator) / iv.mpf(c.denominator)
                          for c in elem.coords()]
            b = iv.mpf(self.alg.b.numerator) / iv.mpf(self.alg.b.denominator)
            return [
                [t + x * sa, y + z * sa],
                [b * (y - z * sa), t - x * sa],
            ]
        finally:
            iv.prec = old


def _displacement_gram(order: QuaternionOrder, digits=60):
    """Fraction approximation of the Gram matrix of q(gamma) =
    (sum of squares of iota_inf(gamma) entries)/2 in the order basis."""
    mp = mpmath.mp
    old = mp.dps
    mp.dps = digits
    try:
        a = mpmath.mpf(order.alg.a.numerator) / mpmath.mpf(order.alg.a.denominator)
        b = mpmath.mpf(order.alg.b.numerator) / mpmath.mpf(order.alg.b.denominator)
        sa = mpmath.sqrt(a)

        def entries(e):
            t, x, y, z = [mpmath.mpf(c.numerator) / mpmath.mpf(c.denominator)
                          for c in e.coords()]
            return [t + x * sa, y + z * sa, b * (y - z * sa), t - x * sa]

        rows = [entries(e) for e in order.basis]
        G = []
        for u in rows:
            G.append([sum(ui * vi for ui, vi in zip(u, v)) / 2 for v in rows])
        # symmetrized Fraction conversion
        out = [[Fraction(0)] * 4 for _ in range(4)]
        for i in range(4):
            for j in range(4):
                f = Fraction(str((G[i][j] + G[j][i]) / 2))
                out[i][j] = f
        return out
    finally:
        mp.dps = old


def _nrd_gram(order: QuaternionOrder):
    """(A, d) with nrd(sum c_i e_i) = c^T A c / d, A integer symmetric."""
    g = [
        [Fraction((u * v.conjugate()).trd(), 2) for v in order.basis]
        for u in order.basis
    ]
    d = 1
    for row in g:
        for x in row:
            d = d * x.denominator // math.gcd(d, x.denominator)
    A = [[int(x * d) for x in row] for row in g]
    return A, d


def enumerate_by_norm(order: QuaternionOrder, n: int, height_bound: float):
    """All order elements of reduced norm n within hyperbolic displacement
    height_bound of the point i, one per +- pair, in canonical sorted order."""
    if n < 1:
        raise ValueError("norm must be positive")
    import numpy as np

    G = _displacement_gram(order)
    cosh_b = float(mpmath.cosh(height_bound))
    bound = cosh_b * n * (1 + 1e-9) + 1e-9
    pts = fincke_pohst(G, bound)
    if not pts:
        return []
    A, d = _nrd_gram(order)
    C = np.array(pts, dtype=np.int64)
    An = np.array(A, dtype=np.int64)
    vals = np.einsum("ij,jk,ik->i", C, An, C)
    hits = C[vals == n * d]
    out = []
    for vec in hits.tolist():
        e = order.element_from_coords(vec)
        if e.nrd() == n:
            out.append(e)
    out.sort(key=lambda e: e.coords())
    return out


# -- U_p cosets and Atkin-Lehner ---------------------------------------------


def _sigma0_label(m, p):
    """Left-coset label t in F_p for a norm-p matrix in Sigma_0(p):
    upper-left a unit, lower-left divisible by p; label t = (c/p) a^{-1} mod p.
    Returns None if the matrix is not of Sigma_0(p) reduced-norm-p shape."""
    a, c = m[0][0], m[1][0]
    for row in m:
        for x in row:
            if not x.is_zero() and x.val < 0:
                return None
    if a.is_zero() or a.val != 0:
        return None
    if not c.is_zero() and c.val < 1:
        return None
    cp = 0 if c.is_zero() else (c.lift() // p) % p
    return cp * pow(a.residue(), -1, p) % p


def find_up_cosets(Rp: QuaternionOrder, splitting: LocalSplitting, p: int,
                   height_bound: float = 3.0, max_escalations: int = 4):
    """p norm-p elements of the level-p order representing the p distinct left
    cosets h_t Gamma_0(p) inside Sigma_0(p), sorted by label t."""
    bound = height_bound
    for _ in range(max_escalations):
        cands = enumerate_by_norm(Rp, p, bound)
        buckets = {}
        for h in cands:
            if not Rp.contains(h):
                continue
            t = _sigma0_label(splitting.iota(h), p)
            if t is None:
                continue
            buckets.setdefault(t, []).append(h)
        if len(buckets) == p:
            reps = [min(buckets[t], key=lambda e: e.coords()) for t in range(p)]
            _verify_distinct_cosets(Rp, reps, p)
            return reps
        bound *= 2
    raise SearchExhausted(
        f"could not realize all {p} coset labels (found {sorted(buckets)})"
    )


def _verify_distinct_cosets(Rp, reps, p):
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            q = reps[i].conjugate() * reps[j]
            q = Fraction(1, p) * q
            if Rp.contains(q) and q.nrd() == 1:
                raise SearchExhausted("coset representatives collide")


def find_atkin_lehner(Rp: QuaternionOrder, splitting: LocalSplitting, p: int,
                      height_bound: float = 3.0, max_escalations: int = 4):
    """An element of reduced norm p normalizing the level-p order, with local
    shape (anti-diagonal mod p): upper-left, lower-left, lower-right in pZ_p."""
    bound = height_bound
    for _ in range(max_escalations):
        for h in enumerate_by_norm(Rp, p, bound):
            if not Rp.contains(h):
                continue
            m = splitting.iota(h)
            ok = (not any(not x.is_zero() and x.val < 0 for row in m for x in row)
                  and (m[0][0].is_zero() or m[0][0].val >= 1)
                  and (m[1][0].is_zero() or m[1][0].val >= 1)
                  and (m[1][1].is_zero() or m[1][1].val >= 1)
                  and (not m[0][1].is_zero() and m[0][1].val == 0))
            if not ok:
                continue
            if _normalizes(Rp, h, p):
                return h
        bound *= 2
    raise SearchExhausted("no Atkin-Lehner element within bound")


def _normalizes(Rp, w, p):
    winv = w.conjugate()
    for e in Rp.basis:
        x = Fraction(1, p) * (w * e * winv)
        if not Rp.contains(x):
            return False
    return True
