"""The intersection-number cocycle with divisor values, its level-p twist and
restriction, the U_p operator on overconvergent series cocycles, and the four
flavored series cocycles built from the U_p geometric series.

Real-geodesic intersections are certified with interval arithmetic (with
precision escalation); all group bookkeeping is exact quaternion arithmetic.
"""

from __future__ import annotations

import mpmath

from .errors import (
    CosetSolveFailed,
    DegenerateConfiguration,
    DegreeNonZero,
    RegionViolation,
)
from .fuchsian import build_domain, cover_segment, covolume, get_word
from .homology import DivisorOnA0, act_point, coset_label
from .hypgeo import CIV, ivf, set_precision, sign_or_none
from .quatalg import (
    RealSplitting,
    eichler_order,
    find_atkin_lehner,
    find_up_cosets,
)
from .rigidseries import ActionOperator, RigidSeries, eta

__all__ = [
    "delta",
    "DivisorCocycle",
    "phi",
    "support_candidates",
    "LevelData",
    "build_level",
    "OverconvergentCocycle",
    "wp_twist_and_restrict",
    "up_apply",
    "build_flavors",
]


class _Uncertain(Exception):
    """Interval sign could not be certified; escalate precision."""


def _side(w, wp, zre, zim):
    """Which side of the geodesic with real endpoints w, wp the point z is
    on: sign of (wp - w)(|z - c|^2 - r^2) expanded endpoint-symmetrically."""
    expr = (wp - w) * (zre * zre + zim * zim - (w + wp) * zre + w * wp)
    s = sign_or_none(expr)
    if s is None:
        raise _Uncertain("point too close to a geodesic")
    return s


def _mob_real(m, t):
    den = m[1][0] * t + m[1][1]
    if 0 in den:
        raise _Uncertain("real moebius denominator near zero")
    return (m[0][0] * t + m[0][1]) / den


def _mob_complex(m, zre, zim):
    """Real 2x2 matrix acting on a complex upper half-plane point."""
    nre, nim = m[0][0] * zre + m[0][1], m[0][0] * zim
    dre, dim = m[1][0] * zre + m[1][1], m[1][0] * zim
    d2 = dre * dre + dim * dim
    if 0 in d2:
        raise _Uncertain("complex moebius denominator near zero")
    return ((nre * dre + nim * dim) / d2, (nim * dre - nre * dim) / d2)


def _mat_mul2(A, B):
    return [
        [A[0][0] * B[0][0] + A[0][1] * B[1][0],
         A[0][0] * B[0][1] + A[0][1] * B[1][1]],
        [A[1][0] * B[0][0] + A[1][1] * B[1][0],
         A[1][0] * B[0][1] + A[1][1] * B[1][1]],
    ]


def _adjugate2(A):
    return [[A[1][1], -A[0][1]], [-A[1][0], A[0][0]]]


def delta(w, wp, x, gx):
    """Signed intersection number of the geodesic C(x, gamma x) with the
    oriented geodesic C(w, wp): (side(gamma x) - side(x)) / 2."""
    return (_side(w, wp, gx[0], gx[1]) - _side(w, wp, x[0], x[1])) // 2


def _real_fixed_points(rsplit, g):
    """(tau, tau') real fixed points of iota_inf(g), tau carrying the
    positive square root."""
    m = rsplit.iota(g)
    a, b, c, d = m[0][0], m[0][1], m[1][0], m[1][1]
    if 0 in c:
        raise _Uncertain("real lower-left entry may vanish")
    sq = mpmath.iv.sqrt((d - a) ** 2 + 4 * b * c)
    return (a - d + sq) / (2 * c), (a - d - sq) / (2 * c)


class DivisorCocycle:
    """The cocycle gamma -> sum over crossed orbit geodesics of the signed
    intersection number times the corresponding p-adic point.

    Values are exact integer divisors on the principal affinoid, memoized by
    the group element's coordinates.
    """

    def __init__(self, emb, domain, splitting, prec_bits=120):
        self.emb = emb
        self.domain = domain
        self.splitting = splitting
        self.prec_bits = prec_bits
        # generator of the stabilizer of the orbit of tau_inf (the image of
        # the fundamental norm-one unit, independent of any unit power used
        # on the homology side)
        self.stab = emb.psi(emb.unit)
        self.memo = {}
        self._direct_memo = {}
        self._letter_memo = {}
        self._axis_cells = None
        self._hs = None  # exact products h_j * sigma, with identity included

    # -- candidate machinery --------------------------------------------------

    def _axis_cover(self):
        """Cells covering one fundamental segment of the axis of the unit."""
        if self._axis_cells is not None:
            return self._axis_cells
        model = self.domain.model
        set_precision(model.prec_bits)
        tau, tauc = _real_fixed_points(model.rs, self.emb.g)
        # top of the half-plane semicircle joining the endpoints: a point on
        # the axis itself
        c0 = (tau + tauc) / 2
        r0 = abs(tau - tauc) / 2
        z0 = model.z0
        y = CIV(c0, r0)
        y_disc = (y - z0) / (y - z0.conj())
        y2_disc = model.apply(self.stab, y_disc)
        self._axis_cells = cover_segment(self.domain, y_disc, y2_disc)
        return self._axis_cells

    def _sigma_h_products(self):
        if self._hs is not None:
            return self._hs
        one = self.domain.alg.one()
        sigmas = [one] + [el for el, _ in self.domain.sigma]
        out = []
        seen = set()
        for h, _ in self._axis_cover():
            hinv = h.conjugate()
            for s in sigmas:
                e = s * hinv
                key = _canon_coords(e)
                if key not in seen:
                    seen.add(key)
                    out.append(e)
        self._hs = out
        return out

    def candidate_elements(self, gamma):
        """Exact orbit-representative candidates for the support of the
        value at gamma: products (segment cell) * (neighbor) * (axis cell
        inverse), deduplicated as elements.

        A crossing of the path geodesic with an orbit geodesic lies in some
        path cell g_i * closure and, after a stabilizer shift of the orbit
        representative, in gamma_w * h_j * closure with h_j an axis cell;
        hence gamma_w = g_i * sigma * h_j^{-1} for a neighbor sigma."""
        cells = cover_segment(
            self.domain, CIV(0, 0),
            self.domain.model.apply(gamma, CIV(0, 0)),
        )
        gs = [g for g, _ in cells]
        out = []
        seen = set()
        for sh in self._sigma_h_products():
            for g in gs:
                e = g * sh
                key = _canon_coords(e)
                if key not in seen:
                    seen.add(key)
                    out.append(e)
        return out

    # -- evaluation -----------------------------------------------------------

    def _deltas(self, gamma, cands, prec):
        """[(candidate, delta)] for delta != 0, certified at prec bits."""
        set_precision(prec)
        rs = RealSplitting(self.domain.alg, prec)
        tau, tauc = _real_fixed_points(rs, self.emb.g)
        model = self.domain.model
        x = (ivf(model.x0), ivf(model.y0))
        gx = _mob_complex(rs.iota(gamma), x[0], x[1])
        out = []
        for e in cands:
            m = rs.iota(e)
            w = _mob_real(m, tau)
            wp = _mob_real(m, tauc)
            d = delta(w, wp, x, gx)
            if d != 0:
                out.append((e, d))
        return out

    def _stab_equivalent(self, q):
        """Whether q lies in the stabilizer subgroup {+-stab^n}."""
        if q.is_scalar():
            return True
        for gen in (self.stab, self.stab.inverse()):
            acc = q
            for _ in range(64):
                acc = acc * gen
                if acc.is_scalar():
                    return True
                if abs(acc.trd()) > abs(q.trd()) + 2:
                    break
        return False

    def deltas_certified(self, gamma, cands):
        """Nonzero intersection signs for a candidate list, escalating the
        interval precision until every sign is certified."""
        prec = self.prec_bits
        for _ in range(6):
            try:
                return self._deltas(gamma, cands, prec)
            except _Uncertain:
                prec *= 2
        raise DegenerateConfiguration(
            "intersection signs could not be certified; move the base point"
        )

    def support_classes(self, gamma):
        """[(element, sign)] for the crossed orbit geodesics, one
        representative per class modulo the orbit-point stabilizer."""
        hits = self.deltas_certified(gamma, self.candidate_elements(gamma))
        classes = []
        for e, d in hits:
            for cls in classes:
                if self._stab_equivalent(cls[0].inverse() * e):
                    if cls[1] != d:
                        raise DegenerateConfiguration(
                            "inconsistent intersection sign inside an orbit "
                            "class"
                        )
                    break
            else:
                classes.append((e, d))
        return classes

    def value_direct(self, gamma) -> DivisorOnA0:
        """Value from the crossing geometry of the segment from the base
        point to its gamma-translate. Robust only for moderate gamma (the
        segment cover works with the numerical disc model); value() extends
        along words and should be preferred."""
        key = _canon_coords(gamma)
        if key in self._direct_memo:
            return self._direct_memo[key]
        if gamma.is_scalar():
            out = DivisorOnA0()
        else:
            classes = self.support_classes(gamma)
            if sum(d for _, d in classes) != 0:
                raise DegreeNonZero(
                    "intersection cocycle value has nonzero degree"
                )
            terms = [(act_point(self.splitting, e, self.emb.tau_p), d)
                     for e, d in classes]
            out = DivisorOnA0(terms)
        self._direct_memo[key] = out
        return out

    def _translate(self, g, div) -> DivisorOnA0:
        return DivisorOnA0(
            [(act_point(self.splitting, g, z), m) for z, m in div.terms]
        )

    def _letter_value(self, i, e) -> DivisorOnA0:
        key = (i, e)
        if key not in self._letter_memo:
            g = self.domain.gens[i]
            if e > 0:
                val = self.value_direct(g)
            else:
                ginv = g.conjugate()
                val = -self._translate(ginv, self.value_direct(g))
            self._letter_memo[key] = val
        return self._letter_memo[key]

    def value(self, gamma) -> DivisorOnA0:
        """Cocycle value, computed by extending the generator values along
        the word of gamma (handles arbitrarily large group elements)."""
        key = _canon_coords(gamma)
        if key in self.memo:
            return self.memo[key]
        if gamma.is_scalar():
            out = DivisorOnA0()
        else:
            letters, _ = get_word(self.domain, gamma)
            out = None
            for i, e in reversed(letters):
                base = self._letter_value(i, e)
                g = (self.domain.gens[i] if e > 0
                     else self.domain.gens[i].conjugate())
                out = base if out is None else base + self._translate(g, out)
            if out is None:
                out = DivisorOnA0()
        self.memo[key] = out
        return out


def _canon_coords(e):
    c = e.coords()
    for v in c:
        if v != 0:
            return c if v > 0 else tuple(-x for x in c)
    return c


def phi(cocycle: DivisorCocycle, gamma) -> DivisorOnA0:
    return cocycle.value(gamma)


def support_candidates(cocycle: DivisorCocycle, gamma):
    return cocycle.candidate_elements(gamma)


# -- level-p structure ---------------------------------------------------------


class LevelData:
    """Bundle for the level-p group: Eichler order, its Dirichlet domain,
    coset representatives for U_p, the level-swap involution element, and a
    cache of series action operators."""

    def __init__(self, alg, order_p, splitting, domain, hts, omega,
                 ctx, W, M):
        self.alg = alg
        self.order_p = order_p
        self.splitting = splitting
        self.domain = domain
        self.hts = hts
        self.omega = omega
        self.ctx = ctx
        self.W = W
        self.M = M
        self._ops = {}
        self._words = {}
        self._schreier = None

    @property
    def p(self):
        return self.splitting.p

    def zero_series(self):
        return RigidSeries.zeros(self.ctx, self.W, self.M)

    def act(self, g, f):
        key = _canon_coords(g)
        op = self._ops.get(key)
        if op is None:
            sg = g if key == g.coords() else -g
            op = ActionOperator(sg, self.splitting, self.ctx, self.W, self.M)
            self._ops[key] = op
        return op.apply(f)

    def word(self, g):
        key = g.coords()
        if key not in self._words:
            self._words[key] = get_word(self.domain, g)
        return self._words[key]

    def in_group(self, g):
        """Membership in the level-p norm-one unit group."""
        if g.nrd() != 1 or not self.order_p.contains(g):
            return False
        try:
            return coset_label(self.splitting, g) == 0
        except Exception:
            return False

    def solve_schreier(self, gamma):
        """[(t, s_t)] with h_t s_t = gamma h_b, s_t in the level-p group."""
        out = []
        for t, ht in enumerate(self.hts):
            found = None
            for hb in self.hts:
                cand = ht.inverse() * gamma * hb
                if self.in_group(cand):
                    found = cand
                    break
            if found is None:
                raise CosetSolveFailed(f"no coset solution at index {t}")
            out.append((t, found))
        return out

    def schreier_words(self):
        """Per generator: [(t, letters of s_t(gen))], computed once."""
        if self._schreier is None:
            table = []
            for g in self.domain.gens:
                row = []
                for t, s in self.solve_schreier(g):
                    letters, _ = self.word(s)
                    row.append((t, letters))
                table.append(row)
            self._schreier = table
        return self._schreier


def build_level(alg, order, splitting, ctx, W, M, prec_bits=100):
    """Construct the level-p bundle from the maximal-order data."""
    p = splitting.p
    order_p = eichler_order(alg, order, splitting, p)
    domain = build_domain(alg, order_p, prec_bits=prec_bits,
                          covolume_target=covolume(alg) * (p + 1))
    hts = find_up_cosets(order_p, splitting, p)
    omega = find_atkin_lehner(order_p, splitting, p)
    return LevelData(alg, order_p, splitting, domain, hts, omega, ctx, W, M)


class OverconvergentCocycle:
    """Series-valued cocycle on the level-p group, stored by its values on
    the Dirichlet-domain generators and extended by the cocycle relation."""

    def __init__(self, level: LevelData, values, flavor="seed"):
        self.level = level
        self.values = list(values)
        self.flavor = flavor
        self._neg = None
        self._memo = {}

    def _neg_values(self):
        # value at g^{-1} is -(g^{-1} acting on the value at g)
        if self._neg is None:
            self._neg = [
                -self.level.act(g.conjugate(), v)
                for g, v in zip(self.level.domain.gens, self.values)
            ]
        return self._neg

    def eval_letters(self, letters) -> RigidSeries:
        gens = self.level.domain.gens
        neg = self._neg_values()
        v = None
        for i, e in reversed(letters):
            base = self.values[i] if e > 0 else neg[i]
            elem = gens[i] if e > 0 else gens[i].conjugate()
            v = base if v is None else base + self.level.act(elem, v)
        return self.level.zero_series() if v is None else v

    def value(self, gamma) -> RigidSeries:
        key = _canon_coords(gamma)
        if key not in self._memo:
            letters, _ = self.level.word(gamma)
            self._memo[key] = self.eval_letters(letters)
        return self._memo[key]

    def val_lambda(self) -> int:
        return min((v.val_lambda() for v in self.values),
                   default=self.level.W)

    def is_zero(self) -> bool:
        return all(v.is_zero_mod(self.level.W) for v in self.values)

    def combine(self, other, k1=1, k2=1, flavor=None):
        vals = [v.scale_int(k1) + w.scale_int(k2)
                for v, w in zip(self.values, other.values)]
        return OverconvergentCocycle(self.level, vals,
                                     flavor or self.flavor)


def wp_twist_and_restrict(cocycle: DivisorCocycle,
                          level: LevelData) -> OverconvergentCocycle:
    """Seed series cocycle on the level-p generators: twist the divisor
    cocycle by the level-swap element, check the values land outside the
    closed unit ball, and take termwise dlog series."""
    omega = level.omega
    omega_inv = omega.inverse()
    sp = level.splitting
    m = sp.iota(omega)
    vals = []
    for g in level.domain.gens:
        div = cocycle.value(omega_inv * g * omega)
        terms = []
        for z, mult in div.terms:
            num = m[0][0] * z + m[0][1]
            den = m[1][0] * z + m[1][1]
            wz = num * den.inverse()
            if wz.valuation() > -1:
                raise RegionViolation(
                    "twisted divisor point inside the unit ball"
                )
            terms.append((wz, mult))
        vals.append(eta(terms, level.ctx, level.W, level.M))
    return OverconvergentCocycle(level, vals, flavor="seed")


def up_apply(Phi: OverconvergentCocycle) -> OverconvergentCocycle:
    """One application of the U_p operator, on generator values.

    The operator is the negative of the plain double-coset sum
    sum_t h_t Phi(s_t(gamma)): this is the sign for which the fixed-point
    identities U_p Phi+ + phi = Phi+ and U_p Phi- + phi = -Phi- single out
    the flavor combinations that assemble into the published invariants."""
    level = Phi.level
    vin = Phi.val_lambda()
    out = []
    for row in level.schreier_words():
        acc = level.zero_series()
        for t, letters in row:
            acc = acc - level.act(level.hts[t], Phi.eval_letters(letters))
        out.append(acc)
    res = OverconvergentCocycle(level, out, Phi.flavor)
    assert res.val_lambda() >= min(vin + 1, level.W), \
        "U_p did not increase the series valuation"
    return res


def build_flavors(seed: OverconvergentCocycle, check=True):
    """{'plus','minus','even','odd'}: the four geometric-series combinations
    of U_p iterates of the seed, truncated when the iterates vanish at the
    working precision."""
    level = seed.level
    W = level.W
    plus = seed
    minus = OverconvergentCocycle(
        level, [-v for v in seed.values], "minus")
    cur = seed
    n = 0
    while n < W:
        n += 1
        cur = up_apply(cur)
        assert cur.val_lambda() >= min(n, W), \
            "U_p iterate valuation below iteration count"
        if cur.is_zero():
            break
        plus = plus.combine(cur, flavor="plus")
        sign = 1 if n % 2 == 1 else -1
        minus = minus.combine(cur, k2=sign, flavor="minus")
    plus.flavor = "plus"
    if check:
        up_plus = up_apply(plus)
        up_minus = up_apply(minus)
        for a, b, c in zip(up_plus.values, seed.values, plus.values):
            assert (a + b).eq_mod(c, W), "plus fixed-point identity failed"
        for a, b, c in zip(up_minus.values, seed.values, minus.values):
            assert (a + b).eq_mod(-c, W), "minus fixed-point identity failed"
    inv2 = pow(2, -1, level.p ** W)
    even = plus.combine(minus, k1=inv2, k2=-inv2, flavor="even")
    odd = plus.combine(minus, k1=inv2, k2=inv2, flavor="odd")
    return {"plus": plus, "minus": minus, "even": even, "odd": odd}
