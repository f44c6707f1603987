"""Homology chains: the fixed-point cycle gamma_psi tensor tau_p, its
degree-zero lift through a 2-chain, and the transfer to the level-p subgroup
by explicit coset representatives."""

from __future__ import annotations

from .errors import (
    A0MembershipFailed,
    BoundaryNonzero,
    CosetClassificationFailed,
    SearchExhausted,
)
from .fuchsian import express_in_commutators, get_word

__all__ = [
    "DivisorOnA0",
    "OneChain",
    "act_point",
    "build_cycle",
    "lift_degree_zero",
    "coset_representatives",
    "coset_label",
    "corestrict",
]


class DivisorOnA0:
    """Finite integer combination of points of the principal affinoid."""

    def __init__(self, terms=None, check=True):
        self.terms = []
        for pt, mult in terms or []:
            if mult == 0:
                continue
            if check and not pt.in_A0():
                raise A0MembershipFailed(f"divisor point {pt} not in A0")
            self._bump(pt, mult)

    def _bump(self, pt, mult):
        for i, (q, m) in enumerate(self.terms):
            if q.eq_at(pt):
                m += mult
                if m == 0:
                    del self.terms[i]
                else:
                    self.terms[i] = (q, m)
                return
        self.terms.append((pt, mult))

    def degree(self) -> int:
        return sum(m for _, m in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        out = DivisorOnA0(self.terms, check=False)
        for pt, m in other.terms:
            out._bump(pt, m)
        return out

    def __neg__(self):
        return DivisorOnA0([(pt, -m) for pt, m in self.terms], check=False)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, n: int):
        return DivisorOnA0([(pt, n * m) for pt, m in self.terms], check=False)

    def __repr__(self):
        return f"DivisorOnA0({self.terms!r})"


class OneChain:
    """Finite sum of (group element) tensor (divisor) terms."""

    def __init__(self, terms=None):
        self.terms = []
        for g, d in terms or []:
            self._bump(g, d)

    def _bump(self, g, d):
        if d.is_zero():
            return
        for i, (h, e) in enumerate(self.terms):
            if h == g:
                s = e + d
                if s.is_zero():
                    del self.terms[i]
                else:
                    self.terms[i] = (h, s)
                return
        self.terms.append((g, d))

    def __add__(self, other):
        out = OneChain(self.terms)
        for g, d in other.terms:
            out._bump(g, d)
        return out

    def __neg__(self):
        return OneChain([(g, -d) for g, d in self.terms])

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, n: int):
        return OneChain([(g, n * d) for g, d in self.terms])

    def is_zero(self) -> bool:
        return not self.terms

    def boundary(self, splitting) -> DivisorOnA0:
        """The 1-boundary: sum over terms of gD - D."""
        out = DivisorOnA0()
        for g, d in self.terms:
            for pt, m in d.terms:
                out._bump(act_point(splitting, g, pt), m)
                out._bump(pt, -m)
        return out

    def degrees(self):
        return [d.degree() for _, d in self.terms]

    def sorted_terms(self):
        return sorted(self.terms, key=lambda t: t[0].coords())

    def __repr__(self):
        return f"OneChain({len(self.terms)} terms)"


def act_point(splitting, g, z):
    """Moebius action of a unit-determinant element on a point of A0."""
    m = splitting.iota(g)
    num = m[0][0] * z + m[0][1]
    den = m[1][0] * z + m[1][1]
    w = num * den.inverse()
    if not w.in_A0():
        raise A0MembershipFailed(f"image of A0 point left A0 under {g}")
    return w


def build_cycle(emb, check_prec=None) -> OneChain:
    """The cycle gamma_psi tensor [tau_p], with the fixed-point property
    verified at working precision."""
    gamma = emb.gamma_psi
    if gamma.is_scalar():
        raise BoundaryNonzero("unit image is scalar; no geodesic cycle")
    tau = emb.tau_p
    img = act_point(emb.splitting, gamma, tau)
    digits = check_prec if check_prec is not None else min(tau.prec, img.prec) - 2
    if not img.eq_at(tau, digits):
        raise BoundaryNonzero("tau_p is not fixed by gamma_psi at precision")
    return OneChain([(gamma, DivisorOnA0([(tau, 1)]))])


def lift_degree_zero(cycle: OneChain, domain, pres, splitting,
                     base_point=None):
    """(c0, e): a degree-zero 1-cycle with e * cycle - c0 a 2-boundary.

    e is the order of the cycle's group element in the abelianization. The
    2-chain is tensored with a fixed base divisor [tau0] (default: the first
    divisor point of the cycle).
    """
    if all(d == 0 for d in cycle.degrees()):
        return cycle, 1
    if len(cycle.terms) != 1:
        raise BoundaryNonzero(
            "degree-zero lift implemented for single-term cycles"
        )
    gamma, div = cycle.terms[0]
    tau0 = base_point if base_point is not None else div.terms[0][0]
    letters, zexp = get_word(domain, gamma)
    e, W = express_in_commutators(pres, gamma, letters, zexp)
    out = e * cycle
    # subtract the boundary of the 2-chain W tensor [tau0]:
    # d2(g, h, v) = h (x) v - gh (x) v + g (x) hv
    base = DivisorOnA0([(tau0, 1)])
    for (g, h), c in W.items():
        pushed = DivisorOnA0([(act_point(splitting, h, tau0), 1)])
        out = out - OneChain([
            (h, c * base),
            (g * h, (-c) * base),
            (g, c * pushed),
        ])
    for d in out.degrees():
        if d != 0:
            raise BoundaryNonzero("lifted cycle has nonzero degree")
    bd = out.boundary(splitting)
    if not bd.is_zero():
        raise BoundaryNonzero(f"lift boundary nonzero: {bd}")
    return out, e


def coset_label(splitting, g):
    """Projective bottom row of iota_p(g) mod p: an integer t in 0..p-1 for
    rows (t*d, d) with d a unit, or p for rows (c, 0) with c a unit."""
    p = splitting.p
    m = splitting.iota(g)
    c, d = m[1][0], m[1][1]
    if c.val < 0 or d.val < 0:
        raise CosetClassificationFailed("non-integral bottom row")
    cr, dr = c.residue(), d.residue()
    if dr % p != 0:
        return (cr * pow(dr, -1, p)) % p
    if cr % p != 0:
        return p
    raise CosetClassificationFailed("bottom row vanishes mod p")


def coset_representatives(order, splitting, bound=3.0):
    """Canonical norm-one representatives of the p+1 cosets of the level-p
    subgroup, indexed by label 0..p (0 is the subgroup itself)."""
    from .quatalg import enumerate_by_norm

    p = splitting.p
    reps = {0: order.alg.one()}
    b = bound
    for _ in range(6):
        for g in enumerate_by_norm(order, 1, b):
            lab = coset_label(splitting, g)
            if lab not in reps:
                reps[lab] = g
            if len(reps) == p + 1:
                return [reps[t] for t in range(p + 1)]
        b += 1.5
    raise SearchExhausted("could not reach all level-p cosets")


def corestrict(cycle: OneChain, reps, splitting) -> OneChain:
    """Transfer of a 1-chain to the level-p subgroup.

    Each term g (x) D becomes the sum over representatives t_i of
    (t_i g t_{j(i)}^{-1}) (x) t_{j(i)} D, where t_i g lies in the subgroup
    coset of t_{j(i)}; this is the unique coefficient choice for which the
    transfer of a cycle stays a cycle.
    """
    by_label = {coset_label(splitting, t): t for t in reps}
    if len(by_label) != len(reps):
        raise CosetClassificationFailed("representatives are not distinct")
    sub_label = coset_label(splitting, reps[0].alg.one())
    out = OneChain()
    for g, d in cycle.terms:
        for t in reps:
            lab = coset_label(splitting, t * g)
            tj = by_label.get(lab)
            if tj is None:
                raise CosetClassificationFailed(f"unmatched coset label {lab}")
            h = t * g * tj.inverse()
            if coset_label(splitting, h) != sub_label:
                raise CosetClassificationFailed(
                    "transfer element not in the level-p subgroup"
                )
            moved = DivisorOnA0(
                [(act_point(splitting, tj, pt), m) for pt, m in d.terms]
            )
            out._bump(h, moved)
    return out
