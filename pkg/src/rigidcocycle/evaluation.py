"""The two homology/cohomology pairings and assembly of the quaternionic
rigid-cocycle invariants J for a pair of real quadratic embeddings.

J = [phi0_psi1, c0_psi2] + <Phi_psi1, cores c0_psi2>: a multiplicative
pairing of the divisor-valued cocycle against a degree-zero cycle, plus the
integration pairing of a flavored overconvergent cocycle against the
transfer of that cycle to the level-p subgroup.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

from .cohomology import (
    DivisorCocycle,
    OverconvergentCocycle,
    build_flavors,
    build_level,
    wp_twist_and_restrict,
)
from .errors import CoincidentPoints
from .fuchsian import build_domain, presentation
from .homology import (
    OneChain,
    act_point,
    build_cycle,
    corestrict,
    coset_representatives,
    lift_degree_zero,
)
from .padic import PadicNumber, PadicQuadNumber, iwasawa_log
from .rigidseries import integrate

__all__ = [
    "QuadFieldMap",
    "pair_multiplicative",
    "pair_overconvergent",
    "JValue",
    "JComputation",
    "assemble_J",
]


class QuadFieldMap:
    """Identification of a second unramified quadratic context with a fixed
    working context, sending the second generator to a root of its minimal
    polynomial x^2 - s x - c (deterministic square-root choice; the other
    root gives the Galois-conjugate identification)."""

    def __init__(self, ctx_from, ctx_to, prec):
        self.ctx_from = ctx_from
        self.ctx_to = ctx_to
        self.prec = prec
        if ctx_from == ctx_to:
            self.alpha_image = None
        else:
            disc = ctx_from.s * ctx_from.s + 4 * ctx_from.c
            root = ctx_to.element(disc, 0, prec).sqrt()
            half = ctx_to.element(Fraction(1, 2), 0, prec)
            self.alpha_image = (ctx_to.element(ctx_from.s, 0, prec)
                                + root) * half

    def __call__(self, z: PadicQuadNumber) -> PadicQuadNumber:
        if self.alpha_image is None:
            return z
        ctx = self.ctx_to
        zero = PadicNumber.zero(ctx.p, z.prec)
        a0 = PadicQuadNumber(ctx, z.a0, zero)
        a1 = PadicQuadNumber(ctx, z.a1, zero)
        return a0 + a1 * self.alpha_image


def pair_multiplicative(phi0: DivisorCocycle, c: OneChain, fieldmap=None):
    """[phi0, c]: for each cycle term gamma (x) sum n_i (w_i), add
    sum_j m_j sum_i n_i log_p(gamma w_i - z_j) where phi0(gamma) is the
    divisor sum m_j (z_j).

    Pairing against the translated divisor gamma D (rather than D) is what
    kills coboundaries and 2-boundaries with the boundary conventions
    d1(g (x) v) = gv - v, d2(g (x) h (x) v) = h (x) v - gh (x) v + g (x) hv,
    so the result only depends on the (co)homology classes. Degree-zero-ness
    of both divisors makes it independent of the rational-function
    representative, so no function is materialized."""
    sp = phi0.splitting
    total = None
    for gamma, D in c.terms:
        div = phi0.value(gamma)
        for z, mj in div.terms:
            for w, ni in D.terms:
                gw = act_point(sp, gamma, w)
                wq = fieldmap(gw) if fieldmap is not None else gw
                diff = wq - z
                if diff.is_zero():
                    raise CoincidentPoints(
                        f"cycle point {w} meets cocycle point {z}"
                    )
                term = iwasawa_log(diff) * (mj * ni)
                total = term if total is None else total + term
    if total is None:
        ctx = phi0.emb.ctx
        return ctx.zero(phi0.splitting.prec)
    return total


def pair_overconvergent(Phi: OverconvergentCocycle, c: OneChain,
                        fieldmap=None):
    """<Phi, c>: sum over cycle terms gamma (x) D of the integral of the
    series Phi(gamma) against the translated divisor gamma D (the twist that
    makes the chain-level formula descend to (co)homology classes; see
    pair_multiplicative)."""
    level = Phi.level
    sp = level.splitting
    total = None
    for gamma, D in c.terms:
        f = Phi.value(gamma)
        terms = []
        for w, n in D.terms:
            gw = act_point(sp, gamma, w)
            terms.append((fieldmap(gw) if fieldmap is not None else gw, n))
        val = integrate(f, terms)
        total = val if total is None else total + val
    if total is None:
        return level.ctx.zero(level.W)
    return total


class JValue:
    """An assembled invariant with its scaling bookkeeping.

    The underlying conjectural quantity is J / (e * m): e is the
    abelianization order used to lift the cycle to degree zero and m the
    power of the fundamental norm-one unit defining the cycle."""

    def __init__(self, value: PadicQuadNumber, flavor, e, m, params):
        assert e != 0 and m != 0
        self.value = value
        self.flavor = flavor
        self.e = e
        self.m = m
        self.params = dict(params)

    def to_json(self):
        ctx = self.value.ctx
        a0, a1 = self.value.digits_pair()
        payload = {
            "p": ctx.p,
            "N": self.value.prec,
            "flavor": self.flavor,
            "value": [str(a0), str(a1)],
            "defining_poly": [1, -ctx.s, -ctx.c],
            "e": self.e,
            "m": self.m,
        }
        payload["run_hash"] = hashlib.sha256(
            json.dumps({**payload, **self.params},
                       sort_keys=True).encode()
        ).hexdigest()[:16]
        return json.dumps(payload)

    def __repr__(self):
        return (f"JValue(flavor={self.flavor}, e={self.e}, m={self.m}, "
                f"value={self.value})")


class JComputation:
    """Shared pipeline state for computing J at every flavor: level-one
    domain and divisor cocycle for the first embedding, degree-zero lifted
    cycle and its level-p transfer for the second, and the flavored series
    cocycles."""

    def __init__(self, emb1, emb2, W, M, domain=None, prec_bits=100,
                 base_point=None):
        self.emb1 = emb1
        self.emb2 = emb2
        self.splitting = emb1.splitting
        self.W = W
        self.M = M
        alg, order = emb1.alg, emb1.order
        self.domain = domain if domain is not None else build_domain(
            alg, order, prec_bits=prec_bits)
        self.cocycle = DivisorCocycle(emb1, self.domain, self.splitting)
        pres = presentation(self.domain)
        cycle = build_cycle(emb2)
        self.c0, self.e = lift_degree_zero(cycle, self.domain, pres,
                                           self.splitting,
                                           base_point=base_point)
        reps = coset_representatives(order, self.splitting)
        self.cores = corestrict(self.c0, reps, self.splitting)
        self.fieldmap = QuadFieldMap(emb2.ctx, emb1.ctx,
                                     self.splitting.prec)
        self.level = build_level(alg, order, self.splitting, emb1.ctx, W, M,
                                 prec_bits=prec_bits)
        self.seed = wp_twist_and_restrict(self.cocycle, self.level)
        self.flavors = build_flavors(self.seed)
        self._bracket = None

    def bracket(self):
        if self._bracket is None:
            self._bracket = pair_multiplicative(self.cocycle, self.c0,
                                                self.fieldmap)
        return self._bracket

    def compute(self, flavor) -> JValue:
        series = pair_overconvergent(self.flavors[flavor], self.cores,
                                     self.fieldmap)
        value = self.bracket() + series
        params = {
            "p": self.splitting.p,
            "disc1": self.emb1.spec.disc,
            "disc2": self.emb2.spec.disc,
            "W": self.W,
            "M": self.M,
            "unit_power": self.emb2.unit_power,
        }
        return JValue(value, flavor, self.e, self.emb2.unit_power, params)


def assemble_J(emb1, emb2, flavor, W, M, **kwargs) -> JValue:
    """One-shot assembly of J for a single flavor."""
    return JComputation(emb1, emb2, W, M, **kwargs).compute(flavor)
