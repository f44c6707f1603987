"""Optimal embeddings of real quadratic orders into a quaternion order, their
fundamental norm-one units, and the fixed points at p and at infinity."""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath

from .errors import (
    DegenerateConfiguration,
    NoEmbedding,
    NormalizationFailed,
    NotHyperbolic,
)
from .latmath import fincke_pohst_affine, smith_normal_form
from .padic import QuadContext
from .quatalg import RealSplitting, _displacement_gram

__all__ = [
    "QuadraticOrderSpec",
    "OptimalEmbedding",
    "kronecker_symbol",
    "fundamental_norm_one_unit",
    "quad_context",
    "find_embedding",
    "normalize_to_A0",
    "fixed_points",
]


def kronecker_symbol(a: int, n: int) -> int:
    if n == 0:
        return 1 if abs(a) == 1 else 0
    if n < 0:
        return (-1 if a < 0 else 1) * kronecker_symbol(a, -n)
    # strip factors of 2 from n
    s = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            s = -s
    a %= n
    # Jacobi symbol (a/n), n odd positive
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                s = -s
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            s = -s
        a %= n
    return s if n == 1 else 0


class QuadraticOrderSpec:
    """Real quadratic order of discriminant Delta, with generator
    omega = (Delta + sqrt(Delta))/2 recorded by trace and norm."""

    __slots__ = ("disc", "gen_trace", "gen_norm")

    def __init__(self, disc: int):
        if disc <= 0 or disc % 4 not in (0, 1):
            raise ValueError("discriminant must be positive and 0 or 1 mod 4")
        r = math.isqrt(disc)
        if r * r == disc:
            raise ValueError("discriminant must be a non-square")
        self.disc = disc
        if disc % 4 == 1:
            # omega = (1 + sqrt(disc))/2
            self.gen_trace = 1
            self.gen_norm = (1 - disc) // 4
        else:
            # omega = sqrt(disc)/2 = sqrt(disc/4)
            self.gen_trace = 0
            self.gen_norm = -disc // 4

    def __repr__(self):
        return f"QuadraticOrderSpec({self.disc})"

    def check_local_conditions(self, alg, p: int):
        """p inert and all algebra-ramified primes non-split."""
        if kronecker_symbol(self.disc, p) != -1:
            raise NoEmbedding(f"{p} is not inert in discriminant {self.disc}")
        for q in alg.ramified_primes():
            if kronecker_symbol(self.disc, q) == 1:
                raise NoEmbedding(
                    f"ramified prime {q} splits in discriminant {self.disc}"
                )


def fundamental_norm_one_unit(disc: int):
    """Generator of the free part of the norm-one units of O_disc.

    Returns (t, (a, b)) with the unit u = a + b*sqrt(disc) = (t + s sqrt)/2,
    t = trace(u). Brute-force Pell: smallest s with disc*s^2 -+ 4 a square.
    """
    s = 1
    while True:
        for sign in (-4, 4):
            t2 = disc * s * s + sign
            if t2 > 0:
                t = math.isqrt(t2)
                if t * t == t2:
                    norm = Fraction(t * t - disc * s * s, 4)
                    u = (Fraction(t, 2), Fraction(s, 2))
                    if norm == 1:
                        return t, u
                    # norm -1: the norm-one fundamental unit is u^2
                    a, b = u
                    a2 = a * a + disc * b * b
                    b2 = 2 * a * b
                    return int(2 * a2), (a2, b2)
        s += 1


def _quad_mul(u, v, disc):
    a, b = u
    c, d = v
    return (a * c + disc * b * d, a * d + b * c)


def _quad_pow(u, m, disc):
    out = (Fraction(1), Fraction(0))
    for _ in range(m):
        out = _quad_mul(out, u, disc)
    return out


def quad_context(disc: int, p: int) -> QuadContext:
    """The unramified quadratic extension presented by the order generator:
    alpha is the image of omega, so alpha^2 = trace*alpha - norm."""
    spec = QuadraticOrderSpec(disc) if not isinstance(disc, QuadraticOrderSpec) else disc
    return QuadContext(p, spec.gen_trace, -spec.gen_norm)


class OptimalEmbedding:
    """psi: O_disc -> R encoded by g = psi(omega), with gamma_psi = psi(u^m)
    and the fixed points at p and infinity attached."""

    def __init__(self, spec, alg, order, splitting, g, unit_power=1):
        self.spec = spec
        self.alg = alg
        self.order = order
        self.splitting = splitting
        self.g = g
        self.unit_power = unit_power
        t, u = fundamental_norm_one_unit(spec.disc)
        self.unit_trace = t
        self.unit = u
        um = _quad_pow(u, unit_power, spec.disc)
        self.gamma_psi = self.psi(um)
        assert self.gamma_psi.nrd() == 1
        self.ctx = quad_context(spec, splitting.p)
        tp, tpc, ti, tic = fixed_points(self, splitting)
        self.tau_p = tp
        self.tau_p_conj = tpc
        self.tau_inf = ti
        self.tau_inf_conj = tic

    def psi(self, x):
        """Image of a + b*sqrt(disc) (pair of Fractions)."""
        a, b = x
        root = 2 * self.g - self.spec.gen_trace  # image of sqrt(disc)
        return a * self.alg.one() + b * root

    def __repr__(self):
        return (
            f"OptimalEmbedding(disc={self.spec.disc}, g={self.g}, "
            f"m={self.unit_power})"
        )


def _trd_solutions(order, t):
    """(particular, kernel_rows): integer coordinate solutions of trd = t."""
    d = [int(e.trd()) for e in order.basis]
    if any(Fraction(e.trd()).denominator != 1 for e in order.basis):
        raise ValueError("order basis with non-integral traces")
    U, S, V = smith_normal_form([[x] for x in d])
    g = S[0][0]
    if g == 0 or (t * V[0][0]) % g != 0:
        return None, None
    y0 = t * V[0][0] // g
    particular = [y0 * x for x in U[0]]
    kernel = [U[i] for i in range(1, 4)]
    return particular, kernel


def find_embedding(alg, order, spec, splitting, unit_power=1,
                   bound=200.0, max_escalations=5):
    """Canonically-least optimal embedding of O_disc into the order, with
    tau_p in the principal affinoid."""
    spec.check_local_conditions(alg, splitting.p)
    t, n = spec.gen_trace, spec.gen_norm
    part, kernel = _trd_solutions(order, t)
    if part is None:
        raise NoEmbedding("no order element with the generator's trace")
    G4 = [[float(x) for x in row] for row in _displacement_gram(order)]

    def q_form(c):
        return sum(G4[i][j] * c[i] * c[j] for i in range(4) for j in range(4))

    # restrict the displacement majorant to the affine solution set
    A3 = [[sum(kernel[i][a] * G4[a][b] * kernel[j][b] for a in range(4) for b in range(4))
           for j in range(3)] for i in range(3)]
    bvec = [sum(kernel[i][a] * G4[a][b] * part[b] for a in range(4) for b in range(4))
            for i in range(3)]
    # center: minimize q(part + m K) over real m
    import numpy as np

    center = np.linalg.solve(np.array(A3), -np.array(bvec)).tolist()
    const = q_form(part) - sum(
        -bvec[i] * center[i] for i in range(3)
    )  # value at the real minimum

    B = bound
    for _ in range(max_escalations):
        cands = []
        radius = max(B - const, 0.0) + 1.0
        for m in fincke_pohst_affine(A3, center, radius):
            coords = [part[a] + sum(m[i] * kernel[i][a] for i in range(3))
                      for a in range(4)]
            e = order.element_from_coords(coords)
            if e.trd() == t and e.nrd() == n:
                cands.append(e)
        cands.sort(key=lambda e: e.coords())
        in_a0 = []
        fallback = []
        for e in cands:
            if not _is_optimal(order, spec, e):
                continue
            try:
                emb = OptimalEmbedding(spec, alg, order, splitting, e,
                                       unit_power=unit_power)
            except (DegenerateConfiguration, NotHyperbolic):
                continue
            if emb.tau_p.in_A0():
                in_a0.append(emb)
                break
            fallback.append(emb)
        if in_a0:
            return in_a0[0]
        if fallback:
            return normalize_to_A0(fallback[0])
        B *= 4
    raise NoEmbedding(
        f"no optimal embedding of discriminant {spec.disc} within bounds"
    )


def _is_optimal(order, spec, g):
    """psi^{-1}(order) must be exactly O_disc: no conductor-shrinking works."""
    disc = spec.disc
    root = 2 * g - spec.gen_trace  # image of sqrt(disc)
    f = 2
    while f * f <= disc:
        if disc % (f * f) == 0:
            d2 = disc // (f * f)
            if d2 % 4 in (0, 1):
                # generator of O_{d2}: (d2 + sqrt(d2))/2, sqrt(d2) -> root/f
                cand = Fraction(d2, 2) * order.alg.one() + Fraction(1, 2 * f) * root
                if order.contains(cand):
                    return False
        f += 1
    return True


def normalize_to_A0(emb: OptimalEmbedding, search_bound=4.0):
    """Ensure tau_p lies in the principal affinoid, conjugating the embedding
    by norm-one units if needed (membership is automatic for p-maximal
    quadratic orders, so the search is a fallback)."""
    if emb.tau_p.in_A0():
        return emb
    from .quatalg import enumerate_by_norm

    for gconj in enumerate_by_norm(emb.order, 1, search_bound):
        if gconj.is_scalar():
            continue
        g2 = gconj * emb.g * gconj.inverse()
        if not emb.order.contains(g2):
            continue
        try:
            cand = OptimalEmbedding(emb.spec, emb.alg, emb.order, emb.splitting,
                                    g2, unit_power=emb.unit_power)
        except (DegenerateConfiguration, NotHyperbolic):
            continue
        if cand.tau_p.in_A0():
            return cand
    raise NormalizationFailed(
        f"tau_p not in the principal affinoid for disc {emb.spec.disc}"
    )


def fixed_points(emb: OptimalEmbedding, splitting):
    """(tau_p, tau_p', tau_inf, tau_inf') for the embedding.

    tau_p is picked by the eigenvalue condition iota_p(psi(omega)) (tau,1)^T =
    alpha (tau,1)^T with alpha the generator of the quadratic context; at
    infinity tau_inf carries the positive square root.
    """
    p = splitting.p
    ctx = quad_context(emb.spec, p)
    M = splitting.iota(emb.g)
    C, D = M[1][0], M[1][1]
    if C.is_zero():
        raise DegenerateConfiguration("iota_p lower-left vanishes at precision")
    alpha = ctx.alpha(min(x.prec for row in M for x in row))
    cinv = C.inverse()
    tau_p = (alpha - D) * cinv
    tau_pc = (alpha.conjugate() - D) * cinv
    # verify: the matrix fixes tau_p
    A, Bq = M[0][0], M[0][1]
    lhs = A * tau_p + Bq
    rhs = (C * tau_p + D) * tau_p
    if not lhs.eq_at(rhs, min(lhs.prec, rhs.prec) - 2):
        raise DegenerateConfiguration("fixed point verification failed")

    # real fixed points from iota_inf(gamma_psi)
    if emb.gamma_psi.trd() ** 2 <= 4:
        raise NotHyperbolic("unit image is not hyperbolic")
    rs = RealSplitting(emb.alg)
    m = rs.iota(emb.g)
    iv = mpmath.iv
    a, b, c, d = m[0][0], m[0][1], m[1][0], m[1][1]
    if 0 in c:
        raise DegenerateConfiguration("real lower-left entry may vanish")
    disc_iv = (d - a) ** 2 + 4 * b * c
    sq = iv.sqrt(disc_iv)
    tau_inf = (a - d + sq) / (2 * c)
    tau_inf_c = (a - d - sq) / (2 * c)
    return tau_p, tau_pc, tau_inf, tau_inf_c
