"""Acceptance suite: every gating criterion at its stated tolerance, one
pass/fail line per criterion (the test names double as the report lines;
each test also prints an [ACCEPTANCE] line)."""

import json
import os
import random
import time

import pytest

from rigidcocycle.cli import main as cli_main, unit_log
from rigidcocycle.cohomology import up_apply
from rigidcocycle.embeddings import QuadraticOrderSpec, find_embedding
from rigidcocycle.evaluation import (
    JComputation,
    pair_multiplicative,
    pair_overconvergent,
)
from rigidcocycle.homology import DivisorOnA0, OneChain, act_point
from rigidcocycle.padic import QuadContext, iwasawa_log
from rigidcocycle.quatalg import (
    QuaternionAlgebra,
    local_splitting,
    maximal_order,
)
from rigidcocycle.recognize import (
    RecognitionFixture,
    factor_support,
    lll_recognize,
    load_fixture,
    verify_against_polynomial,
)

QUARTIC = [41177889, 7867012, 33058502, 7867012, 41177889]
OCTIC = [3497, -5626, 7260, -3346, 1869, -238, 84, -4, 1]
FIXDIR = os.path.join(os.path.dirname(__file__), "..", "src",
                      "rigidcocycle", "fixtures")


def report(name, ok, extra=""):
    line = f"[ACCEPTANCE] {name}: {'PASS' if ok else 'FAIL'} {extra}"
    print(line)
    assert ok, line


# -- criterion 1 / 2 / 6 shared run ------------------------------------------


@pytest.fixture(scope="module")
def headline_run(tmp_path_factory):
    cache = tmp_path_factory.mktemp("cache")
    out = cache / "j60.json"
    t0 = time.time()
    rc = cli_main(["--threads", "1", "--cache-dir", str(cache), "compute",
                   "--preset", "d6_p5_53_23_plus", "--prec", "60",
                   "--no-cache", "--output", str(out)])
    elapsed = time.time() - t0
    assert rc == 0
    payload = out.read_bytes()
    data = json.loads(payload)
    ctx = QuadContext(5, 1, 13)
    assert data["defining_poly"] == [1, -ctx.s, -ctx.c]

    class J:
        value = ctx.element(int(data["value"][0]), int(data["value"][1]),
                            data["N"])
        e = data["e"]
        m = data["m"]

    return {"payload": payload, "J": J, "ctx": ctx, "elapsed": elapsed,
            "cache": cache}


def test_criterion1_headline_reproduction(headline_run):
    J = headline_run["J"]
    ctx = headline_run["ctx"]
    logs = [unit_log(53, ctx, 60), unit_log(92, ctx, 60)]
    res = verify_against_polynomial(J, QUARTIC, logs, bound=10)
    headline_run["res"] = res
    ok = (res.status == "matched" and res.residual >= 55
          and headline_run["elapsed"] <= 1800)
    report("criterion 1 (N=60 headline quartic match)", ok,
           f"residual={res.residual} exp={res.exponents} "
           f"elapsed={headline_run['elapsed']:.0f}s")


def test_criterion2_leading_coefficient_support(headline_run):
    res = headline_run.get("res")
    if res is None:
        ctx = headline_run["ctx"]
        logs = [unit_log(53, ctx, 60), unit_log(92, ctx, 60)]
        res = verify_against_polynomial(headline_run["J"], QUARTIC, logs,
                                        bound=10)
    plus_table_53_92 = [3, 23, 31]
    ok = (factor_support(QUARTIC[-1]) == plus_table_53_92
          and res.support == plus_table_53_92)
    report("criterion 2 (leading coefficient support {3,23,31})", ok,
           f"support={res.support}")


def test_criterion6_thread_count_determinism(headline_run):
    cache = headline_run["cache"]
    out = cache / "j60_t8.json"
    rc = cli_main(["--threads", "8", "--cache-dir", str(cache), "compute",
                   "--preset", "d6_p5_53_23_plus", "--prec", "60",
                   "--no-cache", "--output", str(out)])
    ok = rc == 0 and out.read_bytes() == headline_run["payload"]
    report("criterion 6 (byte-identical JValue JSON across --threads)", ok)


# -- criterion 3: table spot-checks ------------------------------------------


SPOT_CHECKS = [
    ((6, -1), 5, 8, 92, 2, "d6_p5_8_92_plus.json", {2, 3}),
    ((6, -1), 5, 8, 77, 1, "d6_p5_8_77_plus.json", {3, 5}),
    ((2, -5), 3, 5, 92, 2, "d10_p3_5_92_plus.json", {2, 3}),
]


@pytest.mark.parametrize("ab,p,d1,d2,up,fixture,want",
                         SPOT_CHECKS,
                         ids=[s[5].removesuffix(".json")
                              for s in SPOT_CHECKS])
def test_criterion3_table_spot_checks(ab, p, d1, d2, up, fixture, want):
    W, M = 30, 44
    alg = QuaternionAlgebra(*ab)
    order = maximal_order(alg)
    sp = local_splitting(alg, order, p, W + M + 8)
    emb1 = find_embedding(alg, order, QuadraticOrderSpec(d1), sp)
    emb2 = find_embedding(alg, order, QuadraticOrderSpec(d2), sp,
                          unit_power=up)
    jc = JComputation(emb1, emb2, W, M, prec_bits=260)
    jv = jc.compute("plus")
    res = lll_recognize(jv, load_fixture(os.path.join(FIXDIR, fixture)))
    ok = res.status == "matched" and set(res.support) == want
    report(f"criterion 3 ({d1},{d2}) p={p} support {sorted(want)}", ok,
           f"got {res.status} support={res.support}")


# -- criterion 4: cross-p consistency (stretch, not gating) ------------------


@pytest.mark.parametrize("ab,p", [((2, -5), 3), ((6, -1), 5)],
                         ids=["p3", "p5"])
def test_criterion4_cross_p_even_octic(ab, p):
    W, M = 30, 46
    alg = QuaternionAlgebra(*ab)
    order = maximal_order(alg)
    sp = local_splitting(alg, order, p, W + M + 8)
    emb1 = find_embedding(alg, order, QuadraticOrderSpec(53), sp)
    emb2 = find_embedding(alg, order, QuadraticOrderSpec(92), sp,
                          unit_power=2)
    jc = JComputation(emb1, emb2, W, M, prec_bits=260)
    jv = jc.compute("even")
    ctx = emb1.ctx
    logs = [unit_log(53, ctx, W), unit_log(92, ctx, W)]
    res = verify_against_polynomial(jv, OCTIC, logs)
    ok = res.status == "matched" and res.residual >= W - 10
    print(f"[ACCEPTANCE] criterion 4 (p={p} even octic, stretch): "
          f"{'PASS' if ok else 'FAIL'} residual={res.residual}")
    if not ok:
        pytest.xfail("stretch criterion; not gating")


# -- criterion 5: property suite at N=30 -------------------------------------


CRIT5_BUDGET = 300.0


@pytest.fixture(scope="module")
def prop(crit5_clock):
    W, M = 30, 44
    alg = QuaternionAlgebra(6, -1)
    order = maximal_order(alg)
    sp = local_splitting(alg, order, 5, W + M + 8)
    emb1 = find_embedding(alg, order, QuadraticOrderSpec(53), sp)
    emb2 = find_embedding(alg, order, QuadraticOrderSpec(92), sp,
                          unit_power=2)
    jc = JComputation(emb1, emb2, W, M, prec_bits=260)
    return {"alg": alg, "sp": sp, "emb1": emb1, "emb2": emb2, "jc": jc,
            "W": W, "M": M}


@pytest.fixture(scope="module")
def crit5_clock():
    return {"start": time.time()}


def rand_word(gens, rng, n=3):
    out = None
    for _ in range(n):
        g = rng.choice(gens)
        out = g if out is None else out * g
    return out


def test_criterion5_cocycle_relation(prop):
    rng = random.Random(101)
    jc, sp = prop["jc"], prop["sp"]
    phi = jc.cocycle
    for _ in range(20):
        g = rand_word(jc.domain.gens, rng, 2)
        h = rand_word(jc.domain.gens, rng, 2)
        lhs = phi.value(g * h)
        rhs = phi.value(g) + DivisorOnA0(
            [(act_point(sp, g, z), n) for z, n in phi.value(h).terms])
        assert (lhs + -1 * rhs).terms == []
    report("criterion 5a (cocycle relation, 20 random pairs, exact)", True)


def test_criterion5_delta_relation_triples(prop):
    rng = random.Random(103)
    jc, sp = prop["jc"], prop["sp"]
    phi = jc.cocycle

    def translate(g, D):
        return DivisorOnA0([(act_point(sp, g, z), n) for z, n in D.terms])

    for _ in range(50):
        g, h, k = (rng.choice(jc.domain.gens) for _ in range(3))
        lhs = phi.value(g * h * k)
        rhs = (phi.value(g) + translate(g, phi.value(h))
               + translate(g * h, phi.value(k)))
        assert (lhs + -1 * rhs).terms == []
    report("criterion 5b (triple coherence, 50 random triples, exact)", True)


def test_criterion5_degree_zero(prop):
    jc = prop["jc"]
    for g in jc.domain.gens:
        assert jc.cocycle.value(g).degree() == 0
    report("criterion 5c (divisor values degree zero on generators)", True)


def test_criterion5_up_valuation_growth(prop):
    jc, W = prop["jc"], prop["W"]
    cur = jc.seed
    for n in range(1, 6):
        cur = up_apply(cur)
        v = W
        for f in cur.values:
            for a, b in f.coeffs:
                for x in (a, b):
                    if x % 5 ** W:
                        k = 0
                        while x % 5 == 0:
                            x //= 5
                            k += 1
                        v = min(v, k)
        assert v >= n, (n, v)
    report("criterion 5d (U_p valuation growth >= n, n <= 5)", True)


def test_criterion5_fixed_point_identities(prop):
    jc, W = prop["jc"], prop["W"]
    phi = jc.seed
    for name, sign in (("plus", 1), ("minus", -1)):
        Phi = jc.flavors[name]
        UPhi = up_apply(Phi)
        for g in jc.level.domain.gens:
            d = (UPhi.value(g) + phi.value(g)
                 - Phi.value(g).scale_int(sign))
            for a, b in d.coeffs:
                for x in (a, b):
                    assert x % 5 ** 25 == 0, (name, x)
    report("criterion 5e (U_p fixed-point identities mod p^25)", True)


def random_a0_point(ctx, rng, prec):
    while True:
        z = ctx.element(rng.randrange(5 ** 8), rng.randrange(1, 5 ** 8),
                        prec)
        if z.a1.val == 0 and z.in_A0():
            return z


def test_criterion5_boundary_audits(prop):
    rng = random.Random(107)
    jc, sp = prop["jc"], prop["sp"]
    ctx2 = prop["emb2"].ctx
    W = prop["W"]

    def boundary_2chain(g, h, div):
        hdiv = DivisorOnA0(
            [(act_point(sp, h, z), m) for z, m in div.terms])
        return OneChain([(h, div), (g * h, -1 * div), (g, hdiv)])

    base_b = pair_multiplicative(jc.cocycle, jc.c0, jc.fieldmap)
    Phi = jc.flavors["even"]
    base_s = pair_overconvergent(Phi, jc.cores, jc.fieldmap)
    for _ in range(2):
        g = rng.choice(jc.domain.gens)
        h = rng.choice(jc.domain.gens)
        div = DivisorOnA0([
            (random_a0_point(ctx2, rng, sp.prec), 1),
            (random_a0_point(ctx2, rng, sp.prec), -1),
        ])
        got_b = pair_multiplicative(jc.cocycle,
                                    jc.c0 + boundary_2chain(g, h, div),
                                    jc.fieldmap)
        d = got_b - base_b
        assert d.is_zero() or d.valuation() >= sp.prec - 6
        got_s = pair_overconvergent(Phi,
                                    jc.cores + boundary_2chain(g, h, div),
                                    jc.fieldmap)
        d = got_s - base_s
        assert d.is_zero() or d.valuation() >= W - 5
    report("criterion 5f (bracket and series boundary audits)", True)


def test_criterion5_base_point_independence(prop):
    jc, sp, W = prop["jc"], prop["sp"], prop["W"]
    other = act_point(sp, jc.domain.gens[0], prop["emb2"].tau_p)
    jc2 = JComputation(prop["emb1"], prop["emb2"], W, prop["M"],
                       domain=jc.domain, prec_bits=260, base_point=other)
    a = jc.compute("plus").value
    b = jc2.compute("plus").value
    d = a - b
    assert d.is_zero() or d.valuation() >= 25
    report("criterion 5g (base-point independence mod p^25)", True)


def test_criterion5_cross_ratio_oracle(prop):
    rng = random.Random(109)
    sp, emb1 = prop["sp"], prop["emb1"]
    ctx = emb1.ctx
    alg = prop["alg"]

    class Stub:
        emb = emb1
        splitting = sp

        def __init__(self, div):
            self.div = div

        def value(self, gamma):
            return self.div

    for _ in range(10):
        z1, z2, Q, Pt = (random_a0_point(ctx, rng, sp.prec)
                         for _ in range(4))
        stub = Stub(DivisorOnA0([(z1, 1), (z2, -1)]))
        c = OneChain([(alg.one(), DivisorOnA0([(Q, 1), (Pt, -1)]))])
        got = pair_multiplicative(stub, c)
        want = iwasawa_log(((Q - z1) * (Pt - z2))
                           / ((Q - z2) * (Pt - z1)))
        d = got - want
        assert d.is_zero() or d.valuation() >= 25
    report("criterion 5h (cross-ratio oracle mod p^25, 10 quadruples)",
           True)


def test_criterion5_planted_lll_recovery():
    rng = random.Random(113)
    ctx = QuadContext(5, 1, 13)
    N = 40
    units = []
    logs = []
    for i in range(4):
        lg = ctx.element(rng.randrange(5 ** N), rng.randrange(5 ** N),
                         N) * ctx.element(5, 0, N)
        logs.append(lg)
        a0, a1 = lg.digits_pair()
        units.append({"label": f"u{i}", "support": [2 + i],
                      "log": [str(a0), str(a1)]})
    fixture = RecognitionFixture([8, 92], 5, N, units)
    for _ in range(10):
        exps = [rng.randint(-6, 6) for _ in logs]
        if not any(exps):
            exps[0] = 1
        value = ctx.zero(N)
        for e, lg in zip(exps, logs):
            value = value + lg * e

        class J:
            pass

        J.value, J.e, J.m = value, 1, 1
        res = lll_recognize(J, fixture)
        assert res.status == "matched"
        want = {u["label"]: e for u, e in zip(units, exps) if e}
        assert res.exponents == want
    report("criterion 5i (planted LLL relations, 10 vectors)", True)


def test_criterion5_time_budget(prop, crit5_clock):
    elapsed = time.time() - crit5_clock["start"]
    report("criterion 5 (property suite within 5 minutes)",
           elapsed <= CRIT5_BUDGET, f"elapsed={elapsed:.0f}s")
