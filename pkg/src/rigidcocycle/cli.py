"""Command-line orchestration: run configs, the compute/verify/domain/
selftest/presets subcommands, artifact persistence, and exit-code policy.

Exit codes: 0 success (and "matched" for verify), 1 unmatched, 2 config
error, 3 internal assertion or library failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .embeddings import (
    QuadraticOrderSpec,
    find_embedding,
    fundamental_norm_one_unit,
)
from .errors import ConfigError, RigidCocycleError
from .evaluation import JComputation
from .fuchsian import build_domain, presentation
from .padic import QuadContext, iwasawa_log
from .quatalg import QuaternionAlgebra, local_splitting, maximal_order
from .recognize import (
    RecognitionResult,
    load_fixture,
    lll_recognize,
    verify_against_polynomial,
)

FLAVORS = ("plus", "minus", "even", "odd")

# genus-zero discriminants with their presentations and working primes
ALGEBRAS = {
    6: (6, -1, 5),
    10: (2, -5, 3),
    22: (-1, 11, 3),
    15: (2, 15, 7),
}

TABLE_FIELDS = {
    6: (8, 12, 53, 77, 92, 93),
    10: (5, 8, 53, 77, 92),
    22: (8, 29, 44, 77),
}


def _build_presets():
    """Every published configuration: the headline example, the support
    tables, the cross-prime runs, and the large-genus example."""
    out = {}

    def add(name, D, p, d1, d2, flavor, unit_power=1, prec=30):
        a, b, _ = ALGEBRAS[D]
        out[name] = {
            "algebra": [a, b], "p": p, "disc1": d1, "disc2": d2,
            "flavor": flavor, "unit_power": unit_power, "prec": prec,
        }

    for D, fields in TABLE_FIELDS.items():
        _, _, p = ALGEBRAS[D]
        for d1 in fields:
            for d2 in fields:
                if d1 == d2:
                    continue
                for fl in FLAVORS:
                    up = 2 if d2 == 92 else 1
                    add(f"d{D}_p{p}_{d1}_{d2}_{fl}", D, p, d1, d2, fl,
                        unit_power=up)
    # the headline run: Delta-orders for sqrt53 and sqrt23 (disc 92),
    # square-unit convention for the cycle
    for fl in FLAVORS:
        add(f"d6_p5_53_23_{fl}", 6, 5, 53, 92, fl, unit_power=2)
        add(f"d10_p3_53_23_{fl}", 10, 3, 53, 92, fl, unit_power=2)
    add("d15_p7_17_33_plus", 15, 7, 17, 33, "plus")
    return out


PRESETS = _build_presets()

CONFIG_KEYS = ("algebra", "p", "disc1", "disc2", "flavor", "unit_power",
               "prec", "series_len", "prec_bits", "base_point")


def default_series_len(prec):
    return prec + 16


def default_prec_bits(prec):
    return max(220, 160 + 3 * prec)


def resolve_config(args):
    """Merge preset, TOML file, and command-line flags into a validated
    run config (flags win over file, file wins over preset)."""
    cfg = {}
    if getattr(args, "preset", None):
        if args.preset not in PRESETS:
            raise ConfigError(f"unknown preset {args.preset!r}; "
                              "see the presets subcommand")
        cfg.update(PRESETS[args.preset])
    if getattr(args, "config", None):
        try:
            with open(args.config, "rb") as fh:
                data = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        for k in data:
            if k not in CONFIG_KEYS:
                raise ConfigError(f"unknown config key {k!r}")
        cfg.update(data)
    for k in ("p", "disc1", "disc2", "flavor", "unit_power", "prec",
              "series_len", "prec_bits"):
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    if getattr(args, "algebra", None):
        cfg["algebra"] = list(args.algebra)
    missing = [k for k in ("algebra", "p", "disc1", "disc2", "flavor",
                           "prec") if k not in cfg]
    if missing:
        raise ConfigError("missing config fields: " + ", ".join(missing))
    cfg.setdefault("unit_power", 1)
    cfg.setdefault("series_len", default_series_len(cfg["prec"]))
    cfg.setdefault("prec_bits", default_prec_bits(cfg["prec"]))
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    """Compatibility checks before any heavy work."""
    if cfg["flavor"] not in FLAVORS:
        raise ConfigError(f"flavor must be one of {FLAVORS}")
    if cfg["prec"] < 2:
        raise ConfigError("precision must be at least 2")
    a, b = cfg["algebra"]
    try:
        alg = QuaternionAlgebra(a, b)
        for disc in (cfg["disc1"], cfg["disc2"]):
            QuadraticOrderSpec(disc).check_local_conditions(alg, cfg["p"])
        if cfg["p"] in alg.ramified_primes():
            raise ConfigError(
                f"p = {cfg['p']} is ramified in the ({a},{b}) algebra; "
                "choose a split prime")
    except ConfigError:
        raise
    except RigidCocycleError as exc:
        raise ConfigError(str(exc))
    return alg


def config_hash(cfg):
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def cache_dir_from(args):
    d = getattr(args, "cache_dir", None) or os.environ.get(
        "RIGID_CACHE_DIR") or os.path.join(
        os.path.expanduser("~"), ".cache", "rigidcocycle")
    return d


def run_pipeline(cfg):
    a, b = cfg["algebra"]
    alg = QuaternionAlgebra(a, b)
    order = maximal_order(alg)
    W, M = cfg["prec"], cfg["series_len"]
    sp = local_splitting(alg, order, cfg["p"], W + M + 8)
    emb1 = find_embedding(alg, order, QuadraticOrderSpec(cfg["disc1"]), sp)
    emb2 = find_embedding(alg, order, QuadraticOrderSpec(cfg["disc2"]), sp,
                          unit_power=cfg["unit_power"])
    jc = JComputation(emb1, emb2, W, M, prec_bits=cfg["prec_bits"])
    return jc


def cmd_compute(args):
    cfg = resolve_config(args)
    h = config_hash(cfg)
    cache = os.path.join(cache_dir_from(args), "runs")
    path = os.path.join(cache, f"{h}.json")
    if os.path.exists(path) and not args.no_cache:
        with open(path) as fh:
            payload = fh.read()
        print(f"[cache] reusing run {h}", file=sys.stderr)
    else:
        jc = run_pipeline(cfg)
        jv = jc.compute(cfg["flavor"])
        payload = jv.to_json()
        os.makedirs(cache, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(payload)
        with open(os.path.join(cache, f"{h}.config.json"), "w") as fh:
            json.dump(cfg, fh, sort_keys=True, indent=1)
        print(f"[run {h}] e = {jv.e}, m = {jv.m}, "
              f"value valuation = "
              f"{'inf' if jv.value.is_zero() else jv.value.valuation()}",
              file=sys.stderr)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(payload)
    print(payload)
    return 0


class _LoadedJValue:
    """A JValue artifact reread from disk, carrying just what the
    recognizers need."""

    def __init__(self, data):
        one, ms, mc = data["defining_poly"]
        assert one == 1
        ctx = QuadContext(data["p"], -ms, -mc)
        self.value = ctx.element(int(data["value"][0]),
                                 int(data["value"][1]), data["N"])
        self.e = data["e"]
        self.m = data["m"]
        self.flavor = data["flavor"]


def load_jvalue(path):
    try:
        with open(path) as fh:
            return _LoadedJValue(json.load(fh))
    except (OSError, ValueError, KeyError, AssertionError) as exc:
        raise ConfigError(f"cannot read JValue artifact {path}: {exc}")


def unit_log(disc, ctx, prec):
    """log_p of the fundamental norm-one unit of the order of the given
    discriminant, embedded via the deterministic square root of disc."""
    _, (ua, ub) = fundamental_norm_one_unit(disc)
    root = ctx.element(disc, 0, prec).sqrt()
    u = ctx.element(ua, 0, prec) + ctx.element(ub, 0, prec) * root
    return iwasawa_log(u)


def cmd_verify(args):
    J = load_jvalue(args.jvalue)
    results = []
    if args.poly:
        if not (args.disc1 and args.disc2) and not args.preset:
            raise ConfigError(
                "--poly needs --disc1/--disc2 (or --preset) for the "
                "fundamental-unit logs")
        if args.preset and not (args.disc1 and args.disc2):
            pre = PRESETS.get(args.preset)
            if pre is None:
                raise ConfigError(f"unknown preset {args.preset!r}")
            d1, d2 = pre["disc1"], pre["disc2"]
        else:
            d1, d2 = args.disc1, args.disc2
        try:
            coeffs = [int(c) for c in args.poly.split(",")]
        except ValueError:
            raise ConfigError("--poly expects comma-separated integers")
        ctx = J.value.ctx
        logs = [unit_log(d1, ctx, J.value.prec),
                unit_log(d2, ctx, J.value.prec)]
        res = verify_against_polynomial(J, coeffs, logs,
                                        bound=args.exponent_bound)
        results.append(("polynomial", res))
    for fx in args.fixtures or []:
        res = lll_recognize(J, load_fixture(fx))
        results.append((os.path.basename(fx), res))
    if not results:
        raise ConfigError("nothing to verify: pass --poly and/or --fixtures")
    ok = True
    for name, res in results:
        print(f"{name}: {res.status} exponents={res.exponents} "
              f"support={res.support} residual={res.residual}")
        ok = ok and res.status == "matched"
    return 0 if ok else 1


def cmd_domain(args):
    cfg = {}
    if getattr(args, "preset", None):
        if args.preset not in PRESETS:
            raise ConfigError(f"unknown preset {args.preset!r}")
        cfg.update(PRESETS[args.preset])
    if getattr(args, "algebra", None):
        cfg["algebra"] = list(args.algebra)
    if "algebra" not in cfg:
        raise ConfigError("domain needs --algebra or --preset")
    cfg["prec_bits"] = args.prec_bits or default_prec_bits(
        cfg.get("prec", 30))
    a, b = cfg["algebra"]
    alg = QuaternionAlgebra(a, b)
    order = maximal_order(alg)
    dom = build_domain(alg, order, prec_bits=cfg["prec_bits"])
    pres = presentation(dom)
    info = {
        "algebra": [a, b],
        "sides": len(dom.arcs),
        "generators": len(dom.gens),
        "relators": len(pres.relators),
        "sigma": len(dom.sigma),
    }
    print(json.dumps(info, sort_keys=True))
    return 0


def _check(report, name, fn):
    try:
        fn()
        report.append((name, "ok"))
    except Exception as exc:  # noqa: BLE001 - selftest reports all failures
        report.append((name, f"FAIL: {type(exc).__name__}: {exc}"))


def _selftest_quick(report):
    import random
    rng = random.Random(1)
    ctx = QuadContext(5, 1, 13)
    N = 20

    def arithmetic():
        for _ in range(20):
            x = ctx.element(rng.randrange(5 ** N), rng.randrange(5 ** N), N)
            y = ctx.element(rng.randrange(5 ** N), rng.randrange(5 ** N), N)
            z = ctx.element(rng.randrange(5 ** N), rng.randrange(5 ** N), N)
            lhs = (x + y) * z
            rhs = x * z + y * z
            assert (lhs - rhs).is_zero()

    def log_multiplicativity():
        for _ in range(10):
            x = ctx.element(1 + 5 * rng.randrange(5 ** N),
                            5 * rng.randrange(5 ** N), N)
            y = ctx.element(1 + 5 * rng.randrange(5 ** N),
                            5 * rng.randrange(5 ** N), N)
            d = iwasawa_log(x * y) - iwasawa_log(x) - iwasawa_log(y)
            assert d.is_zero() or d.valuation() >= N - 2

    def sqrt_roundtrip():
        for _ in range(10):
            x = ctx.element(1 + 5 * rng.randrange(5 ** N),
                            rng.randrange(5 ** N), N)
            s = (x * x).sqrt()
            assert (s - x).is_zero() or (s + x).is_zero()

    def series_integration():
        from .rigidseries import RigidSeries, integrate
        W = 12
        mk = lambda: RigidSeries(ctx, W, [
            (rng.randrange(5 ** W), rng.randrange(5 ** W))
            for _ in range(8)])
        f, g = mk(), mk()
        D = [(ctx.element(2, 1, W + 8), 1), (ctx.element(1, 3, W + 8), -1)]
        d = integrate(f + g, D) - integrate(f, D) - integrate(g, D)
        assert d.is_zero() or d.valuation() >= W - 2

    _check(report, "padic arithmetic", arithmetic)
    _check(report, "padic log multiplicativity", log_multiplicativity)
    _check(report, "padic sqrt roundtrip", sqrt_roundtrip)
    _check(report, "rigid series integration", series_integration)


def _selftest_full(report):
    import random
    rng = random.Random(2)
    alg = QuaternionAlgebra(6, -1)
    order = maximal_order(alg)
    W, M = 8, 16
    sp = local_splitting(alg, order, 5, W + M + 8)
    emb1 = find_embedding(alg, order, QuadraticOrderSpec(53), sp)
    emb2 = find_embedding(alg, order, QuadraticOrderSpec(92), sp,
                          unit_power=2)
    jc = JComputation(emb1, emb2, W, M, prec_bits=220)

    def cocycle_relation():
        from .homology import DivisorOnA0, act_point
        phi = jc.cocycle
        for _ in range(5):
            g = rng.choice(jc.domain.gens)
            h = rng.choice(jc.domain.gens)
            lhs = phi.value(g * h)
            rhs = phi.value(g) + DivisorOnA0(
                [(act_point(sp, g, z), n) for z, n in phi.value(h).terms])
            assert (lhs + -1 * rhs).terms == []

    def degree_zero():
        for g in jc.domain.gens:
            assert jc.cocycle.value(g).degree() == 0

    def series_val(f):
        v = W
        for a, b in f.coeffs:
            for n in (a, b):
                if n % 5 ** W:
                    k = 0
                    while n % 5 == 0:
                        n //= 5
                        k += 1
                    v = min(v, k)
        return v

    def fixed_point_identity():
        from .cohomology import up_apply
        phi = jc.seed
        for name, sign in (("plus", 1), ("minus", -1)):
            Phi = jc.flavors[name]
            UPhi = up_apply(Phi)
            for g in jc.level.domain.gens[:3]:
                d = (UPhi.value(g) + phi.value(g)
                     - Phi.value(g).scale_int(sign))
                assert series_val(d) >= W - 2, series_val(d)

    _check(report, "divisor cocycle relation", cocycle_relation)
    _check(report, "divisor values have degree zero", degree_zero)
    _check(report, "flavor fixed-point identities", fixed_point_identity)


def _selftest_paper(report):
    QUARTIC = [41177889, 7867012, 33058502, 7867012, 41177889]

    def headline():
        alg = QuaternionAlgebra(6, -1)
        order = maximal_order(alg)
        W, M = 18, 34
        sp = local_splitting(alg, order, 5, W + M + 8)
        emb1 = find_embedding(alg, order, QuadraticOrderSpec(53), sp)
        emb2 = find_embedding(alg, order, QuadraticOrderSpec(92), sp,
                              unit_power=2)
        jc = JComputation(emb1, emb2, W, M, prec_bits=220)
        jv = jc.compute("plus")
        ctx = emb1.ctx
        logs = [unit_log(53, ctx, W), unit_log(92, ctx, W)]
        res = verify_against_polynomial(jv, QUARTIC, logs)
        assert res.status == "matched", res
        assert res.support == [3, 23, 31], res

    _check(report, "headline quartic reproduction", headline)


def cmd_selftest(args):
    report = []
    _selftest_quick(report)
    if args.level in ("full", "paper"):
        _selftest_full(report)
    if args.level == "paper":
        _selftest_paper(report)
    failed = 0
    for name, status in report:
        print(f"{name}: {status}")
        if status != "ok":
            failed += 1
    print(f"{len(report) - failed}/{len(report)} checks passed")
    return 0 if failed == 0 else 3


def cmd_presets(args):
    names = sorted(PRESETS)
    if args.name:
        if args.name not in PRESETS:
            raise ConfigError(f"unknown preset {args.name!r}")
        print(json.dumps({args.name: PRESETS[args.name]}, indent=1,
                         sort_keys=True))
        return 0
    for n in names:
        c = PRESETS[n]
        print(f"{n}: B=({c['algebra'][0]},{c['algebra'][1]}) p={c['p']} "
              f"discs=({c['disc1']},{c['disc2']}) {c['flavor']} "
              f"m={c['unit_power']}")
    return 0


def _add_config_flags(sub):
    sub.add_argument("--preset", help="named configuration")
    sub.add_argument("--config", help="TOML config file")
    sub.add_argument("--algebra", nargs=2, type=int, metavar=("A", "B"))
    sub.add_argument("--p", type=int)
    sub.add_argument("--disc1", type=int)
    sub.add_argument("--disc2", type=int)
    sub.add_argument("--flavor", choices=FLAVORS)
    sub.add_argument("--prec", type=int, help="p-adic working precision N")
    sub.add_argument("--series-len", dest="series_len", type=int)
    sub.add_argument("--prec-bits", dest="prec_bits", type=int)
    sub.add_argument("--unit-power", dest="unit_power", type=int,
                     help="power of the fundamental norm-one unit "
                          "defining the cycle")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rigidcocycle",
        description="rigid-cocycle invariants of pairs of real quadratic "
                    "fields, with algebraicity verification")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads (output is byte-identical "
                             "for any value)")
    parser.add_argument("--cache-dir", dest="cache_dir",
                        help="artifact cache (default RIGID_CACHE_DIR or "
                             "~/.cache/rigidcocycle)")
    sub = parser.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("compute", help="run the full pipeline for one "
                                       "configuration")
    _add_config_flags(c)
    c.add_argument("--output", help="also write the JValue JSON here")
    c.add_argument("--no-cache", action="store_true")
    c.set_defaults(func=cmd_compute)

    v = sub.add_parser("verify", help="match a JValue artifact against a "
                                      "polynomial and/or fixtures")
    v.add_argument("jvalue", help="JValue JSON file")
    v.add_argument("--poly", help="comma-separated ascending integer "
                                  "coefficients")
    v.add_argument("--preset")
    v.add_argument("--disc1", type=int)
    v.add_argument("--disc2", type=int)
    v.add_argument("--exponent-bound", type=int, default=10)
    v.add_argument("--fixtures", nargs="*", help="fixture JSON paths")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("domain", help="fundamental domain summary for an "
                                      "algebra")
    _add_config_flags(d)
    d.set_defaults(func=cmd_domain)

    s = sub.add_parser("selftest", help="invariant suites")
    s.add_argument("level", choices=("quick", "full", "paper"),
                   nargs="?", default="quick")
    s.set_defaults(func=cmd_selftest)

    p = sub.add_parser("presets", help="list named configurations")
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RigidCocycleError, AssertionError) as exc:
        print(f"internal error ({type(exc).__name__}): {exc}",
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
