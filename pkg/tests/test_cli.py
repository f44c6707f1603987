import json
import os

from rigidcocycle.cli import (
    PRESETS,
    config_hash,
    default_prec_bits,
    default_series_len,
    main,
    resolve_config,
)
from rigidcocycle.padic import QuadContext

FIXDIR = os.path.join(os.path.dirname(__file__), "..", "src",
                      "rigidcocycle", "fixtures")


def run_cli(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_presets_cover_published_configurations():
    assert "d6_p5_53_23_plus" in PRESETS
    assert "d10_p3_53_23_even" in PRESETS
    assert "d15_p7_17_33_plus" in PRESETS
    # the full support tables
    assert "d6_p5_8_92_plus" in PRESETS
    assert "d6_p5_8_77_minus" in PRESETS
    assert "d10_p3_5_92_odd" in PRESETS
    assert "d22_p3_29_44_even" in PRESETS
    cfg = PRESETS["d6_p5_53_23_plus"]
    assert cfg["disc2"] == 92 and cfg["unit_power"] == 2


def test_presets_listing(capsys):
    rc, out, _ = run_cli(capsys, "presets")
    assert rc == 0
    assert len(out.strip().splitlines()) == len(PRESETS)
    rc, out, _ = run_cli(capsys, "presets", "d6_p5_53_23_plus")
    assert rc == 0
    assert json.loads(out)["d6_p5_53_23_plus"]["p"] == 5


def test_unknown_preset_is_config_error(capsys):
    rc, _, err = run_cli(capsys, "presets", "nonsense")
    assert rc == 2
    rc, _, err = run_cli(capsys, "compute", "--preset", "nonsense")
    assert rc == 2


def test_invalid_config_ramified_prime(capsys):
    # p = 3 is ramified in the discriminant-6 algebra
    rc, _, err = run_cli(capsys, "compute", "--preset", "d6_p5_53_23_plus",
                         "--p", "3")
    assert rc == 2
    assert "ramified" in err


def test_missing_fields_is_config_error(capsys):
    rc, _, err = run_cli(capsys, "compute", "--algebra", "6", "-1")
    assert rc == 2
    assert "missing" in err


def test_toml_config_merge(tmp_path):
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text('flavor = "even"\nprec = 14\n')

    class Args:
        preset = "d6_p5_8_92_plus"
        config = str(cfg_file)
        algebra = None
        p = None
        disc1 = None
        disc2 = None
        flavor = None
        unit_power = None
        prec = None
        series_len = None
        prec_bits = None

    cfg = resolve_config(Args())
    assert cfg["flavor"] == "even" and cfg["prec"] == 14
    assert cfg["disc1"] == 8 and cfg["disc2"] == 92
    assert cfg["series_len"] == default_series_len(14)
    assert cfg["prec_bits"] == default_prec_bits(14)
    # hashing is stable under key order
    assert config_hash(cfg) == config_hash(dict(reversed(list(cfg.items()))))


def test_bad_toml_key(tmp_path, capsys):
    cfg_file = tmp_path / "run.toml"
    cfg_file.write_text('wrong = 3\n')
    rc, _, err = run_cli(capsys, "compute", "--preset", "d6_p5_8_92_plus",
                         "--config", str(cfg_file))
    assert rc == 2


def make_artifact(path, ctx, value, e=1, m=1):
    a0, a1 = value.digits_pair()
    path.write_text(json.dumps({
        "p": ctx.p, "N": value.prec, "flavor": "plus",
        "value": [str(a0), str(a1)],
        "defining_poly": [1, -ctx.s, -ctx.c], "e": e, "m": m,
        "run_hash": "0" * 16,
    }))


def fixture_ctx_and_logs(name):
    with open(os.path.join(FIXDIR, name)) as fh:
        data = json.load(fh)
    # context matching the shipped fixture logs
    p = data["p"]
    ctx = QuadContext(p, 0, 2) if p == 5 else QuadContext(p, 1, 1)
    logs = [ctx.element(int(u["log"][0]), int(u["log"][1]), data["prec"])
            for u in data["units"]]
    return ctx, data, logs


def test_verify_fixture_planted_unit(tmp_path, capsys):
    ctx, data, logs = fixture_ctx_and_logs("d6_p5_8_92_plus.json")
    value = logs[0] * 2 + logs[2] * -1
    art = tmp_path / "j.json"
    make_artifact(art, ctx, value)
    rc, out, _ = run_cli(capsys, "verify", str(art), "--fixtures",
                         os.path.join(FIXDIR, "d6_p5_8_92_plus.json"))
    assert rc == 0
    assert "matched" in out
    want = sorted(set(data["units"][0]["support"])
                  | set(data["units"][2]["support"]))
    assert f"support={want}" in out


def test_verify_unmatched_exit_code(tmp_path, capsys):
    ctx, data, logs = fixture_ctx_and_logs("d6_p5_8_92_plus.json")
    value = ctx.element(12345678901234567, 7654321, data["prec"])
    art = tmp_path / "j.json"
    make_artifact(art, ctx, value)
    rc, out, _ = run_cli(capsys, "verify", str(art), "--fixtures",
                         os.path.join(FIXDIR, "d6_p5_8_92_plus.json"))
    assert rc == 1
    assert "unmatched" in out


def test_verify_requires_work(tmp_path, capsys):
    ctx, data, logs = fixture_ctx_and_logs("d6_p5_8_92_plus.json")
    art = tmp_path / "j.json"
    make_artifact(art, ctx, logs[0])
    rc, _, err = run_cli(capsys, "verify", str(art))
    assert rc == 2


def test_shipped_fixture_schema():
    for name in os.listdir(FIXDIR):
        with open(os.path.join(FIXDIR, name)) as fh:
            data = json.load(fh)
        assert set(data) == {"field", "p", "prec", "units"}
        assert len(data["field"]["gens"]) == 2
        for u in data["units"]:
            int(u["log"][0]), int(u["log"][1])
            assert all(q in (2, 3, 5) for q in u["support"])


def test_selftest_quick(capsys):
    rc, out, _ = run_cli(capsys, "selftest", "quick")
    assert rc == 0
    assert "4/4 checks passed" in out


def test_domain_summary(capsys):
    rc, out, _ = run_cli(capsys, "domain", "--algebra", "6", "-1")
    assert rc == 0
    info = json.loads(out)
    assert info["algebra"] == [6, -1]
    assert info["generators"] >= 2 and info["sides"] >= 4


def test_compute_cache_reuse_and_determinism(tmp_path, capsys):
    env = {"argv": ["--cache-dir", str(tmp_path), "compute", "--preset",
                    "d6_p5_8_92_plus", "--prec", "10"]}
    rc, out1, err1 = run_cli(capsys, *env["argv"])
    assert rc == 0
    data = json.loads(out1)
    assert data["p"] == 5 and data["flavor"] == "plus"
    rc, out2, err2 = run_cli(capsys, *env["argv"])
    assert rc == 0
    assert out1 == out2
    assert "[cache]" in err2 and "[cache]" not in err1
