import json

import numpy as np
import pytest

from symann.annindex import exact_scan, norm_distance
from symann.bench import cli
from symann.bench.config import ConfigError, RunConfig
from symann.bench.io import (
    FormatError,
    dump_json,
    norm_from_text,
    norm_to_text,
    read_points,
    resolve_norm,
    write_points,
)
from symann.bench.lowerbound import level_gauge, lowerbound_demo, staircase
from symann.bench.planted import RejectionBudgetExceeded, gen_planted
from symann.bench.run import bootstrap_ci, run_bench
from symann.bench.verify import lemma47_identity, ring_soundness, sandwich, verify
from symann.gfunc import Power
from symann.vecnorm import Lp, catalog


def test_planted_examples():
    norm = Lp(8, 2)
    inst = gen_planted(norm, 10, 8, 1.0, 4.0, seed=0)
    assert inst.check(norm)
    again = gen_planted(norm, 10, 8, 1.0, 4.0, seed=0)
    assert inst.points.tobytes() == again.points.tobytes()
    with pytest.raises(ValueError):
        gen_planted(norm, 10, 8, 1.0, 1.0, seed=0)
    with pytest.raises(ValueError):
        gen_planted(norm, 10, 4, 1.0, 4.0, seed=0)


def test_planted_scan_finds_planted():
    norm = catalog(6)["minimal_sqrt"]
    oracle = norm_distance(norm)
    for seed in range(100):
        inst = gen_planted(norm, 40, 6, 0.5, 3.0, seed)
        assert exact_scan(inst.points, oracle, inst.query).candidate == inst.planted_id
        others = np.delete(inst.points, inst.planted_id, axis=0)
        assert np.all(norm.norm(others - inst.query) >= 3.0 * 0.5 * (1 - 1e-9))


def test_planted_rejection_budget():
    with pytest.raises(RejectionBudgetExceeded):
        gen_planted(Lp(2, 2), 200, 2, 1.0, 4.0, seed=0, spread=0.05, max_tries=2)


def test_points_roundtrip(tmp_path, rng):
    P = rng.standard_normal((7, 3))
    f = tmp_path / "p.bin"
    write_points(f, P)
    np.testing.assert_array_equal(read_points(f), P)
    raw = f.read_bytes()
    assert raw[:8] == b"SYMANNPT"
    (tmp_path / "bad.bin").write_bytes(b"XXXXXXXX" + raw[8:])
    with pytest.raises(FormatError):
        read_points(tmp_path / "bad.bin")
    (tmp_path / "short.bin").write_bytes(raw[:-8])
    with pytest.raises(FormatError):
        read_points(tmp_path / "short.bin")


def test_norm_text_roundtrip(tmp_path):
    for norm in catalog(5).values():
        back = norm_from_text(norm_to_text(norm))
        assert back == norm
    f = tmp_path / "n.txt"
    f.write_text(norm_to_text(catalog(5)["orlicz_huber"]))
    assert resolve_norm(str(f)) == catalog(5)["orlicz_huber"]
    with pytest.raises(FormatError):
        norm_from_text("nope\nkind=1\n")
    with pytest.raises(ValueError):
        resolve_norm("not-a-norm", 4)
    with pytest.raises(ValueError):
        resolve_norm("l2")


def test_dump_json_canonical():
    text = dump_json({"b": float("inf"), "a": [np.float64(1.5), float("nan")]})
    assert json.loads(text) == {"a": [1.5, "nan"], "b": "inf"}
    assert text.index('"a"') < text.index('"b"')


def test_config():
    cfg = RunConfig.from_json('{"n": 50, "d": 4, "queries": 10}')
    assert cfg.n == 50 and cfg.reps_value == int(np.ceil(50**0.25))
    assert cfg.mu_value == pytest.approx(50**-0.25)
    for bad in ['{"bogus": 1}', '{"index": "tree"}', '{"queries": 99, "n": 10}', "[1]", "{", '{"sep": 1.0}',
                '{"assertions": {"x": 1}}']:
        with pytest.raises(ConfigError):
            RunConfig.from_json(bad)
    assert RunConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.replace(n=60).n == 60


def test_exact_bench_is_perfect(tmp_path):
    cfg = RunConfig(norm="l1", n=60, d=5, queries=12, bootstrap=50, out_csv=str(tmp_path / "r.csv"),
                    out_json=str(tmp_path / "r.json"), assertions={"min_recall": 1.0, "max_mean_ratio": 1.0})
    rep = run_bench(cfg)
    assert rep.exit_code == 0
    agg = rep.summary["aggregates"]
    assert agg["recall"]["mean"] == 1.0 and agg["ratio"]["mean"] == 1.0
    assert (tmp_path / "r.csv").read_text() == rep.csv_text()
    assert rep.csv_text().splitlines()[0].startswith("query,planted,candidate")
    assert len(rep.csv_text().splitlines()) == 13
    # identical configs give identical bytes
    again = run_bench(cfg.replace(out_csv=None, out_json=None))
    assert again.csv_text() == rep.csv_text()
    assert json.loads(again.json_text())["aggregates"] == json.loads(rep.json_text())["aggregates"]


def test_empty_query_bench():
    rep = run_bench(RunConfig(n=10, d=3, queries=0))
    assert rep.rows == [] and rep.exit_code == 0
    assert rep.summary["aggregates"]["recall"]["mean"] is None


def test_bench_assertion_failure():
    rep = run_bench(RunConfig(norm="l2", index="orlicz", n=80, d=4, queries=10, reps=1, mu=0.01,
                              assertions={"min_recall": 1.01}))
    assert rep.exit_code == 1


@pytest.mark.parametrize("index", ["orlicz", "general", "symnorm-direct", "symnorm-nested"])
def test_bench_indexes_run(index):
    norm = "orlicz_huber" if index != "symnorm-nested" else "l1"
    rep = run_bench(RunConfig(norm=norm, index=index, n=80, d=6, queries=8, bootstrap=20))
    assert rep.summary["aggregates"]["violations"] == 0
    assert rep.summary["aggregates"]["ratio_below_one"] == 0


def test_bootstrap(rng):
    assert bootstrap_ci([], 10, rng) is None
    lo, hi = bootstrap_ci(np.ones(30), 100, rng)
    assert lo == hi == 1.0
    v = rng.random(200)
    lo, hi = bootstrap_ci(v, 500, rng)
    assert lo < v.mean() < hi


def test_level_gauge_matches_lp():
    # sum (x / lam)^2 <= 1 is the l2 norm
    x = np.array([[3.0, 4.0]])
    assert level_gauge(Power(2.0), x, np.ones((1, 2)), 1.0)[0] == pytest.approx(5.0, rel=1e-9)
    np.testing.assert_allclose(staircase(4).cumsum(), np.sqrt([1, 2, 3, 4]))


def test_lowerbound_demo_small():
    rows = lowerbound_demo([16, 64], "minimal_sqrt")
    assert [r["d"] for r in rows] == [16, 64]
    assert all(r["proxy"] >= 1 for r in rows)
    for bad in [[], [12], [64, 16]]:
        with pytest.raises(ValueError):
            lowerbound_demo(bad)
    with pytest.raises(ValueError):
        lowerbound_demo([16], "l1")


def test_small_suites():
    assert lemma47_identity(samples=300)["passed"]
    assert sandwich(d=6, n_x=100, norms=("l1", "l2"))["passed"]
    assert ring_soundness(instances=3, max_n=120)["passed"]
    with pytest.raises(KeyError):
        verify(["nope"])


# -- CLI ------------------------------------------------------------------------


def test_cli_roundtrip(tmp_path, capsys):
    pts, qs = tmp_path / "p.bin", tmp_path / "q.bin"
    assert cli.main(["gen", "--norm", "l2", "--n", "60", "--d", "4", "--queries", "5", "--out", str(pts),
                     "--queries-out", str(qs), "--meta-out", str(tmp_path / "m.json")]) == 0
    idx = tmp_path / "i.json"
    assert cli.main(["build", "--points", str(pts), "--out", str(idx), "--d", "4", "--index", "symnorm-direct",
                     "--norm", "l2"]) == 0
    assert json.loads(idx.read_text())["embedding"]["schema"] == "symann.embedding/1"
    out = tmp_path / "a.csv"
    assert cli.main(["query", "--index", str(idx), "--points", str(pts), "--queries", str(qs), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "query,candidate,distance,evals,nodes" and len(lines) == 6
    planted = json.loads((tmp_path / "m.json").read_text())["planted"]
    assert [int(ln.split(",")[1]) for ln in lines[1:]] == planted


def test_cli_bench_and_reports(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 40, "d": 4, "queries": 4, "bootstrap": 10, "out_json": str(tmp_path / "o.json")}))
    assert cli.main(["bench", "--config", str(cfg), "--assert-min-recall", "1.0"]) == 0
    assert "PASS" in capsys.readouterr().out
    assert cli.main(["net-report", "--norm", "l2", "--dims", "4", "6"]) == 0
    assert cli.main(["net-report", "--norm", "l1", "--dims", "8", "--node-budget", "10"]) == 1
    assert cli.main(["lowerbound-demo", "--dims", "16", "32", "--norms", "l2"]) == 0
    assert cli.main(["verify", "lemma-4.7-identity", "--out", str(tmp_path / "v.json")]) == 0
    assert json.loads((tmp_path / "v.json").read_text())["passed"]


def test_cli_usage_errors(tmp_path, capsys):
    assert cli.main(["verify", "no-such-suite"]) == 2
    bad = tmp_path / "c.json"
    bad.write_text('{"n": 10, "bogus": 3}')
    assert cli.main(["bench", "--config", str(bad)]) == 2
    assert cli.main(["bench", "--norm", "l2", "--d", "0"]) == 2
    pts = tmp_path / "p.bin"
    write_points(pts, np.zeros((5, 3)))
    assert cli.main(["build", "--points", str(pts), "--out", str(tmp_path / "i.json"), "--d", "4"]) == 2
    assert cli.main(["query", "--index", str(tmp_path / "missing.json"), "--points", str(pts),
                     "--queries", str(pts)]) == 2
    assert cli.main(["lowerbound-demo", "--dims", "10"]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["no-such-command"])
    assert exc.value.code == 2
