import json
from pathlib import Path

import numpy as np
import pytest

from kpzlab import cli
from kpzlab.harness import (ConfigError, EXPERIMENTS, RunConfig, integrity_check,
                            monotone_instances, replica_seeds, run)
from kpzlab.rng import counter_uniform, counter_uniforms, derive_replica_seed, mix64, mix64_array

GOLDEN = json.loads((Path(__file__).parent / "data" / "splitmix_golden.json").read_text())


def test_replica_seed_golden_vectors():
    assert mix64(1) == GOLDEN["mix64_of_1"]
    for row in GOLDEN["replica_seeds"]:
        assert derive_replica_seed(row["master"], row["index"]) == row["seed"]


def test_counter_uniform_golden_and_vectorized():
    for row in GOLDEN["counter_uniforms"]:
        assert counter_uniform(row["seed"], row["counter"]) == row["uniform"]
        vec = counter_uniforms(np.array([row["seed"]], dtype=np.uint64),
                               np.array([row["counter"]], dtype=np.uint64))
        assert float(vec[0]) == row["uniform"]


def test_mix64_array_matches_scalar():
    vals = np.array([0, 1, 2 ** 63, 2 ** 64 - 1, 987654321], dtype=np.uint64)
    out = mix64_array(vals)
    for v, o in zip(vals.tolist(), out.tolist()):
        assert mix64(int(v)) == int(o)


def test_replica_seed_collision_scan():
    n = 1_000_000
    idx = np.arange(1, n + 1, dtype=np.uint64)
    seeds = mix64_array(np.uint64(99) + idx * np.uint64(0x9E3779B97F4A7C15))
    assert len(np.unique(seeds)) == n
    assert derive_replica_seed(0, 0) >= 0      # master = 0 allowed


def test_replica_seeds_match_vectorized_derivation():
    got = replica_seeds(99, 5)
    for i, s in enumerate(got.tolist()):
        assert s == derive_replica_seed(99, i)


def test_config_validation():
    with pytest.raises(ConfigError):
        RunConfig("local-clt", seed=None)
    with pytest.raises(ConfigError):
        RunConfig("local-clt", seed=1, replicas=0)
    cfg = RunConfig("local-clt", seed=1)
    assert cfg.out_dir                     # default applied
    assert RunConfig.from_json(cfg.to_json()).experiment == "local-clt"


def test_unknown_experiment(tmp_path):
    with pytest.raises(ConfigError):
        run(RunConfig("no-such-thing", seed=1, out_dir=str(tmp_path)))


def test_run_writes_manifest_and_is_deterministic(tmp_path):
    p1, p2 = tmp_path / "a", tmp_path / "b"
    for p in (p1, p2):
        cfg = RunConfig("sample-s6v", seed=5, replicas=4, out_dir=str(p),
                        params={"X": 6, "Y": 4})
        assert run(cfg) == 0
        assert integrity_check(p)
    assert (p1 / "s6v_heights.csv").read_bytes() == (p2 / "s6v_heights.csv").read_bytes()
    man = json.loads((p1 / "manifest.json").read_text())
    assert man["status"] == "complete"
    assert "s6v_heights.csv" in man["files"]


def test_workers_do_not_change_results(tmp_path):
    outs = []
    for w in (1, 3):
        p = tmp_path / f"w{w}"
        run(RunConfig("sample-asep", seed=9, replicas=5, workers=w, out_dir=str(p),
                      params={"t": 0.4, "T": 4.0}))
        outs.append((p / "asep_heights.csv").read_bytes())
    assert outs[0] == outs[1]


def test_failed_marker_and_integrity(tmp_path, monkeypatch):
    def boom(cfg, out):
        (out / "partial.csv").write_text("x\n")
        raise RuntimeError("synthetic failure")

    monkeypatch.setitem(EXPERIMENTS, "explode", boom)
    cfg = RunConfig("explode", seed=1, out_dir=str(tmp_path))
    with pytest.raises(RuntimeError):
        run(cfg)
    assert (tmp_path / "FAILED").exists()
    assert not integrity_check(tmp_path)


def test_integrity_detects_corruption(tmp_path):
    run(RunConfig("local-clt", seed=1, out_dir=str(tmp_path),
                  params={"n_list": [100]}))
    assert integrity_check(tmp_path)
    (tmp_path / "local_clt.csv").write_text("tampered\n")
    assert not integrity_check(tmp_path)


def test_monotone_instance_family():
    fam = monotone_instances(3, 2)
    assert all(spec.t1 - spec.t0 <= 3 for spec, _, _ in fam)
    assert all(bot.at(spec.t0) <= spec.z0 and bot.at(spec.t1) <= spec.z1
               for spec, bot, _ in fam)
    assert len({(spec, bot.values) for spec, bot, _ in fam}) == len(fam)


def test_cli_usage_and_smoke(tmp_path, capsys):
    assert cli.main([]) == 2
    with pytest.raises(SystemExit):
        cli.main(["not-an-experiment", "--seed", "1"])
    rc = cli.main(["local-clt", "--seed", "3", "--out", str(tmp_path / "o"),
                   ])
    assert rc == 0
    assert (tmp_path / "o" / "local_clt.csv").exists()


def test_cli_config_file(tmp_path):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({"n_list": [100, 200]}))
    rc = cli.main(["local-clt", "--seed", "4", "--out", str(tmp_path / "o"),
                   "--config", str(cfgfile)])
    assert rc == 0
    lines = (tmp_path / "o" / "local_clt.csv").read_text().splitlines()
    assert len(lines) == 3


def test_env_var_default_out(tmp_path, monkeypatch):
    monkeypatch.setenv("KPZLAB_OUT", str(tmp_path / "envout"))
    cfg = RunConfig("local-clt", seed=1)
    assert cfg.out_dir == str(tmp_path / "envout")
