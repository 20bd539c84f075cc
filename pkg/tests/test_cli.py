import csv
import json

import numpy as np
import pytest

from wsn_deploy.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from wsn_deploy.config import RegionSpec, build_config, load_config, parse_pairs
from wsn_deploy.errors import ConfigError
from wsn_deploy.field import SensorField, format_coords, read_coords
from wsn_deploy.geometry import discretize
from wsn_deploy.runner import (
    GRID_HEADER,
    HISTORY_HEADER,
    REMOVALS_HEADER,
    RunSummary,
    coverage_rate,
    run_deploy,
    run_evaluate,
    run_generate,
    run_minsensors,
)
from wsn_deploy.sensing import DetectionReport

BASE = """
region.width = 30
region.height = 30
sensors.count = 6
sensing.r_s = 4
train.max_epochs = 60
output.dir = out
seed = 9
"""


def write_cfg(tmp_path, text=BASE, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_parse_pairs():
    pairs = parse_pairs("# c\nregion.width = 5  # trailing\n\nseed=3\n")
    assert pairs == {"region.width": 5.0, "seed": 3}


@pytest.mark.parametrize(
    "text",
    ["region.width 5", "bogus.key = 1", "seed = 1\nseed = 2", "sensors.count = 2.5", "region.width = inf"],
)
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_pairs(text)


@pytest.mark.parametrize(
    "pairs",
    [
        {},
        {"region.width": 5.0},
        {"region.width": 5.0, "region.height": 5.0, "region.polygon": "p.txt"},
        {"region.polygon": "missing.txt"},
        {"region.width": 5.0, "region.height": 5.0, "seed": -1},
        {"region.width": 5.0, "region.height": 5.0, "sensing.r_s": -1.0},
        {"region.width": 5.0, "region.height": 5.0, "pattern.kind": "spiral"},
        {"region.width": 5.0, "region.height": 5.0, "pattern.kind": "file"},
        {"region.width": 5.0, "region.height": 5.0, "minsensors.r_a": 5.0},
        {"region.width": 5.0, "region.height": 5.0, "minsensors.initial_count": 5},
        {"region.width": 5.0, "region.height": 5.0, "grid.spacing": 0.0},
        {"region.width": 5.0, "region.height": 5.0, "train.learning_rate": 0.0},
    ],
)
def test_build_errors(pairs, tmp_path):
    with pytest.raises(ConfigError):
        build_config(pairs, tmp_path)


def test_defaults_follow_table_values(tmp_path):
    cfg = load_config(write_cfg(tmp_path))
    assert (cfg.sensing.r_s, cfg.sensing.lam, cfg.sensing.beta) == (4.0, 0.07, 1.0)
    assert (cfg.thresholds.p_th, cfg.thresholds.eta_th) == (0.8, 0.2)
    assert (cfg.training.gamma_n, cfg.training.gamma_c, cfg.training.learning_rate) == (3e5, 1e3, 3e-2)
    assert cfg.region == RegionSpec(width=30.0, height=30.0)
    assert cfg.output_dir == str(tmp_path / "out")
    assert cfg.pattern.seed == 9 and cfg.minsensors is None


def test_seed_override(tmp_path):
    cfg = load_config(write_cfg(tmp_path)).with_seed(2**64 - 1)
    assert cfg.pattern.seed == 2**64 - 1 and cfg.echo()["seed"] == 2**64 - 1
    with pytest.raises(ConfigError):
        cfg.with_seed(2**64)


def test_coverage_rate_examples():
    grid = discretize(__import__("wsn_deploy.geometry", fromlist=["Region"]).Region.rectangle(50, 50))
    n = grid.n_targets

    def rep(k):
        det = np.zeros(n, bool)
        det[:k] = True
        return DetectionReport(det.astype(float), np.ones(n, int), np.zeros((n, 1), int), det, np.zeros((n, 0), bool))

    assert coverage_rate(rep(n), grid).rho == 1.0
    assert coverage_rate(rep(0), grid).rho == 0.0
    c = coverage_rate(rep(1300), grid)
    assert (c.n_detected, c.n_targets) == (1300, 2601)
    assert c.rho == pytest.approx(0.499808, abs=1e-6)


def test_deploy_outputs_and_schemas(tmp_path):
    cfg = load_config(write_cfg(tmp_path))
    s = run_deploy(cfg)
    out = tmp_path / "out"
    assert rows(out / "sensors.csv")[0] == ["sensor_id", "x", "y"]
    grid_rows = rows(out / "coverage_grid.csv")
    assert tuple(grid_rows[0]) == GRID_HEADER and len(grid_rows) == 31 * 31 + 1
    for x, y, p, n, det in grid_rows[1:]:
        assert 0 <= float(p) <= 1 and 1 <= int(n) <= 6 and det in ("0", "1")
        assert (float(p) >= 0.8) == (det == "1") or abs(float(p) - 0.8) < 1e-8
    hist = rows(out / "loss_history.csv")
    assert tuple(hist[0]) == HISTORY_HEADER and len(hist) == s.epochs + 1
    assert not (out / "removals.csv").exists()
    assert sum(int(r[4]) for r in grid_rows[1:]) == s.coverage.n_detected
    for name in ("sensors.csv", "coverage_grid.csv", "loss_history.csv", "summary.json"):
        data = (out / name).read_bytes()
        assert b"\r\n" not in data
        data.decode("utf-8")
    assert not list(out.glob(".*tmp"))


def test_summary_round_trip_and_totals(tmp_path):
    cfg = load_config(write_cfg(tmp_path))
    s = run_deploy(cfg)
    text = (tmp_path / "out" / "summary.json").read_text()
    assert RunSummary.from_json(text) == s
    assert RunSummary.from_json(s.to_json()).to_json() == text
    lb = s.final_loss
    assert lb.total == cfg.training.gamma_n * lb.loss_ni + cfg.training.gamma_c * lb.loss_cov
    d = json.loads(text)
    assert d["rng_algorithm"] == "numpy.random.Philox(4x64-10)"
    assert d["config"]["sensors.count"] == 6


def test_evaluate_reproduces_deploy_rho(tmp_path):
    cfg = load_config(write_cfg(tmp_path))
    s = run_deploy(cfg)
    e = run_evaluate(cfg, tmp_path / "out" / "sensors.csv", tmp_path / "ev")
    assert e.coverage == s.coverage
    assert e.final_loss == s.final_loss
    assert (tmp_path / "ev" / "sensors.csv").read_bytes() == (tmp_path / "out" / "sensors.csv").read_bytes()


def test_zero_epoch_deploy_is_initial(tmp_path):
    cfg = load_config(write_cfg(tmp_path, BASE.replace("train.max_epochs = 60", "train.max_epochs = 0")))
    s = run_deploy(cfg)
    run_generate(cfg, tmp_path / "init.csv")
    assert (tmp_path / "init.csv").read_bytes() == (tmp_path / "out" / "sensors.csv").read_bytes()
    assert s.epochs == 0


def test_evaluate_single_center_sensor(tmp_path):
    cfg = load_config(write_cfg(tmp_path, "region.width = 2\nregion.height = 2\nsensing.r_s = 4\n"))
    coords = tmp_path / "c.csv"
    coords.write_text(format_coords(SensorField(np.array([[1.0, 1.0]]))))
    assert run_evaluate(cfg, coords).coverage.rho == 1.0


def test_evaluate_keeps_outside_coordinates(tmp_path):
    cfg = load_config(write_cfg(tmp_path, "region.width = 10\nregion.height = 10\nsensing.r_s = 4\n"))
    coords = tmp_path / "c.csv"
    coords.write_text(format_coords(SensorField(np.array([[-3.0, 5.0], [30.0, 5.0]]))))
    s = run_evaluate(cfg, coords)
    np.testing.assert_array_equal(read_coords(tmp_path / "out" / "sensors.csv").coords, [[-3, 5], [30, 5]])
    assert 0 < s.coverage.rho < 1


def test_minsensors_tiny(tmp_path):
    cfg = load_config(write_cfg(tmp_path, "region.width = 2\nregion.height = 2\nsensing.r_s = 15\nminsensors.r_a = 30.3\n"))
    s = run_minsensors(cfg)
    assert (s.final_k, s.coverage.rho) == (1, 1.0)
    rem = rows(s.removals_path)
    assert tuple(rem[0]) == REMOVALS_HEADER


def test_minsensors_needs_radius(tmp_path):
    with pytest.raises(ConfigError):
        run_minsensors(load_config(write_cfg(tmp_path)))


def test_polygon_region_and_file_pattern(tmp_path):
    (tmp_path / "tri.txt").write_text("0 0\n20 0\n0 20\n")
    (tmp_path / "init.csv").write_text(format_coords(SensorField(np.array([[2.0, 2.0], [8.0, 3.0], [3.0, 9.0]]))))
    text = "region.polygon = tri.txt\npattern.kind = file\npattern.path = init.csv\ntrain.max_epochs = 5\n"
    s = run_deploy(load_config(write_cfg(tmp_path, text)))
    assert s.coverage.n_targets == 231
    assert s.final_k == 3


def test_cli_commands(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    assert main(["deploy", "--config", str(cfg)]) == EXIT_OK
    assert "rho=" in capsys.readouterr().out
    assert main(["evaluate", "--config", str(cfg), "--coords", str(tmp_path / "out" / "sensors.csv"), "--out", str(tmp_path / "e")]) == EXIT_OK
    assert main(["generate", "--config", str(cfg), "--out", str(tmp_path / "g.csv"), "--seed", "0x10"]) == EXIT_OK
    assert read_coords(tmp_path / "g.csv").k == 6
    ms = write_cfg(tmp_path, "region.width = 2\nregion.height = 2\nsensing.r_s = 15\nminsensors.r_a = 30.3\n", "ms.cfg")
    assert main(["minsensors", "--config", str(ms)]) == EXIT_OK


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["deploy", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG
    assert main(["deploy", "--config", str(write_cfg(tmp_path, "oops\n"))]) == EXIT_CONFIG
    assert main(["deploy", "--config", str(write_cfg(tmp_path)), "--seed", "-1"]) == EXIT_CONFIG
    assert main(["frobnicate"]) == EXIT_CONFIG
    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n")
    assert main(["evaluate", "--config", str(write_cfg(tmp_path)), "--coords", str(bad)]) == EXIT_CONFIG
    # a file where the output directory should go fails at run time
    (tmp_path / "blocker").write_text("")
    cfg = write_cfg(tmp_path, BASE.replace("output.dir = out", "output.dir = blocker/sub"), "b.cfg")
    assert main(["deploy", "--config", str(cfg)]) == EXIT_RUNTIME
    capsys.readouterr()


def test_same_seed_same_bytes(tmp_path):
    cfg = write_cfg(tmp_path)
    main(["deploy", "--config", str(cfg)])
    first = (tmp_path / "out" / "sensors.csv").read_bytes()
    main(["deploy", "--config", str(cfg)])
    assert (tmp_path / "out" / "sensors.csv").read_bytes() == first
    main(["deploy", "--config", str(cfg), "--seed", "10"])
    assert (tmp_path / "out" / "sensors.csv").read_bytes() != first
