import csv
import json

import numpy as np
import pytest

from cpbench.data import LogitDataset
from cpbench.errors import DatasetKindError, SchemaError
from cpbench.fileio import write_logits
from cpbench.harness import (
    CIFAR10_ALPHA,
    DEFAULT_ALPHA,
    REPORT_KEYS,
    RunConfig,
    cifar10_recipe,
    cmd_compare,
    cmd_conformalize,
    cmd_shift_eval,
    cmd_sweep_temperature,
)
from cpbench.prob import as_logits
from cpbench.scores import ScoreSpec
from cpbench.synthetic import ShiftSpec, SyntheticSpec, generate, generate_pair


@pytest.fixture
def probs_file(tmp_path):
    ds = generate(SyntheticSpec(num_classes=10, n=2000, seed=0))
    path = tmp_path / "probs.cpl"
    write_logits(ds, path)
    return path


@pytest.fixture
def logits_file(tmp_path):
    ds = as_logits(generate(SyntheticSpec(num_classes=10, n=2000, seed=1)))
    path = tmp_path / "logits.cpl"
    write_logits(ds, path)
    return path


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig()
        assert cfg.alpha == DEFAULT_ALPHA == 0.1
        assert cfg.cal_fraction == 0.5
        assert cfg.score.penalty == 0.1
        assert cfg.score.k_reg == 2
        assert len(cfg.grid()) == 14

    def test_cifar10_recipe(self):
        assert cifar10_recipe().alpha == CIFAR10_ALPHA == 0.05

    def test_validation(self):
        with pytest.raises(ValueError):
            RunConfig(alpha=0.0)
        with pytest.raises(ValueError):
            RunConfig(cal_fraction=0.0)
        with pytest.raises(ValueError):
            RunConfig(temperature=-1.0)


class TestConformalizeCommand:
    def test_report_contents(self, probs_file, tmp_path):
        out = tmp_path / "out"
        cfg = RunConfig(score=ScoreSpec(method="lac"), seed=3)
        payload = cmd_conformalize(probs_file, cfg, out, fmt="both")
        record = payload["record"]
        assert set(record) == set(REPORT_KEYS)
        assert 0.8 <= record["coverage"] <= 1.0
        assert len(payload["set_sizes"]) == 1000

        on_disk = json.loads((out / "report.json").read_text())
        assert on_disk["record"] == record
        with open(out / "report.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1
        assert float(rows[0]["coverage"]) == pytest.approx(record["coverage"])

    def test_deterministic(self, probs_file):
        cfg = RunConfig(score=ScoreSpec(method="raps"), seed=5)
        a = cmd_conformalize(probs_file, cfg)
        b = cmd_conformalize(probs_file, cfg)
        assert a == b

    def test_raps_lambda_zero_identical_to_aps(self, probs_file):
        cfg_aps = RunConfig(score=ScoreSpec(method="aps"), seed=7)
        cfg_raps = RunConfig(score=ScoreSpec(method="raps", penalty=0.0), seed=7)
        a = cmd_conformalize(probs_file, cfg_aps)
        b = cmd_conformalize(probs_file, cfg_raps)
        assert a["set_sizes"] == b["set_sizes"]
        for key in ("coverage", "avg_set_size", "cov_gap", "mccc"):
            assert a["record"][key] == b["record"][key]

    def test_one_hot_classifier(self, tmp_path):
        rng = np.random.default_rng(2)
        labels = rng.integers(0, 5, 200)
        ds = LogitDataset(np.eye(5)[labels], labels, "probabilities")
        path = tmp_path / "onehot.cpl"
        write_logits(ds, path)
        for method in ("lac", "aps", "raps"):
            cfg = RunConfig(score=ScoreSpec(method=method, u_mode="fixed",
                                            u_value=0.0))
            record = cmd_conformalize(path, cfg)["record"]
            assert record["coverage"] == 1.0
            assert record["avg_set_size"] <= 1.0


class TestSweepCommand:
    def test_rejects_probabilities(self, probs_file):
        with pytest.raises(DatasetKindError):
            cmd_sweep_temperature(probs_file, RunConfig())

    def test_unit_temperature_matches_conformalize(self, logits_file):
        cfg = RunConfig(score=ScoreSpec(method="aps"), seed=2,
                        t_grid=(1.0, 1.5))
        sweep = cmd_sweep_temperature(logits_file, cfg)
        direct = cmd_conformalize(logits_file, RunConfig(
            score=ScoreSpec(method="aps"), seed=2, temperature=1.0))
        row = sweep["rows"][0]
        assert row["T"] == 1.0
        for key in ("coverage", "avg_set_size", "mccc", "cov_gap", "ece"):
            assert row[key] == direct["record"][key]

    def test_accuracy_constant_across_grid(self, logits_file):
        cfg = RunConfig(score=ScoreSpec(method="lac"), seed=4)
        sweep = cmd_sweep_temperature(logits_file, cfg)
        assert len(sweep["rows"]) == 14
        accuracies = {row["accuracy"] for row in sweep["rows"]}
        assert len(accuracies) == 1

    def test_emits_files(self, logits_file, tmp_path):
        out = tmp_path / "sweep"
        cfg = RunConfig(t_grid=(0.9, 1.1, 1.3), seed=1)
        cmd_sweep_temperature(logits_file, cfg, out, fmt="both")
        payload = json.loads((out / "sweep.json").read_text())
        assert payload["grid"] == [0.9, 1.1, 1.3]
        with open(out / "sweep.csv") as fh:
            assert len(list(csv.DictReader(fh))) == 3


class TestShiftCommand:
    def test_exchangeable_halves_keep_coverage(self, tmp_path):
        spec = SyntheticSpec(num_classes=10, n=3000,
                             shift=ShiftSpec(0.0, 0.0), seed=6)
        cal, test = generate_pair(spec)
        cal_path, test_path = tmp_path / "cal.cpl", tmp_path / "test.cpl"
        write_logits(cal, cal_path)
        write_logits(test, test_path)
        payload = cmd_shift_eval(cal_path, test_path,
                                 RunConfig(score=ScoreSpec(method="lac")))
        assert payload["record"]["coverage"] >= 0.87
        assert len(payload["per_class_coverage"]) == 10

    def test_shifted_pair_undercovers(self, tmp_path):
        spec = SyntheticSpec(
            num_classes=10, n=3000, target_accuracy=0.7,
            shift=ShiftSpec(accuracy_drop=0.3, noise_scale=1.0), seed=7,
        )
        cal, test = generate_pair(spec)
        cal_path, test_path = tmp_path / "cal.cpl", tmp_path / "test.cpl"
        write_logits(cal, cal_path)
        write_logits(test, test_path)
        payload = cmd_shift_eval(cal_path, test_path,
                                 RunConfig(score=ScoreSpec(method="lac")))
        assert payload["record"]["coverage"] < 0.88

    def test_class_count_mismatch(self, tmp_path):
        a = generate(SyntheticSpec(num_classes=5, n=50, seed=1))
        b = generate(SyntheticSpec(num_classes=6, n=50, seed=1))
        pa, pb = tmp_path / "a.cpl", tmp_path / "b.cpl"
        write_logits(a, pa)
        write_logits(b, pb)
        with pytest.raises(SchemaError):
            cmd_shift_eval(pa, pb, RunConfig())


class TestCompareCommand:
    def test_identical_inputs_identical_rows(self, probs_file, tmp_path):
        twin = tmp_path / "twin.cpl"
        twin.write_bytes(probs_file.read_bytes())
        payload = cmd_compare([probs_file, twin], ["lac", "aps"], RunConfig(seed=1))
        rows = payload["rows"]
        assert len(rows) == 4
        by_method = {}
        for row in rows:
            by_method.setdefault(row["method"], []).append(
                {k: v for k, v in row.items() if k != "run"}
            )
        for method_rows in by_method.values():
            assert method_rows[0] == method_rows[1]

    def test_self_delta_empty(self, probs_file):
        payload = cmd_compare(
            [probs_file], ["lac", "aps"], RunConfig(seed=2),
            analyze=("probs/lac", "probs/lac"),
        )
        assert payload["set_size_delta"]["deltas"] == {}
        assert payload["set_size_delta"]["zeros"] == 1000
        wc = payload["worst_class"]
        assert wc["coverage_a"] == wc["coverage_b"]

    def test_analysis_pair(self, probs_file):
        payload = cmd_compare(
            [probs_file], ["aps", "raps"], RunConfig(seed=3),
            analyze=("probs/raps", "probs/aps"),
        )
        wc = payload["worst_class"]
        assert wc["class"] in range(10)
        hist = payload["set_size_delta"]
        assert hist["zeros"] + sum(hist["deltas"].values()) == 1000

    def test_unknown_run_label(self, probs_file):
        with pytest.raises(ValueError):
            cmd_compare([probs_file], ["lac"], RunConfig(),
                        analyze=("probs/lac", "probs/aps"))

    def test_empty_inputs(self):
        with pytest.raises(ValueError):
            cmd_compare([], ["lac"], RunConfig())
