"""Tests for the command line, the command registry and shared arguments."""

import argparse
import json

import numpy as np
import pytest

from src.cli import build_parser, run
from src.commands import get_all_commands, get_command
from src.commands.arguments import grid_shape, non_negative_float, positive_int
from src.commands.train import split_holdout
from src.errors import InputValidationError
from src.microstructure import load_dataset


def invoke(tmp_path, *argv) -> int:
    return run(["--out", str(tmp_path), *argv])


@pytest.fixture
def catalog_file(tmp_path):
    out = tmp_path / "catalog"
    assert invoke(out, "--seed", "3", "gen-catalog", "--count", "40", "--nonempty-chunks", "12") == 0
    return out / "catalog.csv"


@pytest.fixture
def dataset_file(tmp_path, catalog_file):
    out = tmp_path / "dataset"
    code = invoke(out, "gen-dataset", "--catalog", str(catalog_file), "--count", "4", "--dims", "2", "--shape", "8")
    assert code == 0
    return out / "dataset.cgd"


# =============================================================================
# Registry
# =============================================================================

class TestRegistry:
    def test_all_commands_registered(self):
        names = set(get_all_commands())
        assert {
            "gen-catalog", "gen-dataset", "targets", "bounds-check",
            "train", "sample", "backproject", "evaluate", "gradcheck",
        } <= names

    def test_lookup(self):
        assert get_command("gradcheck").help
        assert get_command("missing") is None

    def test_parser_builds(self):
        parser = build_parser()
        args = parser.parse_args(["gradcheck"])
        assert args.command == "gradcheck"
        assert args.dims == 2 and args.shape == 4


# =============================================================================
# Argument helpers
# =============================================================================

class TestArguments:
    def test_positive_int(self):
        assert positive_int("3") == 3
        with pytest.raises(argparse.ArgumentTypeError):
            positive_int("0")
        with pytest.raises(argparse.ArgumentTypeError):
            positive_int("two")

    def test_non_negative_float(self):
        assert non_negative_float("0") == 0.0
        with pytest.raises(argparse.ArgumentTypeError):
            non_negative_float("-1e-3")

    def test_grid_shape(self):
        assert grid_shape(3, 8) == (8, 8, 8)
        assert grid_shape(2, None) == (64, 64)

    def test_split_holdout(self):
        train, held = split_holdout(10, 0.2, seed=0)
        assert len(train) == 8 and len(held) == 2
        assert set(train) | set(held) == set(range(10))
        assert np.array_equal(split_holdout(10, 0.2, seed=0)[1], held)
        with pytest.raises(InputValidationError):
            split_holdout(10, 1.0, seed=0)


# =============================================================================
# Exit codes
# =============================================================================

class TestExitCodes:
    def test_invalid_count_is_usage_error(self, tmp_path):
        assert invoke(tmp_path, "sample", "--count", "0", "--weights", "w.cgw", "--target-k", "50") == 1

    def test_unknown_command(self, tmp_path):
        assert invoke(tmp_path, "frobnicate") == 1

    def test_missing_command(self, tmp_path):
        assert invoke(tmp_path) == 1

    def test_missing_input_file(self, tmp_path):
        assert invoke(tmp_path, "targets", "--dataset", str(tmp_path / "none.cgd")) == 2

    def test_blocked_output(self):
        assert run(["--out", "/proc/compdiff", "gen-catalog"]) == 2


# =============================================================================
# Commands
# =============================================================================

class TestCommands:
    def test_gradcheck(self, tmp_path):
        assert invoke(tmp_path, "gradcheck", "--dims", "2", "--shape", "4") == 0
        report = json.loads((tmp_path / "gradcheck.json").read_text())
        assert report["passed"]
        assert report["shape"] == [4, 4]
        config = json.loads((tmp_path / "run_config.json").read_text())
        assert config["command"] == "gradcheck"
        assert config["parameters"]["shape"] == 4

    def test_config_file_supplies_parameters(self, tmp_path):
        config = tmp_path / "params.json"
        config.write_text(json.dumps({"shape": 3, "seed": 5}))
        out = tmp_path / "out"
        assert invoke(out, "--config", str(config), "gradcheck") == 0
        written = json.loads((out / "run_config.json").read_text())
        assert written["seed"] == 5
        assert written["parameters"]["shape"] == 3

    def test_explicit_flag_beats_config(self, tmp_path):
        config = tmp_path / "params.json"
        config.write_text(json.dumps({"shape": 3}))
        out = tmp_path / "out"
        assert invoke(out, "--config", str(config), "gradcheck", "--shape", "4") == 0
        assert json.loads((out / "gradcheck.json").read_text())["shape"] == [4, 4]

    def test_unknown_config_key(self, tmp_path):
        config = tmp_path / "params.json"
        config.write_text(json.dumps({"bogus": 1}))
        assert invoke(tmp_path / "out", "--config", str(config), "gradcheck") == 1

    def test_gen_catalog_and_dataset(self, dataset_file):
        dataset = load_dataset(dataset_file)
        assert len(dataset) == 4
        assert dataset.shape == (8, 8)

    def test_targets(self, tmp_path, dataset_file):
        out = tmp_path / "targets"
        assert invoke(out, "targets", "--dataset", str(dataset_file), "--count", "3", "--bins", "4") == 0
        summary = json.loads((out / "targets.json").read_text())
        assert len(summary["targets"]) == 3
        assert summary["failed"] == 0
        assert (out / "moduli.csv").read_text().count("\n") == 5
        assert (out / "hist_K.svg").exists()

    def test_bounds_check_dataset(self, tmp_path, dataset_file):
        out = tmp_path / "bounds"
        invoke(out, "bounds-check", "--dataset", str(dataset_file), "--max-outside", "1.0", "--max-violation", "1.0")
        report = json.loads((out / "bounds.json").read_text())
        assert report["count"] == 4


@pytest.mark.slow
class TestPipeline:
    def test_train_sample_evaluate(self, tmp_path, catalog_file, dataset_file):
        train_out = tmp_path / "train"
        assert invoke(train_out, "train", "--dataset", str(dataset_file), "--steps", "2", "--batch-size", "2") == 0
        weights = train_out / "weights.cgw"
        assert weights.exists()

        sample_out = tmp_path / "sample"
        code = invoke(
            sample_out, "sample",
            "--weights", str(weights), "--target-k", "40",
            "--steps", "3", "--count", "2", "--shape", "8",
        )
        assert code in (0, 3)
        records = json.loads((sample_out / "samples.json").read_text())["records"]
        assert len(records) == 2

        eval_out = tmp_path / "evaluate"
        code = invoke(
            eval_out, "evaluate",
            "--samples", str(sample_out / "samples.cgs"),
            "--catalog", str(catalog_file),
            "--repeats", "1",
        )
        assert code in (0, 3)
        summary = json.loads((eval_out / "summary.json").read_text())
        assert summary["K_star"] == 40.0
        assert "eps_r<0.01" in summary["metrics"]["frac"]
