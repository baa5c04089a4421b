#
# This file is part of Python package: `secbw`
#
#     https://github.com/rmvanhees/secbw.git
#
# Copyright (c) 2026 - R.M. van Hees (SRON)
#    All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Test module for secbw module `experiments`, on a small configuration."""

from __future__ import annotations

import filecmp
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
import pytest
import yaml

from secbw.config import ExperimentConfig, load_config
from secbw.experiments import (
    ALLOCATION_COLUMNS,
    OutputFiles,
    evaluate,
    gen_data,
    sweep_dw,
    sweep_uncertainty,
    train_mode,
    validate,
    validate_allocations,
)

if TYPE_CHECKING:
    from pathlib import Path

SMALL_CONFIG = """
experiment:
  num_users: 3
  train_samples: 20
  test_samples: 6
  seed: 7
  delta_w: 1 MHz
  delta_w_sweep: [2 MHz, 1 MHz]
  uncertainty: [0 %, 10 %]
  moving_average_window: 2
training:
  epochs: 1
  batch_size: 8
"""


def small_config(tmp_path: Path) -> ExperimentConfig:
    """Return small configuration with its output in tmp_path."""
    yaml_file = tmp_path / "small.yaml"
    yaml_file.write_text(SMALL_CONFIG, encoding="ascii")
    return load_config(yaml_file).with_overrides(output_dir=tmp_path / "output")


def run_pipeline(cfg: ExperimentConfig) -> dict:
    """Run all drivers, return their results."""
    res = {"datasets": gen_data(cfg)}
    for mode in ("sl", "usl"):
        res[mode] = train_mode(cfg, mode)
    res["evaluate"] = evaluate(cfg)
    res["sweep_dw"] = sweep_dw(cfg)
    res["uncertainty"] = sweep_uncertainty(cfg)
    return res


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory: pytest.TempPathFactory) -> tuple:
    """Run the complete pipeline once for this module."""
    cfg = small_config(tmp_path_factory.mktemp("pipeline"))
    return cfg, run_pipeline(cfg)


class TestDrivers:
    """Class to test the drivers of secbw.experiments."""

    def test_gen_data(self: TestDrivers, pipeline: tuple) -> None:
        """Unit-test for the generated datasets."""
        cfg, res = pipeline
        files = OutputFiles(cfg.output_dir)
        assert len(res["datasets"]["train"]) == 20
        assert len(res["datasets"]["test"]) == 6
        assert res["datasets"]["train"].num_users == 3
        assert files.dataset("train").is_file()
        assert files.dataset("test").is_file()
        assert res["datasets"]["train"].config_hash == cfg.config_hash
        assert not np.array_equal(
            res["datasets"]["train"].csi[:6], res["datasets"]["test"].csi
        )

    def test_train(self: TestDrivers, pipeline: tuple) -> None:
        """Unit-test for the checkpoints and training histories."""
        cfg, res = pipeline
        files = OutputFiles(cfg.output_dir)
        for mode in ("sl", "usl"):
            ckpt, frame = res[mode]
            assert ckpt.train_config.mode == mode
            assert ckpt.train_config.seed == cfg.stage_seeds["train"]
            assert files.checkpoint(mode).is_file()
            assert files.csv(f"train_history_{mode}").is_file()
            assert len(frame) > 0
            assert set(frame["mode"]) == {mode}
            assert np.all(np.isfinite(frame["loss"]))

    def test_evaluate(self: TestDrivers, pipeline: tuple) -> None:
        """Unit-test for the per-sample metrics of all policies."""
        cfg, res = pipeline
        frame = res["evaluate"]
        assert len(frame) == 4 * cfg.test_samples
        assert set(frame["algorithm"]) == {"ivs", "bec", "gnn-sl", "gnn-usl"}
        assert "normalized_moving_average" in frame.columns

        scheduled = frame[frame["num_scheduled"] > 0]
        ivs = scheduled[scheduled["algorithm"] == "ivs"]
        assert np.all(ivs["normalized_ratio"] == 1.0)
        assert np.all(scheduled["sum_secrecy_rate_bps"] > 0)
        empty = frame[frame["num_scheduled"] == 0]
        assert np.all(empty["sum_secrecy_rate_bps"] == 0)
        assert empty["normalized_ratio"].isna().all()

        alloc = pd.read_csv(OutputFiles(cfg.output_dir).csv("allocations_evaluate"))
        assert list(alloc.columns) == list(ALLOCATION_COLUMNS)
        assert len(alloc) == scheduled["num_scheduled"].sum()

    def test_sweep_dw(self: TestDrivers, pipeline: tuple) -> None:
        """Unit-test for the complexity sweep of the iterative search and GNNs."""
        cfg, res = pipeline
        frame = res["sweep_dw"]
        assert list(frame["algorithm"]) == ["ivs", "ivs", "gnn-usl", "gnn-sl"]
        ivs = frame[frame["algorithm"] == "ivs"]
        assert ivs["delta_w_hz"].tolist() == pytest.approx([2e6, 1e6])
        assert np.all(ivs["max_evals_over_bound"] <= 1)
        assert (
            ivs["mean_secrecy_rate_evals"].iloc[1]
            >= ivs["mean_secrecy_rate_evals"].iloc[0]
        )
        assert ivs["training_multiplications"].isna().all()
        assert ivs["label_multiplications"].isna().all()

        gnn = frame[frame["algorithm"] != "ivs"].set_index("algorithm")
        assert np.all(gnn["mean_secrecy_rate_evals"] == 0)
        assert np.all(gnn["training_multiplications"] > 0)
        assert (
            gnn.loc["gnn-sl", "training_multiplications"]
            < gnn.loc["gnn-usl", "training_multiplications"]
        )
        assert gnn.loc["gnn-usl", "label_multiplications"] == 0
        labels = res["datasets"]["train"].label_multiplications
        assert labels > 0
        assert gnn.loc["gnn-sl", "label_multiplications"] == labels
        assert OutputFiles(cfg.output_dir).csv("sweep_dw").is_file()

    def test_sweep_uncertainty(self: TestDrivers, pipeline: tuple) -> None:
        """Unit-test for the uncertainty sweep."""
        cfg, res = pipeline
        frame, summary = res["uncertainty"]
        assert len(frame) == 2 * 4 * cfg.test_samples
        assert len(summary) == 2 * 4
        assert set(summary["uncertainty"]) == {0.0, 0.1}
        assert np.all(summary["samples"] == cfg.test_samples)
        assert np.all(summary["outage_fraction"].between(0, 1))

        # without uncertainty the results equal those of evaluate
        exact = frame[frame["uncertainty"] == 0.0].reset_index(drop=True)
        assert np.allclose(
            exact["sum_secrecy_rate_bps"],
            res["evaluate"]["sum_secrecy_rate_bps"],
            rtol=1e-12,
        )
        assert np.all(exact["secrecy_outages"] == 0)

        # the GNNs see the perturbed minimum bandwidths as well
        files = OutputFiles(cfg.output_dir)
        alloc = pd.read_csv(files.csv("allocations_uncertainty"))
        for tag in ("gnn-sl", "gnn-usl"):
            w_hz = [
                alloc[(alloc["algorithm"] == tag) & (alloc["uncertainty"] == frac)][
                    "w_hz"
                ].to_numpy()
                for frac in (0.0, 0.1)
            ]
            assert w_hz[0].size == w_hz[1].size > 0
            assert not np.allclose(w_hz[0], w_hz[1], rtol=1e-9, atol=0)

    def test_metadata(self: TestDrivers, pipeline: tuple) -> None:
        """Unit-test for the run metadata."""
        cfg, _ = pipeline
        with OutputFiles(cfg.output_dir).metadata.open(encoding="ascii") as fid:
            meta = yaml.safe_load(fid)
        assert meta["config_hash"] == cfg.config_hash
        assert meta["stage_seeds"] == cfg.stage_seeds
        assert set(meta["outputs"]) == {
            "gen-data",
            "train-sl",
            "train-usl",
            "evaluate",
            "sweep-dw",
            "sweep-uncertainty",
        }
        assert meta["outputs"]["evaluate"] == [
            "allocations_evaluate.csv",
            "evaluate_metrics.csv",
        ]


class TestValidate:
    """Class to test validate and validate_allocations."""

    def test_valid(self: TestValidate, pipeline: tuple) -> None:
        """Unit-test: all written datasets and allocations are valid."""
        cfg, _ = pipeline
        assert validate(cfg) == []

    def test_violations(self: TestValidate, pipeline: tuple) -> None:
        """Unit-test: corrupted allocations are reported."""
        cfg, res = pipeline
        files = OutputFiles(cfg.output_dir)
        alloc = pd.read_csv(files.csv("allocations_evaluate"))
        dset = res["datasets"]["test"]

        alloc.loc[0, "w_hz"] = 0.0
        messages = validate_allocations(dset, alloc)
        assert any("below minimum bandwidth" in msg for msg in messages)

        alloc.loc[0, "sample_index"] = 99
        messages = validate_allocations(dset, alloc)
        assert any("sample not in dataset" in msg for msg in messages)

        with pytest.raises(ValueError, match="misses columns"):
            validate_allocations(dset, alloc.drop(columns="w_hz"))

        uncertain = pd.read_csv(files.csv("allocations_uncertainty"))
        seed = cfg.stage_seeds["perturbation"]
        assert validate_allocations(dset, uncertain, seed) == []
        messages = validate_allocations(dset, uncertain)
        assert any("perturbation unknown" in msg for msg in messages)

    def test_missing(self: TestValidate, tmp_path: Path) -> None:
        """Unit-test: drivers need the datasets of gen_data."""
        cfg = small_config(tmp_path)
        assert validate(cfg) == []
        with pytest.raises(RuntimeError, match="failed to read"):
            evaluate(cfg)


class TestReproducible:
    """Class to test the reproducibility of the experiments."""

    def test_rerun(self: TestReproducible, pipeline: tuple, tmp_path: Path) -> None:
        """Unit-test: the same configuration gives byte-identical files."""
        cfg, _ = pipeline
        cfg_new = cfg.with_overrides(output_dir=tmp_path / "rerun")
        assert cfg_new.config_hash == cfg.config_hash
        run_pipeline(cfg_new)

        for name in (
            "train_history_sl",
            "train_history_usl",
            "evaluate_metrics",
            "sweep_dw",
            "sweep_uncertainty",
            "allocations_uncertainty",
        ):
            pd.testing.assert_frame_equal(
                pd.read_csv(OutputFiles(cfg.output_dir).csv(name)),
                pd.read_csv(OutputFiles(cfg_new.output_dir).csv(name)),
                check_exact=True,
            )

        for name in (
            "allocations_evaluate",
            "allocations_uncertainty",
            "evaluate_metrics",
            "sweep_dw",
            "sweep_uncertainty",
            "train_history_sl",
            "train_history_usl",
            "uncertainty_metrics",
        ):
            assert filecmp.cmp(
                OutputFiles(cfg.output_dir).csv(name),
                OutputFiles(cfg_new.output_dir).csv(name),
                shallow=False,
            ), name
        for split in ("train", "test"):
            assert filecmp.cmp(
                OutputFiles(cfg.output_dir).dataset(split),
                OutputFiles(cfg_new.output_dir).dataset(split),
                shallow=False,
            ), split


TREND_CONFIG = """
experiment:
  num_users: 10
  train_samples: 1000
  test_samples: 100
  seed: 20260101
  delta_w: 1 MHz
  delta_w_sweep: [1 MHz]
  uncertainty: [0 %, 5 %, 10 %, 15 %]
  moving_average_window: 50
training:
  learning_rate: 5e-3
  epochs: 60
  batch_size: 64
"""


def first_crossing(frame: pd.DataFrame, level: float, window: int = 50) -> float:
    """Return first step of which the moving average reaches level, else inf."""
    mavg = frame["normalized_avg_sum_secrecy_rate"].rolling(window).mean()
    steps = frame["step"][mavg >= level]
    return float(steps.iloc[0]) if len(steps) else np.inf


@pytest.fixture(scope="module")
def trends(tmp_path_factory: pytest.TempPathFactory) -> tuple:
    """Run the complete pipeline once on ten users."""
    tmp_path = tmp_path_factory.mktemp("trends")
    yaml_file = tmp_path / "trends.yaml"
    yaml_file.write_text(TREND_CONFIG, encoding="ascii")
    cfg = load_config(yaml_file).with_overrides(output_dir=tmp_path / "output")
    return cfg, run_pipeline(cfg)


class TestTrends:
    """Class to test the trends of the experiments on a reduced scale."""

    def test_gnn_ratio(self: TestTrends, trends: tuple) -> None:
        """Unit-test: the trained GNNs approach the iterative search."""
        _, res = trends
        ratio = res["evaluate"].groupby("algorithm")["normalized_ratio"].mean()
        assert ratio["gnn-usl"] >= 0.95
        assert ratio["gnn-usl"] >= ratio["gnn-sl"] - 0.02

    def test_convergence(self: TestTrends, trends: tuple) -> None:
        """Unit-test: unsupervised training reaches 0.9 before supervised."""
        _, res = trends
        step_usl = first_crossing(res["usl"][1], 0.9)
        step_sl = first_crossing(res["sl"][1], 0.9)
        assert np.isfinite(step_usl)
        assert step_usl < step_sl

    def test_bec(self: TestTrends, trends: tuple) -> None:
        """Unit-test: the marginal greedy equals the search at high SNR."""
        _, res = trends
        frame = res["evaluate"]
        bec = frame[(frame["algorithm"] == "bec") & (frame["num_scheduled"] > 0)]
        assert bec["normalized_ratio"].mean() >= 0.99

    def test_uncertainty(self: TestTrends, trends: tuple) -> None:
        """Unit-test: the realized rate does not grow with the uncertainty."""
        cfg, res = trends
        _, summary = res["uncertainty"]
        rates = summary.pivot(
            index="uncertainty",
            columns="algorithm",
            values="mean_sum_secrecy_rate_bps",
        ).sort_index()
        assert rates.index.tolist() == pytest.approx(list(cfg.uncertainty))
        for tag in ("ivs", "bec", "gnn-sl", "gnn-usl"):
            values = rates[tag].to_numpy()
            assert np.all(values[1:] <= 1.01 * values[:-1]), tag

        # the GNN stays close to the greedy for moderate uncertainty
        moderate = rates.iloc[:3]
        assert np.all(moderate["gnn-usl"] >= 0.95 * moderate["bec"])

        outage = summary.pivot(
            index="uncertainty", columns="algorithm", values="outage_fraction"
        ).sort_index()
        assert np.all(outage.iloc[0] == 0)
        assert np.all(outage.iloc[-1] > 0)

    def test_valid(self: TestTrends, trends: tuple) -> None:
        """Unit-test: all written allocations are valid."""
        cfg, _ = trends
        assert validate(cfg) == []
