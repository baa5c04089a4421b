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
"""Drivers of the experiments, all results are returned as pandas DataFrames.

Every driver writes its CSV file(s) in the output directory of the
configuration and records them in `run_metadata.yaml`:

- `gen_data`: training and test datasets (HDF5)
- `train_mode`: checkpoint (netCDF4) and per-step training history
- `evaluate`: per-sample metrics of all policies with moving averages
- `sweep_dw`: sum secrecy rate and operation counts of IvS versus delta_w,
  plus the inference, training and label costs of both GNNs
- `sweep_uncertainty`: realized sum secrecy rate versus eavesdropper CSI
  uncertainty
- `validate`: re-check of the datasets and of all written allocations
"""

from __future__ import annotations

__all__ = [
    "CSV_SCHEMA_VERSION",
    "MetricsRecord",
    "OutputFiles",
    "evaluate",
    "gen_data",
    "sweep_dw",
    "sweep_uncertainty",
    "train_mode",
    "validate",
    "validate_allocations",
    "write_run_metadata",
]

import logging
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
import yaml

from . import sw_version
from .allocators import Allocation, sum_secrecy_rate
from .channel import perturb_sample_eve_csi
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .complexity import (
    MEASURED_OMEGA,
    RunKnobs,
    complexity_formula,
    counted_run,
    ivs_bound,
    training_multiplications,
)
from .dataset import generate_dataset, read_dataset, validate_dataset, write_dataset
from .gnn import TRAIN_MODES, train
from .scheduling import believed_schedule

if TYPE_CHECKING:
    from pathlib import Path

    from .channel import ChannelSample, SystemParams
    from .config import ExperimentConfig
    from .dataset import ChannelDataset
    from .gnn import FnnParams
    from .scheduling import Schedule

# - global parameters ---------------------------------
CSV_SCHEMA_VERSION = 2
EVAL_POLICIES = ("ivs", "bec", "gnn-sl", "gnn-usl")
ALLOCATION_COLUMNS = (
    "experiment",
    "uncertainty",
    "sample_index",
    "algorithm",
    "user_index",
    "w_hz",
)

logger = logging.getLogger("secbw.experiments")


# - class definitions ----------------------------------
@dataclass(frozen=True)
class MetricsRecord:
    """Outcome of one policy on one test sample."""

    sample_index: int
    algorithm: str
    num_scheduled: int
    sum_secrecy_rate_bps: float
    normalized_ratio: float
    secrecy_rate_evals: int
    multiplications: int
    uncertainty: float
    delta_w_hz: float
    secrecy_outages: int = 0


class OutputFiles:
    """Names of all files in the output directory."""

    def __init__(self: OutputFiles, output_dir: Path) -> None:
        """Construct the file names."""
        self.output_dir = output_dir

    def ensure(self: OutputFiles) -> None:
        """Create the output directory."""
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise RuntimeError(f"failed to create {self.output_dir}") from exc

    def dataset(self: OutputFiles, split: str) -> Path:
        """Return name of the training or test dataset."""
        return self.output_dir / f"dataset_{split}.h5"

    def checkpoint(self: OutputFiles, mode: str) -> Path:
        """Return name of the checkpoint of a training mode."""
        return self.output_dir / f"checkpoint_{mode}.nc"

    def csv(self: OutputFiles, name: str) -> Path:
        """Return name of a CSV file."""
        return self.output_dir / f"{name}.csv"

    @property
    def metadata(self: OutputFiles) -> Path:
        """Return name of the run-metadata file."""
        return self.output_dir / "run_metadata.yaml"


# - local function -------------------------------------
def _write_csv(frame: pd.DataFrame, filename: Path) -> None:
    """Write table as CSV, without index."""
    try:
        frame.to_csv(filename, index=False)
    except OSError as exc:
        raise RuntimeError(f"failed to create {filename}") from exc
    logger.info("written %s (%d rows)", filename, len(frame))


def write_run_metadata(
    cfg: ExperimentConfig, command: str, outputs: list[Path]
) -> None:
    """Add the outputs of a command to `run_metadata.yaml`.

    The file holds the schema versions, the configuration with its hash and
    the derived seeds. Entries of other commands are kept when the
    configuration is the same.
    """
    files = OutputFiles(cfg.output_dir)
    meta = {}
    if files.metadata.is_file():
        with files.metadata.open("r", encoding="ascii") as fid:
            meta = yaml.safe_load(fid) or {}
        if meta.get("config_hash") != cfg.config_hash:
            meta = {}

    meta |= {
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "secbw_version": sw_version(),
        "config_hash": cfg.config_hash,
        "master_seed": cfg.seed,
        "stage_seeds": cfg.stage_seeds,
        "config": cfg.asdict(),
    }
    meta.setdefault("outputs", {})[command] = sorted(x.name for x in outputs)
    try:
        with files.metadata.open("w", encoding="ascii") as fid:
            yaml.safe_dump(meta, fid, sort_keys=True)
    except OSError as exc:
        raise RuntimeError(f"failed to create {files.metadata}") from exc


def _load_test_dataset(cfg: ExperimentConfig) -> ChannelDataset:
    """Read the test dataset and check it against the configuration."""
    dset = read_dataset(OutputFiles(cfg.output_dir).dataset("test"))
    if dset.params != cfg.system:
        raise ValueError("test dataset was generated with other system parameters")
    return dset


def _load_fnn(cfg: ExperimentConfig, mode: str) -> FnnParams:
    """Read trained parameters of a mode, checked against the configuration."""
    ckpt = load_checkpoint(
        OutputFiles(cfg.output_dir).checkpoint(mode),
        cfg.training.layer_widths,
        cfg.system.total_bandwidth_hz,
    )
    return ckpt.fnn_params


def _allocation_rows(
    experiment: str,
    uncertainty: float,
    index: int,
    alloc: Allocation,
    scheduled_idx: tuple[int, ...],
) -> list[tuple]:
    """Return one row per scheduled user of an allocation."""
    return [
        (experiment, uncertainty, index, alloc.policy_tag, user, float(w_hz))
        for user, w_hz in zip(scheduled_idx, alloc.w_hz, strict=True)
    ]


def _believed(
    sched: Schedule,
    sample: ChannelSample,
    frac: float,
    seed: list[int],
    params: SystemParams,
) -> tuple[ChannelSample, Schedule]:
    """Return CSI and schedule as known to the allocators with uncertainty `frac`."""
    if frac == 0:
        return sample, sched

    believed = perturb_sample_eve_csi(sample, frac, seed)
    return believed, believed_schedule(sched, believed, params)


def _training_costs(cfg: ExperimentConfig) -> dict[str, tuple[float, float]]:
    """Return multiplications of training and of collecting labels per mode."""
    files = OutputFiles(cfg.output_dir)
    if not files.dataset("train").is_file():
        return {}

    dset = read_dataset(files.dataset("train"))
    num_scheduled = np.sum(dset.drop_reason == 0, axis=1)
    res = {}
    for mode in TRAIN_MODES:
        if not files.checkpoint(mode).is_file():
            continue
        ckpt = load_checkpoint(
            files.checkpoint(mode),
            cfg.training.layer_widths,
            cfg.system.total_bandwidth_hz,
        )
        res[mode] = (
            training_multiplications(
                num_scheduled,
                ckpt.fnn_params.layer_widths,
                MEASURED_OMEGA,
                ckpt.train_config.epochs,
                mode,
            ),
            float(dset.label_multiplications) if mode == "sl" else 0.0,
        )
    return res


def _records_to_frame(records: list[MetricsRecord]) -> pd.DataFrame:
    """Return records as table."""
    return pd.DataFrame(
        [asdict(x) for x in records],
        columns=list(MetricsRecord.__dataclass_fields__),
    )


# - main functions -------------------------------------
def gen_data(cfg: ExperimentConfig) -> dict[str, ChannelDataset]:
    """Generate and write the training and test datasets."""
    files = OutputFiles(cfg.output_dir)
    files.ensure()
    seeds = cfg.stage_seeds
    res = {}
    for split, size in (("train", cfg.train_samples), ("test", cfg.test_samples)):
        logger.info("generating %s dataset", split)
        res[split] = generate_dataset(
            size,
            cfg.num_users,
            cfg.system,
            seeds[f"data-{split}"],
            cfg.delta_w_hz,
            config_hash=cfg.config_hash,
        )
        write_dataset(res[split], files.dataset(split))

    write_run_metadata(
        cfg, "gen-data", [files.dataset("train"), files.dataset("test")]
    )
    return res


def train_mode(cfg: ExperimentConfig, mode: str) -> tuple[Checkpoint, pd.DataFrame]:
    """Train the vertex network on the training dataset.

    Parameters
    ----------
    cfg :  ExperimentConfig
       configuration of the experiment
    mode :  {"sl", "usl"}
       supervised or unsupervised training

    Returns
    -------
    tuple[Checkpoint, pd.DataFrame]
       the written checkpoint and the per-step history

    """
    files = OutputFiles(cfg.output_dir)
    dset = read_dataset(files.dataset("train"), require_labels=mode == "sl")
    graphs = dset.to_graphs(require_labels=mode == "sl")
    train_cfg = cfg.train_config(mode)
    logger.info("training %s on %d graphs", mode, len(graphs))
    fnn_params, history = train(graphs, train_cfg, cfg.system)

    ckpt = Checkpoint(fnn_params, train_cfg, cfg.system.total_bandwidth_hz)
    save_checkpoint(ckpt, files.checkpoint(mode))
    frame = history.as_dataframe()
    _write_csv(frame, files.csv(f"train_history_{mode}"))
    write_run_metadata(
        cfg,
        f"train-{mode}",
        [files.checkpoint(mode), files.csv(f"train_history_{mode}")],
    )
    return ckpt, frame


def evaluate(cfg: ExperimentConfig) -> pd.DataFrame:
    """Compare all policies on the test dataset.

    The IvS allocation with the configured delta_w is the reference of the
    normalized ratio; samples without scheduled user score zero and carry
    no ratio.

    Returns
    -------
    pd.DataFrame
       one row per sample and policy, with the moving average of the
       normalized ratio per policy

    """
    files = OutputFiles(cfg.output_dir)
    dset = _load_test_dataset(cfg)
    fnn = {tag: _load_fnn(cfg, tag.split("-")[1]) for tag in ("gnn-sl", "gnn-usl")}

    records = []
    alloc_rows = []
    for ii in range(len(dset)):
        sched = dset.schedule(ii)
        sample = dset.sample(ii)
        if len(sched) == 0:
            records.extend(
                MetricsRecord(ii, tag, 0, 0.0, np.nan, 0, 0, 0.0, cfg.delta_w_hz)
                for tag in EVAL_POLICIES
            )
            continue

        ref_rate = None
        for tag in EVAL_POLICIES:
            knobs = RunKnobs(
                delta_w_hz=cfg.delta_w_hz,
                criterion=cfg.bec_criterion,
                fnn_params=fnn.get(tag),
            )
            alloc, count = counted_run(tag, sched, sample, cfg.system, knobs)
            rate = sum_secrecy_rate(alloc, sched, sample, cfg.system)
            ref_rate = rate if tag == "ivs" else ref_rate
            records.append(
                MetricsRecord(
                    ii,
                    tag,
                    len(sched),
                    rate,
                    rate / ref_rate if ref_rate > 0 else np.nan,
                    count.evaluations,
                    count.multiplications,
                    0.0,
                    cfg.delta_w_hz,
                    alloc.outages(sched, sample, cfg.system),
                )
            )
            alloc_rows += _allocation_rows(
                "evaluate", 0.0, ii, alloc, sched.scheduled_idx
            )

    frame = _records_to_frame(records)
    frame["normalized_moving_average"] = frame.groupby("algorithm")[
        "normalized_ratio"
    ].transform(
        lambda x: x.rolling(cfg.moving_average_window, min_periods=1).mean()
    )
    _write_csv(frame, files.csv("evaluate_metrics"))
    _write_csv(
        pd.DataFrame(alloc_rows, columns=list(ALLOCATION_COLUMNS)),
        files.csv("allocations_evaluate"),
    )
    summary = frame.groupby("algorithm", sort=False)[
        ["sum_secrecy_rate_bps", "normalized_ratio"]
    ].mean()
    for tag, row in summary.iterrows():
        logger.info(
            "%-8s mean sum secrecy rate=%.4g bit/s, normalized=%.4f",
            tag,
            row["sum_secrecy_rate_bps"],
            row["normalized_ratio"],
        )
    write_run_metadata(
        cfg,
        "evaluate",
        [files.csv("evaluate_metrics"), files.csv("allocations_evaluate")],
    )
    return frame


def sweep_dw(cfg: ExperimentConfig) -> pd.DataFrame:
    """Run the iterative search for every delta_w of the sweep.

    Measured counts use the implemented cost of a secrecy-rate evaluation;
    the closed-form counts use `omega` of the configuration. The GNN rows
    are added when their checkpoints exist, with the multiplications of
    their training and of collecting the labels of supervised training.

    Returns
    -------
    pd.DataFrame
       one row per delta_w (algorithm "ivs") plus the GNN rows

    """
    files = OutputFiles(cfg.output_dir)
    dset = _load_test_dataset(cfg)
    indx = range(len(dset))

    rows = []
    for delta_w in cfg.delta_w_sweep_hz:
        logger.info("iterative search with delta_w=%g Hz", delta_w)
        knobs = RunKnobs(delta_w_hz=delta_w)
        rates, evals, mults, formula, bound_ratio = [], [], [], [], []
        for ii in indx:
            sched = dset.schedule(ii)
            if len(sched) == 0:
                rates.append(0.0)
                evals.append(0)
                mults.append(0)
                formula.append(0.0)
                continue
            sample = dset.sample(ii)
            alloc, count = counted_run("ivs", sched, sample, cfg.system, knobs)
            rates.append(sum_secrecy_rate(alloc, sched, sample, cfg.system))
            evals.append(count.evaluations)
            mults.append(count.multiplications)
            formula.append(
                complexity_formula(
                    "ivs",
                    len(sched),
                    delta_w,
                    sched.surplus_hz,
                    cfg.training.layer_widths,
                    cfg.omega,
                )
            )
            bound_ratio.append(
                count.evaluations / ivs_bound(len(sched), sched.surplus_hz, delta_w)
            )
        rows.append(
            (
                "ivs",
                delta_w,
                len(indx),
                np.mean(rates),
                np.mean(evals),
                np.mean(mults),
                np.mean(formula),
                max(bound_ratio, default=0.0),
                np.nan,
                np.nan,
            )
        )

    train_cost = _training_costs(cfg)
    for tag in ("gnn-usl", "gnn-sl"):
        mode = tag.split("-")[1]
        if not files.checkpoint(mode).is_file():
            logger.warning("no %s checkpoint, sweep holds no %s row", mode, tag)
            continue
        knobs = RunKnobs(fnn_params=_load_fnn(cfg, mode))
        rates, mults, formula = [], [], []
        for ii in indx:
            sched = dset.schedule(ii)
            if len(sched) == 0:
                rates.append(0.0)
                mults.append(0)
                formula.append(0.0)
                continue
            sample = dset.sample(ii)
            alloc, count = counted_run(tag, sched, sample, cfg.system, knobs)
            rates.append(sum_secrecy_rate(alloc, sched, sample, cfg.system))
            mults.append(count.multiplications)
            formula.append(
                complexity_formula(
                    tag,
                    len(sched),
                    cfg.delta_w_hz,
                    sched.surplus_hz,
                    cfg.training.layer_widths,
                    cfg.omega,
                )
            )
        rows.append(
            (
                tag,
                np.nan,
                len(indx),
                np.mean(rates),
                0.0,
                np.mean(mults),
                np.mean(formula),
                np.nan,
                *train_cost.get(mode, (np.nan, np.nan)),
            )
        )

    frame = pd.DataFrame(
        rows,
        columns=[
            "algorithm",
            "delta_w_hz",
            "samples",
            "mean_sum_secrecy_rate_bps",
            "mean_secrecy_rate_evals",
            "mean_measured_multiplications",
            "mean_formula_multiplications",
            "max_evals_over_bound",
            "training_multiplications",
            "label_multiplications",
        ],
    )
    frame["measured_omega"] = MEASURED_OMEGA
    frame["formula_omega"] = cfg.omega
    _write_csv(frame, files.csv("sweep_dw"))
    write_run_metadata(cfg, "sweep-dw", [files.csv("sweep_dw")])
    return frame


def sweep_uncertainty(cfg: ExperimentConfig) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Allocate with uncertain eavesdropper CSI, score with the true CSI.

    Scheduling always uses the true CSI, thus the scheduled users do not
    change. Every policy, both GNNs included, sees the minimum bandwidths
    and the eavesdropper CSI as perturbed. The perturbation of sample i,
    user u draws from the seed [perturbation seed, i, u] for every fraction,
    thus larger fractions scale the same relative errors. Scheduled users
    which miss the secrecy threshold under the true CSI are counted as
    secrecy outages.

    Returns
    -------
    tuple[pd.DataFrame, pd.DataFrame]
       per-sample records and the means per fraction and policy

    """
    files = OutputFiles(cfg.output_dir)
    dset = _load_test_dataset(cfg)
    fnn = {tag: _load_fnn(cfg, tag.split("-")[1]) for tag in ("gnn-sl", "gnn-usl")}
    seed = cfg.stage_seeds["perturbation"]

    records = []
    alloc_rows = []
    for frac in cfg.uncertainty:
        logger.info("eavesdropper CSI uncertainty %.1f%%", 100 * frac)
        for ii in range(len(dset)):
            sched = dset.schedule(ii)
            if len(sched) == 0:
                records.extend(
                    MetricsRecord(ii, tag, 0, 0.0, np.nan, 0, 0, frac, cfg.delta_w_hz)
                    for tag in EVAL_POLICIES
                )
                continue

            sample = dset.sample(ii)
            believed, belief = _believed(sched, sample, frac, [seed, ii], cfg.system)
            ref_rate = None
            for tag in EVAL_POLICIES:
                knobs = RunKnobs(
                    delta_w_hz=cfg.delta_w_hz,
                    criterion=cfg.bec_criterion,
                    fnn_params=fnn.get(tag),
                )
                alloc, count = counted_run(tag, belief, believed, cfg.system, knobs)
                rate = sum_secrecy_rate(alloc, sched, sample, cfg.system)
                ref_rate = rate if tag == "ivs" else ref_rate
                records.append(
                    MetricsRecord(
                        ii,
                        tag,
                        len(sched),
                        rate,
                        rate / ref_rate if ref_rate > 0 else np.nan,
                        count.evaluations,
                        count.multiplications,
                        frac,
                        cfg.delta_w_hz,
                        alloc.outages(sched, sample, cfg.system),
                    )
                )
                alloc_rows += _allocation_rows(
                    "sweep-uncertainty", frac, ii, alloc, sched.scheduled_idx
                )

    frame = _records_to_frame(records)
    summary = (
        frame.groupby(["uncertainty", "algorithm"], sort=False)
        .agg(
            mean_sum_secrecy_rate_bps=("sum_secrecy_rate_bps", "mean"),
            mean_normalized_ratio=("normalized_ratio", "mean"),
            secrecy_outages=("secrecy_outages", "sum"),
            scheduled_users=("num_scheduled", "sum"),
            samples=("sample_index", "size"),
        )
        .reset_index()
    )
    summary["outage_fraction"] = summary["secrecy_outages"] / summary[
        "scheduled_users"
    ].clip(lower=1)
    for row in summary.itertuples():
        logger.info(
            "%4.1f%% %-8s mean sum secrecy rate=%.4g bit/s, outage=%.4f",
            100 * row.uncertainty,
            row.algorithm,
            row.mean_sum_secrecy_rate_bps,
            row.outage_fraction,
        )
    _write_csv(frame, files.csv("uncertainty_metrics"))
    _write_csv(summary, files.csv("sweep_uncertainty"))
    _write_csv(
        pd.DataFrame(alloc_rows, columns=list(ALLOCATION_COLUMNS)),
        files.csv("allocations_uncertainty"),
    )
    write_run_metadata(
        cfg,
        "sweep-uncertainty",
        [
            files.csv("uncertainty_metrics"),
            files.csv("sweep_uncertainty"),
            files.csv("allocations_uncertainty"),
        ],
    )
    return frame, summary


def validate_allocations(
    dset: ChannelDataset, frame: pd.DataFrame, perturb_seed: int | None = None
) -> list[str]:
    """Re-check allocations listed in a table against the dataset.

    Allocations without CSI uncertainty must meet all constraints under the
    true CSI. Allocations with uncertain CSI are re-checked against the
    minimum bandwidths as known to the allocator; missing the secrecy
    threshold under the true CSI is a secrecy outage, not a violation.

    Parameters
    ----------
    dset :  ChannelDataset
       dataset of the allocated samples
    frame :  pd.DataFrame
       allocation table, columns `ALLOCATION_COLUMNS`
    perturb_seed :  int, optional
       seed of the CSI perturbation, required for rows with uncertainty

    """
    if missing := set(ALLOCATION_COLUMNS) - set(frame.columns):
        raise ValueError(f"allocation table misses columns: {sorted(missing)}")

    res = []
    keys = ["experiment", "uncertainty", "sample_index", "algorithm"]
    for (expt, frac, index, tag), group in frame.groupby(keys, sort=False):
        label = f"{expt} ({frac:g}) sample {index}"
        if not 0 <= index < len(dset):
            res.append(f"{label}: sample not in dataset")
            continue
        sched = dset.schedule(int(index))
        group = group.sort_values("user_index")
        if tuple(group["user_index"]) != sched.scheduled_idx:
            res.append(f"{label}: {tag} users differ from the schedule")
            continue
        alloc = Allocation(group["w_hz"].to_numpy(), tag)
        if frac == 0:
            messages = alloc.violations(sched, dset.sample(int(index)), dset.params)
        elif perturb_seed is None:
            messages = ["seed of the CSI perturbation unknown"]
        else:
            believed, belief = _believed(
                sched,
                dset.sample(int(index)),
                float(frac),
                [perturb_seed, int(index)],
                dset.params,
            )
            messages = alloc.violations(belief, believed, dset.params, check_rate=False)
        res.extend(f"{label}: {msg}" for msg in messages)

    return res


def validate(cfg: ExperimentConfig) -> list[str]:
    """Re-check the datasets and every allocation written by the experiments.

    Returns
    -------
    list[str]
       one message per violation, empty when everything is valid

    """
    files = OutputFiles(cfg.output_dir)
    res = []
    for split in ("train", "test"):
        if not files.dataset(split).is_file():
            continue
        dset = read_dataset(files.dataset(split))
        messages = validate_dataset(dset)
        logger.info("%s dataset: %d violation(s)", split, len(messages))
        res += [f"{split} dataset, {msg}" for msg in messages]

    for name in ("allocations_evaluate", "allocations_uncertainty"):
        if not files.csv(name).is_file():
            continue
        dset = _load_test_dataset(cfg)
        messages = validate_allocations(
            dset, pd.read_csv(files.csv(name)), cfg.stage_seeds["perturbation"]
        )
        logger.info("%s: %d violation(s)", name, len(messages))
        res += messages

    return res
