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
"""Datasets of channel samples, schedules and iterative-search labels.

A dataset is stored as HDF5 file, its layout is defined in
`secbw/Data/dataset.yaml`. All per-user arrays have shape
(number_of_samples, number_of_users); dropped users have zero minimum
bandwidth and zero label.
"""

from __future__ import annotations

__all__ = [
    "DATASET_FORMAT_VERSION",
    "ChannelDataset",
    "DatasetFormatError",
    "generate_dataset",
    "read_dataset",
    "validate_dataset",
    "write_dataset",
]

import logging
from dataclasses import dataclass, fields
from typing import TYPE_CHECKING

import h5py
import numpy as np

from .allocators import Allocation, allocate_ivs, sum_secrecy_rate
from .channel import ChannelSample, SystemParams, sample_channels
from .complexity import OpCount
from .gnn import GraphSet
from .scheduling import Schedule, schedule_statistics, schedule_users
from .template import package_yaml
from .template_h5 import TemplateH5

if TYPE_CHECKING:
    from pathlib import Path

# - global parameters ---------------------------------
DATASET_FORMAT_VERSION = 1
CSI_NAMES = ("d_bs", "d_eve", "g_bs", "g_eve")

logger = logging.getLogger("secbw.dataset")


class DatasetFormatError(ValueError):
    """Dataset file does not have the expected format or content."""


# - class definition -----------------------------------
@dataclass(frozen=True, eq=False)
class ChannelDataset:
    """Channel samples with their schedules and (optional) labels.

    Parameters
    ----------
    csi :  np.ndarray
       channel state information, shape (N, U, 4) with columns
       (d_bs, d_eve, g_bs, g_eve)
    drop_reason :  np.ndarray
       `DropReason` code of every user, shape (N, U)
    w_min_hz :  np.ndarray
       minimum bandwidth of every user, zero when dropped, shape (N, U)
    params :  SystemParams
       system parameters used for scheduling and labels
    seed :  int
       seed of the sample stream
    delta_w_hz :  float
       block size of the iterative search of the labels [Hz]
    ivs_w_hz :  np.ndarray, optional
       iterative-search allocation, zero for dropped users, shape (N, U)
    ivs_sum_rate :  np.ndarray, optional
       sum secrecy rate of the iterative-search allocation, shape (N,)
    config_hash :  str, default=""
       hash of the configuration which generated the dataset
    label_evaluations :  int, default=0
       secrecy-rate (derivative) evaluations spent on the labels
    label_multiplications :  int, default=0
       multiplications spent on the labels

    """

    csi: np.ndarray
    drop_reason: np.ndarray
    w_min_hz: np.ndarray
    params: SystemParams
    seed: int
    delta_w_hz: float
    ivs_w_hz: np.ndarray | None = None
    ivs_sum_rate: np.ndarray | None = None
    config_hash: str = ""
    label_evaluations: int = 0
    label_multiplications: int = 0

    def __post_init__(self: ChannelDataset) -> None:
        """Check shapes of the arrays."""
        if self.csi.ndim != 3 or self.csi.shape[2] != len(CSI_NAMES):
            raise ValueError("csi must have shape (samples, users, 4)")
        shape = self.csi.shape[:2]
        if self.drop_reason.shape != shape or self.w_min_hz.shape != shape:
            raise ValueError("schedule arrays not aligned with csi")
        if (self.ivs_w_hz is None) != (self.ivs_sum_rate is None):
            raise ValueError("labels must include allocations and sum rates")
        if self.ivs_w_hz is not None and (
            self.ivs_w_hz.shape != shape or self.ivs_sum_rate.shape != shape[:1]
        ):
            raise ValueError("labels not aligned with csi")

    def __len__(self: ChannelDataset) -> int:
        """Return number of samples."""
        return self.csi.shape[0]

    @property
    def num_users(self: ChannelDataset) -> int:
        """Return number of users per sample."""
        return self.csi.shape[1]

    @property
    def has_labels(self: ChannelDataset) -> bool:
        """Return True when the dataset holds iterative-search labels."""
        return self.ivs_w_hz is not None

    def sample(self: ChannelDataset, index: int) -> ChannelSample:
        """Return channel sample `index`."""
        return ChannelSample.from_array(self.csi[index])

    def schedule(self: ChannelDataset, index: int) -> Schedule:
        """Return schedule of sample `index`."""
        return Schedule.from_arrays(
            self.drop_reason[index],
            self.w_min_hz[index],
            self.params.total_bandwidth_hz,
        )

    def label(self: ChannelDataset, index: int) -> Allocation:
        """Return iterative-search allocation of sample `index`."""
        if self.ivs_w_hz is None:
            raise DatasetFormatError("dataset holds no labels")
        sched = self.schedule(index)
        return Allocation(self.ivs_w_hz[index, list(sched.scheduled_idx)], "ivs")

    def nonempty(self: ChannelDataset) -> np.ndarray:
        """Return indices of the samples with at least one scheduled user."""
        return np.flatnonzero(np.any(self.drop_reason == 0, axis=1))

    def to_graphs(self: ChannelDataset, require_labels: bool = False) -> GraphSet:
        """Return the non-empty samples as batch of graphs.

        Parameters
        ----------
        require_labels :  bool, default=False
           raise DatasetFormatError when the dataset holds no labels

        """
        if require_labels and not self.has_labels:
            raise DatasetFormatError("supervised training requires labels")

        indx = self.nonempty()
        if indx.size == 0:
            raise ValueError("dataset holds no sample with a scheduled user")

        schedules = [self.schedule(ii) for ii in indx]
        labels = ref = None
        if self.has_labels:
            labels = [
                self.ivs_w_hz[ii, list(sched.scheduled_idx)]
                for ii, sched in zip(indx, schedules, strict=True)
            ]
            ref = self.ivs_sum_rate[indx]
        return GraphSet.from_schedules(
            schedules,
            [self.sample(ii) for ii in indx],
            self.params,
            labels_w_hz=labels,
            ref_sum_rate=ref,
        )


# - main functions -------------------------------------
def generate_dataset(
    num_samples: int,
    num_users: int,
    params: SystemParams,
    seed: int,
    delta_w_hz: float,
    *,
    with_labels: bool = True,
    config_hash: str = "",
) -> ChannelDataset:
    """Draw channel samples, schedule the users and compute labels.

    Parameters
    ----------
    num_samples :  int
       number of samples N
    num_users :  int
       number of users U per sample
    params :  SystemParams
       system parameters
    seed :  int
       seed of the stream, sample i uses the seed [seed, i]
    delta_w_hz :  float
       block size of the iterative search [Hz]
    with_labels :  bool, default=True
       compute the iterative-search allocations
    config_hash :  str, default=""
       hash of the configuration, stored in the file header

    """
    if num_samples < 1:
        raise ValueError("num_samples must be at least 1")

    csi = np.empty((num_samples, num_users, len(CSI_NAMES)))
    drop_reason = np.zeros((num_samples, num_users), dtype="u1")
    w_min = np.zeros((num_samples, num_users))
    ivs_w = np.zeros((num_samples, num_users)) if with_labels else None
    ivs_rate = np.zeros(num_samples) if with_labels else None

    count = OpCount("ivs")
    schedules = []
    for ii in range(num_samples):
        sample = sample_channels([seed, ii], num_users, params)
        sched = schedule_users(sample, params)
        schedules.append(sched)
        csi[ii] = sample.as_array()
        drop_reason[ii] = sched.drop_reasons(num_users)
        w_min[ii] = sched.expand(sched.w_min_hz, num_users)
        if with_labels and len(sched) > 0:
            alloc = allocate_ivs(sched, sample, params, delta_w_hz, count)
            ivs_w[ii] = sched.expand(alloc.w_hz, num_users)
            ivs_rate[ii] = sum_secrecy_rate(alloc, sched, sample, params)

    stats = schedule_statistics(schedules)
    logger.info(
        "generated %d samples: mean K=%.3f, empty=%d,"
        " dropped (infeasible alone)=%d, dropped (budget)=%d",
        stats["samples"],
        stats["mean_scheduled"],
        stats["empty_schedules"],
        stats["dropped_infeasible_alone"],
        stats["dropped_budget_exceeded"],
    )
    return ChannelDataset(
        csi=csi,
        drop_reason=drop_reason,
        w_min_hz=w_min,
        params=params,
        seed=seed,
        delta_w_hz=delta_w_hz,
        ivs_w_hz=ivs_w,
        ivs_sum_rate=ivs_rate,
        config_hash=config_hash,
        label_evaluations=count.evaluations,
        label_multiplications=count.multiplications,
    )


def write_dataset(dset: ChannelDataset, filename: Path | str) -> None:
    """Write dataset to an HDF5 file (overwrite if exist).

    Parameters
    ----------
    dset :  ChannelDataset
       dataset to be written
    filename :  Path | str
       name of the HDF5 file

    """
    template = TemplateH5(package_yaml("dataset"))
    template.set_dims(
        {"number_of_samples": len(dset), "number_of_users": dset.num_users}
    )
    if not dset.has_labels:
        template.drop_group("labels")

    with template.create(filename) as fid:
        _write_arrays(fid, dset)
    logger.info("dataset with %d samples written to %s", len(dset), filename)


def _write_arrays(fid: h5py.File, dset: ChannelDataset) -> None:
    """Fill the variables and global attributes of a dataset file."""
    for ii, name in enumerate(CSI_NAMES):
        fid[f"/channels/{name}"][...] = dset.csi[..., ii]
    fid["/schedule/drop_reason"][...] = dset.drop_reason
    fid["/schedule/w_min_hz"][...] = dset.w_min_hz
    if dset.has_labels:
        fid["/labels/ivs_w_hz"][...] = dset.ivs_w_hz
        fid["/labels/ivs_sum_secrecy_rate"][...] = dset.ivs_sum_rate

    fid.attrs["format_version"] = DATASET_FORMAT_VERSION
    fid.attrs["config_hash"] = dset.config_hash
    fid.attrs["seed"] = dset.seed
    fid.attrs["delta_w_hz"] = dset.delta_w_hz
    fid.attrs["label_evaluations"] = dset.label_evaluations
    fid.attrs["label_multiplications"] = dset.label_multiplications
    for key, value in dset.params.asdict().items():
        fid.attrs[key] = value


def read_dataset(filename: Path | str, require_labels: bool = False) -> ChannelDataset:
    """Read a dataset from an HDF5 file.

    Parameters
    ----------
    filename :  Path | str
       name of the HDF5 file
    require_labels :  bool, default=False
       raise DatasetFormatError when the file holds no labels

    """
    try:
        fid = h5py.File(filename, "r")
    except OSError as exc:
        raise RuntimeError(f"failed to read {filename}") from exc

    with fid:
        version = fid.attrs.get("format_version")
        if version is None or int(version) != DATASET_FORMAT_VERSION:
            raise DatasetFormatError(
                f"{filename}: unsupported format version {version}"
            )
        try:
            csi = np.stack([fid[f"/channels/{x}"][...] for x in CSI_NAMES], axis=-1)
            drop_reason = fid["/schedule/drop_reason"][...]
            w_min = fid["/schedule/w_min_hz"][...]
            params = SystemParams(
                **{x.name: float(fid.attrs[x.name]) for x in fields(SystemParams)}
            )
            seed = int(fid.attrs["seed"])
            delta_w_hz = float(fid.attrs["delta_w_hz"])
        except KeyError as exc:
            raise DatasetFormatError(f"{filename}: incomplete dataset") from exc

        ivs_w = ivs_rate = None
        if "labels" in fid:
            ivs_w = fid["/labels/ivs_w_hz"][...]
            ivs_rate = fid["/labels/ivs_sum_secrecy_rate"][...]
        elif require_labels:
            raise DatasetFormatError(f"{filename}: dataset holds no labels")

        label_evals = int(fid.attrs.get("label_evaluations", 0))
        label_mults = int(fid.attrs.get("label_multiplications", 0))
        config_hash = fid.attrs.get("config_hash", "")
        if isinstance(config_hash, bytes):
            config_hash = config_hash.decode()

    return ChannelDataset(
        csi=csi,
        drop_reason=drop_reason,
        w_min_hz=w_min,
        params=params,
        seed=seed,
        delta_w_hz=delta_w_hz,
        ivs_w_hz=ivs_w,
        ivs_sum_rate=ivs_rate,
        config_hash=str(config_hash),
        label_evaluations=label_evals,
        label_multiplications=label_mults,
    )


def validate_dataset(dset: ChannelDataset) -> list[str]:
    """Re-check schedules and labels of a dataset.

    Returns
    -------
    list[str]
       one message per violation, empty when the dataset is valid

    """
    res = []
    for ii in range(len(dset)):
        reasons = dset.drop_reason[ii]
        if np.any(dset.w_min_hz[ii, reasons != 0] != 0):
            res.append(f"sample {ii}: dropped user with minimum bandwidth")
        try:
            sched = dset.schedule(ii)
        except ValueError as exc:
            res.append(f"sample {ii}: {exc}")
            continue
        if not dset.has_labels or len(sched) == 0:
            continue
        if np.any(dset.ivs_w_hz[ii, reasons != 0] != 0):
            res.append(f"sample {ii}: label for a dropped user")
        res.extend(
            f"sample {ii}: {msg}"
            for msg in dset.label(ii).violations(sched, dset.sample(ii), dset.params)
        )

    return res
