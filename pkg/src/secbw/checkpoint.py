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
"""Store trained parameters of the vertex network as netCDF4 file."""

from __future__ import annotations

__all__ = [
    "CHECKPOINT_FORMAT_VERSION",
    "Checkpoint",
    "CheckpointMismatchError",
    "load_checkpoint",
    "save_checkpoint",
]

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

# pylint: disable=no-name-in-module
from netCDF4 import Dataset

from .gnn import LOGIT_SCALE, FnnParams, TrainConfig
from .template import package_yaml
from .template_nc import TemplateNc

if TYPE_CHECKING:
    from pathlib import Path

# - global parameters ---------------------------------
CHECKPOINT_FORMAT_VERSION = 1

logger = logging.getLogger("secbw.checkpoint")


class CheckpointMismatchError(ValueError):
    """Checkpoint does not match the configuration of the experiment."""


# - class definition -----------------------------------
@dataclass(frozen=True, eq=False)
class Checkpoint:
    """Trained parameters with the settings of their training."""

    fnn_params: FnnParams
    train_config: TrainConfig
    total_bandwidth_hz: float

    def check(
        self: Checkpoint,
        layer_widths: tuple[int, ...],
        total_bandwidth_hz: float,
    ) -> None:
        """Raise CheckpointMismatchError when the checkpoint does not fit."""
        if tuple(layer_widths) != self.fnn_params.layer_widths:
            raise CheckpointMismatchError(
                f"layer widths {self.fnn_params.layer_widths} differ"
                f" from {tuple(layer_widths)}"
            )
        if not np.isclose(total_bandwidth_hz, self.total_bandwidth_hz, rtol=1e-12):
            raise CheckpointMismatchError(
                f"bandwidth budget {self.total_bandwidth_hz} Hz differs"
                f" from {total_bandwidth_hz} Hz"
            )


# - main functions -------------------------------------
def save_checkpoint(ckpt: Checkpoint, filename: Path | str) -> None:
    """Write checkpoint to a netCDF4 file (overwrite if exist)."""
    theta = ckpt.fnn_params.flatten()
    widths = ckpt.fnn_params.layer_widths
    template = TemplateNc(package_yaml("checkpoint"))
    template.set_dims({"layer": len(widths), "parameter": theta.size})

    fid = template.diskless()
    fid["layer_widths"][:] = np.array(widths, dtype="i4")
    fid["theta"][:] = theta
    cfg = ckpt.train_config
    fid.setncatts(
        {
            "format_version": CHECKPOINT_FORMAT_VERSION,
            "activation": ckpt.fnn_params.activation,
            "logit_scale": ckpt.fnn_params.logit_scale,
            "mode": cfg.mode,
            "learning_rate": cfg.learning_rate,
            "batch_size": cfg.batch_size,
            "epochs": cfg.epochs,
            "seed": cfg.seed,
            "total_bandwidth_hz": ckpt.total_bandwidth_hz,
        }
    )
    template.to_disk(fid, filename)
    logger.info("checkpoint (%s) written to %s", cfg.mode, filename)


def load_checkpoint(
    filename: Path | str,
    layer_widths: tuple[int, ...] | None = None,
    total_bandwidth_hz: float | None = None,
) -> Checkpoint:
    """Read checkpoint from a netCDF4 file.

    Parameters
    ----------
    filename :  Path | str
       name of the netCDF4 file
    layer_widths :  tuple[int, ...], optional
       expected layer widths
    total_bandwidth_hz :  float, optional
       expected bandwidth budget [Hz]

    Raises
    ------
    CheckpointMismatchError
       when the checkpoint differs from the expected widths or budget

    """
    try:
        fid = Dataset(filename, "r")
    except OSError as exc:
        raise RuntimeError(f"failed to read {filename}") from exc

    with fid:
        fid.set_auto_mask(False)
        attrs = {key: fid.getncattr(key) for key in fid.ncattrs()}
        if int(attrs.get("format_version", -1)) != CHECKPOINT_FORMAT_VERSION:
            raise CheckpointMismatchError(f"{filename}: unsupported format version")
        widths = tuple(int(x) for x in fid["layer_widths"][:])
        theta = np.array(fid["theta"][:], dtype=float)

    logit_scale = float(attrs.get("logit_scale", LOGIT_SCALE))
    template = FnnParams.init(widths, 0, str(attrs["activation"]), logit_scale)
    ckpt = Checkpoint(
        fnn_params=template.unflatten(theta),
        train_config=TrainConfig(
            learning_rate=float(attrs["learning_rate"]),
            batch_size=int(attrs["batch_size"]),
            epochs=int(attrs["epochs"]),
            mode=str(attrs["mode"]),
            seed=int(attrs["seed"]),
            activation=str(attrs["activation"]),
            layer_widths=widths,
            logit_scale=logit_scale,
        ),
        total_bandwidth_hz=float(attrs["total_bandwidth_hz"]),
    )
    ckpt.check(
        widths if layer_widths is None else layer_widths,
        ckpt.total_bandwidth_hz if total_bandwidth_hz is None else total_bandwidth_hz,
    )
    return ckpt
