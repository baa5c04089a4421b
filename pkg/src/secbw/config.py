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
"""Experiment configuration read from YAML file(s).

A configuration has three sections:

- "system" with the physical parameters, written with their units
- "experiment" with the number of users, dataset sizes, seed and sweeps
- "training" with the hyper-parameters of the vertex network

Several files may be given, their sections are merged in the given order.
The shipped configurations `desk_scale` and `full_scale` can be selected by
name.
"""

from __future__ import annotations

__all__ = ["STAGES", "ExperimentConfig", "load_config"]

import hashlib
import logging
import pprint
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .allocators import BEC_CRITERIA
from .channel import SystemParams
from .gnn import TrainConfig
from .lib.units import eval_number, to_si
from .template import load_yaml, package_yaml

# - global parameters ---------------------------------
DEFAULT_CONFIG = "desk_scale"
SECTIONS = ("system", "experiment", "training")

# order of the derived seeds, do not reorder
STAGES = ("data-train", "data-test", "train", "perturbation")

# configuration key -> (field of SystemParams, quantity)
SYSTEM_KEYS = {
    "tx_power": ("tx_power_w", "power"),
    "total_bandwidth": ("total_bandwidth_hz", "bandwidth"),
    "noise_density": ("noise_density_w_per_hz", "density"),
    "path_loss_exp": ("path_loss_exp", "count"),
    "min_secrecy_rate": ("min_secrecy_rate_bps", "rate"),
    "area_half_width": ("area_half_width_m", "distance"),
}

logger = logging.getLogger("secbw.config")


# - local function -------------------------------------
def _count(value: str | float, name: str, minimum: int = 1) -> int:
    """Return an integer setting, checked against its minimum."""
    res = eval_number(value)
    if res != int(res) or res < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}")
    return int(res)


def _resolve(name: Path | str) -> Path | str:
    """Return path of a configuration file, shipped files by name."""
    if Path(name).is_file():
        return name
    if isinstance(name, str) and Path(name).suffix == "" and "/" not in name:
        return package_yaml(name)
    return name


# - class definition -----------------------------------
@dataclass(frozen=True)
class ExperimentConfig:
    """All settings of an experiment, in SI units.

    Parameters
    ----------
    system :  SystemParams
       physical parameters
    num_users :  int
       number of users U per sample
    train_samples, test_samples :  int
       size of the training and test datasets
    seed :  int
       master seed, all stage seeds are derived from it
    output_dir :  Path
       directory for datasets, checkpoints and CSV files
    delta_w_hz :  float
       block size of the iterative search for labels and references [Hz]
    delta_w_sweep_hz :  tuple[float, ...]
       block sizes of the complexity sweep [Hz]
    uncertainty :  tuple[float, ...]
       relative uncertainties of the eavesdropper CSI
    moving_average_window :  int
       window of the moving averages over the test samples
    omega :  float
       multiplications per secrecy-rate evaluation in the closed-form counts
    bec_criterion :  str
       ranking of the best-channel policy
    training :  TrainConfig
       hyper-parameters of the vertex network (the seed is derived)

    """

    system: SystemParams = field(default_factory=SystemParams)
    num_users: int = 10
    train_samples: int = 20_000
    test_samples: int = 1_000
    seed: int = 0
    output_dir: Path = Path("output")
    delta_w_hz: float = 0.1e6
    delta_w_sweep_hz: tuple[float, ...] = (1e6, 0.1e6, 0.01e6)
    uncertainty: tuple[float, ...] = (0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15)
    moving_average_window: int = 50
    omega: float = 10.0
    bec_criterion: str = "marginal"
    training: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self: ExperimentConfig) -> None:
        """Check consistency of the settings."""
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        object.__setattr__(self, "delta_w_sweep_hz", tuple(self.delta_w_sweep_hz))
        object.__setattr__(self, "uncertainty", tuple(self.uncertainty))
        if self.num_users < 1:
            raise ValueError("num_users must be at least 1")
        if self.train_samples < 1 or self.test_samples < 1:
            raise ValueError("dataset sizes must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if not self.delta_w_hz > 0:
            raise ValueError("delta_w must be strictly positive")
        if not self.delta_w_sweep_hz or any(x <= 0 for x in self.delta_w_sweep_hz):
            raise ValueError("delta_w_sweep must hold strictly positive values")
        if not self.uncertainty or any(not 0 <= x <= 1 for x in self.uncertainty):
            raise ValueError("uncertainty must hold fractions in [0, 1]")
        if self.moving_average_window < 1:
            raise ValueError("moving_average_window must be at least 1")
        if self.omega < 1:
            raise ValueError("omega must be at least 1")
        if self.bec_criterion not in BEC_CRITERIA:
            raise ValueError(f"unknown BeC criterion: {self.bec_criterion}")

    def __repr__(self: ExperimentConfig) -> str:
        """Show configuration as dictionary."""
        return pprint.pformat(self.asdict())

    @classmethod
    def from_dict(cls: type[ExperimentConfig], settings: dict) -> ExperimentConfig:
        """Return configuration from sections with values as in the YAML files."""
        unknown = set(settings) - set(SECTIONS)
        if unknown:
            raise KeyError(f"unknown section(s): {sorted(unknown)}")

        system = settings.get("system") or {}
        if unknown := set(system) - set(SYSTEM_KEYS):
            raise KeyError(f"unknown key(s) in section system: {sorted(unknown)}")
        params = SystemParams(
            **{
                SYSTEM_KEYS[key][0]: to_si(SYSTEM_KEYS[key][1], value)
                for key, value in system.items()
            }
        )

        expt = dict(settings.get("experiment") or {})
        kwargs = {}
        for key, value in expt.items():
            match key:
                case "num_users" | "train_samples" | "test_samples":
                    kwargs[key] = _count(value, key)
                case "seed":
                    kwargs[key] = _count(value, key, minimum=0)
                case "moving_average_window":
                    kwargs[key] = _count(value, key)
                case "output_dir":
                    kwargs[key] = Path(value)
                case "delta_w":
                    kwargs["delta_w_hz"] = to_si("bandwidth", value)
                case "delta_w_sweep":
                    kwargs["delta_w_sweep_hz"] = tuple(
                        to_si("bandwidth", x) for x in value
                    )
                case "uncertainty":
                    kwargs[key] = tuple(to_si("fraction", x) for x in value)
                case "omega":
                    kwargs[key] = float(eval_number(value))
                case "bec_criterion":
                    kwargs[key] = str(value)
                case _:
                    raise KeyError(f"unknown key in section experiment: {key}")

        train = dict(settings.get("training") or {})
        train_kwargs = {}
        for key, value in train.items():
            match key:
                case "learning_rate":
                    train_kwargs[key] = float(eval_number(value))
                case "batch_size" | "epochs":
                    train_kwargs[key] = _count(value, key, minimum=0)
                case "activation":
                    train_kwargs[key] = str(value)
                case "logit_scale":
                    train_kwargs[key] = float(eval_number(value))
                case "layer_widths":
                    train_kwargs[key] = tuple(int(x) for x in value)
                case _:
                    raise KeyError(f"unknown key in section training: {key}")

        return cls(system=params, training=TrainConfig(**train_kwargs), **kwargs)

    def asdict(self: ExperimentConfig) -> dict:
        """Return configuration as nested dictionary of plain SI values."""
        return {
            "system": self.system.asdict(),
            "experiment": {
                "num_users": self.num_users,
                "train_samples": self.train_samples,
                "test_samples": self.test_samples,
                "seed": self.seed,
                "delta_w_hz": self.delta_w_hz,
                "delta_w_sweep_hz": list(self.delta_w_sweep_hz),
                "uncertainty": list(self.uncertainty),
                "moving_average_window": self.moving_average_window,
                "omega": self.omega,
                "bec_criterion": self.bec_criterion,
            },
            "training": {
                "learning_rate": self.training.learning_rate,
                "batch_size": self.training.batch_size,
                "epochs": self.training.epochs,
                "activation": self.training.activation,
                "logit_scale": self.training.logit_scale,
                "layer_widths": list(self.training.layer_widths),
            },
        }

    @property
    def config_hash(self: ExperimentConfig) -> str:
        """Return SHA-256 of the canonical configuration.

        The output directory is not part of the hash.
        """
        text = yaml.safe_dump(self.asdict(), sort_keys=True)
        return hashlib.sha256(text.encode("ascii")).hexdigest()

    @property
    def stage_seeds(self: ExperimentConfig) -> dict[str, int]:
        """Return the seed of every stage, derived from the master seed."""
        children = np.random.SeedSequence(self.seed).spawn(len(STAGES))
        return {
            stage: int(child.generate_state(1, dtype=np.uint32)[0])
            for stage, child in zip(STAGES, children, strict=True)
        }

    def train_config(self: ExperimentConfig, mode: str) -> TrainConfig:
        """Return hyper-parameters for a training mode, with the derived seed."""
        return replace(self.training, mode=mode, seed=self.stage_seeds["train"])

    def with_overrides(
        self: ExperimentConfig,
        *,
        seed: int | None = None,
        output_dir: Path | str | None = None,
        train_samples: int | None = None,
        test_samples: int | None = None,
        epochs: int | None = None,
    ) -> ExperimentConfig:
        """Return configuration with the given settings replaced."""
        changes = {
            key: value
            for key, value in (
                ("seed", seed),
                ("output_dir", output_dir),
                ("train_samples", train_samples),
                ("test_samples", test_samples),
            )
            if value is not None
        }
        if epochs is not None:
            changes["training"] = replace(self.training, epochs=epochs)

        return replace(self, **changes) if changes else self


# - main function --------------------------------------
def load_config(
    config_yaml: list[Path | str] | Path | str | None = None,
) -> ExperimentConfig:
    """Read experiment configuration from YAML file(s).

    Parameters
    ----------
    config_yaml :  list[Path | str] | Path | str | None, default=None
       YAML file(s) or names of shipped configurations, merged section by
       section in the given order; default "desk_scale"

    Returns
    -------
    ExperimentConfig

    """
    if config_yaml is None:
        config_yaml = DEFAULT_CONFIG

    settings = {}
    for yaml_file in config_yaml if isinstance(config_yaml, list) else [config_yaml]:
        try:
            config = load_yaml(_resolve(yaml_file))
        except (FileNotFoundError, RuntimeError) as exc:
            raise RuntimeError(f"Fails to access YAML file: {yaml_file}") from exc

        if not isinstance(config, dict):
            raise ValueError(f"{yaml_file} does not hold configuration sections")
        for key, value in config.items():
            if value is not None and not isinstance(value, dict):
                raise ValueError(f"section {key} of {yaml_file} is not a mapping")
            settings[key] = settings.get(key, {}) | (value or {})
        logger.debug("configuration read from %s", yaml_file)

    return ExperimentConfig.from_dict(settings)
