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
"""Multiplication counts of the allocation policies.

Only multiplications (and divisions) are counted. One evaluation of the
secrecy rate, or of its derivative, is worth `omega` multiplications. With
xi cached per user, the implementation of the secrecy rate needs

    xi_B / W, xi_E / W   -> 2
    two logarithms        -> 2 * LOG_MULT_EQUIV
    W * (...)             -> 1
    / ln 2                -> 1

thus MEASURED_OMEGA = 6 for a logarithm worth one multiplication.
"""

from __future__ import annotations

__all__ = [
    "MEASURED_OMEGA",
    "OpCount",
    "RunKnobs",
    "complexity_formula",
    "counted_run",
    "fnn_multiplications",
    "ivs_bound",
    "training_multiplications",
]

from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING

from .allocators import POLICY_TAGS, allocate
from .gnn import LAYER_WIDTHS, VERTEX_MULTIPLICATIONS

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from .allocators import Allocation
    from .channel import ChannelSample, SystemParams
    from .gnn import FnnParams
    from .scheduling import Schedule

# - global parameters ---------------------------------
LOG_MULT_EQUIV = 1
MEASURED_OMEGA = 4 + 2 * LOG_MULT_EQUIV
REFERENCE_OMEGA = 10


# - class definition -----------------------------------
@dataclass
class OpCount:
    """Counters of one instrumented run.

    Parameters
    ----------
    algorithm_tag :  str
       policy which was run
    omega :  int, default=MEASURED_OMEGA
       multiplications per secrecy-rate (derivative) evaluation
    secrecy_rate_evals :  int
       number of secrecy-rate evaluations
    deriv_evals :  int
       number of secrecy-rate derivative evaluations
    other_multiplications :  int
       multiplications outside the secrecy-rate evaluations

    """

    algorithm_tag: str
    omega: int = MEASURED_OMEGA
    secrecy_rate_evals: int = 0
    deriv_evals: int = 0
    other_multiplications: int = 0

    def __post_init__(self: OpCount) -> None:
        """Check the cost of an evaluation."""
        if self.omega < 1:
            raise ValueError("omega must be at least 1")

    @staticmethod
    def _check(num: int) -> int:
        if num < 0:
            raise ValueError("counts must be non-negative")
        return int(num)

    def add_rate_evals(self: OpCount, num: int) -> None:
        """Count secrecy-rate evaluations."""
        self.secrecy_rate_evals += self._check(num)

    def add_deriv_evals(self: OpCount, num: int) -> None:
        """Count secrecy-rate derivative evaluations."""
        self.deriv_evals += self._check(num)

    def add_multiplications(self: OpCount, num: int) -> None:
        """Count multiplications outside the secrecy-rate evaluations."""
        self.other_multiplications += self._check(num)

    @property
    def evaluations(self: OpCount) -> int:
        """Return number of secrecy-rate and derivative evaluations."""
        return self.secrecy_rate_evals + self.deriv_evals

    @property
    def multiplications(self: OpCount) -> int:
        """Return total number of multiplications."""
        return self.other_multiplications + self.omega * self.evaluations

    def asdict(self: OpCount) -> dict[str, int | str]:
        """Return counters, total multiplications included."""
        return asdict(self) | {"multiplications": self.multiplications}


@dataclass(frozen=True)
class RunKnobs:
    """Settings of the policies for an instrumented run."""

    delta_w_hz: float = 0.1e6
    criterion: str = "marginal"
    fnn_params: FnnParams | None = None
    grid_points: int = 10_000
    omega: int = MEASURED_OMEGA


# - main functions -------------------------------------
def fnn_multiplications(layer_widths: Sequence[int] = LAYER_WIDTHS) -> int:
    """Return multiplications of one FNN pass, sum of m_l * m_(l+1)."""
    if len(layer_widths) < 2 or any(x < 1 for x in layer_widths):
        raise ValueError("layer widths must be positive, at least two layers")

    return sum(
        n_in * n_out
        for n_in, n_out in zip(layer_widths[:-1], layer_widths[1:], strict=True)
    )


def complexity_formula(
    algorithm_tag: str,
    num_scheduled: int,
    delta_w_hz: float,
    surplus_hz: float,
    fnn_widths: Sequence[int] = LAYER_WIDTHS,
    omega: float = REFERENCE_OMEGA,
) -> float:
    """Return the closed-form multiplication count of a policy.

    Parameters
    ----------
    algorithm_tag :  {"gnn-sl", "gnn-usl", "ivs", "bec"}
       policy
    num_scheduled :  int
       number of scheduled users K
    delta_w_hz :  float
       block size of the iterative search [Hz]
    surplus_hz :  float
       surplus bandwidth W_B,S [Hz]
    fnn_widths :  Sequence[int], default=(2, 16, 8, 1)
       layer widths of the vertex network
    omega :  float, default=10
       multiplications per secrecy-rate evaluation

    Returns
    -------
    float
       K (M_FNN + 2 + omega) for both GNNs, K (W_B,S / delta_w) 3 omega for
       the iterative search and omega for the best-channel policy

    """
    if num_scheduled < 0:
        raise ValueError("number of scheduled users must be non-negative")
    if delta_w_hz <= 0:
        raise ValueError("delta_w_hz must be strictly positive")
    if surplus_hz < 0:
        raise ValueError("surplus bandwidth must be non-negative")
    if omega < 1:
        raise ValueError("omega must be at least 1")

    match algorithm_tag:
        case "gnn-sl" | "gnn-usl":
            return num_scheduled * (fnn_multiplications(fnn_widths) + 2 + omega)
        case "ivs":
            return num_scheduled * (surplus_hz / delta_w_hz) * 3 * omega
        case "bec":
            return float(omega) if num_scheduled > 0 else 0.0

    raise KeyError(f"unknown policy: {algorithm_tag}")


def ivs_bound(num_scheduled: int, surplus_hz: float, delta_w_hz: float) -> float:
    """Return upper bound of the secrecy-rate evaluations of the iterative search.

    Three evaluations per user and iteration; a surplus smaller than one
    block still takes one iteration.
    """
    if delta_w_hz <= 0:
        raise ValueError("delta_w_hz must be strictly positive")

    return 3 * num_scheduled * max(surplus_hz / delta_w_hz, 1.0)


def training_multiplications(
    num_scheduled: Iterable[int],
    fnn_widths: Sequence[int] = LAYER_WIDTHS,
    omega: float = MEASURED_OMEGA,
    epochs: int = 1,
    mode: str = "usl",
) -> float:
    """Return multiplications of the forward passes and the loss of training.

    Every vertex of every sample costs the forward pass, M_FNN plus the
    per-vertex multiplications around the network, and per epoch one
    secrecy-rate evaluation (omega) with the unsupervised loss or one
    square with the supervised loss. The labels of supervised training are
    not included.
    """
    forward = fnn_multiplications(fnn_widths) + VERTEX_MULTIPLICATIONS
    match mode:
        case "usl":
            per_vertex = forward + omega
        case "sl":
            per_vertex = forward + 1
        case _:
            raise KeyError(f"unknown training mode: {mode}")
    return epochs * per_vertex * sum(num_scheduled)


def counted_run(
    algorithm_tag: str,
    sched: Schedule,
    sample: ChannelSample,
    params: SystemParams,
    knobs: RunKnobs | None = None,
) -> tuple[Allocation, OpCount]:
    """Run a policy with instrumentation.

    Parameters
    ----------
    algorithm_tag :  str
       one of `allocators.POLICY_TAGS`
    sched :  Schedule
       non-empty schedule
    sample :  ChannelSample
       CSI used by the policy
    params :  SystemParams
       system parameters
    knobs :  RunKnobs, optional
       settings of the policy and the cost of an evaluation

    Returns
    -------
    tuple[Allocation, OpCount]
       the allocation and the counters of this run only

    """
    if algorithm_tag not in POLICY_TAGS:
        raise KeyError(f"unknown policy: {algorithm_tag}")

    knobs = RunKnobs() if knobs is None else knobs
    count = OpCount(algorithm_tag, omega=knobs.omega)
    alloc = allocate(
        algorithm_tag,
        sched,
        sample,
        params,
        delta_w_hz=knobs.delta_w_hz,
        criterion=knobs.criterion,
        fnn_params=knobs.fnn_params,
        grid_points=knobs.grid_points,
        counter=count,
    )
    return alloc, count
