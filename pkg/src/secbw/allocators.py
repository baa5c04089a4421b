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
"""Bandwidth allocation policies for the scheduled users.

- iterative search (IvS): greedy blocks of size delta_w to the user with the
  largest secrecy-rate increment, optimal for delta_w -> 0 since the sum
  secrecy rate is concave;
- best channel (BeC): the whole surplus to one user;
- brute-force grid search over the surplus simplex, for small K only.

Every policy starts from the minimum bandwidths of the schedule and hands out
the complete surplus, thus the budget is always fully used.
"""

from __future__ import annotations

__all__ = [
    "POLICY_TAGS",
    "Allocation",
    "allocate",
    "allocate_bec",
    "allocate_ivs",
    "brute_force_oracle",
    "sum_secrecy_rate",
]

from dataclasses import dataclass
from typing import TYPE_CHECKING, Protocol

import numpy as np

from .channel import LN2, secrecy_rate_deriv_xi, secrecy_rate_xi

if TYPE_CHECKING:
    from .channel import ChannelSample, SystemParams
    from .gnn import FnnParams
    from .scheduling import Schedule

# - global parameters ---------------------------------
POLICY_TAGS = ("ivs", "bec", "gnn-sl", "gnn-usl", "oracle")
BEC_CRITERIA = ("marginal", "snr", "gain")
SUM_ABS_TOL_HZ = 1e-6
RATE_ABS_TOL_BPS = 1e-3
MAX_ORACLE_USERS = 3


class Counter(Protocol):
    """Accumulator of evaluation counts, see `complexity.OpCount`."""

    def add_rate_evals(self: Counter, num: int) -> None:
        """Count secrecy-rate evaluations."""

    def add_deriv_evals(self: Counter, num: int) -> None:
        """Count secrecy-rate derivative evaluations."""

    def add_multiplications(self: Counter, num: int) -> None:
        """Count multiplications outside the secrecy-rate evaluations."""


# - class definition -----------------------------------
@dataclass(frozen=True, eq=False)
class Allocation:
    """Bandwidth of every scheduled user, aligned with `Schedule.scheduled_idx`.

    Parameters
    ----------
    w_hz :  np.ndarray
       allocated bandwidth [Hz]
    policy_tag :  str
       policy which produced the allocation

    """

    w_hz: np.ndarray
    policy_tag: str

    def __post_init__(self: Allocation) -> None:
        """Store bandwidths as float array."""
        object.__setattr__(self, "w_hz", np.asarray(self.w_hz, dtype=float))

    def __len__(self: Allocation) -> int:
        """Return number of scheduled users."""
        return self.w_hz.size

    def w_norm(self: Allocation, total_bandwidth_hz: float) -> np.ndarray:
        """Return allocation normalized by the bandwidth budget."""
        return self.w_hz / total_bandwidth_hz

    def violations(
        self: Allocation,
        sched: Schedule,
        sample: ChannelSample,
        params: SystemParams,
        check_rate: bool = True,
    ) -> list[str]:
        """Return constraint violations of this allocation (empty when valid).

        Checks full use of the budget, the minimum bandwidths and (with
        `check_rate`) the secrecy threshold of every scheduled user under the
        CSI of `sample`.
        """
        if len(self) != len(sched):
            return [f"{self.policy_tag}: allocation not aligned with schedule"]

        res = []
        if len(sched) > 0 and (
            abs(self.w_hz.sum() - params.total_bandwidth_hz) > SUM_ABS_TOL_HZ
        ):
            res.append(f"{self.policy_tag}: bandwidth budget not fully used")
        if np.any(self.w_hz < sched.w_min_hz - SUM_ABS_TOL_HZ):
            res.append(f"{self.policy_tag}: allocation below minimum bandwidth")
        if check_rate and self.outages(sched, sample, params) > 0:
            res.append(f"{self.policy_tag}: secrecy rate below threshold")

        return res

    def outages(
        self: Allocation,
        sched: Schedule,
        sample: ChannelSample,
        params: SystemParams,
    ) -> int:
        """Return number of scheduled users below the secrecy threshold."""
        if len(self) != len(sched):
            raise ValueError("allocation and schedule have different lengths")

        xi_bs, xi_eve = _scheduled_xi(sched, sample, params)
        rates = secrecy_rate_xi(np.maximum(self.w_hz, 0), xi_bs, xi_eve)
        return int(np.sum(rates < params.min_secrecy_rate_bps - RATE_ABS_TOL_BPS))


class _RateEvaluator:
    """Secrecy rate of the scheduled users, with evaluation counting."""

    def __init__(
        self: _RateEvaluator,
        xi_bs: np.ndarray,
        xi_eve: np.ndarray,
        counter: Counter | None,
    ) -> None:
        self.xi_bs = xi_bs
        self.xi_eve = xi_eve
        self.counter = counter

    def __call__(
        self: _RateEvaluator, w_hz: np.ndarray | float, idx: int | None = None
    ) -> np.ndarray:
        """Return clamped secrecy rates at strictly positive bandwidths."""
        xb = self.xi_bs if idx is None else self.xi_bs[idx]
        xe = self.xi_eve if idx is None else self.xi_eve[idx]
        if self.counter is not None:
            self.counter.add_rate_evals(np.size(w_hz))
        return np.maximum(w_hz * (np.log1p(xb / w_hz) - np.log1p(xe / w_hz)) / LN2, 0)


# - local function -------------------------------------
def _scheduled_xi(
    sched: Schedule, sample: ChannelSample, params: SystemParams
) -> tuple[np.ndarray, np.ndarray]:
    """Return xi of legitimate and wiretap links of the scheduled users."""
    idx = list(sched.scheduled_idx)
    return sample.xi_bs(params)[idx], sample.xi_eve(params)[idx]


def _check_schedule(sched: Schedule) -> None:
    """Raise when there is nothing to allocate."""
    if len(sched) == 0:
        raise ValueError("empty schedule, nothing to allocate")


# - main functions -------------------------------------
def sum_secrecy_rate(
    alloc: Allocation,
    sched: Schedule,
    sample: ChannelSample,
    params: SystemParams,
) -> float:
    """Return the sum secrecy rate of an allocation [bit/s]."""
    if len(alloc) != len(sched):
        raise ValueError("allocation and schedule have different lengths")
    if len(sched) == 0:
        return 0.0

    xi_bs, xi_eve = _scheduled_xi(sched, sample, params)
    return float(secrecy_rate_xi(alloc.w_hz, xi_bs, xi_eve).sum())


def allocate_ivs(
    sched: Schedule,
    sample: ChannelSample,
    params: SystemParams,
    delta_w_hz: float,
    counter: Counter | None = None,
) -> Allocation:
    """Allocate the surplus in blocks by iterative search.

    Parameters
    ----------
    sched :  Schedule
       non-empty schedule
    sample :  ChannelSample
       CSI used to evaluate the secrecy-rate increments
    params :  SystemParams
       system parameters
    delta_w_hz :  float
       size of a bandwidth block [Hz]
    counter :  Counter, optional
       accumulates the number of secrecy-rate evaluations

    Notes
    -----
    The residual bandwidth smaller than one block goes to the user with the
    largest increment after the last block. When the surplus is smaller than
    one block, it goes to the user with the largest derivative at its
    minimum bandwidth.

    """
    _check_schedule(sched)
    if delta_w_hz <= 0:
        raise ValueError("delta_w_hz must be strictly positive")

    total = params.total_bandwidth_hz
    if len(sched) == 1:
        return Allocation(np.array([total]), "ivs")

    xi_bs, xi_eve = _scheduled_xi(sched, sample, params)
    rate = _RateEvaluator(xi_bs, xi_eve, counter)
    w_hz = sched.w_min_hz.copy()
    n_blocks = int(np.floor(sched.surplus_hz / delta_w_hz * (1 + 1e-12)))

    gains = None
    k_allo = 0
    for _ in range(n_blocks):
        gains = rate(w_hz + delta_w_hz) - rate(w_hz)
        k_allo = int(np.argmax(gains))
        w_hz[k_allo] += delta_w_hz

    # residuals below the tolerance are rounding noise of the block sum
    residual = total - w_hz.sum()
    k_best = k_allo
    if residual > SUM_ABS_TOL_HZ:
        if gains is None:
            if counter is not None:
                counter.add_deriv_evals(len(sched))
            k_best = int(np.argmax(secrecy_rate_deriv_xi(w_hz, xi_bs, xi_eve)))
        else:
            gains[k_allo] = rate(w_hz[k_allo] + delta_w_hz, k_allo) - rate(
                w_hz[k_allo], k_allo
            )
            k_best = int(np.argmax(gains))
    w_hz[k_best] += residual

    return Allocation(w_hz, "ivs")


def allocate_bec(
    sched: Schedule,
    sample: ChannelSample,
    params: SystemParams,
    criterion: str = "marginal",
    counter: Counter | None = None,
) -> Allocation:
    """Allocate the complete surplus to the user with the best channel.

    Parameters
    ----------
    sched :  Schedule
       non-empty schedule
    sample :  ChannelSample
       CSI used to rank the users
    params :  SystemParams
       system parameters
    criterion :  {"marginal", "snr", "gain"}, default="marginal"
       ranking: secrecy-rate derivative at the minimum bandwidth, xi of the
       legitimate link, or small-scale gain towards the base station
    counter :  Counter, optional
       accumulates the number of derivative evaluations

    """
    _check_schedule(sched)
    xi_bs, xi_eve = _scheduled_xi(sched, sample, params)
    match criterion:
        case "marginal":
            if counter is not None:
                counter.add_deriv_evals(len(sched))
            score = secrecy_rate_deriv_xi(sched.w_min_hz, xi_bs, xi_eve)
        case "snr":
            score = xi_bs
        case "gain":
            score = sample.as_array()[list(sched.scheduled_idx), 2]
        case _:
            raise KeyError(f"unknown BeC criterion: {criterion}")

    w_hz = sched.w_min_hz.copy()
    k_best = int(np.argmax(score))
    w_hz[k_best] += params.total_bandwidth_hz - w_hz.sum()
    return Allocation(w_hz, "bec")


def brute_force_oracle(
    sched: Schedule,
    sample: ChannelSample,
    params: SystemParams,
    grid_points: int = 10_000,
    counter: Counter | None = None,
) -> Allocation:
    """Return the best allocation on a grid over the splits of the surplus.

    Only schedules with at most three users are accepted; the grid holds
    `grid_points` values per free split variable.
    """
    _check_schedule(sched)
    if len(sched) > MAX_ORACLE_USERS:
        raise ValueError(
            f"brute-force oracle supports at most {MAX_ORACLE_USERS} users"
        )
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")

    total = params.total_bandwidth_hz
    if len(sched) == 1:
        return Allocation(np.array([total]), "oracle")

    xi_bs, xi_eve = _scheduled_xi(sched, sample, params)
    surplus = sched.surplus_hz
    steps = np.linspace(0.0, 1.0, grid_points)
    if len(sched) == 2:
        shares = np.column_stack((steps, 1 - steps))
        w_grid = sched.w_min_hz + shares * surplus
        if counter is not None:
            counter.add_rate_evals(w_grid.size)
        best = int(np.argmax(secrecy_rate_xi(w_grid, xi_bs, xi_eve).sum(axis=1)))
        return Allocation(w_grid[best], "oracle")

    best_rate = -np.inf
    best_w = sched.w_min_hz
    for ii, share_1 in enumerate(steps):
        share_2 = steps[: grid_points - ii]
        shares = np.column_stack(
            (
                np.full_like(share_2, share_1),
                share_2,
                np.maximum(1 - share_1 - share_2, 0),
            )
        )
        w_grid = sched.w_min_hz + shares * surplus
        if counter is not None:
            counter.add_rate_evals(w_grid.size)
        rates = secrecy_rate_xi(w_grid, xi_bs, xi_eve).sum(axis=1)
        jj = int(np.argmax(rates))
        if rates[jj] > best_rate:
            best_rate = rates[jj]
            best_w = w_grid[jj]

    return Allocation(best_w, "oracle")


def allocate(
    tag: str,
    sched: Schedule,
    sample: ChannelSample,
    params: SystemParams,
    *,
    delta_w_hz: float = 0.1e6,
    criterion: str = "marginal",
    fnn_params: FnnParams | None = None,
    grid_points: int = 10_000,
    counter: Counter | None = None,
) -> Allocation:
    """Run the allocation policy identified by `tag`, see `POLICY_TAGS`."""
    match tag:
        case "ivs":
            return allocate_ivs(sched, sample, params, delta_w_hz, counter)
        case "bec":
            return allocate_bec(sched, sample, params, criterion, counter)
        case "oracle":
            return brute_force_oracle(sched, sample, params, grid_points, counter)
        case "gnn-sl" | "gnn-usl":
            if fnn_params is None:
                raise ValueError(f"policy {tag} requires trained FNN parameters")
            # gnn depends on this module
            from .gnn import allocate_gnn

            return allocate_gnn(sched, fnn_params, tag, counter)

    raise KeyError(f"unknown policy: {tag}")
