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
"""User scheduling under a per-user minimum secrecy rate.

Users which can not reach the secrecy threshold even with the full bandwidth
are dropped first. The remaining users obtain their minimum bandwidth by
bisection on the monotone secrecy rate, and while the minimum bandwidths
exceed the budget the user with the largest demand is dropped.
"""

from __future__ import annotations

__all__ = [
    "DropReason",
    "InfeasibleUserError",
    "Schedule",
    "believed_schedule",
    "min_bandwidth_bisect",
    "schedule_statistics",
    "schedule_users",
]

from contextlib import suppress
from dataclasses import dataclass, field
from enum import IntEnum
from typing import TYPE_CHECKING

import numpy as np

from .channel import secrecy_rate_xi, xi

if TYPE_CHECKING:
    from collections.abc import Iterable

    from .channel import ChannelSample, SystemParams, UserChannel

# - global parameters ---------------------------------
BISECT_REL_TOL = 1e-6


class InfeasibleUserError(ValueError):
    """User can not reach the secrecy threshold within the bandwidth budget."""


class DropReason(IntEnum):
    """Why a user is not scheduled; the values are stored in dataset files."""

    SCHEDULED = 0
    INFEASIBLE_ALONE = 1
    BUDGET_EXCEEDED = 2


# - class definition -----------------------------------
@dataclass(frozen=True, eq=False)
class Schedule:
    """Outcome of user scheduling for one channel sample.

    Parameters
    ----------
    scheduled_idx :  tuple[int, ...]
       original indices of the scheduled users, ascending
    w_min_hz :  np.ndarray
       minimum bandwidth of each scheduled user [Hz]
    total_bandwidth_hz :  float
       bandwidth budget [Hz]
    dropped :  dict[int, DropReason]
       original index of every dropped user with the reason

    """

    scheduled_idx: tuple[int, ...]
    w_min_hz: np.ndarray
    total_bandwidth_hz: float
    dropped: dict[int, DropReason] = field(default_factory=dict)

    def __post_init__(self: Schedule) -> None:
        """Check feasibility of the minimum bandwidths."""
        w_min = np.asarray(self.w_min_hz, dtype=float)
        object.__setattr__(self, "w_min_hz", w_min)
        if w_min.shape != (len(self.scheduled_idx),):
            raise ValueError("w_min_hz not aligned with scheduled_idx")
        if np.any(w_min <= 0):
            raise ValueError("minimum bandwidths must be strictly positive")
        if w_min.sum() > self.total_bandwidth_hz * (1 + 1e-12):
            raise ValueError("minimum bandwidths exceed the bandwidth budget")

    def __len__(self: Schedule) -> int:
        """Return number of scheduled users K."""
        return len(self.scheduled_idx)

    @property
    def w_min_norm(self: Schedule) -> np.ndarray:
        """Return minimum bandwidths normalized by the budget."""
        return self.w_min_hz / self.total_bandwidth_hz

    @property
    def surplus_hz(self: Schedule) -> float:
        """Return bandwidth left after granting all minimum bandwidths [Hz]."""
        return max(self.total_bandwidth_hz - float(self.w_min_hz.sum()), 0.0)

    @property
    def surplus_norm(self: Schedule) -> float:
        """Return normalized surplus bandwidth, in [0, 1]."""
        return min(max(1.0 - float(self.w_min_norm.sum()), 0.0), 1.0)

    @property
    def dropped_idx(self: Schedule) -> tuple[int, ...]:
        """Return original indices of the dropped users."""
        return tuple(sorted(self.dropped))

    def drop_reasons(self: Schedule, num_users: int) -> np.ndarray:
        """Return drop reason of all users as array of codes."""
        res = np.zeros(num_users, dtype="u1")
        for key, reason in self.dropped.items():
            res[key] = reason
        return res

    def expand(self: Schedule, values: np.ndarray, num_users: int) -> np.ndarray:
        """Return per-scheduled-user values on all users (0 for dropped users)."""
        res = np.zeros(num_users, dtype=float)
        res[list(self.scheduled_idx)] = values
        return res

    @classmethod
    def empty(
        cls: type[Schedule], num_users: int, total_bandwidth_hz: float
    ) -> Schedule:
        """Return schedule without any user, all dropped as infeasible."""
        return cls(
            (),
            np.zeros(0),
            total_bandwidth_hz,
            dict.fromkeys(range(num_users), DropReason.INFEASIBLE_ALONE),
        )

    @classmethod
    def from_arrays(
        cls: type[Schedule],
        reasons: np.ndarray,
        w_min_hz: np.ndarray,
        total_bandwidth_hz: float,
    ) -> Schedule:
        """Reconstruct a schedule from per-user drop reasons and bandwidths."""
        reasons = np.asarray(reasons)
        keep = np.flatnonzero(reasons == DropReason.SCHEDULED)
        return cls(
            tuple(int(x) for x in keep),
            np.asarray(w_min_hz, dtype=float)[keep],
            total_bandwidth_hz,
            {
                int(ii): DropReason(int(reasons[ii]))
                for ii in np.flatnonzero(reasons != DropReason.SCHEDULED)
            },
        )


# - main functions -------------------------------------
def _bisect_xi(xi_bs: float, xi_eve: float, params: SystemParams) -> float:
    """Return smallest W meeting the secrecy threshold, rounded up."""
    w_max = params.total_bandwidth_hz
    r_min = params.min_secrecy_rate_bps
    if secrecy_rate_xi(w_max, xi_bs, xi_eve) < r_min:
        raise InfeasibleUserError(
            "secrecy threshold not reachable with the full bandwidth"
        )

    # invariant: rate(lo) < r_min <= rate(hi)
    lo, hi = 0.0, w_max
    tol = BISECT_REL_TOL * w_max
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if secrecy_rate_xi(mid, xi_bs, xi_eve) >= r_min:
            hi = mid
        else:
            lo = mid

    return hi


def min_bandwidth_bisect(ch: UserChannel, params: SystemParams) -> float:
    """Return the minimum bandwidth of a user to reach the secrecy threshold.

    Parameters
    ----------
    ch :  UserChannel
       channel of the user
    params :  SystemParams
       system parameters

    Returns
    -------
    float
       smallest W in (0, W_B,max] with secrecy_rate(W) >= R_min, within a
       tolerance of 1e-6 W_B,max and never below the true minimum

    """
    return _bisect_xi(
        float(xi(ch.d_bs_m, ch.g_bs, params)),
        float(xi(ch.d_eve_m, ch.g_eve, params)),
        params,
    )


def schedule_users(sample: ChannelSample, params: SystemParams) -> Schedule:
    """Select the users which can be served with the secrecy threshold.

    Parameters
    ----------
    sample :  ChannelSample
       channel state information of all users
    params :  SystemParams
       system parameters

    Returns
    -------
    Schedule
       possibly empty schedule

    """
    xi_bs = sample.xi_bs(params)
    xi_eve = sample.xi_eve(params)
    rate_max = secrecy_rate_xi(params.total_bandwidth_hz, xi_bs, xi_eve)

    dropped = {}
    w_min = {}
    for ii in range(len(sample)):
        if rate_max[ii] <= 0 or rate_max[ii] < params.min_secrecy_rate_bps:
            dropped[ii] = DropReason.INFEASIBLE_ALONE
        else:
            w_min[ii] = _bisect_xi(xi_bs[ii], xi_eve[ii], params)

    # drop the largest demand (lowest index on ties) until the budget suffices
    while w_min and sum(w_min.values()) > params.total_bandwidth_hz:
        k_drop = max(w_min, key=lambda k: (w_min[k], -k))
        del w_min[k_drop]
        dropped[k_drop] = DropReason.BUDGET_EXCEEDED

    keys = sorted(w_min)
    return Schedule(
        tuple(keys),
        np.array([w_min[k] for k in keys], dtype=float),
        params.total_bandwidth_hz,
        dropped,
    )


def believed_schedule(
    sched: Schedule, believed: ChannelSample, params: SystemParams
) -> Schedule:
    """Return the schedule with minimum bandwidths from uncertain CSI.

    The scheduled users are kept. A user which can not reach the threshold
    under the believed CSI asks for the full budget, and minimum bandwidths
    exceeding the budget together are scaled down to fit.

    Parameters
    ----------
    sched :  Schedule
       schedule obtained with the true CSI
    believed :  ChannelSample
       channel state information as known to the allocator
    params :  SystemParams
       system parameters

    """
    if len(sched) == 0:
        return sched

    indx = list(sched.scheduled_idx)
    xi_bs = believed.xi_bs(params)[indx]
    xi_eve = believed.xi_eve(params)[indx]
    w_min = np.full(len(sched), params.total_bandwidth_hz)
    for kk in range(len(sched)):
        with suppress(InfeasibleUserError):
            w_min[kk] = _bisect_xi(xi_bs[kk], xi_eve[kk], params)

    if (total := w_min.sum()) > params.total_bandwidth_hz:
        w_min *= params.total_bandwidth_hz / total
    return Schedule(
        sched.scheduled_idx, w_min, sched.total_bandwidth_hz, dict(sched.dropped)
    )


def schedule_statistics(schedules: Iterable[Schedule]) -> dict[str, float]:
    """Return summary statistics of a collection of schedules."""
    num_sched = []
    n_alone = 0
    n_budget = 0
    for sched in schedules:
        num_sched.append(len(sched))
        n_alone += sum(x == DropReason.INFEASIBLE_ALONE for x in sched.dropped.values())
        n_budget += sum(x == DropReason.BUDGET_EXCEEDED for x in sched.dropped.values())

    num_sched = np.array(num_sched, dtype=float)
    return {
        "samples": int(num_sched.size),
        "mean_scheduled": float(num_sched.mean()) if num_sched.size else 0.0,
        "empty_schedules": int(np.sum(num_sched == 0)),
        "dropped_infeasible_alone": n_alone,
        "dropped_budget_exceeded": n_budget,
    }
