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
"""Test module for secbw module `allocators`."""

from __future__ import annotations

import numpy as np
import pytest

from secbw.allocators import (
    SUM_ABS_TOL_HZ,
    Allocation,
    allocate,
    allocate_bec,
    allocate_ivs,
    brute_force_oracle,
    sum_secrecy_rate,
)
from secbw.channel import (
    ChannelSample,
    SystemParams,
    UserChannel,
    sample_channels,
    secrecy_rate,
)
from secbw.complexity import OpCount
from secbw.gnn import FnnParams
from secbw.scheduling import Schedule, schedule_users

PARAMS = SystemParams()
STRONG = UserChannel(100.0, 200.0, 1.0, 1.0)
OTHER = UserChannel(60.0, 150.0, 1.5, 0.5)


def scheduled(*users: UserChannel) -> tuple[Schedule, ChannelSample]:
    """Return schedule and sample of the given users."""
    sample = ChannelSample(users)
    return schedule_users(sample, PARAMS), sample


class TestSumSecrecyRate:
    """Class to test sum_secrecy_rate from secbw.allocators."""

    def test_single(self: TestSumSecrecyRate) -> None:
        """Unit-test for empty and single-user schedules."""
        empty = Schedule.empty(2, PARAMS.total_bandwidth_hz)
        sample = ChannelSample((STRONG, STRONG))
        assert sum_secrecy_rate(Allocation([], "ivs"), empty, sample, PARAMS) == 0.0

        sched, sample = scheduled(STRONG)
        alloc = Allocation([PARAMS.total_bandwidth_hz], "ivs")
        assert sum_secrecy_rate(alloc, sched, sample, PARAMS) == pytest.approx(
            secrecy_rate(PARAMS.total_bandwidth_hz, STRONG, PARAMS)
        )
        with pytest.raises(ValueError, match="different lengths"):
            sum_secrecy_rate(Allocation([1e6, 9e6], "ivs"), sched, sample, PARAMS)

    def test_concavity(self: TestSumSecrecyRate) -> None:
        """Unit-test: the equal split of two identical users is best."""
        sched, sample = scheduled(STRONG, STRONG)
        total = PARAMS.total_bandwidth_hz
        w_min = sched.w_min_hz[0]
        equal = Allocation([total / 2, total / 2], "ivs")
        corner = Allocation([w_min, total - w_min], "bec")
        assert sum_secrecy_rate(equal, sched, sample, PARAMS) > sum_secrecy_rate(
            corner, sched, sample, PARAMS
        )


class TestIvs:
    """Class to test allocate_ivs from secbw.allocators."""

    def test_single(self: TestIvs) -> None:
        """Unit-test for a single scheduled user."""
        sched, sample = scheduled(STRONG)
        alloc = allocate_ivs(sched, sample, PARAMS, 0.1e6)
        assert alloc.w_hz[0] == PARAMS.total_bandwidth_hz
        assert alloc.policy_tag == "ivs"
        assert alloc.violations(sched, sample, PARAMS) == []

    def test_identical_users(self: TestIvs) -> None:
        """Unit-test for two users with identical channels."""
        sched, sample = scheduled(STRONG, STRONG)
        alloc = allocate_ivs(sched, sample, PARAMS, 0.1e6)
        assert abs(alloc.w_hz[0] - alloc.w_hz[1]) <= 0.1e6
        assert alloc.w_hz.sum() == pytest.approx(
            PARAMS.total_bandwidth_hz, abs=SUM_ABS_TOL_HZ
        )
        assert alloc.violations(sched, sample, PARAMS) == []

    def test_counts(self: TestIvs) -> None:
        """Unit-test for the number of secrecy-rate evaluations."""
        sched, sample = scheduled(STRONG, STRONG)
        for delta_w in (1e6, 0.1e6):
            count = OpCount("ivs")
            alloc = allocate_ivs(sched, sample, PARAMS, delta_w, count)
            n_blocks = int(np.floor(sched.surplus_hz / delta_w * (1 + 1e-12)))
            residual = sched.surplus_hz - n_blocks * delta_w
            assert count.secrecy_rate_evals == 2 * len(sched) * n_blocks + (
                2 if residual > SUM_ABS_TOL_HZ else 0
            )
            assert count.deriv_evals == 0
            assert alloc.violations(sched, sample, PARAMS) == []

        # surplus smaller than one block
        count = OpCount("ivs")
        alloc = allocate_ivs(sched, sample, PARAMS, 2e7, count)
        assert (count.secrecy_rate_evals, count.deriv_evals) == (0, len(sched))
        assert alloc.w_hz.sum() == pytest.approx(
            PARAMS.total_bandwidth_hz, abs=SUM_ABS_TOL_HZ
        )

    def test_exceptions(self: TestIvs) -> None:
        """Unit-test for invalid arguments."""
        sched, sample = scheduled(STRONG, STRONG)
        with pytest.raises(ValueError, match="delta_w_hz"):
            allocate_ivs(sched, sample, PARAMS, 0.0)
        empty = Schedule.empty(2, PARAMS.total_bandwidth_hz)
        with pytest.raises(ValueError, match="empty schedule"):
            allocate_ivs(empty, sample, PARAMS, 0.1e6)

    def test_delta_w(self: TestIvs) -> None:
        """Unit-test: smaller blocks do not lower the sum secrecy rate."""
        rates = {}
        for delta_w in (1e6, 0.1e6, 0.01e6):
            total = []
            for ii in range(20):
                sample = sample_channels([5, ii], 10, PARAMS)
                sched = schedule_users(sample, PARAMS)
                if len(sched) == 0:
                    continue
                alloc = allocate_ivs(sched, sample, PARAMS, delta_w)
                total.append(sum_secrecy_rate(alloc, sched, sample, PARAMS))
            rates[delta_w] = np.mean(total)
        assert rates[0.1e6] >= rates[1e6] * (1 - 1e-8)
        assert rates[0.01e6] >= rates[0.1e6] * (1 - 1e-8)
        assert rates[0.01e6] / rates[0.1e6] - 1 < 0.01


class TestBec:
    """Class to test allocate_bec from secbw.allocators."""

    def test_single(self: TestBec) -> None:
        """Unit-test: a single user obtains the same as with IvS."""
        sched, sample = scheduled(STRONG)
        assert allocate_bec(sched, sample, PARAMS).w_hz[0] == pytest.approx(
            allocate_ivs(sched, sample, PARAMS, 0.1e6).w_hz[0]
        )

    def test_identical_users(self: TestBec) -> None:
        """Unit-test: the surplus goes to the lowest index on ties."""
        sched, sample = scheduled(STRONG, STRONG)
        count = OpCount("bec")
        alloc = allocate_bec(sched, sample, PARAMS, counter=count)
        assert alloc.w_hz[1] == sched.w_min_hz[1]
        assert alloc.w_hz[0] == pytest.approx(
            PARAMS.total_bandwidth_hz - sched.w_min_hz[1]
        )
        assert count.evaluations == len(sched)
        ivs = allocate_ivs(sched, sample, PARAMS, 0.1e6)
        assert sum_secrecy_rate(alloc, sched, sample, PARAMS) <= sum_secrecy_rate(
            ivs, sched, sample, PARAMS
        )

    def test_criteria(self: TestBec) -> None:
        """Unit-test for the ranking criteria of the best channel."""
        weak_gain = UserChannel(60.0, 150.0, 0.8, 0.1)
        sched, sample = scheduled(STRONG, weak_gain)
        # STRONG has the larger gain, the other user the larger xi
        assert allocate_bec(sched, sample, PARAMS, "gain").w_hz[0] > (
            sched.w_min_hz[0]
        )
        assert allocate_bec(sched, sample, PARAMS, "snr").w_hz[1] > sched.w_min_hz[1]
        count = OpCount("bec")
        allocate_bec(sched, sample, PARAMS, "snr", count)
        assert count.evaluations == 0
        with pytest.raises(KeyError, match="unknown BeC criterion"):
            allocate_bec(sched, sample, PARAMS, "distance")


class TestOracle:
    """Class to test brute_force_oracle from secbw.allocators."""

    def test_small(self: TestOracle) -> None:
        """Unit-test for one and two identical users."""
        sched, sample = scheduled(STRONG)
        assert brute_force_oracle(sched, sample, PARAMS).w_hz[0] == (
            PARAMS.total_bandwidth_hz
        )

        sched, sample = scheduled(STRONG, STRONG)
        count = OpCount("oracle")
        alloc = brute_force_oracle(sched, sample, PARAMS, 1000, count)
        assert count.secrecy_rate_evals == 2 * 1000
        cell = sched.surplus_hz / 999
        assert abs(alloc.w_hz[0] - alloc.w_hz[1]) <= 3 * cell
        assert alloc.violations(sched, sample, PARAMS) == []

    def test_three_users(self: TestOracle) -> None:
        """Unit-test for the grid over the splits of three users."""
        sched, sample = scheduled(STRONG, OTHER, STRONG)
        assert len(sched) == 3
        alloc = brute_force_oracle(sched, sample, PARAMS, 200)
        assert alloc.violations(sched, sample, PARAMS) == []
        ivs = allocate_ivs(sched, sample, PARAMS, 0.01e6)
        assert sum_secrecy_rate(alloc, sched, sample, PARAMS) == pytest.approx(
            sum_secrecy_rate(ivs, sched, sample, PARAMS), rel=1e-3
        )

    def test_ivs_agreement(self: TestOracle) -> None:
        """Unit-test: IvS with small blocks matches the oracle for two users."""
        delta_w = 0.01e6
        num = 0
        for ii in range(400):
            sample = sample_channels([7, ii], 2, PARAMS)
            sched = schedule_users(sample, PARAMS)
            if len(sched) != 2:
                continue
            ivs = allocate_ivs(sched, sample, PARAMS, delta_w)
            oracle = brute_force_oracle(sched, sample, PARAMS)
            rate_ivs = sum_secrecy_rate(ivs, sched, sample, PARAMS)
            rate_oracle = sum_secrecy_rate(oracle, sched, sample, PARAMS)
            assert abs(rate_ivs / rate_oracle - 1) <= 1e-3
            num += 1
            if num == 20:
                break
        assert num >= 5

    def test_exceptions(self: TestOracle) -> None:
        """Unit-test for unsupported schedules."""
        sched, sample = scheduled(STRONG, STRONG, STRONG, STRONG)
        with pytest.raises(ValueError, match="at most 3 users"):
            brute_force_oracle(sched, sample, PARAMS)
        sched, sample = scheduled(STRONG, STRONG)
        with pytest.raises(ValueError, match="grid_points"):
            brute_force_oracle(sched, sample, PARAMS, 1)


class TestAllocation:
    """Class to test Allocation and allocate from secbw.allocators."""

    def test_violations(self: TestAllocation) -> None:
        """Unit-test for the constraint checks of an allocation."""
        sched, sample = scheduled(STRONG, STRONG)
        total = PARAMS.total_bandwidth_hz
        w_min = sched.w_min_hz[0]

        alloc = Allocation(sched.w_min_hz, "bec")
        assert alloc.violations(sched, sample, PARAMS) == [
            "bec: bandwidth budget not fully used"
        ]
        alloc = Allocation([w_min / 2, total - w_min / 2], "ivs")
        assert alloc.violations(sched, sample, PARAMS) == [
            "ivs: allocation below minimum bandwidth",
            "ivs: secrecy rate below threshold",
        ]
        assert alloc.violations(sched, sample, PARAMS, check_rate=False) == [
            "ivs: allocation below minimum bandwidth"
        ]
        assert alloc.outages(sched, sample, PARAMS) == 1
        half = Allocation([total / 2, total / 2], "ivs")
        assert half.outages(sched, sample, PARAMS) == 0
        alloc = Allocation([total], "ivs")
        assert alloc.violations(sched, sample, PARAMS) == [
            "ivs: allocation not aligned with schedule"
        ]
        with pytest.raises(ValueError, match="different lengths"):
            alloc.outages(sched, sample, PARAMS)
        assert np.allclose(
            Allocation([total / 2, total / 2], "ivs").w_norm(total), [0.5, 0.5]
        )

    def test_dispatch(self: TestAllocation) -> None:
        """Unit-test for the selection of a policy by its tag."""
        sched, sample = scheduled(STRONG, OTHER)
        fnn = FnnParams.init(seed=3)
        for tag in ("ivs", "bec", "oracle", "gnn-sl", "gnn-usl"):
            alloc = allocate(
                tag, sched, sample, PARAMS, fnn_params=fnn, grid_points=100
            )
            assert alloc.policy_tag == tag
            assert alloc.violations(sched, sample, PARAMS) == []

        with pytest.raises(ValueError, match="requires trained FNN"):
            allocate("gnn-sl", sched, sample, PARAMS)
        with pytest.raises(KeyError, match="unknown policy"):
            allocate("random", sched, sample, PARAMS)

    def test_random_samples(self: TestAllocation) -> None:
        """Unit-test: all policies meet the constraints on random samples."""
        fnn = FnnParams.init(seed=5)
        for ii in range(100):
            sample = sample_channels([9, ii], 10, PARAMS)
            sched = schedule_users(sample, PARAMS)
            if len(sched) == 0:
                continue
            rates = {}
            for tag in ("ivs", "bec", "gnn-usl"):
                alloc = allocate(tag, sched, sample, PARAMS, fnn_params=fnn)
                assert alloc.violations(sched, sample, PARAMS) == []
                rates[tag] = sum_secrecy_rate(alloc, sched, sample, PARAMS)
            assert rates["bec"] <= rates["ivs"] * (1 + 1e-6)
