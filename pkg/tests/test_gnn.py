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
"""Test module for secbw module `gnn`."""

from __future__ import annotations

import numpy as np
import pandas as pd
import pytest

from secbw.allocators import allocate_ivs, brute_force_oracle, sum_secrecy_rate
from secbw.channel import (
    ChannelSample,
    SystemParams,
    UserChannel,
    sample_channels,
    secrecy_rate,
)
from secbw.gnn import (
    FnnParams,
    GnnOutput,
    GraphSet,
    TrainConfig,
    TrainingHistory,
    allocate_gnn,
    fnn_forward,
    forward_graphs,
    gnn_forward,
    loss_and_grad,
    sgd_step,
    sl_loss,
    train,
    usl_loss,
)
from secbw.scheduling import Schedule, schedule_users

PARAMS = SystemParams()
TOTAL = PARAMS.total_bandwidth_hz
STRONG = UserChannel(100.0, 200.0, 1.0, 1.0)


def make_graphs(num: int, seed: int = 13, num_users: int = 10) -> GraphSet:
    """Return non-empty random schedules with IvS labels as batch."""
    schedules, samples, labels, refs = [], [], [], []
    for ii in range(100 * num):
        sample = sample_channels([seed, ii], num_users, PARAMS)
        sched = schedule_users(sample, PARAMS)
        if len(sched) == 0:
            continue
        alloc = allocate_ivs(sched, sample, PARAMS, 0.1e6)
        schedules.append(sched)
        samples.append(sample)
        labels.append(alloc.w_hz)
        refs.append(sum_secrecy_rate(alloc, sched, sample, PARAMS))
        if len(schedules) == num:
            break
    return GraphSet.from_schedules(schedules, samples, PARAMS, labels, refs)


def numeric_gradient(
    graphs: GraphSet, fnn: FnnParams, mode: str, step: float = 1e-6
) -> np.ndarray:
    """Return central finite differences of the loss w.r.t. all parameters."""
    theta = fnn.flatten()
    res = np.empty_like(theta)
    for jj in range(theta.size):
        plus = theta.copy()
        plus[jj] += step
        minus = theta.copy()
        minus[jj] -= step
        res[jj] = (
            loss_and_grad(graphs, fnn.unflatten(plus), mode, PARAMS)[0]
            - loss_and_grad(graphs, fnn.unflatten(minus), mode, PARAMS)[0]
        ) / (2 * step)
    return res


class TestFnnParams:
    """Class to test FnnParams from secbw.gnn."""

    def test_init(self: TestFnnParams) -> None:
        """Unit-test for the initialization of the parameters."""
        fnn = FnnParams.init(seed=1)
        assert fnn.layer_widths == (2, 16, 8, 1)
        assert [x.shape for x in fnn.weights] == [(16, 2), (8, 16), (1, 8)]
        assert fnn.flatten().size == 2 * 16 + 16 + 16 * 8 + 8 + 8 + 1
        assert np.all(np.abs(fnn.weights[0]) <= 1 / np.sqrt(2))
        assert np.array_equal(fnn.flatten(), FnnParams.init(seed=1).flatten())
        assert np.array_equal(fnn.unflatten(fnn.flatten()).flatten(), fnn.flatten())
        assert not np.any(fnn.zeros_like().flatten())

    def test_exceptions(self: TestFnnParams) -> None:
        """Unit-test for invalid parameters."""
        fnn = FnnParams.init(seed=1)
        with pytest.raises(ValueError, match="2 inputs to 1 feature"):
            FnnParams.init((3, 4, 1))
        with pytest.raises(KeyError, match="unknown activation"):
            FnnParams.init(activation="relu")
        with pytest.raises(ValueError, match="logit_scale must be finite"):
            FnnParams.init(logit_scale=0.0)
        with pytest.raises(ValueError, match="must be finite"):
            fnn.unflatten(np.full(fnn.flatten().size, np.nan))
        with pytest.raises(ValueError, match="vector size"):
            fnn.unflatten(np.zeros(3))
        with pytest.raises(ValueError, match="shape mismatch in layer 2"):
            FnnParams(
                (2, 4, 1),
                (np.zeros((4, 2)), np.zeros((1, 3))),
                (np.zeros(4), np.zeros(1)),
            )


class TestForward:
    """Class to test the forward passes of secbw.gnn."""

    def test_fnn_forward(self: TestForward) -> None:
        """Unit-test for the vertex network."""
        zeros = FnnParams.init(seed=2).zeros_like()
        res, cache = fnn_forward([0.1, 0.5, 0.9], 0.3, zeros)
        assert np.array_equal(res, [0.0, 0.0, 0.0])
        assert len(cache) == 3

        fnn = FnnParams.init(seed=2)
        res, _ = fnn_forward([0.2, 0.2, 0.4], [0.5, 0.5, 0.5], fnn)
        assert res[0] == pytest.approx(res[1], rel=1e-12)
        assert res[0] != res[2]

        sigmoid = FnnParams.init(seed=2, activation="sigmoid").zeros_like()
        assert np.array_equal(fnn_forward(0.2, 0.5, sigmoid)[0], [0.0])

    def test_single_user(self: TestForward) -> None:
        """Unit-test: a single user obtains the complete budget."""
        sched = Schedule((3,), np.array([0.5e6]), TOTAL)
        output = gnn_forward(sched, FnnParams.init(seed=4))
        assert np.array_equal(output.softmax, [1.0])
        assert output.w_hz[0] == pytest.approx(TOTAL)
        assert allocate_gnn(sched, FnnParams.init(seed=4), "gnn-sl").policy_tag == (
            "gnn-sl"
        )
        with pytest.raises(ValueError, match="empty schedule"):
            gnn_forward(Schedule.empty(2, TOTAL), FnnParams.init())

    def test_readout(self: TestForward) -> None:
        """Unit-test: the readout is feasible for any parameters."""
        rng = np.random.default_rng(6)
        for trial in range(200):
            num = int(rng.integers(1, 11))
            w_min = rng.dirichlet(np.ones(num + 1))[:num] * TOTAL
            sched = Schedule(tuple(range(num)), w_min, TOTAL)
            output = gnn_forward(sched, FnnParams.init(seed=trial))
            assert np.all(output.softmax > 0)
            assert output.softmax.sum() == pytest.approx(1.0, abs=1e-12)
            assert output.w_hz.sum() == pytest.approx(TOTAL, abs=1e-6)
            assert np.all(output.w_hz >= w_min - 1e-6)

    def test_symmetry(self: TestForward) -> None:
        """Unit-test for parameter sharing over the vertices."""
        fnn = FnnParams.init(seed=8)
        sched = Schedule((0, 1), np.array([1e6, 1e6]), TOTAL)
        output = gnn_forward(sched, fnn)
        assert output.softmax[0] == pytest.approx(output.softmax[1], rel=1e-12)

        w_min = np.array([1e6, 0.3e6, 2e6])
        res = gnn_forward(Schedule((0, 1, 2), w_min, TOTAL), fnn).w_hz
        perm = gnn_forward(Schedule((0, 1, 2), w_min[[2, 0, 1]], TOTAL), fnn).w_hz
        assert np.allclose(perm, res[[2, 0, 1]], rtol=1e-12, atol=0)

    def test_logit_scale(self: TestForward) -> None:
        """Unit-test: a larger logit scale concentrates the surplus."""
        sched = Schedule((0, 1, 2), np.array([1e6, 0.3e6, 2e6]), TOTAL)
        peak = [
            gnn_forward(sched, FnnParams.init(seed=8, logit_scale=scale)).softmax.max()
            for scale in (1.0, 20.0, 400.0)
        ]
        assert peak[0] <= peak[1] <= peak[2]
        assert peak[0] < peak[2]

    def test_batch(self: TestForward) -> None:
        """Unit-test: a batch gives the same allocations as single graphs."""
        graphs = make_graphs(5)
        fnn = FnnParams.init(seed=9)
        output = forward_graphs(graphs, fnn)
        for ii, w_hz in enumerate(output.split()):
            single = forward_graphs(graphs.take([ii]), fnn)
            assert np.allclose(single.w_hz, w_hz, rtol=1e-12, atol=0)
        assert output.sum_secrecy_rate().shape == (5,)


class TestGraphSet:
    """Class to test GraphSet from secbw.gnn."""

    def test_take(self: TestGraphSet) -> None:
        """Unit-test for the selection of graphs."""
        graphs = make_graphs(4)
        res = graphs.take([2, 0])
        assert len(res) == 2
        assert np.array_equal(res.counts, graphs.counts[[2, 0]])
        start, stop = graphs.offsets[2], graphs.offsets[3]
        assert np.array_equal(
            res.w_min_norm[: res.counts[0]], graphs.w_min_norm[start:stop]
        )
        assert np.array_equal(res.ref_sum_rate, graphs.ref_sum_rate[[2, 0]])
        assert np.array_equal(res.segment[: res.counts[0]], np.zeros(res.counts[0]))

    def test_w_min_rel(self: TestGraphSet) -> None:
        """Unit-test: the smallest minimum bandwidth of a graph maps to one."""
        graphs = make_graphs(4)
        rel = graphs.w_min_rel
        assert rel.shape == graphs.w_min_norm.shape
        assert np.all((rel > 0) & (rel <= 1))
        assert np.array_equal(np.maximum.reduceat(rel, graphs.offsets[:-1]), np.ones(4))
        for ii, piece in enumerate(np.split(rel, graphs.offsets[1:-1])):
            start, stop = graphs.offsets[ii], graphs.offsets[ii + 1]
            assert np.argmax(piece) == np.argmin(graphs.w_min_norm[start:stop])

    def test_exceptions(self: TestGraphSet) -> None:
        """Unit-test for inconsistent batches."""
        with pytest.raises(ValueError, match="no schedules"):
            GraphSet.from_schedules([])
        with pytest.raises(ValueError, match="at least one scheduled user"):
            GraphSet.from_schedules([Schedule.empty(2, TOTAL)])
        sched = Schedule((0,), np.array([1e6]), TOTAL)
        with pytest.raises(ValueError, match="system parameters"):
            GraphSet.from_schedules([sched], [ChannelSample((STRONG,))])
        with pytest.raises(ValueError, match="offsets must start at 0"):
            GraphSet(np.array([0.1]), np.array([1, 1]), TOTAL)
        with pytest.raises(ValueError, match="do not match"):
            GraphSet(np.array([0.1, 0.2]), np.array([0, 1]), TOTAL)


class TestLosses:
    """Class to test the losses and gradients of secbw.gnn."""

    def test_sl_loss(self: TestLosses) -> None:
        """Unit-test for the supervised loss."""
        graphs = GraphSet(np.array([0.1, 0.1]), np.array([0, 2]), TOTAL)
        output = GnnOutput(
            graphs=graphs,
            features=np.zeros(2),
            softmax=np.array([1.0, 0.0]),
            w_norm=np.array([1.0, 0.0]),
            w_hz=np.array([TOTAL, 0.0]),
            cache=[],
        )
        assert sl_loss(output, np.array([0.0, 1.0])) == pytest.approx(1.0)
        assert sl_loss(output, output.w_norm) == 0.0
        with pytest.raises(ValueError, match="different lengths"):
            sl_loss(output, np.array([1.0]))

    def test_usl_loss(self: TestLosses) -> None:
        """Unit-test for the unsupervised loss."""
        sample = ChannelSample((STRONG,))
        graphs = GraphSet.from_schedules(
            [schedule_users(sample, PARAMS)], [sample], PARAMS
        )
        output = forward_graphs(graphs, FnnParams.init(seed=1))
        rate = secrecy_rate(TOTAL, STRONG, PARAMS)
        assert usl_loss(output, PARAMS, rescale=False) == pytest.approx(-rate)
        assert usl_loss(output, PARAMS) == pytest.approx(-rate / TOTAL)

        # duplicated samples leave the loss unchanged
        graphs = make_graphs(3)
        fnn = FnnParams.init(seed=1)
        single = usl_loss(forward_graphs(graphs, fnn), PARAMS)
        double = usl_loss(forward_graphs(graphs.take([0, 1, 2, 0, 1, 2]), fnn), PARAMS)
        assert double == pytest.approx(single, rel=1e-12)

        no_csi = GraphSet.from_schedules([schedule_users(sample, PARAMS)])
        with pytest.raises(ValueError, match="channel state information"):
            usl_loss(forward_graphs(no_csi, fnn), PARAMS)

    @pytest.mark.parametrize(("mode", "tol"), [("sl", 1e-5), ("usl", 1e-4)])
    def test_gradient(self: TestLosses, mode: str, tol: float) -> None:
        """Unit-test: backpropagation matches finite differences."""
        graphs = make_graphs(6, seed=21)
        for seed in range(5):
            for activation in ("tanh", "sigmoid"):
                fnn = FnnParams.init(seed=seed, activation=activation)
                grad = loss_and_grad(graphs, fnn, mode, PARAMS)[1].flatten()
                num = numeric_gradient(graphs, fnn, mode)
                assert np.linalg.norm(num - grad) <= tol * np.linalg.norm(grad)

    def test_exceptions(self: TestLosses) -> None:
        """Unit-test for invalid loss arguments."""
        graphs = GraphSet.from_schedules([Schedule((0,), np.array([1e6]), TOTAL)])
        with pytest.raises(ValueError, match="requires labels"):
            loss_and_grad(graphs, FnnParams.init(), "sl", PARAMS)
        with pytest.raises(KeyError, match="unknown training mode"):
            loss_and_grad(graphs, FnnParams.init(), "rl", PARAMS)


class TestTraining:
    """Class to test sgd_step and train from secbw.gnn."""

    def test_sgd_step(self: TestTraining) -> None:
        """Unit-test for one step of gradient descent."""
        fnn = FnnParams.init(seed=3)
        assert np.array_equal(
            sgd_step(fnn, fnn.zeros_like(), 0.1).flatten(), fnn.flatten()
        )
        assert np.array_equal(sgd_step(fnn, fnn, 0.0).flatten(), fnn.flatten())
        with pytest.raises(ValueError, match="different shapes"):
            sgd_step(fnn, FnnParams.init((2, 4, 1)), 0.1)

        graphs = make_graphs(6)
        loss, grad, _ = loss_and_grad(graphs, fnn, "sl", PARAMS)
        new_loss = loss_and_grad(graphs, sgd_step(fnn, grad, 1e-3), "sl", PARAMS)[0]
        assert new_loss < loss

    def test_config(self: TestTraining) -> None:
        """Unit-test for invalid hyper-parameters."""
        with pytest.raises(ValueError, match="learning_rate"):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError, match="batch_size"):
            TrainConfig(batch_size=0)
        with pytest.raises(KeyError, match="unknown training mode"):
            TrainConfig(mode="rl")
        with pytest.raises(ValueError, match="logit_scale must be finite"):
            TrainConfig(logit_scale=np.inf)

    def test_no_epochs(self: TestTraining) -> None:
        """Unit-test: without epochs the initial parameters are returned."""
        graphs = make_graphs(4)
        fnn = FnnParams.init(seed=5)
        res, history = train(graphs, TrainConfig(epochs=0), PARAMS, fnn)
        assert res is fnn
        assert len(history) == 0
        assert list(history.as_dataframe().columns) == list(TrainingHistory.columns)

    def test_reproducible(self: TestTraining) -> None:
        """Unit-test: training is reproducible given the seed."""
        graphs = make_graphs(10)
        config = TrainConfig(epochs=2, batch_size=4, seed=7, mode="usl")
        res_1, hist_1 = train(graphs, config, PARAMS)
        res_2, hist_2 = train(graphs, config, PARAMS)
        assert np.array_equal(res_1.flatten(), res_2.flatten())
        pd.testing.assert_frame_equal(hist_1.as_dataframe(), hist_2.as_dataframe())

        frame = hist_1.as_dataframe()
        assert len(frame) == 2 * 3
        assert set(frame["mode"]) == {"usl"}
        assert np.all(frame["normalized_avg_sum_secrecy_rate"] <= 1.001)
        assert len(hist_1.epoch_means()) == 2

        config = TrainConfig(epochs=1, batch_size=4, seed=7, mode="sl")
        res_3, _ = train(graphs, config, PARAMS)
        assert not np.array_equal(res_1.flatten(), res_3.flatten())

        no_labels = GraphSet(graphs.w_min_norm, graphs.offsets, TOTAL)
        with pytest.raises(ValueError, match="requires labels"):
            train(no_labels, config, PARAMS)

    def test_identical_users(self: TestTraining) -> None:
        """Unit-test: USL on two identical users reaches the optimum."""
        sample = ChannelSample((STRONG, STRONG))
        sched = schedule_users(sample, PARAMS)
        graphs = GraphSet.from_schedules([sched], [sample], PARAMS).take([0] * 16)
        config = TrainConfig(learning_rate=1e-2, epochs=3, batch_size=8, seed=1)
        fnn, _ = train(graphs, config, PARAMS)

        alloc = allocate_gnn(sched, fnn)
        oracle = brute_force_oracle(sched, sample, PARAMS)
        assert sum_secrecy_rate(alloc, sched, sample, PARAMS) >= 0.999 * (
            sum_secrecy_rate(oracle, sched, sample, PARAMS)
        )
