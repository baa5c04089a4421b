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
"""Graph neural network for bandwidth allocation.

Every scheduled user is a vertex. A small fully connected network, shared by
all vertices, maps (relative minimum bandwidth, normalized surplus) of a
vertex to a scalar feature. The relative minimum bandwidth is the smallest
minimum bandwidth of the graph divided by the one of the vertex, it lies in
(0, 1] and is close to the secrecy spectral efficiency of the vertex relative
to the best vertex. The features are concatenated, multiplied by a fixed
logit scale, passed through a softmax, and the readout

    W_norm = softmax(logit_scale * x) * surplus_norm + w_min_norm

turns the shares into a feasible normalized allocation, whatever the number
of vertices. The network is trained by stochastic gradient descent, either
supervised (MSE against iterative-search labels) or unsupervised (the
negative sum secrecy rate).

Batches of graphs are stored flat: all vertices of all graphs in one array
with the offsets of every graph, thus forward and backward passes are
vectorized over the whole batch.
"""

from __future__ import annotations

__all__ = [
    "FnnParams",
    "GnnOutput",
    "GraphSet",
    "TrainConfig",
    "TrainingHistory",
    "allocate_gnn",
    "fnn_backward",
    "fnn_forward",
    "forward_graphs",
    "gnn_forward",
    "loss_and_grad",
    "sgd_step",
    "sl_loss",
    "train",
    "usl_loss",
]

import logging
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

from .allocators import Allocation
from .channel import secrecy_rate_deriv_xi, secrecy_rate_xi

if TYPE_CHECKING:
    from collections.abc import Sequence

    from .allocators import Counter
    from .channel import ChannelSample, SystemParams
    from .scheduling import Schedule

# - global parameters ---------------------------------
LAYER_WIDTHS = (2, 16, 8, 1)
LOGIT_SCALE = 20.0
# input ratio, logit scale, softmax division and readout
VERTEX_MULTIPLICATIONS = 4
TRAIN_MODES = ("sl", "usl")

logger = logging.getLogger("secbw.gnn")


# - local function -------------------------------------
def _sigmoid(z: np.ndarray) -> np.ndarray:
    """Return logistic function, evaluated without overflow."""
    return 0.5 * (1.0 + np.tanh(0.5 * z))


# activation and its derivative expressed in the activation output
ACTIVATIONS = {
    "tanh": (np.tanh, lambda a: 1.0 - a**2),
    "sigmoid": (_sigmoid, lambda a: a * (1.0 - a)),
}


def _segment_sum(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Return sum of values per graph; all graphs are non-empty."""
    return np.add.reduceat(values, offsets[:-1])


# - class definitions ----------------------------------
@dataclass(frozen=True, eq=False)
class FnnParams:
    """Weights and biases of the vertex network.

    Parameters
    ----------
    layer_widths :  tuple[int, ...]
       number of neurons per layer, input and output included
    weights :  tuple[np.ndarray, ...]
       weight matrix of every layer, shape (width[l+1], width[l])
    biases :  tuple[np.ndarray, ...]
       bias vector of every layer, shape (width[l+1],)
    activation :  str, default="tanh"
       activation of the hidden layers, the output layer is linear
    logit_scale :  float, default=20
       fixed factor between the features and the softmax logits

    """

    layer_widths: tuple[int, ...]
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    activation: str = "tanh"
    logit_scale: float = LOGIT_SCALE

    def __post_init__(self: FnnParams) -> None:
        """Check shapes and values."""
        widths = tuple(int(x) for x in self.layer_widths)
        object.__setattr__(self, "layer_widths", widths)
        object.__setattr__(
            self, "weights", tuple(np.asarray(x, dtype=float) for x in self.weights)
        )
        object.__setattr__(
            self, "biases", tuple(np.asarray(x, dtype=float) for x in self.biases)
        )
        if self.activation not in ACTIVATIONS:
            raise KeyError(f"unknown activation: {self.activation}")
        if not 0 < self.logit_scale < np.inf:
            raise ValueError("logit_scale must be finite and strictly positive")
        if len(widths) < 2 or widths[0] != 2 or widths[-1] != 1:
            raise ValueError("vertex network maps 2 inputs to 1 feature")
        if len(self.weights) != len(widths) - 1 or len(self.biases) != len(widths) - 1:
            raise ValueError("number of layers does not match layer_widths")
        for ii, (wgt, bias) in enumerate(zip(self.weights, self.biases, strict=True)):
            if wgt.shape != (widths[ii + 1], widths[ii]) or bias.shape != (
                widths[ii + 1],
            ):
                raise ValueError(f"shape mismatch in layer {ii + 1}")
        if not self.is_finite():
            raise ValueError("FNN parameters must be finite")

    @classmethod
    def init(
        cls: type[FnnParams],
        layer_widths: Sequence[int] = LAYER_WIDTHS,
        seed: int | Sequence[int] = 0,
        activation: str = "tanh",
        logit_scale: float = LOGIT_SCALE,
    ) -> FnnParams:
        """Return parameters drawn uniformly in +/- 1/sqrt(fan_in)."""
        rng = np.random.default_rng(seed)
        weights = []
        biases = []
        for n_in, n_out in zip(layer_widths[:-1], layer_widths[1:], strict=True):
            bound = 1.0 / np.sqrt(n_in)
            weights.append(rng.uniform(-bound, bound, size=(n_out, n_in)))
            biases.append(rng.uniform(-bound, bound, size=n_out))
        return cls(
            tuple(layer_widths), tuple(weights), tuple(biases), activation, logit_scale
        )

    def zeros_like(self: FnnParams) -> FnnParams:
        """Return parameters of the same shape filled with zeros."""
        return replace(
            self,
            weights=tuple(np.zeros_like(x) for x in self.weights),
            biases=tuple(np.zeros_like(x) for x in self.biases),
        )

    def is_finite(self: FnnParams) -> bool:
        """Return True when all entries are finite."""
        return all(np.all(np.isfinite(x)) for x in (*self.weights, *self.biases))

    def flatten(self: FnnParams) -> np.ndarray:
        """Return all parameters as one vector (layer by layer, weights first)."""
        return np.concatenate(
            [
                np.concatenate((wgt.ravel(), bias))
                for wgt, bias in zip(self.weights, self.biases, strict=True)
            ]
        )

    def unflatten(self: FnnParams, vector: np.ndarray) -> FnnParams:
        """Return parameters of the same shape with values from a vector."""
        vector = np.asarray(vector, dtype=float)
        if vector.size != self.flatten().size:
            raise ValueError("vector size does not match the number of parameters")
        weights = []
        biases = []
        pos = 0
        for wgt, bias in zip(self.weights, self.biases, strict=True):
            weights.append(vector[pos : pos + wgt.size].reshape(wgt.shape))
            pos += wgt.size
            biases.append(vector[pos : pos + bias.size].copy())
            pos += bias.size
        return replace(self, weights=tuple(weights), biases=tuple(biases))


@dataclass(frozen=True, eq=False)
class GraphSet:
    """Batch of scheduled samples stored as flat vertex arrays.

    Parameters
    ----------
    w_min_norm :  np.ndarray
       normalized minimum bandwidth of every vertex
    offsets :  np.ndarray
       start of every graph in the vertex arrays, plus the total size
    total_bandwidth_hz :  float
       bandwidth budget [Hz]
    xi_bs, xi_eve :  np.ndarray, optional
       xi of the links of every vertex, needed by the unsupervised loss
    label_w_norm :  np.ndarray, optional
       normalized iterative-search allocation of every vertex
    ref_sum_rate :  np.ndarray, optional
       reference sum secrecy rate of every graph, for the normalized rate

    """

    w_min_norm: np.ndarray
    offsets: np.ndarray
    total_bandwidth_hz: float
    xi_bs: np.ndarray | None = None
    xi_eve: np.ndarray | None = None
    label_w_norm: np.ndarray | None = None
    ref_sum_rate: np.ndarray | None = None

    def __post_init__(self: GraphSet) -> None:
        """Check consistency of the arrays."""
        offsets = np.asarray(self.offsets, dtype=np.int64)
        object.__setattr__(self, "offsets", offsets)
        if offsets.ndim != 1 or offsets.size < 2 or offsets[0] != 0:
            raise ValueError("offsets must start at 0 and hold at least one graph")
        if np.any(np.diff(offsets) < 1):
            raise ValueError("every graph needs at least one scheduled user")
        if offsets[-1] != np.size(self.w_min_norm):
            raise ValueError("offsets do not match the number of vertices")

    def __len__(self: GraphSet) -> int:
        """Return number of graphs."""
        return self.offsets.size - 1

    @property
    def counts(self: GraphSet) -> np.ndarray:
        """Return number of vertices of every graph."""
        return np.diff(self.offsets)

    @property
    def segment(self: GraphSet) -> np.ndarray:
        """Return graph index of every vertex."""
        return np.repeat(np.arange(len(self)), self.counts)

    @property
    def w_min_rel(self: GraphSet) -> np.ndarray:
        """Return smallest w_min of the graph divided by the w_min of every vertex."""
        smallest = np.minimum.reduceat(self.w_min_norm, self.offsets[:-1])
        return smallest[self.segment] / self.w_min_norm

    @property
    def surplus_norm(self: GraphSet) -> np.ndarray:
        """Return normalized surplus bandwidth of every graph."""
        return np.clip(1.0 - _segment_sum(self.w_min_norm, self.offsets), 0.0, 1.0)

    @classmethod
    def from_schedules(
        cls: type[GraphSet],
        schedules: Sequence[Schedule],
        samples: Sequence[ChannelSample] | None = None,
        params: SystemParams | None = None,
        labels_w_hz: Sequence[np.ndarray] | None = None,
        ref_sum_rate: Sequence[float] | None = None,
    ) -> GraphSet:
        """Collect non-empty schedules (with their CSI and labels) in a batch."""
        if not schedules:
            raise ValueError("no schedules to collect")
        if any(len(x) == 0 for x in schedules):
            raise ValueError("every graph needs at least one scheduled user")

        total = schedules[0].total_bandwidth_hz
        xi_bs = xi_eve = labels = None
        if samples is not None:
            if params is None:
                raise ValueError("system parameters are required with samples")
            xi_bs = np.concatenate(
                [
                    smpl.xi_bs(params)[list(sched.scheduled_idx)]
                    for sched, smpl in zip(schedules, samples, strict=True)
                ]
            )
            xi_eve = np.concatenate(
                [
                    smpl.xi_eve(params)[list(sched.scheduled_idx)]
                    for sched, smpl in zip(schedules, samples, strict=True)
                ]
            )
        if labels_w_hz is not None:
            labels = np.concatenate([np.asarray(x) / total for x in labels_w_hz])

        return cls(
            w_min_norm=np.concatenate([x.w_min_norm for x in schedules]),
            offsets=np.concatenate(([0], np.cumsum([len(x) for x in schedules]))),
            total_bandwidth_hz=total,
            xi_bs=xi_bs,
            xi_eve=xi_eve,
            label_w_norm=labels,
            ref_sum_rate=None if ref_sum_rate is None else np.asarray(ref_sum_rate),
        )

    def take(self: GraphSet, indices: Sequence[int] | np.ndarray) -> GraphSet:
        """Return the graphs with the given indices, in that order."""
        indices = np.asarray(indices, dtype=np.int64)
        counts = self.counts[indices]
        offsets = np.concatenate(([0], np.cumsum(counts)))
        vidx = np.repeat(self.offsets[indices] - offsets[:-1], counts) + np.arange(
            offsets[-1]
        )

        def _sel(values: np.ndarray | None, index: np.ndarray) -> np.ndarray | None:
            return None if values is None else values[index]

        return GraphSet(
            w_min_norm=self.w_min_norm[vidx],
            offsets=offsets,
            total_bandwidth_hz=self.total_bandwidth_hz,
            xi_bs=_sel(self.xi_bs, vidx),
            xi_eve=_sel(self.xi_eve, vidx),
            label_w_norm=_sel(self.label_w_norm, vidx),
            ref_sum_rate=_sel(self.ref_sum_rate, indices),
        )


@dataclass(frozen=True, eq=False)
class GnnOutput:
    """Result of a forward pass over a batch of graphs."""

    graphs: GraphSet
    features: np.ndarray
    softmax: np.ndarray
    w_norm: np.ndarray
    w_hz: np.ndarray
    cache: list[np.ndarray] = field(repr=False)

    def split(self: GnnOutput, values: np.ndarray | None = None) -> list[np.ndarray]:
        """Return per-graph pieces of a vertex array (default: `w_hz`)."""
        values = self.w_hz if values is None else values
        return np.split(values, self.graphs.offsets[1:-1])

    def sum_secrecy_rate(self: GnnOutput) -> np.ndarray:
        """Return realized sum secrecy rate of every graph [bit/s]."""
        if self.graphs.xi_bs is None:
            raise ValueError("graphs carry no channel state information")
        rates = secrecy_rate_xi(self.w_hz, self.graphs.xi_bs, self.graphs.xi_eve)
        return _segment_sum(rates, self.graphs.offsets)


@dataclass(frozen=True)
class TrainConfig:
    """Hyper-parameters of the training."""

    learning_rate: float = 1e-3
    batch_size: int = 64
    epochs: int = 20
    mode: str = "usl"
    seed: int = 0
    activation: str = "tanh"
    layer_widths: tuple[int, ...] = LAYER_WIDTHS
    logit_scale: float = LOGIT_SCALE

    def __post_init__(self: TrainConfig) -> None:
        """Check hyper-parameters."""
        if not 0 < self.logit_scale < np.inf:
            raise ValueError("logit_scale must be finite and strictly positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be strictly positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.mode not in TRAIN_MODES:
            raise KeyError(f"unknown training mode: {self.mode}")
        if self.activation not in ACTIVATIONS:
            raise KeyError(f"unknown activation: {self.activation}")


class TrainingHistory:
    """Loss and normalized average sum secrecy rate of every training step."""

    columns = ("step", "epoch", "mode", "normalized_avg_sum_secrecy_rate", "loss")

    def __init__(self: TrainingHistory, mode: str) -> None:
        """Construct an empty history."""
        self.mode = mode
        self.rows: list[tuple] = []

    def __len__(self: TrainingHistory) -> int:
        """Return number of recorded steps."""
        return len(self.rows)

    def append(
        self: TrainingHistory, step: int, epoch: int, ratio: float, loss: float
    ) -> None:
        """Record one training step."""
        self.rows.append((step, epoch, self.mode, ratio, loss))

    def as_dataframe(self: TrainingHistory) -> pd.DataFrame:
        """Return history as table, one row per step."""
        return pd.DataFrame(self.rows, columns=list(self.columns))

    def epoch_means(self: TrainingHistory) -> pd.DataFrame:
        """Return mean loss and normalized rate of every epoch."""
        return (
            self.as_dataframe()
            .groupby("epoch", as_index=False)[
                ["normalized_avg_sum_secrecy_rate", "loss"]
            ]
            .mean()
        )


# - network passes -------------------------------------
def fnn_forward(
    w_min_norm_k: np.ndarray | float,
    surplus_norm: np.ndarray | float,
    params: FnnParams,
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Return feature of every vertex and the activations for backprop.

    Parameters
    ----------
    w_min_norm_k :  array_like
       (relative) normalized minimum bandwidth of the vertices
    surplus_norm :  array_like
       normalized surplus bandwidth of the graph of every vertex
    params :  FnnParams
       shared parameters of the vertex network

    Returns
    -------
    tuple[np.ndarray, list[np.ndarray]]
       features x_k and the inputs of every layer

    """
    if not params.is_finite():
        raise ValueError("FNN parameters must be finite")

    act = ACTIVATIONS[params.activation][0]
    layer_in = np.column_stack(
        np.broadcast_arrays(
            np.atleast_1d(np.asarray(w_min_norm_k, dtype=float)),
            np.atleast_1d(np.asarray(surplus_norm, dtype=float)),
        )
    )
    cache = []
    n_layers = len(params.weights)
    for ii, (wgt, bias) in enumerate(zip(params.weights, params.biases, strict=True)):
        cache.append(layer_in)
        layer_in = layer_in @ wgt.T + bias
        if ii < n_layers - 1:
            layer_in = act(layer_in)

    return layer_in[:, 0], cache


def fnn_backward(
    d_features: np.ndarray, cache: list[np.ndarray], params: FnnParams
) -> FnnParams:
    """Return gradient of the parameters, summed over all vertices."""
    act_deriv = ACTIVATIONS[params.activation][1]
    delta = np.asarray(d_features, dtype=float)[:, None]
    d_weights = []
    d_biases = []
    for ii in range(len(params.weights) - 1, -1, -1):
        d_weights.append(delta.T @ cache[ii])
        d_biases.append(delta.sum(axis=0))
        if ii > 0:
            delta = (delta @ params.weights[ii]) * act_deriv(cache[ii])

    return replace(
        params,
        weights=tuple(reversed(d_weights)),
        biases=tuple(reversed(d_biases)),
    )


def forward_graphs(
    graphs: GraphSet, params: FnnParams, counter: Counter | None = None
) -> GnnOutput:
    """Run the network on every graph of a batch.

    Parameters
    ----------
    graphs :  GraphSet
       batch of non-empty schedules
    params :  FnnParams
       shared parameters of the vertex network
    counter :  Counter, optional
       accumulates the multiplications of the forward pass

    """
    seg = graphs.segment
    surplus = graphs.surplus_norm
    features, cache = fnn_forward(graphs.w_min_rel, surplus[seg], params)

    # softmax per graph, shifted by the maximum of the graph
    logits = params.logit_scale * features
    shifted = np.exp(logits - np.maximum.reduceat(logits, graphs.offsets[:-1])[seg])
    softmax = shifted / _segment_sum(shifted, graphs.offsets)[seg]

    w_norm = softmax * surplus[seg] + graphs.w_min_norm
    if counter is not None:
        n_vertex = features.size
        counter.add_multiplications(
            sum(n_vertex * wgt.size for wgt in params.weights)
            + VERTEX_MULTIPLICATIONS * n_vertex
        )

    return GnnOutput(
        graphs=graphs,
        features=features,
        softmax=softmax,
        w_norm=w_norm,
        w_hz=w_norm * graphs.total_bandwidth_hz,
        cache=cache,
    )


def gnn_forward(
    sched: Schedule, params: FnnParams, counter: Counter | None = None
) -> GnnOutput:
    """Run the network on one non-empty schedule."""
    if len(sched) == 0:
        raise ValueError("empty schedule, nothing to allocate")

    return forward_graphs(GraphSet.from_schedules([sched]), params, counter)


def allocate_gnn(
    sched: Schedule,
    params: FnnParams,
    tag: str = "gnn-usl",
    counter: Counter | None = None,
) -> Allocation:
    """Return the allocation emitted by the network for one schedule."""
    return Allocation(gnn_forward(sched, params, counter).w_hz, tag)


# - losses ---------------------------------------------
def _sl_terms(output: GnnOutput, label_w_norm: np.ndarray) -> tuple[float, np.ndarray]:
    """Return MSE loss and its gradient w.r.t. the normalized allocation."""
    label_w_norm = np.asarray(label_w_norm, dtype=float)
    if label_w_norm.shape != output.w_norm.shape:
        raise ValueError("label and output have different lengths")

    graphs = output.graphs
    weight = 1.0 / (graphs.counts[graphs.segment] * len(graphs))
    diff = output.w_norm - label_w_norm
    return float(np.sum(weight * diff**2)), 2.0 * weight * diff


def _usl_terms(
    output: GnnOutput, params: SystemParams, rescale: bool = True
) -> tuple[float, np.ndarray]:
    """Return negative mean sum secrecy rate and its gradient."""
    graphs = output.graphs
    if graphs.xi_bs is None or graphs.xi_eve is None:
        raise ValueError("unsupervised loss requires the channel state information")

    scale = params.total_bandwidth_hz if rescale else 1.0
    rates = secrecy_rate_xi(output.w_hz, graphs.xi_bs, graphs.xi_eve, clamp=False)
    deriv = secrecy_rate_deriv_xi(output.w_hz, graphs.xi_bs, graphs.xi_eve)
    n_graphs = len(graphs)
    loss = -float(rates.sum()) / (n_graphs * scale)
    return loss, -deriv * graphs.total_bandwidth_hz / (n_graphs * scale)


def sl_loss(output: GnnOutput, label_w_norm: np.ndarray) -> float:
    """Return mean squared error w.r.t. normalized labels, averaged per graph."""
    return _sl_terms(output, label_w_norm)[0]


def usl_loss(output: GnnOutput, params: SystemParams, rescale: bool = True) -> float:
    """Return the negative batch-mean sum secrecy rate.

    With `rescale` the rates are divided by W_B,max (bit/s/Hz equivalent).
    """
    if len(output.graphs) < 1:
        raise ValueError("empty batch")

    return _usl_terms(output, params, rescale)[0]


def loss_and_grad(
    graphs: GraphSet, fnn_params: FnnParams, mode: str, params: SystemParams
) -> tuple[float, FnnParams, GnnOutput]:
    """Return loss, its gradient w.r.t. the FNN parameters and the output.

    Parameters
    ----------
    graphs :  GraphSet
       batch of graphs, with labels (mode "sl") or CSI (mode "usl")
    fnn_params :  FnnParams
       current parameters
    mode :  {"sl", "usl"}
       supervised or unsupervised loss
    params :  SystemParams
       system parameters

    """
    output = forward_graphs(graphs, fnn_params)
    match mode:
        case "sl":
            if graphs.label_w_norm is None:
                raise ValueError("supervised loss requires labels")
            loss, d_w_norm = _sl_terms(output, graphs.label_w_norm)
        case "usl":
            loss, d_w_norm = _usl_terms(output, params)
        case _:
            raise KeyError(f"unknown training mode: {mode}")

    # readout and softmax, per graph
    seg = graphs.segment
    d_soft = d_w_norm * graphs.surplus_norm[seg]
    d_feat = fnn_params.logit_scale * output.softmax * (
        d_soft - _segment_sum(output.softmax * d_soft, graphs.offsets)[seg]
    )
    return loss, fnn_backward(d_feat, output.cache, fnn_params), output


def sgd_step(
    params: FnnParams, gradient: FnnParams, learning_rate: float
) -> FnnParams:
    """Return parameters after one gradient-descent step."""
    if gradient.layer_widths != params.layer_widths:
        raise ValueError("gradient and parameters have different shapes")
    if not gradient.is_finite():
        raise ValueError("gradient must be finite")

    return replace(
        params,
        weights=tuple(
            x - learning_rate * g
            for x, g in zip(params.weights, gradient.weights, strict=True)
        ),
        biases=tuple(
            x - learning_rate * g
            for x, g in zip(params.biases, gradient.biases, strict=True)
        ),
    )


# - training -------------------------------------------
def _normalized_rate(output: GnnOutput) -> float:
    """Return mean ratio of the realized and the reference sum secrecy rate."""
    ref = output.graphs.ref_sum_rate
    if ref is None or output.graphs.xi_bs is None:
        return float("nan")

    valid = ref > 0
    if not np.any(valid):
        return float("nan")
    return float(np.mean(output.sum_secrecy_rate()[valid] / ref[valid]))


def train(
    graphs: GraphSet,
    config: TrainConfig,
    params: SystemParams,
    init_params: FnnParams | None = None,
) -> tuple[FnnParams, TrainingHistory]:
    """Train the vertex network by mini-batch stochastic gradient descent.

    Parameters
    ----------
    graphs :  GraphSet
       training graphs (non-empty schedules), with labels for mode "sl"
    config :  TrainConfig
       hyper-parameters; the seed drives initialization and shuffling
    params :  SystemParams
       system parameters
    init_params :  FnnParams, optional
       start from these parameters instead of a random initialization

    Returns
    -------
    tuple[FnnParams, TrainingHistory]
       trained parameters and the per-step history

    """
    if config.mode == "sl" and graphs.label_w_norm is None:
        raise ValueError("supervised training requires labels")

    seed_init, seed_shuffle = np.random.SeedSequence(config.seed).spawn(2)
    fnn_params = (
        FnnParams.init(
            config.layer_widths, seed_init, config.activation, config.logit_scale
        )
        if init_params is None
        else init_params
    )
    rng = np.random.default_rng(seed_shuffle)
    history = TrainingHistory(config.mode)

    step = 0
    for epoch in range(config.epochs):
        perm = rng.permutation(len(graphs))
        for start in range(0, perm.size, config.batch_size):
            batch = graphs.take(perm[start : start + config.batch_size])
            loss, grad, output = loss_and_grad(batch, fnn_params, config.mode, params)
            history.append(step, epoch, _normalized_rate(output), loss)
            fnn_params = sgd_step(fnn_params, grad, config.learning_rate)
            step += 1

        summary = history.epoch_means().iloc[-1]
        logger.info(
            "%s epoch %d: loss=%.6g, normalized rate=%.4f",
            config.mode,
            epoch,
            summary["loss"],
            summary["normalized_avg_sum_secrecy_rate"],
        )

    return fnn_params, history
