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
"""Physical model of the uplink with a mobile eavesdropper.

All quantities are SI: watts, hertz, meters and bit/s. The data rate of a
link with bandwidth W is

    R(W) = W log2(1 + xi / W),   xi = P d^(-alpha) g / N_0,

where xi (in Hz) combines transmit power, path loss, small-scale gain and
noise density. The secrecy rate is the positive part of the difference
between the rate towards the base station and the rate towards the
eavesdropper.
"""

from __future__ import annotations

__all__ = [
    "ChannelSample",
    "SystemParams",
    "UserChannel",
    "data_rate",
    "perturb_eve_csi",
    "perturb_sample_eve_csi",
    "sample_channels",
    "secrecy_rate",
    "secrecy_rate_deriv",
    "secrecy_rate_deriv_xi",
    "secrecy_rate_second_deriv",
    "secrecy_rate_second_deriv_xi",
    "secrecy_rate_xi",
    "xi",
]

from collections.abc import Sequence
from dataclasses import dataclass, fields, replace
from math import isfinite, log

import numpy as np

# - global parameters ---------------------------------
LN2 = log(2.0)
MIN_DISTANCE_M = 1e-3
PERTURB_FLOOR = 1e-9

SeedLike = int | Sequence[int]


# - class definitions ----------------------------------
@dataclass(frozen=True, slots=True)
class SystemParams:
    """Physical constants and bandwidth budget of the system.

    Parameters
    ----------
    tx_power_w :  float
       transmit power of each user [W]
    total_bandwidth_hz :  float
       bandwidth budget of the base station [Hz]
    noise_density_w_per_hz :  float
       single-sided noise spectral density [W/Hz]
    path_loss_exp :  float
       path-loss exponent
    min_secrecy_rate_bps :  float
       secrecy-rate threshold of a scheduled user [bit/s]
    area_half_width_m :  float
       users and eavesdropper are placed in [-a, a]^2 [m]

    """

    tx_power_w: float = 10 ** ((23 - 30) / 10)
    total_bandwidth_hz: float = 10e6
    noise_density_w_per_hz: float = 10 ** ((-174 - 30) / 10)
    path_loss_exp: float = 3.0
    min_secrecy_rate_bps: float = 0.8e6
    area_half_width_m: float = 100.0

    def __post_init__(self: SystemParams) -> None:
        """Check that all parameters are strictly positive."""
        for fld in fields(self):
            value = getattr(self, fld.name)
            if not (isfinite(value) and value > 0):
                raise ValueError(f"{fld.name} must be strictly positive")

    def asdict(self: SystemParams) -> dict[str, float]:
        """Return parameters as dictionary."""
        return {fld.name: float(getattr(self, fld.name)) for fld in fields(self)}


@dataclass(frozen=True, slots=True)
class UserChannel:
    """Channel state information of one user: h_u = (d_B, d_E, g_B, g_E)."""

    d_bs_m: float
    d_eve_m: float
    g_bs: float
    g_eve: float

    def __post_init__(self: UserChannel) -> None:
        """Check distances and gains."""
        if not (self.d_bs_m > 0 and self.d_eve_m > 0):
            raise ValueError("distances must be strictly positive")
        if not (self.g_bs >= 0 and self.g_eve >= 0):
            raise ValueError("gains must be non-negative")


@dataclass(frozen=True, slots=True)
class ChannelSample:
    """Channel state information of all users of one sample."""

    users: tuple[UserChannel, ...]

    def __post_init__(self: ChannelSample) -> None:
        """Check that the sample holds at least one user."""
        if len(self.users) < 1:
            raise ValueError("a channel sample needs at least one user")

    def __len__(self: ChannelSample) -> int:
        """Return number of users."""
        return len(self.users)

    def as_array(self: ChannelSample) -> np.ndarray:
        """Return CSI as array with columns (d_bs, d_eve, g_bs, g_eve)."""
        return np.array(
            [(x.d_bs_m, x.d_eve_m, x.g_bs, x.g_eve) for x in self.users],
            dtype=float,
        )

    @classmethod
    def from_array(cls: type[ChannelSample], csi: np.ndarray) -> ChannelSample:
        """Create a sample from an array with columns (d_bs, d_eve, g_bs, g_eve)."""
        return cls(tuple(UserChannel(*map(float, row)) for row in np.atleast_2d(csi)))

    def xi_bs(self: ChannelSample, params: SystemParams) -> np.ndarray:
        """Return xi of the legitimate links [Hz]."""
        csi = self.as_array()
        return xi(csi[:, 0], csi[:, 2], params)

    def xi_eve(self: ChannelSample, params: SystemParams) -> np.ndarray:
        """Return xi of the wiretap links [Hz]."""
        csi = self.as_array()
        return xi(csi[:, 1], csi[:, 3], params)


# - vectorized kernels ---------------------------------
def xi(
    d_m: np.ndarray | float, gain: np.ndarray | float, params: SystemParams
) -> np.ndarray:
    """Return P d^(-alpha) g / N_0 [Hz]."""
    d_m = np.asarray(d_m, dtype=float)
    if np.any(d_m <= 0):
        raise ValueError("distance must be strictly positive")

    return (
        params.tx_power_w
        * d_m ** (-params.path_loss_exp)
        * np.asarray(gain, dtype=float)
        / params.noise_density_w_per_hz
    )


def _rate_xi(bandwidth_hz: np.ndarray, xi_hz: np.ndarray) -> np.ndarray:
    """Return W log2(1 + xi/W), continued by 0 at W = 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        res = bandwidth_hz * np.log1p(xi_hz / bandwidth_hz) / LN2

    return np.where(bandwidth_hz > 0, res, 0.0)


def secrecy_rate_xi(
    bandwidth_hz: np.ndarray | float,
    xi_bs: np.ndarray | float,
    xi_eve: np.ndarray | float,
    clamp: bool = True,
) -> np.ndarray:
    """Return secrecy rate [bit/s] of links given by xi, element-wise.

    Parameters
    ----------
    bandwidth_hz :  array_like
       allocated bandwidth, must be non-negative
    xi_bs, xi_eve :  array_like
       xi of the legitimate and wiretap links
    clamp :  bool, default=True
       apply [x]^+; without clamp the difference of the rates is returned

    """
    bandwidth_hz = np.asarray(bandwidth_hz, dtype=float)
    if np.any(bandwidth_hz < 0):
        raise ValueError("bandwidth must be non-negative")

    xi_bs = np.asarray(xi_bs, dtype=float)
    xi_eve = np.asarray(xi_eve, dtype=float)
    # log1p difference is exact when both links are identical
    with np.errstate(divide="ignore", invalid="ignore"):
        res = (
            bandwidth_hz
            * (np.log1p(xi_bs / bandwidth_hz) - np.log1p(xi_eve / bandwidth_hz))
            / LN2
        )
    res = np.where(bandwidth_hz > 0, res, 0.0)

    return np.maximum(res, 0.0) if clamp else res


def secrecy_rate_deriv_xi(
    bandwidth_hz: np.ndarray | float,
    xi_bs: np.ndarray | float,
    xi_eve: np.ndarray | float,
) -> np.ndarray:
    """Return first derivative of the (unclamped) secrecy rate [bit/s/Hz]."""
    ww = np.asarray(bandwidth_hz, dtype=float)
    if np.any(ww <= 0):
        raise ValueError("bandwidth must be strictly positive")

    xb = np.asarray(xi_bs, dtype=float)
    xe = np.asarray(xi_eve, dtype=float)
    return (
        np.log1p(xb / ww) - np.log1p(xe / ww) + (xe - xb) * ww / ((ww + xb) * (ww + xe))
    ) / LN2


def secrecy_rate_second_deriv_xi(
    bandwidth_hz: np.ndarray | float,
    xi_bs: np.ndarray | float,
    xi_eve: np.ndarray | float,
) -> np.ndarray:
    """Return second derivative of the (unclamped) secrecy rate [bit/s/Hz^2]."""
    ww = np.asarray(bandwidth_hz, dtype=float)
    if np.any(ww <= 0):
        raise ValueError("bandwidth must be strictly positive")

    xb = np.asarray(xi_bs, dtype=float)
    xe = np.asarray(xi_eve, dtype=float)
    return (
        (xe - xb)
        * ((xe + xb) * ww + 2 * xe * xb)
        / (LN2 * (ww + xb) ** 2 * (ww + xe) ** 2)
    )


# - main functions -------------------------------------
def sample_channels(
    rng_seed: SeedLike, num_users: int, params: SystemParams
) -> ChannelSample:
    """Draw user and eavesdropper positions and Rayleigh gains.

    The base station is at the origin, users and eavesdropper are uniformly
    distributed in the square [-a, a]^2, and the gains are exponentially
    distributed with mean 1. The eavesdropper is redrawn for every sample.

    Parameters
    ----------
    rng_seed :  int | Sequence[int]
       seed of the random generator
    num_users :  int
       number of users U
    params :  SystemParams
       system parameters

    Returns
    -------
    ChannelSample

    """
    if num_users < 1:
        raise ValueError("num_users must be at least 1")

    rng = np.random.default_rng(rng_seed)
    half = params.area_half_width_m
    users_xy = rng.uniform(-half, half, size=(num_users, 2))
    eve_xy = rng.uniform(-half, half, size=2)
    g_bs = rng.exponential(1.0, size=num_users)
    g_eve = rng.exponential(1.0, size=num_users)

    d_bs = np.maximum(np.hypot(users_xy[:, 0], users_xy[:, 1]), MIN_DISTANCE_M)
    d_eve = np.maximum(
        np.hypot(users_xy[:, 0] - eve_xy[0], users_xy[:, 1] - eve_xy[1]),
        MIN_DISTANCE_M,
    )
    return ChannelSample.from_array(np.column_stack((d_bs, d_eve, g_bs, g_eve)))


def data_rate(
    bandwidth_hz: float, d_m: float, gain: float, params: SystemParams
) -> float:
    """Return Shannon rate W log2(1 + P d^-alpha g / (N_0 W)) [bit/s]."""
    if bandwidth_hz < 0:
        raise ValueError("bandwidth must be non-negative")

    return float(_rate_xi(np.asarray(bandwidth_hz, dtype=float), xi(d_m, gain, params)))


def secrecy_rate(bandwidth_hz: float, ch: UserChannel, params: SystemParams) -> float:
    """Return secrecy rate [R_B - R_E]^+ of one user [bit/s]."""
    return float(
        secrecy_rate_xi(
            bandwidth_hz,
            xi(ch.d_bs_m, ch.g_bs, params),
            xi(ch.d_eve_m, ch.g_eve, params),
        )
    )


def secrecy_rate_deriv(
    bandwidth_hz: float, ch: UserChannel, params: SystemParams
) -> float:
    """Return closed-form dR_S/dW of a scheduled user [bit/s/Hz]."""
    return float(
        secrecy_rate_deriv_xi(
            bandwidth_hz,
            xi(ch.d_bs_m, ch.g_bs, params),
            xi(ch.d_eve_m, ch.g_eve, params),
        )
    )


def secrecy_rate_second_deriv(
    bandwidth_hz: float, ch: UserChannel, params: SystemParams
) -> float:
    """Return closed-form d^2R_S/dW^2 of a scheduled user [bit/s/Hz^2]."""
    return float(
        secrecy_rate_second_deriv_xi(
            bandwidth_hz,
            xi(ch.d_bs_m, ch.g_bs, params),
            xi(ch.d_eve_m, ch.g_eve, params),
        )
    )


def perturb_eve_csi(
    ch: UserChannel, uncertainty_frac: float, rng_seed: SeedLike
) -> UserChannel:
    """Return a copy of the channel with uncertain eavesdropper CSI.

    Distance and gain towards the eavesdropper are each multiplied by
    (1 + eps), eps uniform in [-f, f], independently. The legitimate link is
    untouched.

    Parameters
    ----------
    ch :  UserChannel
       true channel
    uncertainty_frac :  float
       relative uncertainty f, in [0, 1]
    rng_seed :  int | Sequence[int]
       seed of the random generator

    """
    if not 0 <= uncertainty_frac <= 1:
        raise ValueError("uncertainty_frac must be in [0, 1]")

    if uncertainty_frac == 0:
        return ch

    eps = np.random.default_rng(rng_seed).uniform(
        -uncertainty_frac, uncertainty_frac, size=2
    )
    return replace(
        ch,
        d_eve_m=max(ch.d_eve_m * (1 + eps[0]), PERTURB_FLOOR * ch.d_eve_m),
        g_eve=max(ch.g_eve * (1 + eps[1]), PERTURB_FLOOR * ch.g_eve),
    )


def perturb_sample_eve_csi(
    sample: ChannelSample, uncertainty_frac: float, rng_seed: SeedLike
) -> ChannelSample:
    """Apply `perturb_eve_csi` to every user with independent streams."""
    base = [int(x) for x in np.atleast_1d(rng_seed)]
    return ChannelSample(
        tuple(
            perturb_eve_csi(ch, uncertainty_frac, [*base, ii])
            for ii, ch in enumerate(sample.users)
        )
    )
