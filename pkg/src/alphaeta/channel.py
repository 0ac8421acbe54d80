"""Classical phase-noise channel.

A sent position ``j`` is received as ``(j + w) mod M`` with Gaussian
``w`` of standard deviation ``sigma = M / (4*pi*sqrt(eta*N))``.  With
deliberate signal randomisation (DSR) a uniform offset on
``[-M/4, M/4)`` is added as well.  Received positions are real numbers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .errors import InvalidParameterError
from .keystream import bits_per_symbol


class RegimeWarning(UserWarning):
    """Parameters fall outside ``M >> sigma >> 1``, where the closed forms are approximations."""


@dataclass(frozen=True)
class ChannelParams:
    M: int
    N: float
    eta: float = 1.0
    dsr_enabled: bool = False
    dsr_sigma_zero: bool = False

    def __post_init__(self):
        bits_per_symbol(self.M)
        if not self.N > 0 or not math.isfinite(self.N):
            raise InvalidParameterError(f"mean photon number N must be > 0, got {self.N!r}")
        if not 0 < self.eta <= 1:
            raise InvalidParameterError(f"efficiency eta must be in (0, 1], got {self.eta!r}")
        if self.dsr_sigma_zero and not self.dsr_enabled:
            raise InvalidParameterError("dsr_sigma_zero requires dsr_enabled")

    @classmethod
    def from_sigma(cls, M: int, sigma: float, **kw) -> "ChannelParams":
        """Parameters with ``eta=1`` and ``N`` solved so that ``sigma`` comes out as given."""
        if not sigma > 0:
            raise InvalidParameterError("sigma must be > 0")
        return cls(M=M, N=(M / (4 * math.pi * sigma)) ** 2, eta=1.0, **kw)

    @classmethod
    def from_alpha(cls, M: int, alpha: float, **kw) -> "ChannelParams":
        return cls(M=M, N=(alpha / 2) ** 2, eta=1.0, **kw)

    @property
    def effective_photons(self) -> float:
        return self.eta * self.N

    @property
    def sigma(self) -> float:
        return self.M / (4 * math.pi * math.sqrt(self.eta * self.N))

    @property
    def noise_sigma(self) -> float:
        """Standard deviation actually applied to ``w`` (0 when DSR forces it off)."""
        return 0.0 if self.dsr_sigma_zero else self.sigma

    @property
    def alpha(self) -> float:
        return 2 * math.sqrt(self.eta * self.N)

    @property
    def in_regime(self) -> bool:
        s = self.sigma
        return self.M / s >= 16 and s >= 2

    def check_regime(self) -> bool:
        ok = self.in_regime
        if not ok:
            warnings.warn(
                f"sigma={self.sigma:.4g} with M={self.M} is outside M >> sigma >> 1 "
                "(need M/sigma >= 16 and sigma >= 2); closed forms are approximate",
                RegimeWarning,
                stacklevel=2,
            )
        return ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(sigma=self.sigma, alpha=self.alpha)
        return d


def sigma(params: ChannelParams) -> float:
    return params.sigma


def compose_eta(factors: Iterable[float]) -> float:
    eta = 1.0
    for f in factors:
        f = float(f)
        if not 0 < f <= 1:
            raise InvalidParameterError(f"efficiency factor {f!r} outside (0, 1]")
        eta *= f
    return eta


def transmit(j, params: ChannelParams, rng: np.random.Generator):
    """Noisy reception of ``j`` (scalar or array) through the channel.

    Noise is drawn first, then the DSR offset, both with the shape of ``j``.
    Give Bob and Eve separate ``rng`` streams so their noise is independent.
    """
    j = np.asarray(j, dtype=np.float64)
    M = params.M
    if np.any((j < 0) | (j >= M)):
        raise InvalidParameterError(f"sent symbol out of range [0, {M})")
    out = j.copy()
    if not params.dsr_sigma_zero:
        out += rng.normal(0.0, params.sigma, size=j.shape)
    if params.dsr_enabled:
        out += rng.uniform(-M / 4, M / 4, size=j.shape)
    out = np.mod(out, M)
    # x mod M can round up to M for tiny negative x
    out[out >= M] = 0.0
    return out.item() if out.ndim == 0 else out


def wrapped_deviation(received, sent, M: int):
    """Deviation ``received - sent`` mapped to ``(-M/2, M/2]``."""
    d = np.mod(np.asarray(received, dtype=np.float64) - sent, M)
    return np.where(d > M / 2, d - M, d)
