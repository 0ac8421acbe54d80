"""Wrapped-normal densities and bin masses on a circle of circumference ``M``.

Two evaluation regimes:

* ``sigma <= M/2``: explicit sum over image copies ``x + w*M``.  The number
  of images grows with ``sigma/M`` and never drops below +/-3.
* ``sigma > M/2``: the Fourier (theta-series) form, which converges in a
  handful of terms once the density is close to uniform.

Also provides the uniform-half-circle (DSR) smear convolved with the same
noise.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp, ndtr

_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


def _n_images(sigma: float, M: float) -> int:
    return 3 + math.ceil(8.0 * sigma / M)


def _images(sigma, M):
    W = _n_images(sigma, M)
    return np.arange(-W, W + 1, dtype=np.float64) * M


def _fourier_terms(sigma, M):
    r = 2.0 * (math.pi * sigma / M) ** 2
    K = max(1, math.ceil(math.sqrt(40.0 / r)))
    k = np.arange(1, K + 1, dtype=np.float64)
    return k, np.exp(-r * k * k)


def reduce(x, M):
    """Map ``x`` to ``[-M/2, M/2)``."""
    return np.mod(np.asarray(x, dtype=np.float64) + M / 2, M) - M / 2


def logpdf(x, sigma: float, M: float):
    x = reduce(x, M)
    if sigma > M / 2:
        k, rho = _fourier_terms(sigma, M)
        s = 1.0 + 2.0 * np.tensordot(np.cos(2 * np.pi * x[..., None] * k / M), rho, axes=1)
        return np.log(s / M)
    z = (x[..., None] + _images(sigma, M)) / sigma
    return logsumexp(-0.5 * z * z, axis=-1) - math.log(sigma) - _LOG_SQRT_2PI


def pdf(x, sigma: float, M: float):
    return np.exp(logpdf(x, sigma, M))


def _interval_mass(a, b):
    """``Phi(b) - Phi(a)`` without cancellation in the upper tail."""
    return np.where(a > 0, ndtr(-a) - ndtr(-b), ndtr(b) - ndtr(a))


def bin_mass(lo, hi, center, sigma: float, M: float):
    """Probability that ``(center + noise) mod M`` lands in ``[lo, hi)``.

    ``hi - lo`` must not exceed ``M``.  Broadcasts over all arguments.
    """
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    d_lo = reduce(lo - center, M)
    d_hi = d_lo + (hi - lo)
    if sigma > M / 2:
        k, rho = _fourier_terms(sigma, M)
        w = 2 * np.pi * k / M
        s = (np.sin(d_hi[..., None] * w) - np.sin(d_lo[..., None] * w)) / (np.pi * k)
        return (hi - lo) / M + np.tensordot(s, rho, axes=1)
    img = _images(sigma, M)
    a = (d_lo[..., None] + img) / sigma
    b = (d_hi[..., None] + img) / sigma
    return _interval_mass(a, b).sum(axis=-1)


# -- uniform half-circle smear (DSR) --------------------------------------

def _int_phi(x, sigma):
    """Antiderivative of ``Phi(x/sigma)``."""
    z = x / sigma
    return x * ndtr(z) + sigma * np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)


def dsr_logpdf(x, sigma: float, M: float):
    """Log density of ``beta + w`` wrapped, beta ~ U[-M/4, M/4), w ~ N(0, sigma^2)."""
    x = reduce(x, M)
    q = M / 4
    if sigma == 0:
        with np.errstate(divide="ignore"):
            return np.where((x >= -q) & (x < q), math.log(2 / M), -np.inf)
    if sigma > M / 2:
        k, rho = _fourier_terms(sigma, M)
        # Fourier coefficients of the box are sinc-shaped; odd harmonics only survive.
        box = np.sin(2 * np.pi * k * q / M) / (2 * np.pi * k * q / M)
        s = 1.0 + 2.0 * np.tensordot(np.cos(2 * np.pi * x[..., None] * k / M), rho * box, axes=1)
        return np.log(np.maximum(s, 1e-300) / M)
    img = _images(sigma, M)
    a = (x[..., None] + img - q) / sigma
    b = (x[..., None] + img + q) / sigma
    return np.log(np.maximum(_interval_mass(a, b).sum(axis=-1), 1e-300) * 2 / M)


def dsr_bin_mass(lo, hi, center, sigma: float, M: float):
    """Bin probability for the DSR observation ``(center + beta + w) mod M``."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    q = M / 4
    d_lo = reduce(lo - center, M)
    d_hi = d_lo + (hi - lo)
    if sigma == 0:
        total = np.zeros(np.broadcast(d_lo, d_hi).shape)
        for shift in (-M, 0.0, M):
            total += np.clip(np.minimum(d_hi, q + shift) - np.maximum(d_lo, -q + shift), 0, None)
        return total * 2 / M
    img = _images(sigma, M)
    lo_i = d_lo[..., None] + img
    hi_i = d_hi[..., None] + img
    F = lambda x: _int_phi(x + q, sigma) - _int_phi(x - q, sigma)  # noqa: E731
    return ((F(hi_i) - F(lo_i)).sum(axis=-1)) * 2 / M
