import math
import warnings

import numpy as np
import pytest
from scipy import stats

from alphaeta import rng as rngmod
from alphaeta.channel import (
    ChannelParams, RegimeWarning, compose_eta, sigma, transmit, wrapped_deviation,
)
from alphaeta.errors import InvalidParameterError


def test_sigma_worked_example():
    p = ChannelParams(4096, 40000, 0.1)
    assert sigma(p) == pytest.approx(4096 / (4 * math.pi * math.sqrt(4000)), rel=1e-12)
    assert sigma(p) == pytest.approx(5.154, abs=5e-4)
    assert p.alpha == pytest.approx(2 * math.sqrt(4000))


def test_sigma_scaling():
    a = sigma(ChannelParams(1024, 100))
    assert sigma(ChannelParams(2048, 100)) == pytest.approx(2 * a)
    assert sigma(ChannelParams(1024, 400)) == pytest.approx(a / 2)
    assert ChannelParams.from_sigma(64, 3.0).sigma == pytest.approx(3.0)
    assert ChannelParams.from_alpha(64, 300).alpha == pytest.approx(300)


def test_compose_eta():
    assert compose_eta([0.1, 0.5, 0.8]) == pytest.approx(0.04)
    assert compose_eta([1.0]) == 1.0
    for bad in ([0.5, 1.5], [0.0], [-0.1]):
        with pytest.raises(InvalidParameterError):
            compose_eta(bad)


@pytest.mark.parametrize("kw", [
    dict(M=6, N=1), dict(M=8, N=0), dict(M=8, N=1, eta=1.5), dict(M=8, N=1, eta=0),
    dict(M=8, N=1, dsr_sigma_zero=True),
])
def test_invalid_params(kw):
    with pytest.raises(InvalidParameterError):
        ChannelParams(**kw)


def test_regime_warning():
    with pytest.warns(RegimeWarning):
        assert not ChannelParams.from_sigma(16, 1.5).check_regime()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert ChannelParams(4096, 40000, 0.1).check_regime()


def test_transmit_deterministic_and_in_range():
    p = ChannelParams.from_sigma(16, 4.0, dsr_enabled=True)
    j = np.arange(16).repeat(100)
    a = transmit(j, p, rngmod.stream(7, "eve-noise"))
    b = transmit(j, p, rngmod.stream(7, "eve-noise"))
    assert np.array_equal(a, b)
    assert a.min() >= 0 and a.max() < 16


def test_huge_photon_number_is_noiseless():
    p = ChannelParams(64, 1e14)
    j = np.arange(64)
    y = transmit(j, p, np.random.default_rng(0))
    assert np.array_equal(np.round(y).astype(int) % 64, j)


def test_deviation_statistics():
    p = ChannelParams(4096, 40000, 0.1)
    j = np.random.default_rng(3).integers(0, 4096, 200_000)
    d = wrapped_deviation(transmit(j, p, np.random.default_rng(4)), j, 4096)
    assert abs(d.mean()) < 4 * p.sigma / math.sqrt(d.size)
    assert d.std() == pytest.approx(p.sigma, rel=0.01)


def test_wrapped_deviation_range():
    d = wrapped_deviation(np.array([0.0, 15.9, 8.0]), np.array([15, 0, 0]), 16)
    np.testing.assert_allclose(d, [1.0, -0.1, 8.0], atol=1e-12)


def test_dsr_zero_is_uniform_half_circle():
    p = ChannelParams(16, 1.0, dsr_enabled=True, dsr_sigma_zero=True)
    j = np.zeros(50_000, dtype=np.int64)
    d = wrapped_deviation(transmit(j, p, np.random.default_rng(9)), j, 16)
    assert d.min() >= -4 and d.max() < 4
    assert stats.kstest(d, stats.uniform(loc=-4, scale=8).cdf).pvalue > 0.01


def test_bob_and_eve_streams_independent():
    p = ChannelParams.from_sigma(4096, 50.0)
    j = np.zeros(100_000, dtype=np.int64)
    a = wrapped_deviation(transmit(j, p, rngmod.stream(0, "bob-noise")), j, 4096)
    b = wrapped_deviation(transmit(j, p, rngmod.stream(0, "eve-noise")), j, 4096)
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / math.sqrt(j.size)


def test_rng_streams_distinct_and_stable():
    a = rngmod.stream(1, "key").integers(0, 1 << 30, 4)
    assert not np.array_equal(a, rngmod.stream(1, "message").integers(0, 1 << 30, 4))
    assert not np.array_equal(a, rngmod.stream(2, "key").integers(0, 1 << 30, 4))
    assert np.array_equal(a, rngmod.stream(1, "key").integers(0, 1 << 30, 4))
