import math

import numpy as np
import pytest
from scipy import integrate, stats

from alphaeta import wrapped
from oracles import brute_pdf


def brute_dsr_pdf(x, sigma, M):
    q = M / 4
    return integrate.quad(lambda b: brute_pdf(x - b, sigma, M) * 2 / M, -q, q, epsabs=1e-13)[0]


@pytest.mark.parametrize("sigma, M", [(0.5, 16), (1.5, 16), (7.9, 16), (8.1, 16), (30.0, 16),
                                      (5.154, 4096)])
def test_pdf_matches_image_sum(sigma, M):
    x = np.linspace(-M, M, 97)
    np.testing.assert_allclose(wrapped.pdf(x, sigma, M), brute_pdf(x, sigma, M),
                               rtol=1e-9, atol=1e-300)


@pytest.mark.parametrize("sigma, M", [(1.5, 16), (12.0, 16)])
def test_pdf_normalised(sigma, M):
    total = integrate.quad(lambda x: wrapped.pdf(x, sigma, M), -M / 2, M / 2, limit=200)[0]
    assert total == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("sigma", [0.7, 1.5, 9.0, 40.0])
def test_bin_mass_matches_quadrature(sigma):
    M = 16
    for lo, hi, c in [(0, 1, 0.3), (7.5, 8.5, 15.9), (3, 11, 2.0), (15.5, 16.5, 0.0)]:
        want = integrate.quad(lambda x: brute_pdf(x - c, sigma, M), lo, hi, epsabs=1e-14)[0]
        assert wrapped.bin_mass(lo, hi, c, sigma, M) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("sigma", [0.5, 2.0, 10.0])
def test_unit_bins_sum_to_one(sigma):
    m = np.arange(16.0)
    assert wrapped.bin_mass(m - 0.5, m + 0.5, 3.7, sigma, 16).sum() == pytest.approx(1, abs=1e-13)
    assert wrapped.dsr_bin_mass(m - 0.5, m + 0.5, 3.7, sigma, 16).sum() == pytest.approx(1, abs=1e-13)


def test_far_tail_mass_positive():
    # 30 sigma out: resolved, not lost to 1 - Phi cancellation
    m = wrapped.bin_mass(30.0, 31.0, 0.0, 1.0, 4096)
    assert m == pytest.approx(stats.norm.sf(30) - stats.norm.sf(31), rel=1e-9)


@pytest.mark.parametrize("sigma", [0.8, 2.0, 12.0])
def test_dsr_pdf_matches_convolution(sigma):
    M = 16
    for x in (-7.9, -4.0, -1.0, 0.0, 3.99, 4.01, 6.5):
        assert math.exp(wrapped.dsr_logpdf(x, sigma, M)) == pytest.approx(
            brute_dsr_pdf(x, sigma, M), rel=1e-8)


@pytest.mark.parametrize("sigma", [0.8, 12.0])
def test_dsr_bin_mass_matches_quadrature(sigma):
    M = 16
    for lo, hi, c in [(0, 1, 0.0), (3.5, 4.5, 0.0), (10, 13, 7.2)]:
        want = integrate.quad(lambda x: brute_dsr_pdf(x - c, sigma, M), lo, hi, epsabs=1e-12)[0]
        assert wrapped.dsr_bin_mass(lo, hi, c, sigma, M) == pytest.approx(want, abs=1e-9)


def test_dsr_zero_sigma_is_box():
    M = 16
    x = np.array([-4.0, -3.99, 3.99, 4.0, 8.0])
    lp = wrapped.dsr_logpdf(x, 0.0, M)
    assert np.array_equal(np.isfinite(lp), [True, True, True, False, False])
    assert wrapped.dsr_bin_mass(3.5, 4.5, 0.0, 0.0, M) == pytest.approx(0.5 * 2 / M)
    assert wrapped.dsr_bin_mass(-4.5, -3.5, 0.0, 0.0, M) == pytest.approx(0.5 * 2 / M)
