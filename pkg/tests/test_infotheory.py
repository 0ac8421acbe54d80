import math

import numpy as np
import pytest
from scipy import integrate, stats

from alphaeta import infotheory as it
from alphaeta import rng as rngmod
from alphaeta.channel import ChannelParams
from alphaeta.errors import InfeasibleSizeError, InvalidParameterError
from alphaeta.keystream import SecretKey, new_generator
from alphaeta.protocol import encode_symbol

from oracles import brute_pdf


def quad_posterior(y, sigma, M):
    w = [integrate.quad(lambda x: brute_pdf(x - y, sigma, M), m - 0.5, m + 0.5,
                        epsabs=1e-14)[0] for m in range(M)]
    w = np.array(w)
    return w / w.sum()


@pytest.mark.parametrize("y, sigma, M", [(3.3, 1.5, 16), (15.8, 2.5, 16), (10.0, 4.0, 32)])
def test_symbol_posterior_matches_quadrature(y, sigma, M):
    p = it.symbol_posterior(y, ChannelParams.from_sigma(M, sigma))
    np.testing.assert_allclose(p.probs, quad_posterior(y, sigma, M), atol=1e-6)


def test_posterior_symmetric_about_received():
    p = it.symbol_posterior(8.0, ChannelParams.from_sigma(16, 2.0)).probs
    np.testing.assert_allclose(p[8 - np.arange(1, 8)], p[8 + np.arange(1, 8)], rtol=1e-12)


def test_posterior_entropies_window_matches_full():
    p = ChannelParams.from_sigma(4096, 5.0)
    y = np.random.default_rng(1).uniform(0, 4096, 20)
    full = [it.symbol_posterior(v, p).entropy() for v in y]
    np.testing.assert_allclose(it.posterior_entropies(y, p), full, atol=1e-10)


def test_noiseless_posterior_is_a_point_mass():
    p = it.symbol_posterior(5.0, ChannelParams(64, 1e14))
    assert p.probs[5] == pytest.approx(1.0) and p.entropy() == pytest.approx(0, abs=1e-9)


def test_entropy_cases():
    assert it.entropy([1.0, 0.0]) == 0.0
    assert it.entropy([0.5, 0.5]) == 1.0
    assert it.Posterior.uniform(4096).entropy() == pytest.approx(12.0)
    with pytest.raises(InvalidParameterError):
        it.Posterior(np.array([0.5, 0.6]))


def test_closed_forms_worked_example():
    p = ChannelParams(4096, 40000, 0.1)
    r = it.key_rate_and_unicity(p, 4400)
    assert r.gain_per_symbol == pytest.approx(7.6, abs=0.05)
    assert r.gain_approx == pytest.approx(7.6, abs=0.05)
    assert r.U == pytest.approx(6.6, abs=0.05)
    assert r.n0 == pytest.approx(668, abs=5)
    assert r.h0 == 12.0


def test_closed_forms_alpha_300():
    r = it.key_rate_and_unicity(ChannelParams.from_alpha(4096, 300), 100)
    assert r.gain_per_symbol == pytest.approx(8.8, abs=0.05)
    assert r.U == pytest.approx(7.8, abs=0.05)


def test_unicity_edge_cases():
    r = it.key_rate_and_unicity(ChannelParams.from_sigma(8, 4.0), 8)
    assert r.U == 0 and math.isinf(r.n0) and r.to_dict()["n0"] is None
    assert 0 <= r.h1 <= r.h0
    p = ChannelParams(4096, 40000, 0.1)
    assert it.key_rate_and_unicity(p, 200).n0 == pytest.approx(2 * it.key_rate_and_unicity(p, 100).n0)


def test_mc_gain_close_to_closed_form():
    p = ChannelParams(4096, 40000, 0.1)
    est, se = it.mc_info_gain(p, 20_000, rngmod.stream(0, "eve-noise"))
    assert est == pytest.approx(it.info_gain_closed_form(p), rel=0.01)


def test_exact_symbol_mi_near_closed_form():
    # finer bins approach I(J; J') of the continuous observation
    p = ChannelParams.from_sigma(64, 2.0)
    assert it.exact_symbol_mutual_info(p, 16) == pytest.approx(it.info_gain_closed_form(p), abs=2e-3)


def _oracle_key_mi_one_symbol(L, params, resolution, known):
    """I(K; J'_1) from the scalar generator and quadrature bin masses."""
    M = params.M
    counts = np.zeros(M // 2)
    for s in range(1, 1 << L):
        counts[new_generator(SecretKey.from_int(s, L)).next_basis(M)] += 1
    pk = counts / counts.sum()
    edges = np.arange(M * resolution + 1) / resolution
    T = np.empty((2, M // 2, M * resolution))
    for b in (0, 1):
        for k in range(M // 2):
            j = encode_symbol(k, b, M)
            T[b, k] = [integrate.quad(lambda x: brute_pdf(x - j, params.sigma, M), a, c)[0]
                       for a, c in zip(edges[:-1], edges[1:])]

    def mi(cond):
        return stats.entropy(pk @ cond, base=2) - pk @ np.array([stats.entropy(r, base=2) for r in cond])

    return 0.5 * (mi(T[0]) + mi(T[1])) if known else mi(0.5 * (T[0] + T[1]))


@pytest.mark.parametrize("known", [False, True])
def test_exact_key_mi_one_symbol_oracle(known):
    p = ChannelParams.from_sigma(8, 0.8)
    got = it.exact_key_mutual_info(5, None, p, 1, resolution=2, plaintext_known=known).alpha_eta
    assert got == pytest.approx(_oracle_key_mi_one_symbol(5, p, 2, known), abs=1e-7)


def test_exact_key_mi_properties(toy):
    L = 6
    vals = [it.exact_key_mutual_info(L, None, toy, n, 2).alpha_eta for n in (1, 2, 3)]
    known = [it.exact_key_mutual_info(L, None, toy, n, 2, plaintext_known=True).alpha_eta
             for n in (1, 2, 3)]
    gain = it.info_gain_closed_form(toy)
    assert all(0 < v for v in vals)
    assert vals[0] <= vals[1] + 1e-12 <= vals[2] + 2e-12
    for n, (u, k) in enumerate(zip(vals, known), start=1):
        assert u <= min(L, n * gain) + 1e-9
        assert k >= u - 1e-12


def test_additive_mi_is_exactly_zero():
    assert it.additive_key_mutual_info(8, None, 8) == 0.0
    assert it.additive_key_mutual_info(10, None, 5) == 0.0
    r = it.exact_key_mutual_info(6, None, ChannelParams.from_sigma(8, 1.0), 2, 2)
    assert r.additive == 0.0 and r.alpha_eta > 0


def test_dsr_noiseless_hides_key():
    p = ChannelParams(16, 1.0, dsr_enabled=True, dsr_sigma_zero=True)
    assert it.exact_key_mutual_info(8, None, p, 2, 4).alpha_eta == pytest.approx(0, abs=1e-12)
    assert it.exact_symbol_mutual_info(p, 4) == pytest.approx(1.0, abs=1e-12)


def test_exact_mi_size_limits(toy):
    with pytest.raises(InfeasibleSizeError):
        it.exact_key_mutual_info(20, (20, 17), toy, 1)
    with pytest.raises(InfeasibleSizeError):
        it.exact_key_mutual_info(6, None, toy, 8, 4)


def test_bob_ber_analytic_matches_normal_tail():
    p = ChannelParams.from_sigma(4096, 256.0)
    assert it.bob_ber_analytic(p) == pytest.approx(2 * stats.norm.sf(4), rel=1e-9)


def test_bob_ber_monte_carlo():
    p = ChannelParams.from_sigma(64, 8.0)
    n = 200_000
    msg = rngmod.stream(0, "message").integers(0, 2, n)
    r = it.ber_curves(p, SecretKey.from_hex("ace1"), None, msg,
                      rngmod.stream(0, "bob-noise"), rngmod.stream(0, "eve-noise"))
    assert abs(r.bob_ber - r.bob_analytic) < 3 * r.bob_stderr
    assert abs(r.eve_ber - r.eve_analytic) < 3 * r.eve_stderr


def test_eve_blind_when_noise_large():
    p = ChannelParams.from_sigma(16, 40.0)
    assert it.eve_ber_analytic(p) == pytest.approx(0.5, abs=1e-6)
    assert it.eve_ber_analytic(ChannelParams(16, 1e14)) == pytest.approx(0, abs=1e-12)


def test_dsr_ber_worse_than_plain():
    plain = ChannelParams(4096, 40000, 0.04)
    dsr = ChannelParams(4096, 40000, 0.04, dsr_enabled=True)
    assert it.bob_ber_analytic(dsr) > 100 * it.bob_ber_analytic(plain)
