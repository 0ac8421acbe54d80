"""Entropy bookkeeping for the exposed-key analysis.

All entropies are in bits.  The closed forms assume ``M >> sigma >> 1``;
the Monte-Carlo and exact-enumeration routines here are the independent
checks on them.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import wrapped
from .channel import ChannelParams, transmit
from .errors import InfeasibleSizeError, InvalidParameterError
from .keystream import SecretKey, basis_matrix, bits_per_symbol, default_taps
from .protocol import bob_decode, encode_arrays, encode_symbol, eve_naive_decode

LOG2_2PIE = math.log2(2 * math.pi * math.e)


@dataclass
class Posterior:
    probs: np.ndarray
    label: str = "symbol"

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise InvalidParameterError("posterior must be a non-empty vector")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise InvalidParameterError("posterior entries must be >= 0 and sum to 1")
        self.probs = p

    @classmethod
    def from_weights(cls, w, label="symbol") -> "Posterior":
        w = np.asarray(w, dtype=np.float64)
        return cls(w / w.sum(), label)

    @classmethod
    def from_log_weights(cls, logw, label="key") -> "Posterior":
        logw = np.asarray(logw, dtype=np.float64)
        w = np.exp(logw - logw.max())
        return cls(w / w.sum(), label)

    @classmethod
    def uniform(cls, n: int, label="symbol") -> "Posterior":
        return cls(np.full(n, 1.0 / n), label)

    def entropy(self) -> float:
        return entropy(self)


def entropy(p) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``."""
    p = p.probs if isinstance(p, Posterior) else np.asarray(p, dtype=np.float64)
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def entropy_rows(P) -> np.ndarray:
    P = np.asarray(P, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(P > 0, P * np.log2(P), 0.0)
    return -t.sum(axis=-1)


def _bin_masses(lo, hi, center, params: ChannelParams):
    if params.dsr_enabled:
        return wrapped.dsr_bin_mass(lo, hi, center, params.noise_sigma, params.M)
    return wrapped.bin_mass(lo, hi, center, params.sigma, params.M)


def symbol_posterior(j_received: float, params: ChannelParams) -> Posterior:
    """Eve's distribution over the sent position given one received value.

    Each position ``m`` gets the channel probability mass of the unit bin
    ``[m - 1/2, m + 1/2)`` around the received value.
    """
    m = np.arange(params.M, dtype=np.float64)
    return Posterior.from_weights(_bin_masses(m - 0.5, m + 0.5, j_received, params))


def posterior_entropies(j_received, params: ChannelParams, chunk: int = 2048) -> np.ndarray:
    """``entropy(symbol_posterior(y))`` for many ``y`` at once.

    Only bins within ``12 sigma`` of ``y`` are evaluated when that window is
    smaller than the circle; the mass outside is below 1e-32.
    """
    y = np.atleast_1d(np.asarray(j_received, dtype=np.float64))
    M = params.M
    half = math.ceil(12 * params.sigma) + 2
    if params.dsr_enabled or 2 * half + 1 >= M:
        offsets = None
    else:
        offsets = np.arange(-half, half + 1, dtype=np.float64)
    out = np.empty(y.size)
    for s in range(0, y.size, chunk):
        yc = y[s:s + chunk, None]
        m = np.arange(M, dtype=np.float64)[None, :] if offsets is None else np.floor(yc + 0.5) + offsets
        w = _bin_masses(m - 0.5, m + 0.5, yc, params)
        out[s:s + chunk] = entropy_rows(w / w.sum(axis=1, keepdims=True))
    return out


def info_gain_closed_form(params: ChannelParams) -> float:
    """``log2(M / (sigma sqrt(2 pi e)))`` bits gained on the symbol per measurement."""
    return math.log2(params.M / params.sigma) - 0.5 * LOG2_2PIE


def info_gain_approx(params: ChannelParams) -> float:
    return 0.5 * math.log2(params.effective_photons) + 1.6


@dataclass
class InfoReport:
    h0: float
    h1: float
    gain_per_symbol: float
    gain_approx: float
    U: float
    n0: float
    alpha: float
    L: int
    sigma: float
    in_regime: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(self.n0):
            d["n0"] = None
        return d


def key_rate_and_unicity(params: ChannelParams, L: int) -> InfoReport:
    if L < 1:
        raise InvalidParameterError("L must be >= 1")
    h0 = math.log2(params.M)
    # differential entropy can go negative or exceed log2 M outside the regime
    h1 = min(max(math.log2(params.sigma) + 0.5 * LOG2_2PIE, 0.0), h0)
    gain = h0 - h1
    U = max(gain - 1.0, 0.0)
    return InfoReport(
        h0=h0, h1=h1, gain_per_symbol=gain, gain_approx=info_gain_approx(params),
        U=U, n0=L / U if U > 0 else math.inf, alpha=params.alpha, L=L,
        sigma=params.sigma, in_regime=params.in_regime,
    )


def mc_info_gain(params: ChannelParams, trials: int, rng: np.random.Generator):
    """Mean and standard error of ``H0 - H(posterior)`` over random sent symbols."""
    j = rng.integers(0, params.M, size=trials)
    y = transmit(j, params, rng)
    g = math.log2(params.M) - posterior_entropies(y, params)
    return float(g.mean()), float(g.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0


# -- exact enumeration oracles -------------------------------------------------

def _grid(M: int, resolution: int):
    lo = np.arange(M * resolution, dtype=np.float64) / resolution
    return lo, lo + 1.0 / resolution


def exact_symbol_mutual_info(params: ChannelParams, resolution: int = 8) -> float:
    """``I(J; J')`` for uniform ``J`` with ``J'`` binned at ``1/resolution``."""
    lo, hi = _grid(params.M, resolution)
    p0 = _bin_masses(lo, hi, 0.0, params)
    # rotating by whole symbols leaves the per-sub-bin column sums unchanged
    col = p0.reshape(params.M, resolution).sum(axis=0)
    h_marg = math.log2(params.M) + entropy(col / col.sum())
    return h_marg - entropy(p0)


def _mi_from_counts(N: np.ndarray) -> float:
    """Mutual information of a joint count table, exact zero for independent counts."""
    N = np.asarray(N, dtype=np.int64)
    total = int(N.sum())
    expected = N.sum(axis=1, keepdims=True) * N.sum(axis=0, keepdims=True)
    nz = N > 0
    ratio = (N * total)[nz] / np.broadcast_to(expected, N.shape)[nz]
    return float((N[nz] / total * np.log2(ratio)).sum())


@dataclass
class ExactMI:
    alpha_eta: float
    additive: float
    n_symbols: int
    plaintext_known: bool
    resolution: int


def additive_key_mutual_info(L: int, taps: Sequence[int] | None, n_bits: int,
                             budget: int = 1 << 26) -> float:
    """``I(K; C)`` for the XOR cipher with a uniform unknown message, by enumeration."""
    taps = default_taps(L) if taps is None else taps
    n_keys = (1 << L) - 1
    if n_keys * (1 << n_bits) > budget:
        raise InfeasibleSizeError(
            f"additive enumeration needs {n_keys} keys x 2^{n_bits} messages; shrink L or n")
    seeds = np.arange(1, n_keys + 1, dtype=np.uint64)
    if n_bits == 0:
        return 0.0
    R = basis_matrix(seeds, taps, L, n_bits, 4)
    r_int = R @ (1 << np.arange(n_bits - 1, -1, -1, dtype=np.int64))
    msgs = np.arange(1 << n_bits, dtype=np.int64)
    c = r_int[:, None] ^ msgs[None, :]
    counts = np.zeros((n_keys, 1 << n_bits), dtype=np.int64)
    np.add.at(counts, (np.repeat(np.arange(n_keys), msgs.size), c.ravel()), 1)
    return _mi_from_counts(counts)


def _symbol_tables(params: ChannelParams, resolution: int):
    """Observation-bin masses for every (basis, bit) pair, shape ``(2, M/2, G)``."""
    M = params.M
    lo, hi = _grid(M, resolution)
    k = np.arange(M // 2)
    out = np.empty((2, M // 2, lo.size))
    for b in (0, 1):
        j = np.asarray(encode_symbol(k, np.full_like(k, b), M), dtype=np.float64)
        out[b] = _bin_masses(lo[None, :], hi[None, :], j[:, None], params)
    return out


def exact_key_mutual_info(L: int, taps: Sequence[int] | None, params: ChannelParams,
                          n_symbols: int, resolution: int = 4, plaintext_known: bool = False,
                          max_cells: int = 1 << 24) -> ExactMI:
    """``I(K; J'_1..J'_n)`` by full enumeration over keys and binned observations.

    Keys are uniform over the ``2^L - 1`` nonzero seeds and message bits are
    iid uniform.  With ``plaintext_known`` the result is ``I(K; J' | B)``.
    The additive-cipher figure for ``n_symbols`` ciphertext bits is included.
    """
    if L > 16:
        raise InfeasibleSizeError(f"key space 2^{L} exceeds the 2^16 enumeration limit")
    M = params.M
    half = M // 2
    G = M * resolution
    if G ** n_symbols > max_cells:
        raise InfeasibleSizeError(
            f"observation grid {G}^{n_symbols} exceeds {max_cells} cells; "
            "shrink M, n_symbols or resolution")
    taps = default_taps(L) if taps is None else taps
    additive = additive_key_mutual_info(L, taps, n_symbols)
    if n_symbols == 0:
        return ExactMI(0.0, additive, 0, plaintext_known, resolution)

    seeds = np.arange(1, 1 << L, dtype=np.uint64)
    K = basis_matrix(seeds, taps, L, n_symbols, M)
    W = np.zeros((half,) * n_symbols)
    np.add.at(W, tuple(K.T), 1.0)
    W /= W.sum()
    tables = _symbol_tables(params, resolution)
    H_cond = entropy_rows(tables)  # (2, M/2)

    mixed = tables.mean(axis=0)
    marginals = [W.sum(axis=tuple(a for a in range(n_symbols) if a != q))
                 for q in range(n_symbols)]

    def cond_entropy(bits):
        rows = [H_cond[b] for b in bits] if bits else [entropy_rows(mixed)] * n_symbols
        return float(sum(m @ h for m, h in zip(marginals, rows)))

    def joint_entropy(bits):
        p = W
        for q in range(n_symbols):
            p = np.tensordot(p, tables[bits[q]] if bits else mixed, axes=([0], [0]))
        return entropy(p.ravel())

    if plaintext_known:
        mi = 0.0
        for m in range(1 << n_symbols):
            bits = [(m >> (n_symbols - 1 - q)) & 1 for q in range(n_symbols)]
            mi += joint_entropy(bits) - cond_entropy(bits)
        mi /= 1 << n_symbols
    else:
        mi = joint_entropy(None) - cond_entropy(None)
    return ExactMI(mi, additive, n_symbols, plaintext_known, resolution)


# -- bit error rates -----------------------------------------------------------

def bob_ber_analytic(params: ChannelParams) -> float:
    """Probability that the total wrapped offset leaves the half-plane ``|x| < M/4``."""
    q = params.M / 4
    return float(1.0 - _bin_masses(-q, q, 0.0, params))


def _signal_bits(M: int) -> np.ndarray:
    r = np.arange(M)
    return (2 * r // M) ^ (r & 1)


def eve_ber_analytic(params: ChannelParams) -> float:
    """Exact error rate of the keyless decoder for a uniform sent position."""
    M = params.M
    d = np.arange(M, dtype=np.float64)
    p_d = _bin_masses(d - 0.5, d + 0.5, 0.0, params)
    bits = _signal_bits(M)
    mismatch = np.array([np.mean(bits != np.roll(bits, -s)) for s in range(M)])
    return float(p_d @ mismatch)


@dataclass
class BerResult:
    bob_ber: float
    bob_stderr: float
    bob_analytic: float
    eve_ber: float
    eve_stderr: float
    eve_analytic: float
    n_symbols: int

    def to_dict(self) -> dict:
        return asdict(self)


def ber_curves(params: ChannelParams, key: SecretKey, taps: Sequence[int] | None,
               message, bob_rng: np.random.Generator,
               eve_rng: np.random.Generator) -> BerResult:
    """Monte-Carlo bit error rates for Bob's keyed and Eve's keyless decoders.

    One symbol per message bit; Bob and Eve see independent noise draws.
    """
    message = np.asarray(message, dtype=np.int64)
    n_symbols = message.size
    if n_symbols < 1:
        raise InvalidParameterError("need at least one symbol")
    bits_per_symbol(params.M)
    k, j = encode_arrays(key, taps, message, params.M)
    bob = bob_decode(k, transmit(j, params, bob_rng), params.M) != message
    eve = eve_naive_decode(transmit(j, params, eve_rng), params.M) != message
    pb, pe = float(bob.mean()), float(eve.mean())
    return BerResult(
        bob_ber=pb, bob_stderr=math.sqrt(pb * (1 - pb) / n_symbols),
        bob_analytic=bob_ber_analytic(params),
        eve_ber=pe, eve_stderr=math.sqrt(pe * (1 - pe) / n_symbols),
        eve_analytic=eve_ber_analytic(params), n_symbols=n_symbols,
    )
