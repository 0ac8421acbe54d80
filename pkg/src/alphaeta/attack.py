"""Key recovery from noisy symbol observations.

The eavesdropper ranks every candidate seed by the likelihood of the
received positions.  Each candidate implies a basis sequence through the
LFSR; the likelihood term for a symbol is the channel density at the
implied position, averaged over the unknown message bit when the
plaintext is not known.  A repetition-coded message shares one bit across
each block, which is where redundancy starts to leak the key even under
deliberate signal randomisation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import kernels, rng as rngmod, wrapped
from .channel import ChannelParams, transmit
from .errors import InfeasibleSizeError, InvalidParameterError, NeedsMoreDataError
from .infotheory import Posterior, entropy_rows, key_rate_and_unicity
from .keystream import SecretKey, basis_matrix, default_taps, validate_taps
from .protocol import encode_symbol

_LOG2 = math.log(2.0)


def _logdensity(x, params: ChannelParams):
    if params.dsr_enabled:
        return wrapped.dsr_logpdf(x, params.noise_sigma, params.M)
    return wrapped.logpdf(x, params.sigma, params.M)


def symbol_loglik_tables(observations, params: ChannelParams) -> np.ndarray:
    """``T[b, q, k]``: log density of observation ``q`` if basis ``k`` carried bit ``b``."""
    y = np.asarray(observations, dtype=np.float64)
    M = params.M
    k = np.arange(M // 2)
    out = np.empty((2, y.size, M // 2))
    for b in (0, 1):
        j = np.asarray(encode_symbol(k, np.full_like(k, b), M), dtype=np.float64)
        out[b] = _logdensity(y[:, None] - j[None, :], params)
    return out


def loglik_paths(seeds, observations, params: ChannelParams, taps: Sequence[int], L: int,
                 plaintext=None, repetition: int = 1) -> np.ndarray:
    """Log-likelihood of every seed after each prefix of the observations.

    Returns shape ``(len(seeds), n)``; column ``q`` covers symbols ``0..q``.
    With ``plaintext=None`` each block of ``repetition`` symbols carries one
    unknown uniform bit (``repetition=1`` is an iid uniform message).
    """
    y = np.asarray(observations, dtype=np.float64)
    n = y.size
    if repetition < 1:
        raise InvalidParameterError("repetition must be >= 1")
    K = basis_matrix(seeds, taps, L, n, params.M)
    T = symbol_loglik_tables(y, params)
    if plaintext is not None:
        b = np.asarray(plaintext, dtype=np.int64)[:n]
        if b.size != n:
            raise InvalidParameterError("plaintext shorter than observations")
        return kernels.cumulative_gather(T[b, np.arange(n)], K)
    if repetition == 1:
        return kernels.cumulative_gather(np.logaddexp(T[0], T[1]) - _LOG2, K)

    c0 = kernels.cumulative_gather(T[0], K)
    c1 = kernels.cumulative_gather(T[1], K)
    q = np.arange(n)
    start = (q // repetition) * repetition
    zeros = np.zeros((K.shape[0], 1))
    base0 = np.hstack([zeros, c0])[:, start]
    base1 = np.hstack([zeros, c1])[:, start]
    partial = np.logaddexp(c0 - base0, c1 - base1) - _LOG2
    # completed blocks contribute their final partial value
    ends = np.arange(repetition - 1, n, repetition)
    done = np.hstack([zeros, np.cumsum(partial[:, ends], axis=1)])
    return done[:, q // repetition] + partial


def log_likelihood(candidate: SecretKey | int, observations, params: ChannelParams,
                   taps: Sequence[int] | None = None, L: int | None = None,
                   plaintext=None, repetition: int = 1) -> float:
    """Total log-likelihood of one candidate key for the observed positions."""
    if isinstance(candidate, SecretKey):
        L, seed = candidate.L, candidate.to_int()
    else:
        seed = int(candidate)
        if L is None:
            raise InvalidParameterError("L is required for an integer candidate")
    y = np.asarray(observations, dtype=np.float64)
    if y.size == 0:
        raise InvalidParameterError("need at least one observation")
    taps = default_taps(L) if taps is None else taps
    return float(loglik_paths([seed], y, params, taps, L, plaintext, repetition)[0, -1])


@dataclass
class AttackConfig:
    params: ChannelParams
    g: int
    taps: tuple[int, ...] | None = None
    key_space: np.ndarray | None = None
    plaintext_known: bool = True
    repetition: int = 1
    trials: int = 100
    success_threshold: float = 0.99
    budget: int | None = None
    max_candidates: int = 1 << 16
    sensitivity_thresholds: tuple[float, ...] = (0.9, 0.999)

    def __post_init__(self):
        if self.g < 2:
            raise InvalidParameterError("g must be >= 2")
        self.taps = validate_taps(default_taps(self.g) if self.taps is None else self.taps, self.g)
        if self.key_space is None:
            n = (1 << self.g) - 1
            if n > self.max_candidates:
                raise InfeasibleSizeError(
                    f"2^{self.g}-1 candidates exceed the budget of {self.max_candidates}; "
                    "shrink g or pass a key_space subset")
            self.key_space = np.arange(1, n + 1, dtype=np.uint64)
        else:
            self.key_space = np.unique(np.asarray(self.key_space, dtype=np.uint64))
            if self.key_space.size == 0:
                raise InvalidParameterError("key_space is empty")
            if self.key_space.size > self.max_candidates:
                raise InfeasibleSizeError("key_space exceeds the enumeration budget")
        if self.trials < 1:
            raise InvalidParameterError("trials must be >= 1")
        if not 0 < self.success_threshold < 1:
            raise InvalidParameterError("success_threshold must be in (0, 1)")
        if self.budget is None:
            U = key_rate_and_unicity(self.params, self.g).U
            if U <= 0:
                raise InvalidParameterError("U = 0 for these parameters; give an explicit budget")
            self.budget = math.ceil(4 * self.g / U)

    @property
    def U(self) -> float:
        return key_rate_and_unicity(self.params, self.g).U


def key_posterior(observations, config: AttackConfig, plaintext=None) -> Posterior:
    """Posterior over ``config.key_space`` under a uniform prior."""
    y = np.asarray(observations, dtype=np.float64)
    if y.size == 0:
        return Posterior.uniform(config.key_space.size, "key")
    if config.plaintext_known and plaintext is None:
        raise InvalidParameterError("config says plaintext is known but none was given")
    ll = loglik_paths(config.key_space, y, config.params, config.taps, config.g,
                      plaintext if config.plaintext_known else None, config.repetition)
    return Posterior.from_log_weights(ll[:, -1], "key")


def _posterior_paths(ll: np.ndarray) -> np.ndarray:
    """Column-wise softmax with a leading uniform column for zero observations."""
    P = np.exp(ll - ll.max(axis=0, keepdims=True))
    P /= P.sum(axis=0, keepdims=True)
    return np.hstack([np.full((ll.shape[0], 1), 1.0 / ll.shape[0]), P])


def _first_crossing(p_true: np.ndarray, threshold: float):
    hit = np.flatnonzero(p_true[1:] > threshold)
    return int(hit[0]) + 1 if hit.size else None


@dataclass
class TrialResult:
    true_key: int
    s0: int | None
    s0_unique_ml: int | None
    recovered_key: int
    tie_at_end: bool
    entropy: np.ndarray = field(repr=False)
    p_true: np.ndarray = field(repr=False)
    s0_at: dict = field(default_factory=dict)


@dataclass
class AttackReport:
    g: int
    U: float
    bound_s0: float
    bound_s0_known_plaintext: float
    budget: int
    success_threshold: float
    plaintext_known: bool
    repetition: int
    s0: list
    median_s0: float | None
    success_rate: float
    ratio_to_bound: float | None
    ties_flagged: int
    sensitivity: dict
    mean_entropy: np.ndarray = field(repr=False)
    mean_p_true: np.ndarray = field(repr=False)
    trials: list = field(repr=False, default_factory=list)

    @property
    def recovered_s0(self) -> list[int]:
        return [s for s in self.s0 if s is not None]

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("trials")
        d["mean_entropy"] = self.mean_entropy.tolist()
        d["mean_p_true"] = self.mean_p_true.tolist()
        return d

    def trajectory_rows(self):
        """``(trial, n, entropy_bits)`` rows for CSV export."""
        for t, tr in enumerate(self.trials):
            for n, h in enumerate(tr.entropy):
                yield t, n, float(h)


def run_trial(config: AttackConfig, seed: int, trial: int) -> TrialResult:
    """One seeded attack: random key and message, Eve's noisy view, full ranking."""
    params, g, n = config.params, config.g, config.budget
    krng = rngmod.stream(seed, "attack-key", g, trial)
    true_key = int(config.key_space[krng.integers(config.key_space.size)])
    mrng = rngmod.stream(seed, "message", g, trial)
    r = config.repetition
    message = np.repeat(mrng.integers(0, 2, size=-(-n // r)), r)[:n]
    k = basis_matrix([true_key], config.taps, g, n, params.M)[0]
    j = encode_symbol(k, message, params.M)
    y = transmit(j, params, rngmod.stream(seed, "eve-noise", g, trial))

    ll = loglik_paths(config.key_space, y, params, config.taps, g,
                      message if config.plaintext_known else None, r)
    P = _posterior_paths(ll)
    idx = int(np.searchsorted(config.key_space, true_key))
    p_true = P[idx].copy()

    best = ll.max(axis=0)
    n_best = (ll >= best).sum(axis=0)
    unique_true = (ll[idx] >= best) & (n_best == 1)
    hits = np.flatnonzero(unique_true)
    return TrialResult(
        true_key=true_key,
        s0=_first_crossing(p_true, config.success_threshold),
        s0_unique_ml=int(hits[0]) + 1 if hits.size else None,
        recovered_key=int(config.key_space[int(np.argmax(ll[:, -1]))]),
        tie_at_end=bool(n_best[-1] > 1),
        entropy=entropy_rows(P.T),
        p_true=p_true,
        s0_at={t: _first_crossing(p_true, t) for t in config.sensitivity_thresholds},
    )


def _summarise(s0s, trials):
    rec = [s for s in s0s if s is not None]
    return (len(rec) / trials, float(np.median(rec)) if rec else None)


def measure_s0(config: AttackConfig, seed: int = 0, workers: int = 1) -> AttackReport:
    """Run ``config.trials`` seeded attacks and collect symbols-to-recovery.

    Trials are independent; with ``workers > 1`` they run on a thread pool
    and are merged by trial index, so results do not depend on ``workers``.
    """
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda t: run_trial(config, seed, t), range(config.trials)))
    else:
        results = [run_trial(config, seed, t) for t in range(config.trials)]
    U = config.U
    s0 = [r.s0 for r in results]
    rate, med = _summarise(s0, config.trials)
    bound = config.g / U if U > 0 else math.inf
    sens = {}
    for t in config.sensitivity_thresholds:
        sr, sm = _summarise([r.s0_at[t] for r in results], config.trials)
        sens[str(t)] = {"success_rate": sr, "median_s0": sm}
    return AttackReport(
        g=config.g, U=U, bound_s0=bound, bound_s0_known_plaintext=config.g / (U + 1),
        budget=config.budget, success_threshold=config.success_threshold,
        plaintext_known=config.plaintext_known, repetition=config.repetition,
        s0=s0, median_s0=med, success_rate=rate,
        ratio_to_bound=med / bound if med is not None and math.isfinite(bound) else None,
        ties_flagged=sum(r.tie_at_end for r in results), sensitivity=sens,
        mean_entropy=np.mean([r.entropy for r in results], axis=0),
        mean_p_true=np.mean([r.p_true for r in results], axis=0),
        trials=results,
    )


@dataclass
class SweepFit:
    slope: float
    intercept: float
    r_squared: float


def linear_fit(x, y) -> SweepFit:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return SweepFit(float(slope), float(intercept), r2)


# -- additive baseline -----------------------------------------------------------

def _output_rows(taps: Sequence[int], L: int, stop: int) -> list[int]:
    """GF(2) row of each output bit ``s_t`` over the seed bits, packed MSB = ``s_0``."""
    rows = [1 << (L - 1 - t) for t in range(min(L, stop))]
    for t in range(L, stop):
        r = 0
        for p in taps:
            r ^= rows[t - p]
        rows.append(r)
    return rows


def additive_key_posterior(ciphertext, L: int, taps: Sequence[int] | None = None,
                           plaintext=None) -> Posterior:
    """Posterior over all nonzero ``L``-bit seeds from XOR-cipher bits.

    With an unknown uniform message every ciphertext bit has probability 1/2
    under every key, so the posterior stays uniform.  Known plaintext keeps
    only keys whose running key matches ``c ^ p``.
    """
    taps = validate_taps(default_taps(L) if taps is None else taps, L)
    c = np.asarray(ciphertext, dtype=np.int64)
    seeds = np.arange(1, 1 << L, dtype=np.uint64)
    if c.size == 0:
        return Posterior.uniform(seeds.size, "key")
    R = basis_matrix(seeds, taps, L, c.size, 4)
    if plaintext is None:
        # per bit: sum over b of P(b) [c = r ^ b]
        per_bit = 0.5 * ((R ^ 0) == c).astype(np.float64) + 0.5 * ((R ^ 1) == c)
        logw = np.log(per_bit).sum(axis=1)
    else:
        p = np.asarray(plaintext, dtype=np.int64)[:c.size]
        match = ((R ^ p[None, :]) == c[None, :]).all(axis=1)
        if not match.any():
            raise InvalidParameterError("no key is consistent with the known bits")
        logw = np.where(match, 0.0, -np.inf)
    return Posterior.from_log_weights(logw, "key")


def known_plaintext_attack_additive(ciphertext, plaintext, taps: Sequence[int] | None = None,
                                    L: int | None = None, offset: int = 0) -> SecretKey:
    """Recover the LFSR seed from known plaintext under the XOR cipher.

    ``ciphertext[i]`` and ``plaintext[i]`` sit at keystream position
    ``offset + i``.  Each known bit contributes one linear equation over
    GF(2); ``L`` independent equations pin the seed.
    """
    c = np.asarray(ciphertext, dtype=np.uint8)
    p = np.asarray(plaintext, dtype=np.uint8)
    n = min(c.size, p.size)
    if L is None:
        if taps is None:
            raise InvalidParameterError("need taps or L")
        L = max(taps)
    taps = validate_taps(default_taps(L) if taps is None else taps, L)
    if n < L:
        raise NeedsMoreDataError(f"{n} known bits cannot determine an {L}-bit key")
    r = (c[:n] ^ p[:n]).tolist()
    rows = _output_rows(taps, L, offset + n)[offset:]

    # Gaussian elimination on (row, rhs) pairs
    pivots: dict[int, tuple[int, int]] = {}
    for row, rhs in zip(rows, r):
        for bit, (prow, prhs) in pivots.items():
            if row >> bit & 1:
                row ^= prow
                rhs ^= prhs
        if row == 0:
            if rhs:
                raise InvalidParameterError("known bits are inconsistent with this LFSR")
            continue
        bit = row.bit_length() - 1
        for b2, (prow, prhs) in list(pivots.items()):
            if prow >> bit & 1:
                pivots[b2] = (prow ^ row, prhs ^ rhs)
        pivots[bit] = (row, rhs)
    if len(pivots) < L:
        raise NeedsMoreDataError(f"known bits only give rank {len(pivots)} < {L}")
    seed = 0
    for bit, (_, rhs) in pivots.items():
        seed |= rhs << bit
    return SecretKey.from_int(seed, L)
