"""Running-key generation: a Fibonacci LFSR seeded with the secret key.

The register produces a bit sequence ``s_0, s_1, ...`` obeying

    s_t = XOR_{p in taps} s_{t-p}

with the key bits as ``s_0 .. s_{L-1}``.  Tap positions are the exponents of
the feedback polynomial, so ``taps={4, 3}`` is ``x^4 + x^3 + 1``.  Basis
indices are read from the stream in chunks of ``log2(M/2)`` bits, most
significant bit first.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateSeedError, InvalidParameterError, InvalidTapsError

# Maximal-length tap sets (primitive feedback polynomials).
PRIMITIVE_TAPS: dict[int, tuple[int, ...]] = {
    2: (2, 1),
    3: (3, 2),
    4: (4, 3),
    5: (5, 3),
    6: (6, 5),
    7: (7, 6),
    8: (8, 6, 5, 4),
    9: (9, 5),
    10: (10, 7),
    11: (11, 9),
    12: (12, 6, 4, 1),
    13: (13, 4, 3, 1),
    14: (14, 5, 3, 1),
    15: (15, 14),
    16: (16, 15, 13, 4),
}


def default_taps(L: int) -> tuple[int, ...]:
    try:
        return PRIMITIVE_TAPS[L]
    except KeyError:
        raise InvalidTapsError(
            f"no default primitive taps for L={L}; pass taps explicitly"
        ) from None


def bits_per_symbol(M: int) -> int:
    """Number of running-key bits consumed per symbol, ``log2(M/2)``."""
    if not isinstance(M, (int, np.integer)) or M < 4 or M & (M - 1):
        raise InvalidParameterError(f"M must be a power of two >= 4, got {M!r}")
    return int(M).bit_length() - 2


@dataclass(frozen=True)
class SecretKey:
    """An ``L``-bit key; ``bits[0]`` is the most significant bit."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise InvalidParameterError("key must have at least one bit")
        if any(b not in (0, 1) for b in bits):
            raise InvalidParameterError("key bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @property
    def L(self) -> int:
        return len(self.bits)

    @classmethod
    def from_int(cls, value: int, L: int) -> "SecretKey":
        if L < 1:
            raise InvalidParameterError("L must be >= 1")
        if value < 0 or value >> L:
            raise InvalidParameterError(f"key value {value} does not fit in {L} bits")
        return cls(tuple((value >> (L - 1 - i)) & 1 for i in range(L)))

    @classmethod
    def from_hex(cls, text: str, L: int | None = None) -> "SecretKey":
        text = text.strip().lower().removeprefix("0x").replace("_", "")
        try:
            value = int(text, 16)
        except ValueError:
            raise InvalidParameterError(f"not a hex key: {text!r}") from None
        return cls.from_int(value, 4 * len(text) if L is None else L)

    @classmethod
    def random(cls, L: int, rng: np.random.Generator | None = None) -> "SecretKey":
        """Uniform nonzero key. Uses ``rng`` when given, else the OS CSPRNG."""
        while True:
            if rng is None:
                value = secrets.randbits(L)
            else:
                value = int.from_bytes(rng.bytes((L + 7) // 8), "big") >> (-L % 8)
            if value:
                return cls.from_int(value, L)

    def to_int(self) -> int:
        v = 0
        for b in self.bits:
            v = (v << 1) | b
        return v

    def to_hex(self) -> str:
        return format(self.to_int(), "x").zfill((self.L + 3) // 4)


def validate_taps(taps: Iterable[int], L: int) -> tuple[int, ...]:
    taps = tuple(sorted({int(t) for t in taps}, reverse=True))
    if not taps:
        raise InvalidTapsError("tap set is empty")
    bad = [t for t in taps if not 1 <= t <= L]
    if bad:
        raise InvalidTapsError(f"tap positions {bad} outside 1..{L}")
    if taps[0] != L:
        raise InvalidTapsError(f"taps must include the register length {L}")
    return taps


def tap_mask(taps: Iterable[int]) -> int:
    """Integer mask selecting ``s_{t-p}`` bits of the packed state."""
    mask = 0
    for p in taps:
        mask |= 1 << (p - 1)
    return mask


@dataclass
class KeystreamGenerator:
    """Fibonacci LFSR over the packed state ``s_t .. s_{t+L-1}`` (MSB = s_t)."""

    taps: tuple[int, ...]
    L: int
    state: int
    emitted_count: int = 0
    seed: int = field(default=0, repr=False)

    def __post_init__(self):
        self._mask = tap_mask(self.taps)
        self._full = (1 << self.L) - 1

    def _step(self) -> int:
        s = self.state
        out = s >> (self.L - 1)
        fb = (s & self._mask).bit_count() & 1
        self.state = ((s << 1) | fb) & self._full
        return out

    def next_bits(self, n: int) -> np.ndarray:
        if n < 0:
            raise InvalidParameterError("n must be >= 0")
        out = np.fromiter((self._step() for _ in range(n)), dtype=np.uint8, count=n)
        self.emitted_count += n
        return out

    def next_basis(self, M: int) -> int:
        width = bits_per_symbol(M)
        k = 0
        for _ in range(width):
            k = (k << 1) | self._step()
        self.emitted_count += width
        return k

    def basis_sequence(self, M: int, count: int) -> np.ndarray:
        return np.fromiter((self.next_basis(M) for _ in range(count)), dtype=np.int64,
                           count=count)


def new_generator(key: SecretKey, taps: Sequence[int] | None = None) -> KeystreamGenerator:
    """Seed a generator with ``key``; ``taps`` defaults to a primitive set for ``key.L``."""
    L = key.L
    taps = validate_taps(default_taps(L) if taps is None else taps, L)
    seed = key.to_int()
    if seed == 0:
        raise DegenerateSeedError("all-zero key is a fixed point of the LFSR")
    return KeystreamGenerator(taps=taps, L=L, state=seed, seed=seed)


def next_bits(gen: KeystreamGenerator, n: int) -> np.ndarray:
    return gen.next_bits(n)


def next_basis(gen: KeystreamGenerator, M: int) -> int:
    return gen.next_basis(M)


def basis_matrix(seeds: Sequence[int] | np.ndarray, taps: Sequence[int], L: int,
                 n_symbols: int, M: int) -> np.ndarray:
    """Basis indices for many seeds at once, shape ``(len(seeds), n_symbols)``.

    Dispatches to the compiled kernel when available.  Limited to ``L <= 62``.
    """
    from . import kernels

    taps = validate_taps(taps, L)
    if L > 62:
        raise InvalidParameterError("batched expansion supports L <= 62")
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    if seeds.size and not seeds.all():
        raise DegenerateSeedError("all-zero seed in batch")
    return kernels.lfsr_basis(seeds, tap_mask(taps), L, n_symbols, bits_per_symbol(M))


def basis_stream(key: SecretKey, taps: Sequence[int] | None, count: int, M: int) -> np.ndarray:
    """First ``count`` basis indices for ``key``; uses the batched kernel when ``L`` allows."""
    gen = new_generator(key, taps)
    if key.L <= 62:
        return basis_matrix([gen.seed], gen.taps, key.L, count, M)[0]
    return gen.basis_sequence(M, count)
