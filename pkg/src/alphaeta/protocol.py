"""Symbol mapping, keyed and keyless decoders, and the additive XOR baseline.

Symbols live on a circle of ``M`` positions.  A basis ``k`` in ``[0, M/2)``
and a message bit ``b`` select ``j = ((k mod 2) ^ b) * M/2 + k``.  The
decoders accept real-valued received positions in ``[0, M)`` and work on
scalars or numpy arrays alike.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidParameterError
from .keystream import SecretKey, basis_stream, bits_per_symbol, new_generator


@dataclass
class SymbolTrace:
    q: int
    k: int
    b: int
    j: int
    j_received: float | None = None


def _maybe_scalar(x):
    return x.item() if isinstance(x, np.ndarray) and x.ndim == 0 else x


def encode_symbol(k, b, M: int):
    bits_per_symbol(M)
    k = np.asarray(k, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if np.any((k < 0) | (k >= M // 2)):
        raise InvalidParameterError(f"basis index out of range [0, {M // 2})")
    if np.any((b != 0) & (b != 1)):
        raise InvalidParameterError("message bits must be 0 or 1")
    return _maybe_scalar(((k & 1) ^ b) * (M // 2) + k)


def circular_distance(a, b, M: int):
    d = np.mod(np.abs(np.asarray(a, dtype=np.float64) - b), M)
    return np.minimum(d, M - d)


def bob_decode(k, j_received, M: int):
    """Keyed half-plane decision.

    ``x' = 0`` iff the received position is strictly within ``M/4`` of the
    basis ``k`` on the circle; the boundary goes to ``x' = 1``.
    """
    k = np.asarray(k, dtype=np.int64)
    x = (circular_distance(j_received, k, M) >= M / 4).astype(np.int64)
    return _maybe_scalar(x ^ (k & 1))


def round_symbol(j_received, M: int):
    """Round half up to the nearest position, then reduce mod ``M``."""
    return np.mod(np.floor(np.asarray(j_received, dtype=np.float64) + 0.5), M).astype(np.int64)


def eve_naive_decode(j_received, M: int):
    """Keyless estimate: invert the symbol map at the rounded position.

    With ``j = s*M/2 + k`` the signal bit is ``s = floor(2j/M)`` and
    ``k mod 2 = j mod 2``, so ``b = s ^ (j mod 2)``.
    """
    r = round_symbol(j_received, M)
    return _maybe_scalar((2 * r // M) ^ (r & 1))


def encode_arrays(key: SecretKey, taps: Sequence[int] | None, message, M: int):
    """Vectorised encoder returning ``(k, j)`` arrays for a bit message."""
    message = np.asarray(message, dtype=np.int64)
    k = basis_stream(key, taps, message.size, M)
    return k, np.asarray(encode_symbol(k, message, M), dtype=np.int64)


def encode_message(key: SecretKey, taps: Sequence[int] | None, message: Iterable[int],
                   M: int) -> list[SymbolTrace]:
    message = np.fromiter((int(b) for b in message), dtype=np.int64)
    k, j = encode_arrays(key, taps, message, M)
    return [SymbolTrace(q, int(k[q]), int(message[q]), int(j[q])) for q in range(message.size)]


def additive_encrypt(k_bit, b):
    return np.bitwise_xor(k_bit, b)


def additive_decrypt(k_bit, c):
    return np.bitwise_xor(k_bit, c)


def additive_stream(key: SecretKey, taps: Sequence[int] | None, bits) -> np.ndarray:
    """XOR ``bits`` with the running key; encryption and decryption coincide."""
    bits = np.asarray(bits, dtype=np.uint8)
    return additive_encrypt(new_generator(key, taps).next_bits(bits.size), bits)


def bytes_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def bits_to_bytes(bits) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def traces_to_csv(traces: Iterable[SymbolTrace]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q", "k", "b", "j", "j_received"])
    for t in traces:
        w.writerow([t.q, t.k, t.b, t.j, "" if t.j_received is None else repr(float(t.j_received))])
    return buf.getvalue()
