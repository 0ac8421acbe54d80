"""Pure numpy implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is missing, or when
``ALPHAETA_PURE_PYTHON=1`` is set.  Signatures match ``_kernels.pyx``.
"""

import numpy as np


def _parity(x):
    x = x ^ (x >> np.uint64(32))
    x ^= x >> np.uint64(16)
    x ^= x >> np.uint64(8)
    x ^= x >> np.uint64(4)
    x ^= x >> np.uint64(2)
    x ^= x >> np.uint64(1)
    return x & np.uint64(1)


def _lfsr_basis_scalar(seed, mask, L, n_symbols, width):
    full = (1 << L) - 1
    top = L - 1
    s = int(seed)
    out = np.empty(n_symbols, dtype=np.int64)
    for q in range(n_symbols):
        k = 0
        for _ in range(width):
            k = (k << 1) | (s >> top)
            s = ((s << 1) | ((s & mask).bit_count() & 1)) & full
        out[q] = k
    return out


def lfsr_basis(seeds, mask, L, n_symbols, width):
    if len(seeds) <= 4:
        # per-step numpy overhead dominates for a handful of seeds
        return np.array([_lfsr_basis_scalar(s, mask, L, n_symbols, width) for s in seeds],
                        dtype=np.int64).reshape(len(seeds), n_symbols)
    state = np.array(seeds, dtype=np.uint64, copy=True)
    mask = np.uint64(mask)
    full = np.uint64((1 << L) - 1)
    top = np.uint64(L - 1)
    one = np.uint64(1)
    out = np.zeros((state.size, n_symbols), dtype=np.int64)
    for q in range(n_symbols):
        k = np.zeros(state.size, dtype=np.uint64)
        for _ in range(width):
            k = (k << one) | (state >> top)
            state = ((state << one) | _parity(state & mask)) & full
        out[:, q] = k
    return out


def cumulative_gather(table, idx):
    table = np.asarray(table, dtype=np.float64)
    idx = np.asarray(idx, dtype=np.int64)
    n = idx.shape[1]
    return np.cumsum(table[np.arange(n), idx], axis=1)
