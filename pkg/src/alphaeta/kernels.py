"""Kernel selection: compiled extension if importable, numpy fallback otherwise.

Set ``ALPHAETA_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from .errors import InvalidParameterError

if os.environ.get("ALPHAETA_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = "cython" if _impl.__name__.endswith("._kernels") else "python"


def lfsr_basis(seeds, mask, L, n_symbols, width):
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    return _impl.lfsr_basis(seeds, int(mask), int(L), int(n_symbols), int(width))


def cumulative_gather(table, idx):
    """Running sums ``out[c, q] = sum_{t<=q} table[t, idx[c, t]]``."""
    table = np.ascontiguousarray(table, dtype=np.float64)
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    if idx.shape[1] != table.shape[0]:
        raise InvalidParameterError("idx columns must match table rows")
    if idx.size and (idx.min() < 0 or idx.max() >= table.shape[1]):
        raise InvalidParameterError("idx out of table range")
    return _impl.cumulative_gather(table, idx)
