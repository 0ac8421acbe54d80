"""Seeded random streams.

Every stream is a Philox-4x64 counter-based generator (numpy's
``Philox``) keyed by ``SeedSequence(master_seed, spawn_key=...)``.  The
spawn key carries a role tag and any integers such as a trial index, so
Bob's noise, Eve's noise, the message source and the DSR offsets never
share a stream.  The mapping from (seed, role, indices) to numbers is
stable for a given numpy version.
"""

import zlib

import numpy as np

RNG_NAME = "philox4x64-10/seedsequence"
RNG_VERSION = 1


def role_tag(role: str) -> int:
    return zlib.crc32(role.encode("utf-8"))


def stream(seed: int, role: str, *indices: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(role_tag(role), *map(int, indices)))
    return np.random.Generator(np.random.Philox(ss))
