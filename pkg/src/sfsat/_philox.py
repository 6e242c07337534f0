"""Vectorized Philox4x32-10 counter-based generator.

Every output block is a pure function of (key, counter), so clause ``j`` of a
formula can be regenerated in isolation and batches can be split across
workers without changing a single bit.
"""

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)
_ROUNDS = 10


def philox4x32(counter, key):
    """Apply Philox4x32-10 to an ``(N, 4)`` array of uint32 counters.

    ``key`` is a pair of uint32 words. Returns an ``(N, 4)`` uint32 array.
    """
    ctr = np.asarray(counter, dtype=np.uint64).reshape(-1, 4)
    c0, c1, c2, c3 = (ctr[:, i].copy() for i in range(4))
    k0, k1 = int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF
    for r in range(_ROUNDS):
        if r:
            k0 = (k0 + _W0) & 0xFFFFFFFF
            k1 = (k1 + _W1) & 0xFFFFFFFF
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0, lo0 = p0 >> _SHIFT32, p0 & _MASK32
        hi1, lo1 = p1 >> _SHIFT32, p1 & _MASK32
        c0 = hi1 ^ c1 ^ np.uint64(k0)
        c1 = lo1
        c2 = hi0 ^ c3 ^ np.uint64(k1)
        c3 = lo0
    return np.stack([c0, c1, c2, c3], axis=1).astype(np.uint32)


def stream_key(seed, *stream):
    """Derive a 64-bit Philox key from a seed and optional stream indices."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return ss.generate_state(2, np.uint32)


def clause_words(key, rows, attempt, k):
    """Random 64-bit words for literal slots of the given clause rows.

    Row ``j`` at retry ``attempt`` draws from counters ``(j_lo, j_hi, attempt, b)``
    for blocks ``b = 0 .. ceil(k/2) - 1``. Returns an ``(len(rows), k)`` uint64
    array.
    """
    rows = np.asarray(rows, dtype=np.uint64)
    nblocks = (k + 1) // 2
    ctr = np.empty((rows.size, nblocks, 4), dtype=np.uint64)
    ctr[:, :, 0] = (rows & _MASK32)[:, None]
    ctr[:, :, 1] = (rows >> _SHIFT32)[:, None]
    ctr[:, :, 2] = np.uint64(attempt) & _MASK32
    ctr[:, :, 3] = np.arange(nblocks, dtype=np.uint64)[None, :]
    out = philox4x32(ctr.reshape(-1, 4), key).astype(np.uint64).reshape(rows.size, nblocks * 2, 2)
    words = (out[:, :, 0] << _SHIFT32) | out[:, :, 1]
    return words[:, :k]


def words_to_uniform(words):
    """Top 53 bits of each word as a float in [0, 1)."""
    return (words >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def words_to_sign(words):
    """Lowest bit of each word as a +1/-1 sign (disjoint from the uniform bits)."""
    return np.where((words & np.uint64(1)) == 1, -1, 1).astype(np.int64)
