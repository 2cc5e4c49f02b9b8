"""Counter-based random streams.

A stream is addressed by (master_seed, stream_id); word ``i`` of the stream is
lane ``i % 4`` of the Philox4x64-10 block computed at counter ``i // 4 + 1``
under the 128-bit key (master_seed, stream_id).  This is exactly the output
of ``numpy.random.Philox(key=master_seed | stream_id << 64)``, but here any
(stream, word) can be computed directly and many streams are evaluated in
one vectorised pass, which is what the batch samplers need.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError

_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_U64 = 1 << 64

# stream-id namespaces keep auxiliary Monte-Carlo sets independent of the
# main replications drawn under the same master seed
NS_MAIN = 0
NS_CENTERING = 1 << 62
NS_ORACLE = 1 << 61
NS_CALIBRATION = 3 << 61


def _mulhilo(a, b):
    al, ah = a & _M32, a >> _S32
    bl, bh = b & _M32, b >> _S32
    ll = al * bl
    hl = ah * bl
    lh = al * bh
    cross = (ll >> _S32) + (hl & _M32) + lh
    hi = ah * bh + (hl >> _S32) + (cross >> _S32)
    return hi, a * b


def philox4x64(counter, key, rounds: int = 10):
    """Philox4x64 block function on arrays.

    ``counter`` is a 4-tuple and ``key`` a 2-tuple of broadcastable uint64
    arrays; returns the four output lanes.
    """
    x0, x1, x2, x3 = np.broadcast_arrays(*[np.asarray(c, dtype=np.uint64) for c in counter])
    k0, k1 = [np.asarray(k, dtype=np.uint64) for k in key]
    with np.errstate(over="ignore"):
        for _ in range(rounds):
            hi0, lo0 = _mulhilo(_M0, x0)
            hi1, lo1 = _mulhilo(_M1, x2)
            x0, x1, x2, x3 = hi1 ^ x1 ^ k0, lo1, hi0 ^ x3 ^ k1, lo0
            k0 = k0 + _W0
            k1 = k1 + _W1
    return x0, x1, x2, x3


def _check_u64(name, value):
    if not 0 <= int(value) < _U64:
        raise DomainError(f"{name} must be a 64-bit unsigned integer")


def stream_words(master_seed: int, stream_ids, start: int, count: int) -> np.ndarray:
    """Words ``start .. start+count-1`` of each stream, shape (len(stream_ids), count)."""
    _check_u64("master_seed", master_seed)
    sids = np.atleast_1d(np.asarray(stream_ids, dtype=np.uint64))
    if count <= 0:
        return np.zeros((sids.size, 0), dtype=np.uint64)
    first_block = start // 4
    last_block = (start + count - 1) // 4
    blocks = np.arange(first_block, last_block + 1, dtype=np.uint64) + np.uint64(1)
    ctr0 = blocks[None, :]
    zero = np.zeros((1, 1), dtype=np.uint64)
    lanes = philox4x64((ctr0, zero, zero, zero),
                       (np.uint64(master_seed), sids[:, None]))
    out = np.stack(lanes, axis=-1).reshape(sids.size, -1)
    offset = start - 4 * first_block
    return out[:, offset:offset + count]


def words_at(master_seed: int, stream_ids, word_index) -> np.ndarray:
    """Word ``word_index[i]`` of stream ``stream_ids[i]`` (elementwise)."""
    _check_u64("master_seed", master_seed)
    sids = np.asarray(stream_ids, dtype=np.uint64)
    idx = np.asarray(word_index, dtype=np.uint64)
    sids, idx = np.broadcast_arrays(sids, idx)
    block = idx // np.uint64(4) + np.uint64(1)
    lane = (idx % np.uint64(4)).astype(np.intp)
    zero = np.zeros_like(block)
    lanes = np.stack(philox4x64((block, zero, zero, zero), (np.uint64(master_seed), sids)), axis=-1)
    return np.take_along_axis(lanes, lane[..., None], axis=-1)[..., 0]


def uniform_float(words) -> np.ndarray:
    """(w + 1) / 2^64 rounded to float64; lies in (0, 1]."""
    return (np.asarray(words, dtype=np.uint64).astype(np.float64) + 1.0) * 2.0**-64


def uniform_float128(hi, lo) -> np.ndarray:
    return (np.asarray(hi, dtype=np.uint64).astype(np.float64)
            + (np.asarray(lo, dtype=np.uint64).astype(np.float64) + 1.0) * 2.0**-64) * 2.0**-64


def uniform_exact(word: int) -> Fraction:
    return Fraction(int(word) + 1, _U64)


def uniform_exact128(hi: int, lo: int) -> Fraction:
    return Fraction((int(hi) << 64) + int(lo) + 1, 1 << 128)


@dataclass(frozen=True)
class RngStreamKey:
    """Address of one reproducible stream; ``counter`` is the first word used."""

    master_seed: int
    stream_id: int
    counter: int = 0

    def __post_init__(self):
        _check_u64("master_seed", self.master_seed)
        _check_u64("stream_id", self.stream_id)
        _check_u64("counter", self.counter)

    def words(self, count: int) -> np.ndarray:
        return stream_words(self.master_seed, [self.stream_id], self.counter, count)[0]

    def numpy_generator(self) -> np.random.Generator:
        """numpy's own Philox positioned at this key (independent reference)."""
        bg = np.random.Philox(key=self.master_seed | (self.stream_id << 64))
        if self.counter:
            bg.random_raw(self.counter)
        return np.random.Generator(bg)

    def to_dict(self) -> dict:
        return {"master_seed": self.master_seed, "stream_id": self.stream_id, "counter": self.counter}
