"""Counter-based random streams.

Every draw is a pure function of ``(seed, iteration, user, purpose, counter)``,
so any iteration can be simulated in isolation and in any order. The mixer is
the SplitMix64 finalizer; a stream key is built by folding each field into
the running hash and word ``j`` of a stream is ``mix64(key + (j + 1) * GOLDEN)``.

The scalar helpers are numba-compiled for use inside the simulation kernels;
the ``*_np`` variants are their vectorised numpy twins and must stay
bit-identical to them.
"""

import numpy as np

from ._accel import njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# stream purposes
SEND = 1
BITS = 2
NOISE = 3

SHARED_USER = 0xFFFFFFFF
TWO_PI = 2.0 * np.pi
INV_2_53 = 1.0 / 9007199254740992.0

_U_GOLDEN = np.uint64(GOLDEN)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)


def mix64_int(z):
    """Reference SplitMix64 finalizer on Python ints."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stream_key_int(seed, iteration, user, purpose):
    k = mix64_int(seed)
    for field in (iteration, user, purpose):
        k = mix64_int(((k ^ (field & MASK64)) + GOLDEN) & MASK64)
    return k


def stream_word_int(key, counter):
    return mix64_int(key + (counter + 1) * GOLDEN)


@njit(cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _U_M1
    z = (z ^ (z >> _S27)) * _U_M2
    return z ^ (z >> _S31)


@njit(cache=True)
def stream_key(seed, iteration, user, purpose):
    k = mix64(np.uint64(seed))
    k = mix64((k ^ np.uint64(iteration)) + _U_GOLDEN)
    k = mix64((k ^ np.uint64(user)) + _U_GOLDEN)
    k = mix64((k ^ np.uint64(purpose)) + _U_GOLDEN)
    return k


@njit(cache=True)
def stream_word(key, counter):
    return mix64(key + (np.uint64(counter) + _ONE) * _U_GOLDEN)


@njit(cache=True)
def word_to_unit(w):
    """Uniform double in [0, 1) from the top 53 bits."""
    return float(w >> _S11) * INV_2_53


@njit(cache=True)
def normal_pair(key, j):
    """Standard normal pair (Box-Muller) from words 2j and 2j+1."""
    u1 = (float(stream_word(key, 2 * j) >> _S11) + 1.0) * INV_2_53
    u2 = float(stream_word(key, 2 * j + 1) >> _S11) * INV_2_53
    r = np.sqrt(-2.0 * np.log(u1))
    return r * np.cos(TWO_PI * u2), r * np.sin(TWO_PI * u2)


def _mix64_np(z):
    z = (z ^ (z >> _S30)) * _U_M1
    z = (z ^ (z >> _S27)) * _U_M2
    return z ^ (z >> _S31)


def stream_key_np(seed, iteration, user, purpose):
    """Vectorised stream keys; arguments broadcast against each other."""
    with np.errstate(over="ignore"):
        k = _mix64_np(np.asarray(seed, dtype=np.uint64))
        for field in (iteration, user, purpose):
            f = np.asarray(field, dtype=np.uint64)
            k = _mix64_np((k ^ f) + _U_GOLDEN)
    return k


def stream_words_np(key, start, count):
    """Words ``start .. start+count-1`` for each key; shape ``key.shape + (count,)``."""
    key = np.asarray(key, dtype=np.uint64)[..., None]
    ctr = np.arange(start, start + count, dtype=np.uint64) + _ONE
    with np.errstate(over="ignore"):
        return _mix64_np(key + ctr * _U_GOLDEN)


def words_to_unit_np(w):
    return (w >> _S11).astype(np.float64) * INV_2_53


def words_to_bits_np(w, n):
    """Unpack the first ``n`` bits (LSB first within each word)."""
    shifts = np.arange(64, dtype=np.uint64)
    bits = (w[..., :, None] >> shifts) & _ONE
    return bits.reshape(w.shape[:-1] + (-1,))[..., :n].astype(np.int8)


def normals_np(key, count):
    """``count`` standard complex normals (unit variance per dimension)."""
    return _normals_from_words(stream_words_np(key, 0, 2 * count))


def _normals_from_words(w):
    u1 = ((w[..., 0::2] >> _S11).astype(np.float64) + 1.0) * INV_2_53
    u2 = (w[..., 1::2] >> _S11).astype(np.float64) * INV_2_53
    r = np.sqrt(-2.0 * np.log(u1))
    return r * np.cos(TWO_PI * u2) + 1j * (r * np.sin(TWO_PI * u2))


def n_words(nbits):
    return (nbits + 63) // 64


class CounterStream:
    """Sequential view over one keyed counter stream.

    Draws advance ``position``; two streams built from the same key fields
    always yield the same values.
    """

    def __init__(self, seed, iteration=0, user=SHARED_USER, purpose=NOISE):
        self.key = stream_key_int(int(seed), int(iteration), int(user), int(purpose))
        self.position = 0

    def words(self, count):
        w = stream_words_np(np.uint64(self.key), self.position, count)
        self.position += count
        return w

    def uniform(self, count):
        return words_to_unit_np(self.words(count))

    def bits(self, count):
        return words_to_bits_np(self.words(n_words(count)), count)

    def complex_normal(self, count):
        """Complex samples with unit variance per real dimension."""
        self.position += self.position % 2
        return _normals_from_words(self.words(2 * count))
