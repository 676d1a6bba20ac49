"""Counter-based deterministic random numbers.

Every random quantity in the package is a pure function of a 64-bit seed and
a tuple of stream keys (purpose tag, sample index, layer index, ...) run
through the splitmix64 finalizer.  There is no hidden state: draws are
order-independent, parallelizable, and bit-reproducible on any platform.

A draw for key tuple ``(k1, ..., kn)`` is::

    h = mix64(seed); h = mix64(h ^ k1); ...; h = mix64(h ^ kn)

where ``mix64`` is the splitmix64 output function (Steele, Lea & Flood 2014).
Uniform integers in ``[0, n)`` take the 64-bit word modulo ``n`` (bias is
``n / 2**64``, far below anything observable here); uniform floats use the
top 53 bits.
"""

import numpy as np

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def tag(name: str) -> int:
    """Pack up to 8 ASCII bytes into an integer stream key."""
    value = 0
    for byte in name.encode("ascii")[:8]:
        value = (value << 8) | byte
    return value


def mix64(z: int) -> int:
    """splitmix64 finalizer on one 64-bit word."""
    z = (z + _GOLDEN) & _M64
    z = ((z ^ (z >> 30)) * _MIX1) & _M64
    z = ((z ^ (z >> 27)) * _MIX2) & _M64
    return z ^ (z >> 31)


def key_hash(seed: int, *keys: int) -> int:
    """Chained 64-bit hash of a seed plus stream keys."""
    h = mix64(seed & _M64)
    for k in keys:
        h = mix64(h ^ (k & _M64))
    return h


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps modulo 2**64, matching the masked scalar path
    z = z + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def counter_words(seed: int, keys: tuple, counters) -> np.ndarray:
    """Vectorized ``key_hash(seed, *keys, c)`` over an array of counters."""
    base = np.uint64(key_hash(seed, *keys))
    c = np.asarray(counters, dtype=np.uint64)
    return _mix64_array(base ^ c)


def uniform_ints(seed: int, keys: tuple, counters, n: int) -> np.ndarray:
    """Integers in ``[0, n)``, one per counter."""
    return (counter_words(seed, keys, counters) % np.uint64(n)).astype(np.int64)


def uniform_floats(seed: int, keys: tuple, counters) -> np.ndarray:
    """Floats in ``[0, 1)`` with 53-bit resolution, one per counter."""
    return (counter_words(seed, keys, counters) >> np.uint64(11)) * 2.0**-53


class CounterStream:
    """Sequential view over one keyed counter stream.

    Used where draws are inherently ordered (GA breeding, Fisher-Yates);
    the stream identity is still fully determined by (seed, keys).
    """

    def __init__(self, seed: int, *keys: int):
        self._seed = seed
        self._keys = keys
        self._next = 0

    def words(self, count: int) -> np.ndarray:
        counters = np.arange(self._next, self._next + count, dtype=np.uint64)
        self._next += count
        return counter_words(self._seed, self._keys, counters)

    def u64(self) -> int:
        return int(self.words(1)[0])

    def floats(self, shape=None) -> np.ndarray:
        size = 1 if shape is None else int(np.prod(shape))
        out = (self.words(size) >> np.uint64(11)) * 2.0**-53
        return float(out[0]) if shape is None else out.reshape(shape)

    def integers(self, n: int, shape=None):
        size = 1 if shape is None else int(np.prod(shape))
        out = (self.words(size) % np.uint64(n)).astype(np.int64)
        return int(out[0]) if shape is None else out.reshape(shape)

    def shuffle(self, x: np.ndarray) -> None:
        """In-place Fisher-Yates shuffle along the first axis."""
        for i in range(len(x) - 1, 0, -1):
            j = self.integers(i + 1)
            x[[i, j]] = x[[j, i]]

    def permutation(self, n: int) -> np.ndarray:
        out = np.arange(n)
        self.shuffle(out)
        return out


def permutation(n: int, seed: int, *keys: int) -> np.ndarray:
    """Deterministic permutation of ``range(n)`` for the given stream."""
    return CounterStream(seed, *keys).permutation(n)
