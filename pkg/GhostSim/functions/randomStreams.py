"""
Counter-based random streams.

Every stream is a Philox generator keyed by (seed, tag); the counter's high
word carries an index (a realization, or a page of a long sequence). No
generator state is shared between indices, so a value depends only on
(seed, tag, index, position) and never on execution order or worker count.
"""
import numpy as np
from typing import Tuple

# stream tags
SOURCE_FIELD = 1
TRACE_INIT = 2
TRACE_NOISE = 3
THINNING = 4
JITTER = 5
INDEPENDENT_TRACE = 6

# long sequences are cut into pages of this many values
PAGE_SIZE = 1 << 16

_UINT64 = (1 << 64) - 1


def generator(seed: int, tag: int, index: int) -> np.random.Generator:
    key = np.array([seed & _UINT64, tag & _UINT64], dtype=np.uint64)
    counter = np.array([0, 0, 0, index & _UINT64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def complex_normal(gen: np.random.Generator, n: int) -> np.ndarray:
    """Circular complex Gaussian deviates with E|g|^2 = 1."""
    pairs = gen.standard_normal((n, 2))
    return pairs.view(np.complex128)[:, 0] / np.sqrt(2.0)


def channel_tag(tag: int, channel: int) -> int:
    return tag | (channel << 16)


def _pages(start: int, count: int) -> Tuple[int, int]:
    return start // PAGE_SIZE, (start + count - 1) // PAGE_SIZE


def paged_uniform(seed: int, tag: int, start: int, count: int) -> np.ndarray:
    """Values [start, start + count) of an endless U[0, 1) sequence."""
    if count <= 0:
        return np.empty(0, dtype=np.float64)
    first, last = _pages(start, count)
    chunk = np.concatenate([generator(seed, tag, p).random(PAGE_SIZE) for p in range(first, last + 1)])
    offset = start - first * PAGE_SIZE
    return chunk[offset:offset + count]


def paged_normal(seed: int, tag: int, start: int, count: int) -> np.ndarray:
    """Values [start, start + count) of an endless standard normal sequence."""
    if count <= 0:
        return np.empty(0, dtype=np.float64)
    first, last = _pages(start, count)
    chunk = np.concatenate([generator(seed, tag, p).standard_normal(PAGE_SIZE) for p in range(first, last + 1)])
    offset = start - first * PAGE_SIZE
    return chunk[offset:offset + count]


def paged_complex_normal(seed: int, tag: int, start: int, count: int) -> np.ndarray:
    """Values [start, start + count) of an endless circular complex Gaussian sequence."""
    if count <= 0:
        return np.empty(0, dtype=np.complex128)
    first, last = _pages(start, count)
    chunk = np.concatenate([complex_normal(generator(seed, tag, p), PAGE_SIZE) for p in range(first, last + 1)])
    offset = start - first * PAGE_SIZE
    return chunk[offset:offset + count]
