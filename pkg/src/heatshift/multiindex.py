"""Multi-index arithmetic shared by the moment and kernel-derivative code.

A multi-index is a plain tuple of non-negative ints, one entry per axis.
"""

from __future__ import annotations

import math
from functools import lru_cache

MultiIndex = tuple[int, ...]

_INT64_MAX = 2**63 - 1


def order(alpha: MultiIndex) -> int:
    "Total order |alpha|."
    return sum(alpha)


def unit(n: int, i: int) -> MultiIndex:
    "The i-th unit multi-index in dimension n."
    if not 0 <= i < n:
        raise ValueError(f"axis {i} out of range for dimension {n}")
    return tuple(1 if j == i else 0 for j in range(n))


def add(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    "Componentwise sum of two multi-indices of equal dimension."
    if len(alpha) != len(beta):
        raise ValueError("dimension mismatch")
    return tuple(a + b for a, b in zip(alpha, beta))


def multi_factorial(alpha: MultiIndex) -> int:
    """alpha! = prod_i alpha_i!.

    Raises OverflowError beyond the 64-bit range; all orders used here stay
    far below that.
    """
    result = 1
    for a in alpha:
        if a < 0:
            raise ValueError(f"negative component in {alpha}")
        result *= math.factorial(a)
    if result > _INT64_MAX:
        raise OverflowError(f"{alpha}! exceeds the 64-bit integer range")
    return result


@lru_cache(maxsize=None)
def enumerate_order(n: int, total: int) -> tuple[MultiIndex, ...]:
    """All multi-indices of dimension n with |alpha| = total.

    Ordered lexicographically with the leading component largest first,
    e.g. (2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), ...  The ordering is
    deterministic so downstream sums are reproducible.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if total < 0:
        raise ValueError(f"order must be >= 0, got {total}")
    return tuple(_compositions(n, total))


def _compositions(n, total):
    if n == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _compositions(n - 1, total - head):
            yield (head,) + rest
