"""
Integer partitions, realizable permutation orders and Landau's function.
"""

import math
from functools import lru_cache
from typing import FrozenSet, Iterator, Tuple

from numerics.errors import OutOfRangeError

MAX_PARTITION_N = 20


def partitions(n: int, largest: int = None) -> Iterator[Tuple[int, ...]]:
    """Yield the partitions of ``n`` as non-increasing tuples."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for part in range(min(n, largest), 0, -1):
        for rest in partitions(n - part, part):
            yield (part,) + rest


def _check_range(n: int) -> None:
    if not isinstance(n, int) or not 1 <= n <= MAX_PARTITION_N:
        raise OutOfRangeError(f"n must be an integer in [1, {MAX_PARTITION_N}], got {n}")


@lru_cache(maxsize=None)
def partitions_lcm_set(n: int) -> FrozenSet[int]:
    """Orders of permutations on n letters: lcm(parts) over all partitions of n."""
    _check_range(n)
    return frozenset(math.lcm(*parts) for parts in partitions(n))


def landau(n: int) -> int:
    """Landau's function g(n), the maximal order of a permutation on n letters."""
    return max(partitions_lcm_set(n))


def best_known_bound(n: int) -> int:
    """The best known bound 2^n * max_k C(n, k) on ∞-norm nonexpansive periods."""
    return 2**n * max(math.comb(n, k) for k in range(n + 1))


def divisors(p: int) -> list:
    return [d for d in range(1, p + 1) if p % d == 0]


def lcm_all(values) -> int:
    return math.lcm(*values) if values else 1
