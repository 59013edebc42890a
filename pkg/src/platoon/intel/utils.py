#
# Helpers shared by the auction, audit and MARL code: seeded RNG streams,
# fixed-size work chunks and an ordered thread fan-out.
#
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

__all__ = ["make_rng", "spawn_rngs", "chunk_sizes", "ordered_map", "as_seed_sequence"]

T = TypeVar("T")
R = TypeVar("R")

#: Monte Carlo work unit. Fixed so results do not depend on the thread count.
CHUNK = 16384


def as_seed_sequence(seed) -> np.random.SeedSequence:
    """Coerce an int, a sequence of ints or a SeedSequence into a SeedSequence."""
    match seed:
        case np.random.SeedSequence():
            return seed
        case int() | np.integer():
            return np.random.SeedSequence(int(seed))
        case [*entropy]:
            return np.random.SeedSequence([int(e) for e in entropy])
        case None:
            raise ValueError("A seed is required; unseeded streams are not reproducible")
        case _:
            raise TypeError(f"Cannot build a seed sequence from {type(seed).__name__}")


def make_rng(seed) -> np.random.Generator:
    """Return a PCG64 generator for the given seed."""
    return np.random.default_rng(as_seed_sequence(seed))


def spawn_rngs(seed, n: int) -> list[np.random.Generator]:
    """Return `n` independent generators derived from one seed, in a fixed order."""
    return [np.random.default_rng(s) for s in as_seed_sequence(seed).spawn(n)]


def chunk_sizes(total: int, chunk: int = CHUNK) -> list[int]:
    """Split `total` samples into fixed-size chunks (the last one possibly shorter)."""
    if total < 0:
        raise ValueError(f"Negative sample count {total}")
    sizes = [chunk] * (total // chunk)
    if total % chunk:
        sizes.append(total % chunk)
    return sizes


def ordered_map(
    fn: Callable[[T], R], items: Iterable[T], threads: int = 1
) -> Sequence[R]:
    """Apply `fn` to every item, possibly on several threads.

    Results come back in input order whatever the thread count, so reductions
    over them are deterministic.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
