"""Ordered fan-out of independent replicates over a thread pool.

Replicate ``k`` always draws from ``RngStream(seed, stream_id(cell, k))``, so
results do not depend on chunking or on the number of workers.  Results come
back in replicate order and are reduced by the caller.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, TypeVar

from ..sampling import RngStream

T = TypeVar("T")

_CELL_SHIFT = 32


def stream_id(cell: int, rep: int) -> int:
    return (int(cell) << _CELL_SHIFT) | int(rep)


def run_replicates(task: Callable[[RngStream, int], T], reps: int, seed: int,
                   threads: int = 1, cell: int = 0) -> List[T]:
    def chunk(lo: int, hi: int) -> List[T]:
        return [task(RngStream(seed, stream_id(cell, k)), k) for k in range(lo, hi)]

    reps = int(reps)
    if threads <= 1 or reps < 2:
        return chunk(0, reps)
    size = max(1, -(-reps // (threads * 8)))
    bounds = [(lo, min(lo + size, reps)) for lo in range(0, reps, size)]
    out: List[T] = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for part in pool.map(lambda b: chunk(*b), bounds):
            out.extend(part)
    return out


__all__ = ["stream_id", "run_replicates"]
