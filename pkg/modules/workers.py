"""
Chunked thread pool for Monte Carlo loops.

Work over range(n_items) is split into contiguous chunks; results are
gathered per chunk and concatenated in chunk order, so the output is the
same for any thread count.
"""
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Sequence

from .constants import logger
from .errors import ParameterError


class ChunkCollector:
    """Collects per-chunk results from worker threads"""

    def __init__(self):
        self._lock = threading.Lock()
        self._chunks: Dict[int, list] = {}  # chunk index -> results

    def add_chunk(self, index: int, results: list):
        with self._lock:
            self._chunks[index] = results

    def get_chunk_counts(self) -> Dict[int, int]:
        with self._lock:
            return {index: len(results) for index, results in self._chunks.items()}

    def ordered(self) -> list:
        """All results in chunk order"""
        with self._lock:
            out = []
            for index in sorted(self._chunks):
                out.extend(self._chunks[index])
            return out


def chunk_bounds(n_items: int, n_chunks: int) -> List[range]:
    n_chunks = max(1, min(n_chunks, n_items))
    size, extra = divmod(n_items, n_chunks)
    bounds, start = [], 0
    for i in range(n_chunks):
        stop = start + size + (1 if i < extra else 0)
        bounds.append(range(start, stop))
        start = stop
    return bounds


def run_chunked(work: Callable[[range], Sequence], n_items: int, threads: int = 1) -> list:
    """
    Apply `work` to contiguous sub-ranges of range(n_items).

    Args:
        work: callable taking a range of item indices and returning one result per index
        n_items: number of items
        threads: worker threads (1 runs inline)

    Returns:
        list of per-item results in index order
    """
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")
    if n_items == 0:
        return []
    if threads == 1:
        return list(work(range(n_items)))

    collector = ChunkCollector()
    chunks = chunk_bounds(n_items, threads * 4)

    def _run(index: int, items: range):
        collector.add_chunk(index, list(work(items)))

    with ThreadPoolExecutor(max_workers=threads, thread_name_prefix='mc-worker') as pool:
        futures = [pool.submit(_run, i, items) for i, items in enumerate(chunks)]
        for future in futures:
            future.result()

    logger.debug(f"Collected {len(chunks)} chunks on {threads} threads - counts: {collector.get_chunk_counts()}")
    return collector.ordered()
