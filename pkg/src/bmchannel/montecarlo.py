"""Block-parallel Monte Carlo with a fixed trial-to-stream assignment."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import InvalidArgument
from .stochastic import RngStream

BLOCK_SIZE = 1000
MIN_TRIALS = 100


def default_workers() -> int:
    return os.cpu_count() or 1


def blocks(trials: int, block_size: int = BLOCK_SIZE):
    """``(index, size)`` of every trial block; the last block may be short."""
    full, rest = divmod(int(trials), block_size)
    out = [(b, block_size) for b in range(full)]
    if rest:
        out.append((full, rest))
    return out


def run_blocks(fn, trials: int, rng: RngStream, workers: int | None = 1, block_size: int = BLOCK_SIZE,
               min_trials: int = MIN_TRIALS):
    """Run ``fn(generator, size)`` on every block and concatenate in block order.

    Block ``b`` always draws from ``rng.child(b)``, so the concatenated
    result does not depend on ``workers``.  ``fn`` returns an array (or a
    tuple / dict of arrays) whose leading axis is the trial axis.
    """
    if trials < min_trials:
        raise InvalidArgument(f"need at least {min_trials} trials for meaningful error bars, got {trials}")
    if not isinstance(rng, RngStream):
        rng = RngStream(int(rng))
    jobs = blocks(trials, block_size)

    def one(job):
        b, size = job
        return fn(rng.child(b).generator(), size)

    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(jobs) == 1:
        parts = [one(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, jobs))
    first = parts[0]
    if isinstance(first, dict):
        return {k: np.concatenate([p[k] for p in parts]) for k in first}
    if isinstance(first, tuple):
        return tuple(np.concatenate([p[i] for p in parts]) for i in range(len(first)))
    return np.concatenate(parts)


def mean_and_stderr(samples, axis=0):
    """Sample mean and ``std / sqrt(trials)`` (ddof=1)."""
    samples = np.asarray(samples, float)
    n = samples.shape[axis]
    mean = samples.mean(axis=axis)
    se = samples.std(axis=axis, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(mean)
    return mean, se
