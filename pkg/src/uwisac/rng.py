"""Deterministic random substreams for Monte Carlo work.

Trials are cut into fixed-size blocks; block ``b`` of sweep point ``k`` draws
from ``SeedSequence([seed, purpose, k, b])``. Because the partition never
depends on how blocks are scheduled, results are identical for any worker count.
"""
from __future__ import annotations

import numpy as np

BLOCK_SIZE = 4096

# stable purpose tags keep sensing and rate streams independent
SENSING = 1
RATE = 2


def block_generator(seed: int, purpose: int, point: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, purpose, point, block])
    return np.random.default_rng(ss)


def blocks(trials: int, block_size: int = BLOCK_SIZE):
    """Yield ``(block_index, n_trials_in_block)`` covering ``trials``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    for b, start in enumerate(range(0, trials, block_size)):
        yield b, min(block_size, trials - start)


def run_blocks(fn, cfg, purpose: int, point: int, trials: int, workers: int = 1, *args):
    """Evaluate ``fn(cfg, rng, n, *args)`` on every block; results come back in block order."""
    jobs = [(fn, cfg, cfg.seed, purpose, point, b, n, args) for b, n in blocks(trials)]
    if workers <= 1 or len(jobs) == 1:
        return [_run_one(j) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def _run_one(job):
    fn, cfg, seed, purpose, point, b, n, args = job
    return fn(cfg, block_generator(seed, purpose, point, b), n, *args)
