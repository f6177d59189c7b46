# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT
"""Reproducible random streams and chunked replicate execution.

Replicate ``i`` of a run seeded with ``seed`` always draws from the stream
``SeedSequence(seed, spawn_key=(i,))``. Replicates are grouped into chunks of
``settings.chunk_size`` consecutive indices and the per-chunk results are
returned in chunk order, so the merged result is the same for any number of
workers.
"""
from concurrent import futures
import logging

import numpy as np

import esfstl
from esfstl.core.errors import ParameterError

logger = logging.getLogger(__name__)

SEED_LIMIT = 2 ** 64


def seed_replicate_rng(master_seed, replicate_index):
    """Independent generator for one replicate of a seeded run

    Parameters
    ----------
    master_seed : int
        Unsigned 64-bit run seed.
    replicate_index : int
        Nonnegative replicate counter.

    Returns
    -------
    numpy.random.Generator
    """
    if not 0 <= int(master_seed) < SEED_LIMIT:
        raise ParameterError(f"seed must be an unsigned 64-bit integer, got {master_seed}")
    if replicate_index < 0:
        raise ParameterError(f"replicate index must be nonnegative, got {replicate_index}")
    sequence = np.random.SeedSequence(int(master_seed), spawn_key=(int(replicate_index),))
    return np.random.Generator(np.random.PCG64(sequence))


def chunk_bounds(replicates, chunk_size):
    """[(start, stop), ...] covering range(replicates) in order"""
    if replicates < 1:
        raise ParameterError(f"replicates must be at least 1, got {replicates}")
    return [(start, min(start + chunk_size, replicates)) for start in range(0, replicates, chunk_size)]


def run_replicates(job, replicates, seed, workers=None, chunk_size=None):
    """Run ``job(start, stop, seed)`` over chunks of replicate indices

    ``job`` must be picklable when more than one worker is used (a module
    level function, or a functools.partial of one).

    Parameters
    ----------
    job : callable
    replicates : int
    seed : int
    workers : int, optional
        Defaults to ``esfstl.settings.workers``.
    chunk_size : int, optional
        Defaults to ``esfstl.settings.chunk_size``.

    Returns
    -------
    list
        Per-chunk results in chunk order.
    """
    workers = workers or esfstl.settings.workers
    chunk_size = chunk_size or esfstl.settings.chunk_size
    bounds = chunk_bounds(replicates, chunk_size)
    logger.debug("running %d replicates in %d chunks on %d workers", replicates, len(bounds), workers)

    if workers == 1 or len(bounds) == 1:
        results = []
        for start, stop in bounds:
            results.append(job(start, stop, seed))
            logger.debug("chunk %d-%d done", start, stop)
        return results

    with futures.ProcessPoolExecutor(max_workers=workers) as executor:
        pending = [executor.submit(job, start, stop, seed) for start, stop in bounds]
        results = []
        for (start, stop), future in zip(bounds, pending):
            results.append(future.result())
            logger.debug("chunk %d-%d done", start, stop)
    return results
