"""Deterministic per-symbol random streams.

Every Monte Carlo draw is keyed by (master seed, stream id, symbol index),
so results never depend on batch size, worker count, or scheduling order.
Streams keep data, candidate phases, channel, and noise draws independent,
which lets different schemes share identical data/channel/noise realizations.
"""

import numpy as np

STREAM_DATA = 0
STREAM_SLM = 1
STREAM_CHANNEL = 2
STREAM_NOISE = 3
STREAM_HAAR = 4
STREAM_TEST = 9


def symbol_rng(master_seed: int, stream: int, index: int) -> np.random.Generator:
    """Generator for one (stream, symbol index) pair under a master seed."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(stream), int(index)))
    return np.random.default_rng(ss)


def run_rng(master_seed: int, stream: int) -> np.random.Generator:
    """Generator for run-level draws (not tied to a symbol index)."""
    return symbol_rng(master_seed, stream, 0)
