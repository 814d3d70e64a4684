"""Counter-based random streams for reproducible, partition-independent Monte Carlo.

Trials are organized in fixed-size blocks.  Each (seed, stream, block) triple
maps to a disjoint Philox counter range, so the realization of trial i depends
only on (seed, i) and never on how blocks are distributed over workers.
"""

import numpy as np

BLOCK_SIZE = 4096

# stream ids; each stream has its own counter space
STREAM_CHANNEL = 0
STREAM_PHASE_ERROR = 1
STREAM_OPTIM = 2
STREAM_BASELINE = 3


def block_generator(seed: int, stream: int, block: int) -> np.random.Generator:
    """Generator for one block of trials on one stream."""
    key = (int(seed) & (2**64 - 1)) | (int(stream) << 64)
    return np.random.Generator(np.random.Philox(key=key, counter=int(block) << 128))


def trial_generator(seed: int, stream: int, trial: int) -> np.random.Generator:
    """Per-trial generator (streams that consume a variable number of draws)."""
    return block_generator(seed, stream, trial)


def iter_blocks(trials: int):
    """Yield (block_index, count) pairs covering `trials` trials."""
    full, rem = divmod(int(trials), BLOCK_SIZE)
    for b in range(full):
        yield b, BLOCK_SIZE
    if rem:
        yield full, rem
