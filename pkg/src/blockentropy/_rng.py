"""Seeded, platform-independent random streams.

All randomness in the package flows through :func:`generator`, which builds a
numpy ``Generator`` over the counter-based Philox4x64 bit generator. The
seed is mixed with a tuple of integer keys through ``SeedSequence`` so that
independent consumers (block sampling, trial *i* of a Monte Carlo run, block
(r, c) of a shuffle, ...) get non-overlapping streams that depend only on
``(seed, keys)``.
"""

import numpy as np

from .errors import DomainError

U64_MAX = 2**64 - 1

# Domain tags keep streams of different consumers apart even for equal seeds.
BLOCKS = 1
IMAGE = 2
TRIAL = 3
SHUFFLE = 4
ROI = 5
BOOTSTRAP = 6
SWEEP = 7


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise DomainError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed <= U64_MAX:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def generator(seed, *keys):
    seed = check_seed(seed)
    seq = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(seed, *keys):
    """Derive a child u64 seed from ``seed`` and integer keys."""
    seq = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in keys))
    return int(seq.generate_state(1, np.uint64)[0])
