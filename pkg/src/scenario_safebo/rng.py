"""Counter-based random streams.

Every random draw in the package comes from a generator keyed by a tuple of
integers (base seed, stream tag, counters...). Two draws with the same key
are identical no matter how many other draws happened before, which is what
makes batched generation independent of evaluation order and parallelism.
"""

import numpy as np

# stream tags
RANDOM_FUNCTIONS = 1
OBSERVATION_NOISE = 2
TRUTH = 3
PROBE = 4
NORM_STUDY = 5


def counter_rng(base_seed: int, *counters: int) -> np.random.Generator:
    """Philox generator keyed by ``hash(base_seed, *counters)``."""
    seq = np.random.SeedSequence(int(base_seed) % 2**64,
                                 spawn_key=tuple(int(c) for c in counters))
    return np.random.Generator(np.random.Philox(seq))
