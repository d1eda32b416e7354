"""Counter-based random streams.

Every stochastic routine in the package derives its generator from a
master seed plus a tuple of integer indices (path index, purpose tag,
...).  Streams are statistically independent and do not depend on the
order in which they are created, so parallel schedules cannot change
results.
"""

import numpy as np

# purpose tags
PHASE = 0
PATH = 1
LIMIT = 2
PUSHFORWARD = 3
MISC = 4


def substream(master_seed, *key):
    """Independent Generator keyed by (master_seed, *key).

    Philox is counter-based: the stream is a pure function of the key,
    never of global state.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
