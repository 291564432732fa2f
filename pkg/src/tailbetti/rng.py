"""Counter-based random streams.

Every random draw in the package comes from a Philox generator keyed by a
master seed plus a tuple of integer stream ids.  Two streams with different
ids are statistically independent, and a stream's output depends only on its
key, never on which worker consumes it or in what order.
"""

from __future__ import annotations

import numpy as np

# Stream-id namespaces.  Keeping them distinct guarantees that, e.g., the
# cloud for trial 3 never shares bits with Monte Carlo batch 3.
CLOUD = 1
MU = 2
XI = 3
INNER = 4
SWEEP = 5

_MASK64 = (1 << 64) - 1


def stream(seed: int, *ids: int) -> np.random.Generator:
    """Return the generator for ``(seed, *ids)``.

    ``seed`` is reduced modulo 2**64 so any Python int is accepted; ids must
    be non-negative integers.
    """
    if any(int(i) < 0 for i in ids):
        raise ValueError(f"stream ids must be non-negative, got {ids}")
    ss = np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=tuple(int(i) for i in ids))
    return np.random.Generator(np.random.Philox(ss))
