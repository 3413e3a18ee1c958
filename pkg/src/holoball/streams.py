"""Counter-based random number streams.

All Monte Carlo in this package draws from Philox generators keyed by an
explicit integer seed plus a "path" of small integers naming the consumer
(module, ball index, budget stage, ...).  Philox is counter-based, so two
streams with different paths never overlap and results do not depend on
evaluation order or worker count.  The same (seed, path) always reproduces
the same draws bitwise.
"""

import numpy as np


def make_rng(seed, *path):
    """Return a numpy Generator on a Philox stream keyed by (seed, *path)."""
    ss = np.random.SeedSequence([int(seed)] + [int(p) & 0x7FFFFFFF for p in path])
    return np.random.Generator(np.random.Philox(ss))


def spawn_seeds(seed, n, *path):
    """Deterministic child seeds for n independent sub-tasks."""
    root = np.random.SeedSequence([int(seed)] + [int(p) & 0x7FFFFFFF for p in path])
    return [int(s.generate_state(1)[0]) for s in root.spawn(n)]
