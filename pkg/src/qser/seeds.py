"""Named, reproducible random streams.

All randomness in the toolkit flows from a single top-level seed expanded
into named streams, so one integer reproduces an entire experiment. Streams
are PCG64 generators keyed through ``numpy.random.SeedSequence`` with the
entropy list ``[seed, stream_id, *extra]``; the stream ids below are frozen.
"""

from __future__ import annotations

import numpy as np

# Frozen stream ids. Never renumber: gate lists, corpora, and initializations
# derived from them are part of the reproducibility contract.
STREAM_IDS = {
    "init": 1,
    "shuffle": 2,
    "synth": 3,
    "random_layers": 4,
}


def rng_stream(seed: int, name: str, *extra: int) -> np.random.Generator:
    """PCG64 generator for stream `name` under `seed`, sub-keyed by `extra`."""
    if name not in STREAM_IDS:
        raise KeyError(f"unknown random stream {name!r}")
    entropy = [int(seed), STREAM_IDS[name], *[int(e) for e in extra]]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
