"""Counter-based random streams keyed by ``(master_seed, trial_index)``.

Draw ``j`` of trial ``i`` is a fixed function of ``(seed, i, j)``: the
SplitMix64 finalizer applied to a Weyl-sequence counter.  No state is shared
between trials, so any partition of the trials over workers yields the same
numbers.  The compiled kernel implements the identical mapping.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
TRIAL_STEP = 0xD1B54A32D192ED03
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TO_UNIT = 2.0**-53


def mix64(z):
    """SplitMix64 output function on uint64 arrays (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def seed_key(master_seed: int) -> int:
    return int(mix64(np.uint64((int(master_seed) + GOLDEN) & MASK64)))


def trial_keys(key: int, trials) -> np.ndarray:
    """Per-trial keys; injective in the trial index because ``TRIAL_STEP`` is odd."""
    t = np.asarray(trials, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(np.uint64(key) + (t + np.uint64(1)) * np.uint64(TRIAL_STEP))


def draws(tkeys, j) -> np.ndarray:
    """Uniforms in [0, 1) for draw index ``j`` (scalar or array) of each trial key."""
    j = np.asarray(j, dtype=np.uint64)
    with np.errstate(over="ignore"):
        bits = mix64(np.asarray(tkeys, dtype=np.uint64) + (j + np.uint64(1)) * np.uint64(GOLDEN))
    return (bits >> np.uint64(11)).astype(np.float64) * _TO_UNIT


class TrialStream:
    """Sequential view of one trial's draws; mirrors ``numpy.random.Generator.random``."""

    def __init__(self, master_seed: int, trial_index: int):
        self.master_seed = int(master_seed)
        self.trial_index = int(trial_index)
        self._key = trial_keys(seed_key(master_seed), [trial_index])[0]
        self.position = 0

    def random(self, size=None):
        n = 1 if size is None else int(np.prod(size))
        out = draws(self._key, np.arange(self.position, self.position + n))
        self.position += n
        if size is None:
            return float(out[0])
        return out.reshape(size)

    def __repr__(self):
        return f"TrialStream(seed={self.master_seed}, trial={self.trial_index}, position={self.position})"


def derive_substream(master_seed: int, trial_index: int) -> TrialStream:
    return TrialStream(master_seed, trial_index)
