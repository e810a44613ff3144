"""Pure numpy trial kernel, used when the compiled extension is unavailable."""

import numpy as np

from .rng import draws, trial_keys


def simulate(key, trial_start, n_trials, effects, group_offsets, group_copies, effect_up):
    """Sample a pure state per trial and measure its copies.

    Draws 0 and 1 of each trial give the state; subsequent draws pick one
    outcome per copy, group after group.  Returns ``(states, ups)`` where
    ``ups[t, k]`` counts the +1 results on axis ``k``.
    """
    tk = trial_keys(key, np.arange(trial_start, trial_start + n_trials, dtype=np.uint64))
    z = 2.0 * draws(tk, 0) - 1.0
    phi = 2.0 * np.pi * draws(tk, 1)
    s = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    x = s * np.cos(phi)
    y = s * np.sin(phi)
    states = np.stack([x, y, z], axis=1)

    ups = np.zeros((n_trials, effect_up.shape[1]), dtype=np.int64)
    j = 2
    for g in range(len(group_copies)):
        lo, hi = group_offsets[g], group_offsets[g + 1]
        w = effects[lo:hi]
        p = ((w[:, 0] + w[:, 1] * x[:, None]) + w[:, 2] * y[:, None]) + w[:, 3] * z[:, None]
        p = np.maximum(p, 0.0)
        cum = np.cumsum(p, axis=1)
        total = cum[:, -1]
        last = hi - lo - 1
        up_rows = effect_up[lo:hi]
        for _ in range(group_copies[g]):
            t = draws(tk, j) * total
            j += 1
            idx = np.minimum(np.sum(cum <= t[:, None], axis=1), last)
            ups += up_rows[idx]
    return states, ups
