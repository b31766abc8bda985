"""Shared test helpers: enumeration-exact Fisher information."""

import numpy as np

from weakclock.core import MODE_WEAK_WITH_STRONG
from weakclock.trajectories import enumerate_outcome_distribution, replay_loglik_score


def exact_cfi(params, omega):
    """Classical Fisher information by exhaustive sum over all outcome strings."""
    dist = enumerate_outcome_distribution(params, omega)
    probs = np.array([prob for _, prob in dist])
    bits = np.array(
        [[int(c) for c in string] for string, _ in dist], dtype=np.uint8
    ).reshape(len(dist), params.N, params.m)
    if params.mode == MODE_WEAK_WITH_STRONG:
        weak, strong = bits[:, :, :-1], bits[:, :, -1]
    else:
        weak, strong = bits, None
    _, scores = replay_loglik_score(weak, strong, params, omega)
    return float(np.sum(probs * scores**2))
