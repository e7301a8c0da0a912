"""Measurement sampling with excluded-outcome screening.

Outcomes are integer keys (basis indices or flattened grid cells).  Keys on
the excluded list must carry no mass beyond float dust; anything larger means
probability leaked somewhere it must never be (inside an obstacle), which is
a simulation bug and raises instead of being silently dropped.
"""

from __future__ import annotations

import numpy as np

from .errors import SimulationError

EXCLUDED_MASS_TOLERANCE = 1e-9


def sample_counts(keys: np.ndarray, probs: np.ndarray, shots: int, seed: int,
                  excluded: frozenset[int] = frozenset()) -> dict[int, int]:
    """Draw a multinomial histogram over keys; deterministic for a fixed seed.

    Support is sorted by key before drawing so the result does not depend on
    the order the caller accumulated it in.
    """
    keys = np.asarray(keys, dtype=np.int64)
    probs = np.asarray(probs, dtype=np.float64)
    if keys.shape != probs.shape:
        raise SimulationError("keys and probabilities must align")
    order = np.argsort(keys)
    keys = keys[order]
    probs = probs[order]

    if excluded:
        banned = np.isin(keys, np.fromiter(excluded, dtype=np.int64))
        banned_mass = float(probs[banned].sum())
        if banned_mass > EXCLUDED_MASS_TOLERANCE:
            worst = keys[banned][np.argsort(probs[banned])[::-1][:5]]
            raise SimulationError(
                f"excluded outcomes carry mass {banned_mass:.3e} "
                f"(tolerance {EXCLUDED_MASS_TOLERANCE:.0e}); worst keys {worst.tolist()}"
            )
        keys = keys[~banned]
        probs = probs[~banned]

    total = probs.sum()
    if total <= 0.0:
        raise SimulationError("nothing left to sample after exclusions")
    rng = np.random.Generator(np.random.PCG64(seed))
    counts = rng.multinomial(shots, probs / total)
    return {int(k): int(c) for k, c in zip(keys, counts) if c > 0}
