"""Average-fidelity statistics over repeated random data reductions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measurement import reduce_vector
from .quantum import fidelity


@dataclass(frozen=True)
class FidelityStats:
    mean: float
    std: float  # N-1 denominator
    count: int
    per_item: tuple


def ensemble_stats(per_item) -> FidelityStats:
    values = np.asarray(list(per_item), dtype=float)
    if values.size == 0:
        raise ValueError("empty fidelity list")
    std = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return FidelityStats(
        mean=float(values.mean()), std=std, count=int(values.size),
        per_item=tuple(values.tolist()),
    )


def repeated_mask_fidelity(full_input: np.ndarray, predictor, reference: np.ndarray,
                           m_data: int, repeats: int,
                           rng: np.random.Generator) -> float:
    """Mean fidelity of predictions from `repeats` random reductions.

    ``predictor`` maps a zero-padded data vector to a matrix; ``reference``
    is the full-data reconstruction (or ground truth) it is compared to.
    Each repeat uses its own RNG stream derived from the parent generator so
    results are deterministic for a fixed seed.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    seeds = rng.integers(0, 2**63 - 1, size=repeats)
    fids = []
    for s in seeds:
        red = reduce_vector(full_input, m_data, np.random.default_rng(int(s)))
        fids.append(fidelity(predictor(red.values), reference))
    return float(np.mean(fids))
