"""Similarity-query construction: pick prototype rows, take the bitmaps
containing them, and truncate or replicate to the requested width."""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..errors import InputError
from .datagen import Dataset


@dataclass
class SimilarityQuery:
    dataset: str
    rids: list[int]
    n: int
    source_indices: list[int]
    multiplicities: list[int]
    bitmaps: list

    def __post_init__(self):
        assert len(self.bitmaps) == self.n


def make_similarity(dataset: Dataset, rid_count: int, n: int, seed: int,
                    max_retries: int = 64) -> SimilarityQuery:
    """Resolve a deterministic similarity query of exactly ``n`` bitmaps.

    When fewer than ``n`` bitmaps contain a prototype row, each selected
    bitmap is replicated floor(n/n') or ceil(n/n') times, earliest
    selections getting the extra copy.
    """
    if not dataset.bitmaps:
        raise InputError("empty dataset")
    rows = dataset.universe
    rid_count = min(rid_count, rows)
    for attempt in range(max_retries):
        rng = random.Random(f"sim;{dataset.name};{rid_count};{n};{seed};{attempt}")
        rids = sorted(rng.sample(range(rows), rid_count))
        selected = [i for i, b in enumerate(dataset.bitmaps)
                    if any(b.get(rid) for rid in rids)]
        if not selected:
            continue
        if len(selected) >= n:
            chosen = selected[:n]
            multiplicities = [1] * n
        else:
            chosen = selected
            base, extra = divmod(n, len(selected))
            multiplicities = [base + 1 if i < extra else base
                              for i in range(len(selected))]
        resolved = []
        for idx, mult in zip(chosen, multiplicities):
            resolved.extend([dataset.bitmaps[idx]] * mult)
        return SimilarityQuery(dataset.name, rids, n, chosen, multiplicities, resolved)
    raise InputError(
        f"no bitmap contains any prototype rid after {max_retries} seeds")
