"""Generic q-gram ingestion: one text record per line, one bitmap per gram."""

from __future__ import annotations

import os

from .. import bitmaps as bm
from ..errors import InputError
from .datagen import Dataset


def ingest_qgrams(path: str, q: int = 3, compressed: bool = False) -> Dataset:
    """Index which records contain each q-gram.

    Records are lines, kept verbatim (case-sensitive, no cleanup).  Bit
    ``p`` of a gram's bitmap is set iff record ``p`` contains that gram
    at least once.
    """
    if q < 1:
        raise InputError("q must be positive")
    try:
        with open(path, "r", encoding="utf-8", errors="surrogateescape") as fp:
            records = [line.rstrip("\n") for line in fp]
    except OSError as exc:
        raise OSError(f"cannot read corpus {path}: {exc}") from exc
    occurrences: dict[str, list[int]] = {}
    for rid, record in enumerate(records):
        if len(record) < q:
            continue
        seen = {record[i : i + q] for i in range(len(record) - q + 1)}
        for gram in seen:
            occurrences.setdefault(gram, []).append(rid)
    universe = len(records)
    grams = sorted(occurrences)
    maps: list[bm.Bitmap] = []
    for gram in grams:
        u = bm.UncompressedBitmap.from_positions(occurrences[gram], universe)
        maps.append(bm.compress(u) if compressed else u)
    name = f"{os.path.basename(path)}-{q}gr"
    return Dataset(name, universe, maps, grams)
