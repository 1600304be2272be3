"""Synthetic dataset generation and dataset container/IO."""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Sequence

from .. import bitmaps as bm
from ..errors import FormatError, InputError
from ..oracle import RowTable


@dataclass
class SyntheticSpec:
    """Parameters for one synthetic dataset of equal-cardinality sets."""

    process: str  # "uniform" | "clustered"
    seed: int
    cardinality: int = 10_000
    universe: int = 30_000
    count: int = 64

    def name(self) -> str:
        return f"[{self.process.capitalize()};{self.seed};{self.cardinality};{self.universe}]"


@dataclass
class Dataset:
    """Named collection of bitmaps over a shared universe of row ids."""

    name: str
    universe: int
    bitmaps: list[bm.Bitmap]
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.labels:
            self.labels = [str(i) for i in range(len(self.bitmaps))]

    def to_repr(self, kind: str) -> "Dataset":
        """Return a dataset whose bitmaps use the requested representation."""
        if kind in ("ewah", "rle", "compressed"):
            converted = [b if isinstance(b, bm.RleBitmap) else bm.compress(b)
                         for b in self.bitmaps]
        elif kind in ("uncompressed", "bitset"):
            converted = [b if isinstance(b, bm.UncompressedBitmap) else bm.decompress(b)
                         for b in self.bitmaps]
        else:
            raise InputError(f"unknown representation {kind!r}")
        return Dataset(self.name, self.universe, converted, list(self.labels))

    def compressed_words(self) -> int:
        return sum(len(bm.compress(b).words) if isinstance(b, bm.UncompressedBitmap)
                   else len(b.words) for b in self.bitmaps)


def _rng_for(spec: SyntheticSpec, index: int) -> random.Random:
    return random.Random(f"{spec.process};{spec.seed};{spec.cardinality};{spec.universe};{index}")


def _clustered_positions(rng: random.Random, count: int, lo: int, hi: int,
                         cutoff: int) -> list[int]:
    """Recursive budget splitting; each leaf emits one dense run."""
    span = hi - lo
    if count <= 0:
        return []
    if count >= span:
        return list(range(lo, hi))
    if count <= cutoff or span <= 2 * cutoff:
        start = lo + rng.randrange(span - count + 1)
        return list(range(start, start + count))
    mid = lo + span // 2
    left_max = min(count, mid - lo)
    left_min = max(0, count - (hi - mid))
    left = int(round(count * rng.random()))
    left = max(left_min, min(left_max, left))
    return (_clustered_positions(rng, left, lo, mid, cutoff)
            + _clustered_positions(rng, count - left, mid, hi, cutoff))


def gen_synthetic(spec: SyntheticSpec, cluster_cutoff: int = 64,
                  compressed: bool = False) -> Dataset:
    """Deterministically generate ``count`` sets of exactly ``cardinality`` bits."""
    if spec.cardinality > spec.universe:
        raise InputError("cardinality exceeds the universe")
    if spec.process not in ("uniform", "clustered"):
        raise InputError(f"unknown process {spec.process!r}")
    maps: list[bm.Bitmap] = []
    for i in range(spec.count):
        rng = _rng_for(spec, i)
        if spec.process == "uniform":
            positions = sorted(rng.sample(range(spec.universe), spec.cardinality))
        else:
            positions = _clustered_positions(rng, spec.cardinality, 0, spec.universe,
                                             cluster_cutoff)
        u = bm.UncompressedBitmap.from_positions(positions, spec.universe)
        maps.append(bm.compress(u) if compressed else u)
    return Dataset(spec.name(), spec.universe, maps)


def gen_table(rows: int, attributes: int, seed: int,
              domain_sizes: Sequence[int] | None = None,
              max_domain: int = 50) -> RowTable:
    """Random categorical table shaped like a many-attribute census file."""
    rng = random.Random(f"table;{seed};{rows};{attributes}")
    if domain_sizes is None:
        domain_sizes = [rng.randint(2, max_domain) for _ in range(attributes)]
    table_rows = [tuple(rng.randrange(domain_sizes[a]) for a in range(attributes))
                  for _ in range(rows)]
    return RowTable(table_rows)


def table_index(table: RowTable) -> dict[tuple[int, int], bm.UncompressedBitmap]:
    """Unary bitmap index: one bitmap of row ids per (attribute, value)."""
    rows = len(table.rows)
    buckets: dict[tuple[int, int], list[int]] = {}
    for rid, row in enumerate(table.rows):
        for a, v in enumerate(row):
            buckets.setdefault((a, v), []).append(rid)
    return {key: bm.UncompressedBitmap.from_positions(rids, rows)
            for key, rids in buckets.items()}


# ---------------------------------------------------------------------------
# Dataset files: header plus one self-describing bitmap record per entry.

_DS_MAGIC = b"BQDS"
_DS_VERSION = 1


def save_dataset(fp: BinaryIO, dataset: Dataset) -> None:
    name = dataset.name.encode("utf-8")
    fp.write(_DS_MAGIC)
    fp.write(struct.pack("<BHQI", _DS_VERSION, len(name), dataset.universe,
                         len(dataset.bitmaps)))
    fp.write(name)
    for label, bitmap in zip(dataset.labels, dataset.bitmaps):
        raw = label.encode("utf-8")
        fp.write(struct.pack("<H", len(raw)))
        fp.write(raw)
        bm.write_bitmap(fp, bitmap)


def load_dataset(fp: BinaryIO) -> Dataset:
    magic = fp.read(4)
    if magic != _DS_MAGIC:
        raise FormatError("bad dataset magic")
    version, name_len, universe, count = struct.unpack("<BHQI", fp.read(15))
    if version != _DS_VERSION:
        raise FormatError(f"unsupported dataset version {version}")
    name = fp.read(name_len).decode("utf-8")
    labels = []
    maps = []
    for _ in range(count):
        (label_len,) = struct.unpack("<H", fp.read(2))
        labels.append(fp.read(label_len).decode("utf-8"))
        maps.append(bm.read_bitmap(fp))
    return Dataset(name, universe, maps, labels)


def save_dataset_file(path: str, dataset: Dataset) -> None:
    with open(path, "wb") as fp:
        save_dataset(fp, dataset)


def load_dataset_file(path: str) -> Dataset:
    with open(path, "rb") as fp:
        return load_dataset(fp)


def dataset_from_text(path: str, name: str | None = None,
                      universe: int | None = None) -> Dataset:
    """Build a dataset from the one-set-per-line text format."""
    sets = bm.load_text_sets(path)
    if universe is None:
        universe = 1 + max((s[-1] for s in sets if s), default=-1)
    maps = [bm.UncompressedBitmap.from_positions(s, universe) for s in sets]
    return Dataset(name or str(path), universe, maps)
