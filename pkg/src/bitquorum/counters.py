"""Counter-array, hashing, sorting and mergeable-count threshold algorithms.

All four entry points take a homogeneous list of bitmaps (either
representation), a threshold, and return a bitmap of the matching
representation.  Pass ``stats={}`` to collect introspection data;
instrumentation is off by default.
"""

from __future__ import annotations

from array import array
from typing import Sequence

from . import bitmaps as bm
from .errors import InputError, ResourceError
from .oracle import SymmetricSpec

DEFAULT_BUDGET_BYTES = 1 << 30  # working-array cap


def counter_width(n: int) -> int:
    """Counter width in bits needed so that a count of ``n`` cannot wrap."""
    if n < 128:
        return 8
    if n < 1 << 15:
        return 16
    return 32


_TYPECODES = {8: "B", 16: "H", 32: "I"}


def _result(bitmaps: Sequence[bm.Bitmap], positions, r: int) -> bm.Bitmap:
    out = bm.UncompressedBitmap.from_positions(positions, r)
    if isinstance(bitmaps[0], bm.RleBitmap):
        return bm.compress(out)
    return out


def _check(bitmaps: Sequence[bm.Bitmap], t: int):
    n = len(bitmaps)
    if not 1 <= t <= n:
        raise InputError(f"threshold {t} outside [1, {n}]")


def scan_count(bitmaps: Sequence[bm.Bitmap], t: int, r: int | None = None,
               budget_bytes: int = DEFAULT_BUDGET_BYTES,
               stats: dict | None = None) -> bm.Bitmap:
    """One counter per position; increment on every set bit, compare at the end."""
    _check(bitmaps, t)
    if r is None:
        r = max(b.bit_length for b in bitmaps)
    width = counter_width(len(bitmaps))
    if r * width // 8 > budget_bytes:
        raise ResourceError(
            f"{r} counters of {width} bits exceed the {budget_bytes}-byte budget; "
            "consider hash_count")
    counts = array(_TYPECODES[width], bytes(r * width // 8))
    increments = 0
    for b in bitmaps:
        for p in b.iter_set_bits():
            counts[p] += 1
            increments += 1
    if stats is not None:
        stats["counter_width"] = width
        stats["increments"] = increments
    return _result(bitmaps, (p for p in range(r) if counts[p] >= t), r)


def scan_count_symmetric(bitmaps: Sequence[bm.Bitmap], spec: SymmetricSpec,
                         r: int | None = None) -> bm.Bitmap:
    """Counter-array evaluation of an arbitrary symmetric function."""
    if spec.arity != len(bitmaps):
        raise InputError("spec arity does not match the input count")
    if r is None:
        r = max(b.bit_length for b in bitmaps)
    width = counter_width(len(bitmaps))
    counts = array(_TYPECODES[width], bytes(r * width // 8))
    for b in bitmaps:
        for p in b.iter_set_bits():
            counts[p] += 1
    accept = spec.accept
    return _result(bitmaps, (p for p in range(r) if accept[counts[p]]), r)


def hash_count(bitmaps: Sequence[bm.Bitmap], t: int,
               stats: dict | None = None) -> bm.Bitmap:
    """Map-based counting: memory grows with the number of distinct
    positions actually present, not with the universe size."""
    _check(bitmaps, t)
    r = max(b.bit_length for b in bitmaps)
    counts: dict[int, int] = {}
    for b in bitmaps:
        for p in b.iter_set_bits():
            counts[p] = counts.get(p, 0) + 1
    if stats is not None:
        stats["distinct"] = len(counts)
    survivors = sorted(p for p, c in counts.items() if c >= t)
    return _result(bitmaps, survivors, r)


def w_sort(bitmaps: Sequence[bm.Bitmap], t: int,
           budget_bytes: int = DEFAULT_BUDGET_BYTES,
           stats: dict | None = None) -> bm.Bitmap:
    """Concatenate all position lists, sort, keep runs of length >= t."""
    _check(bitmaps, t)
    r = max(b.bit_length for b in bitmaps)
    total = sum(b.cardinality() for b in bitmaps)
    if total * 8 > budget_bytes:
        raise ResourceError(f"{total} positions exceed the {budget_bytes}-byte budget")
    merged: list[int] = []
    for b in bitmaps:
        merged.extend(b.iter_set_bits())
    merged.sort()
    if stats is not None:
        stats["sorted_length"] = len(merged)
    out = []
    i = 0
    n = len(merged)
    while i < n:
        j = i
        while j < n and merged[j] == merged[i]:
            j += 1
        if j - i >= t:
            out.append(merged[i])
        i = j
    return _result(bitmaps, out, r)


def _merge_counted(values: list[int], counts: list[int], new_values: list[int],
                   min_count: int) -> tuple[list[int], list[int]]:
    """Merge a sorted counted list with a sorted position list, dropping
    entries whose merged count is below ``min_count``."""
    out_v: list[int] = []
    out_c: list[int] = []
    i = j = 0
    nv, nn = len(values), len(new_values)
    while i < nv and j < nn:
        a, b = values[i], new_values[j]
        if a < b:
            if counts[i] >= min_count:
                out_v.append(a)
                out_c.append(counts[i])
            i += 1
        elif a > b:
            if 1 >= min_count:
                out_v.append(b)
                out_c.append(1)
            j += 1
        else:
            c = counts[i] + 1
            if c >= min_count:
                out_v.append(a)
                out_c.append(c)
            i += 1
            j += 1
    while i < nv:
        if counts[i] >= min_count:
            out_v.append(values[i])
            out_c.append(counts[i])
        i += 1
    while j < nn:
        if 1 >= min_count:
            out_v.append(new_values[j])
            out_c.append(1)
        j += 1
    return out_v, out_c


def w2ct(bitmaps: Sequence[bm.Bitmap], t: int, variant: str = "N",
         budget_bytes: int = DEFAULT_BUDGET_BYTES,
         stats: dict | None = None) -> bm.Bitmap:
    """Pairwise merge of counted position lists, shortest input first.

    Variant ``N`` never prunes.  Variant ``A`` drops, after each merge
    with i inputs still unmerged, every entry whose count is below
    ``t - i``.  Variant ``I`` applies the same bound inside the merge
    instead of in a separate pass.
    """
    _check(bitmaps, t)
    variant = variant.upper()
    if variant not in ("N", "A", "I"):
        raise InputError(f"unknown w2ct variant {variant!r}")
    r = max(b.bit_length for b in bitmaps)
    total = sum(b.cardinality() for b in bitmaps)
    if total * 16 > budget_bytes:
        raise ResourceError(f"{total} counted positions exceed the budget")
    order = sorted(range(len(bitmaps)), key=lambda i: (bitmaps[i].cardinality(), i))
    sizes: list[int] = []
    values: list[int] = []
    counts: list[int] = []
    first = True
    for step, idx in enumerate(order):
        new_values = bitmaps[idx].positions()
        remaining = len(order) - step - 1
        if first:
            values, counts = new_values, [1] * len(new_values)
            first = False
        else:
            bound = t - remaining if variant == "I" else 0
            values, counts = _merge_counted(values, counts, new_values, bound)
        if variant == "A":
            bound = t - remaining
            if bound > 0:
                keep = [k for k in range(len(values)) if counts[k] >= bound]
                values = [values[k] for k in keep]
                counts = [counts[k] for k in keep]
        sizes.append(len(values))
    if stats is not None:
        stats["intermediate_sizes"] = sizes
    out = [v for v, c in zip(values, counts) if c >= t]
    return _result(bitmaps, out, r)
