"""Run-merging threshold evaluation over RLE-compressed bitmaps.

The inputs' word-level runs (fill runs and dirty-word groups) are swept
left to right with a min-heap keyed on run ends.  Within one segment
every input is either clean (a fill run covering the whole segment) or
dirty.  With ``k`` one-fills among ``n_clean`` clean inputs:

* ``T - k <= 0``: the output is all ones, dirty words are skipped;
* ``T - k > #dirty``: the output is all zeros, dirty words are skipped;
* otherwise a ``(T - k)``-threshold over just the dirty words decides.
"""

from __future__ import annotations

import heapq
from typing import Sequence

from . import bitmaps as bm
from .bitmaps import RleBitmap, RleBuilder, W, WORD_MASK, _word_count
from .errors import InputError
from .oracle import SymmetricSpec

# Dirty-word dispatch tunables: with T_eff at or above the cutoff the
# word-local counter path is always used; below it, the bit-parallel
# combine is chosen when 2*popcount >= #dirty * T_eff.
SCANCOUNT_CUTOFF = 128


def _merged_runs(bitmap: RleBitmap, total_words: int):
    """Word-level runs as (kind, end_word_inclusive, payload).

    kind 'f': payload is the fill bit; kind 'd': payload is
    (words_index_of_group_start, absolute_word_of_group_start).
    Adjacent same-bit fills (e.g. across the zero-extension boundary)
    are merged so a fully clean bitmap is a single run.
    """
    pending_bit = None
    pending_end = -1
    pos = 0
    for kind, x, count in bitmap.iter_word_segments(total_words):
        if kind == "f":
            if pending_bit == x:
                pending_end = pos + count - 1
            else:
                if pending_bit is not None:
                    yield "f", pending_end, pending_bit
                pending_bit = x
                pending_end = pos + count - 1
        else:
            if pending_bit is not None:
                yield "f", pending_end, pending_bit
                pending_bit = None
            yield "d", pos + count - 1, (x, pos)
        pos += count
    if pending_bit is not None:
        yield "f", pending_end, pending_bit


def dirty_segment_solver(blocks: Sequence[Sequence[int]], t_eff: int,
                         force_branch: str | None = None,
                         scancount_cutoff: int = SCANCOUNT_CUTOFF,
                         stats: dict | None = None) -> list[int]:
    """Per-word threshold over aligned blocks of dirty words.

    ``blocks[i][w]`` is input i's word at offset w.  ``force_branch``
    ("or", "and", "scan", "looped") bypasses the dispatch for testing.
    """
    nd = len(blocks)
    if not 1 <= t_eff <= nd:
        raise InputError(f"effective threshold {t_eff} outside [1, {nd}]")
    width = len(blocks[0])
    branch = force_branch
    if branch is None:
        if t_eff == 1:
            branch = "or"
        elif t_eff == nd:
            branch = "and"
        elif t_eff >= scancount_cutoff:
            branch = "scan"
        else:
            beta = sum(word.bit_count() for block in blocks for word in block)
            branch = "looped" if 2 * beta >= nd * t_eff else "scan"
    if stats is not None:
        stats[branch] = stats.get(branch, 0) + 1

    if branch == "or":
        out = list(blocks[0])
        for block in blocks[1:]:
            for w in range(width):
                out[w] |= block[w]
        return out
    if branch == "and":
        out = list(blocks[0])
        for block in blocks[1:]:
            for w in range(width):
                out[w] &= block[w]
        return out
    if branch == "looped":
        out = []
        for w in range(width):
            c = [0] * (t_eff + 1)
            c[1] = blocks[0][w]
            for i in range(1, nd):
                word = blocks[i][w]
                for j in range(min(t_eff, i + 1), 1, -1):
                    c[j] |= c[j - 1] & word
                c[1] |= word
            out.append(c[t_eff])
        return out
    if branch == "scan":
        out = []
        for w in range(width):
            counts = [0] * W
            for block in blocks:
                word = block[w]
                while word:
                    low = word & -word
                    counts[low.bit_length() - 1] += 1
                    word ^= low
            value = 0
            for bit, c in enumerate(counts):
                if c >= t_eff:
                    value |= 1 << bit
            out.append(value)
        return out
    raise InputError(f"unknown branch {force_branch!r}")


class _Sweep:
    """Shared run sweep: maintains per-input current runs and the heap."""

    def __init__(self, bitmaps: Sequence[RleBitmap], total_words: int):
        self.words = [b.words for b in bitmaps]
        self.iters = [_merged_runs(b, total_words) for b in bitmaps]
        self.kind = [""] * len(bitmaps)
        self.payload: list = [None] * len(bitmaps)
        self.ones = 0  # inputs currently in a one-fill
        self.clean = 0  # inputs currently in any fill
        self.heap = []
        self.pops = 0
        for i, it in enumerate(self.iters):
            self._install(i, next(it))
        heapq.heapify(self.heap)

    def _install(self, i, run):
        kind, end, payload = run
        self.kind[i] = kind
        self.payload[i] = payload
        if kind == "f":
            self.clean += 1
            self.ones += payload
        self.heap.append((end, i))

    def _retire(self, i):
        if self.kind[i] == "f":
            self.clean -= 1
            self.ones -= self.payload[i]

    def segment_end(self) -> int:
        return self.heap[0][0]

    def advance(self, end: int):
        while self.heap and self.heap[0][0] == end:
            _, i = heapq.heappop(self.heap)
            self.pops += 1
            self._retire(i)
            run = next(self.iters[i], None)
            if run is not None:
                kind, rend, payload = run
                self.kind[i] = kind
                self.payload[i] = payload
                if kind == "f":
                    self.clean += 1
                    self.ones += payload
                heapq.heappush(self.heap, (rend, i))
            else:
                self.kind[i] = ""

    def dirty_blocks(self, cur: int, width: int) -> list[list[int]]:
        blocks = []
        for i in range(len(self.kind)):
            if self.kind[i] == "d":
                base, start = self.payload[i]
                lo = base + (cur - start)
                blocks.append(self.words[i][lo : lo + width])
        return blocks


def _emit_ones(builder: RleBuilder, width: int, is_final: bool, rem: int):
    if is_final and rem:
        if width > 1:
            builder.append_fill(1, width - 1)
        builder.append_word((1 << rem) - 1)
    else:
        builder.append_fill(1, width)


def cdom_threshold(bitmaps: Sequence[RleBitmap], t: int,
                   stats: dict | None = None) -> RleBitmap:
    """Threshold over RLE bitmaps by merging runs; cost scales with the
    inputs' total run count, not their length."""
    n = len(bitmaps)
    if not 1 <= t <= n:
        raise InputError(f"threshold {t} outside [1, {n}]")
    if any(not isinstance(b, RleBitmap) for b in bitmaps):
        raise InputError("cdom operates on RLE bitmaps; compress inputs first")
    if t == 1:
        return bm.wide_or(list(bitmaps))
    if t == n:
        return bm.wide_and(list(bitmaps))
    r = max(b.bit_length for b in bitmaps)
    total = _word_count(r)
    if total == 0:
        return RleBitmap.empty(r)
    sweep = _Sweep(bitmaps, total)
    builder = RleBuilder()
    branch_stats = {} if stats is not None else None
    segments = 0
    cur = 0
    rem = r % W
    while cur < total:
        end = sweep.segment_end()
        width = end - cur + 1
        segments += 1
        k = sweep.ones
        dirty_n = n - sweep.clean
        if t - k <= 0:
            _emit_ones(builder, width, end == total - 1, rem)
        elif t - k > dirty_n:
            builder.append_fill(0, width)
        else:
            blocks = sweep.dirty_blocks(cur, width)
            for word in dirty_segment_solver(blocks, t - k, stats=branch_stats):
                builder.append_word(word)
        sweep.advance(end)
        cur = end + 1
    if stats is not None:
        stats["segments"] = segments
        stats["heap_pops"] = sweep.pops
        stats["branches"] = branch_stats
    return builder.finish(r)


def cdom_symmetric(bitmaps: Sequence[RleBitmap], spec: SymmetricSpec,
                   stats: dict | None = None) -> RleBitmap:
    """Run-merging evaluation of an arbitrary symmetric function.

    A segment is constant whenever the accept vector is constant over
    the weight range reachable from its clean ones plus dirty inputs.
    """
    n = len(bitmaps)
    if spec.arity != n:
        raise InputError(f"spec arity {spec.arity} != {n} inputs")
    if any(not isinstance(b, RleBitmap) for b in bitmaps):
        raise InputError("cdom operates on RLE bitmaps; compress inputs first")
    r = max(b.bit_length for b in bitmaps)
    total = _word_count(r)
    if total == 0:
        return RleBitmap.empty(r)
    accept = spec.accept
    sweep = _Sweep(bitmaps, total)
    builder = RleBuilder()
    segments = 0
    cur = 0
    rem = r % W
    while cur < total:
        end = sweep.segment_end()
        width = end - cur + 1
        segments += 1
        k = sweep.ones
        dirty_n = n - sweep.clean
        reachable = accept[k : k + dirty_n + 1]
        if all(reachable):
            _emit_ones(builder, width, end == total - 1, rem)
        elif not any(reachable):
            builder.append_fill(0, width)
        else:
            blocks = sweep.dirty_blocks(cur, width)
            for w in range(width):
                counts = [0] * W
                for block in blocks:
                    word = block[w]
                    while word:
                        low = word & -word
                        counts[low.bit_length() - 1] += 1
                        word ^= low
                value = 0
                for bit in range(W):
                    if accept[k + counts[bit]]:
                        value |= 1 << bit
                if cur + w == total - 1 and rem:
                    value &= (1 << rem) - 1
                builder.append_word(value)
        sweep.advance(end)
        cur = end + 1
    if stats is not None:
        stats["segments"] = segments
        stats["heap_pops"] = sweep.pops
    return builder.finish(r)
