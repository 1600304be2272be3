"""Heap-merge threshold algorithms with skipping: w_heap, mg_opt,
mg_skip and d_skip.

Every input is wrapped in a :class:`PosStream`, a monotone cursor over
the positions of set bits supporting ``advance_to`` (smallest element
>= v).  On run-length-encoded bitmaps ``advance_to`` jumps whole fill
runs and indexes directly into dirty-word groups; no auxiliary index is
built.
"""

from __future__ import annotations

import heapq
from typing import Sequence

from . import bitmaps as bm
from .errors import InputError
from .oracle import SymmetricSpec

_DONE = None


class PosStream:
    """Ascending cursor over one bitmap's set bits.

    ``value`` is the current position or ``None`` once exhausted.  When
    ``count_skips`` is set, positions that ``advance_to`` jumps over
    without yielding are tallied in ``skipped``.
    """

    __slots__ = ("value", "skipped", "_count", "_gen_next", "_advance")

    def __init__(self, bitmap: bm.Bitmap, count_skips: bool = False):
        self.skipped = 0
        self._count = count_skips
        if isinstance(bitmap, bm.UncompressedBitmap):
            cursor = _UncompressedCursor(bitmap)
        else:
            cursor = _RleCursor(bitmap)
        self._gen_next = cursor.next_at_least
        self.value = self._gen_next(0)
        self._advance = cursor

    def advance(self):
        """Move to the next set position."""
        if self.value is not None:
            self.value = self._gen_next(self.value + 1)

    def advance_to(self, target: int):
        """Move to the smallest set position >= target; never moves back."""
        if self.value is None or target <= self.value:
            return
        if self._count:
            self.skipped += self._advance.count_between(self.value + 1, target)
        self.value = self._gen_next(target)


class _UncompressedCursor:
    __slots__ = ("words",)

    def __init__(self, bitmap: bm.UncompressedBitmap):
        self.words = bitmap.words

    def next_at_least(self, target: int):
        words = self.words
        wi = target >> 6
        if wi >= len(words):
            return _DONE
        word = words[wi] >> (target & 63)
        if word:
            return target + (word & -word).bit_length() - 1
        for wi in range(wi + 1, len(words)):
            word = words[wi]
            if word:
                return (wi << 6) + (word & -word).bit_length() - 1
        return _DONE

    def count_between(self, lo: int, hi: int) -> int:
        """Set bits in [lo, hi); only used by instrumentation."""
        if hi <= lo:
            return 0
        words = self.words
        total = 0
        for wi in range(lo >> 6, min((hi + 63) >> 6, len(words))):
            word = words[wi]
            base = wi << 6
            if base < lo:
                word &= bm.WORD_MASK << (lo - base)
            if base + 64 > hi:
                word &= (1 << (hi - base)) - 1 if hi > base else 0
            total += word.bit_count()
        return total


class _RleCursor:
    """Cursor over an RLE bitmap's word segments.

    Advancing skips zero-fill runs in one step, one-fill runs by
    arithmetic, and lands inside dirty groups by direct word indexing.
    """

    __slots__ = ("bitmap", "_segments", "_seg", "_seg_word")

    def __init__(self, bitmap: bm.RleBitmap):
        self.bitmap = bitmap
        self._segments = bitmap.iter_word_segments()
        self._seg = next(self._segments, None)
        self._seg_word = 0  # absolute word index where the current segment starts

    def next_at_least(self, target: int):
        words = self.bitmap.words
        while self._seg is not None:
            kind, x, count = self._seg
            seg_end_word = self._seg_word + count
            if target >= seg_end_word << 6:
                self._seg_word = seg_end_word
                self._seg = next(self._segments, None)
                continue
            if kind == "f":
                if x == 0:
                    target = seg_end_word << 6
                    self._seg_word = seg_end_word
                    self._seg = next(self._segments, None)
                    continue
                return max(target, self._seg_word << 6)
            # dirty group: index straight to the word holding target
            start = max(target >> 6, self._seg_word)
            for wi in range(start, seg_end_word):
                word = words[x + (wi - self._seg_word)]
                if wi == target >> 6:
                    word >>= target & 63
                    if word:
                        return target + (word & -word).bit_length() - 1
                elif word:
                    return (wi << 6) + (word & -word).bit_length() - 1
            target = seg_end_word << 6
            self._seg_word = seg_end_word
            self._seg = next(self._segments, None)
        return _DONE

    def count_between(self, lo: int, hi: int) -> int:
        if hi <= lo:
            return 0
        total = 0
        pos = 0
        for kind, x, count in self.bitmap.iter_word_segments():
            seg_lo, seg_hi = pos, pos + count * 64
            pos = seg_hi
            if seg_hi <= lo:
                continue
            if seg_lo >= hi:
                break
            a, b = max(lo, seg_lo), min(hi, seg_hi)
            if kind == "f":
                if x:
                    total += b - a
                continue
            for wi in range(a >> 6, (b + 63) >> 6):
                word = self.bitmap.words[x + wi - (seg_lo >> 6)]
                base = wi << 6
                if base < a:
                    word &= bm.WORD_MASK << (a - base)
                if base + 64 > b:
                    word &= (1 << (b - base)) - 1 if b > base else 0
                total += word.bit_count()
        return total


def choose_l(mu: float, t: int, longest_len: int) -> int:
    """Number of long streams d_skip sets aside.

    ``floor(t / (mu * log2(longest_len + 2) + 1))`` with an integer
    floor log, clamped into [1, t-1].
    """
    if mu <= 0:
        raise InputError("mu must be positive")
    if t < 2:
        raise InputError("choose_l needs t >= 2")
    log2_len = (longest_len + 2).bit_length() - 1
    l = int(t / (mu * log2_len + 1))
    return max(1, min(t - 1, l))


def _check(bitmaps, t, t_min=1):
    n = len(bitmaps)
    if not t_min <= t <= n:
        raise InputError(f"threshold {t} outside [{t_min}, {n}]")
    return n


def _result(bitmaps: Sequence[bm.Bitmap], positions) -> bm.Bitmap:
    r = max(b.bit_length for b in bitmaps)
    out = bm.UncompressedBitmap.from_positions(positions, r)
    if isinstance(bitmaps[0], bm.RleBitmap):
        return bm.compress(out)
    return out


def w_heap(bitmaps: Sequence[bm.Bitmap], t: int, stats: dict | None = None) -> bm.Bitmap:
    """Merge all streams through one min-heap, counting duplicates."""
    _check(bitmaps, t)
    streams = [PosStream(b) for b in bitmaps]
    heap = [(s.value, i) for i, s in enumerate(streams) if s.value is not None]
    heapq.heapify(heap)
    pushes = len(heap)
    out = []
    while heap:
        value = heap[0][0]
        count = 0
        popped = []
        while heap and heap[0][0] == value:
            _, i = heapq.heappop(heap)
            count += 1
            popped.append(i)
        if count >= t:
            out.append(value)
        for i in popped:
            s = streams[i]
            s.advance()
            if s.value is not None:
                heapq.heappush(heap, (s.value, i))
                pushes += 1
    if stats is not None:
        stats["heap_pushes"] = pushes
    return _result(bitmaps, out)


def w_heap_symmetric(bitmaps: Sequence[bm.Bitmap], spec: SymmetricSpec) -> bm.Bitmap:
    """Heap merge generalized to any symmetric function.

    Positions covered by zero inputs only exist implicitly, so specs
    accepting weight 0 are completed with a final complement sweep.
    """
    if spec.arity != len(bitmaps):
        raise InputError("spec arity does not match the input count")
    r = max(b.bit_length for b in bitmaps)
    streams = [PosStream(b) for b in bitmaps]
    heap = [(s.value, i) for i, s in enumerate(streams) if s.value is not None]
    heapq.heapify(heap)
    seen = []
    out = []
    while heap:
        value = heap[0][0]
        count = 0
        popped = []
        while heap and heap[0][0] == value:
            _, i = heapq.heappop(heap)
            count += 1
            popped.append(i)
        seen.append(value)
        if spec.accept[count]:
            out.append(value)
        for i in popped:
            s = streams[i]
            s.advance()
            if s.value is not None:
                heapq.heappush(heap, (s.value, i))
    if not spec.accept[0]:
        return _result(bitmaps, out)
    seen_set = set(seen)
    accepted = set(out)
    full = (p for p in range(r) if p in accepted or p not in seen_set)
    return _result(bitmaps, full)


def mg_opt(bitmaps: Sequence[bm.Bitmap], t: int, stats: dict | None = None) -> bm.Bitmap:
    """Set the T-1 largest inputs aside; candidates must appear in the
    small group, then are confirmed by probing the large streams."""
    n = _check(bitmaps, t, t_min=2)
    count_skips = stats is not None
    order = sorted(range(n), key=lambda i: (-bitmaps[i].cardinality(), i))
    large = [PosStream(bitmaps[i], count_skips) for i in order[: t - 1]]
    small = [PosStream(bitmaps[i]) for i in order[t - 1 :]]
    probes = 0
    out = []
    heap = [(s.value, i) for i, s in enumerate(small) if s.value is not None]
    heapq.heapify(heap)
    while heap:
        value = heap[0][0]
        count = 0
        popped = []
        while heap and heap[0][0] == value:
            _, i = heapq.heappop(heap)
            count += 1
            popped.append(i)
        needed = t - count
        if needed <= 0:
            out.append(value)
        else:
            hits = 0
            for k, s in enumerate(large):
                remaining = len(large) - k
                if hits + remaining < needed:
                    break
                s.advance_to(value)
                probes += 1
                if s.value == value:
                    hits += 1
                    if hits >= needed:
                        out.append(value)
                        break
        for i in popped:
            s = small[i]
            s.advance()
            if s.value is not None:
                heapq.heappush(heap, (s.value, i))
    if stats is not None:
        stats["probes"] = probes
        stats["skipped"] = sum(s.skipped for s in large)
    return _result(bitmaps, out)


def mg_skip(bitmaps: Sequence[bm.Bitmap], t: int, stats: dict | None = None) -> bm.Bitmap:
    """Heap merge that prunes: when the top value falls short of the
    threshold, extra entries are popped (to T-1 in total) and every
    popped stream jumps to the new heap minimum."""
    n = _check(bitmaps, t, t_min=2)
    count_skips = stats is not None
    streams = [PosStream(b, count_skips) for b in bitmaps]
    matches, extra_pops, rounds = _skip_merge(streams, t)
    if stats is not None:
        stats["extra_pops"] = extra_pops
        stats["rounds"] = rounds
        stats["skipped"] = sum(s.skipped for s in streams)
    return _result(bitmaps, [v for v, _ in matches])


def _skip_merge(streams: list[PosStream], t: int):
    """Shared MergeSkip loop; returns ((value, count) matches with
    count >= t, extra pops, prune rounds).  When the top value falls
    short, entries are popped until t-1 are in hand and all of them
    jump to the remaining heap minimum."""
    heap = [(s.value, i) for i, s in enumerate(streams) if s.value is not None]
    heapq.heapify(heap)
    out = []
    extra_pops = 0
    rounds = 0
    while heap:
        value = heap[0][0]
        count = 0
        popped = []
        while heap and heap[0][0] == value:
            _, i = heapq.heappop(heap)
            count += 1
            popped.append(i)
        if count >= t:
            out.append((value, count))
            for i in popped:
                s = streams[i]
                s.advance()
                if s.value is not None:
                    heapq.heappush(heap, (s.value, i))
            continue
        rounds += 1
        extra = min(t - 1 - count, len(heap))
        for _ in range(extra):
            _, i = heapq.heappop(heap)
            popped.append(i)
        extra_pops += extra
        if not heap:
            # every live stream is in hand and they are fewer than t
            if len(popped) >= t:
                bound = value + 1
            else:
                break
        else:
            bound = heap[0][0]
        for i in popped:
            s = streams[i]
            s.advance_to(bound)
            if s.value is not None:
                heapq.heappush(heap, (s.value, i))
    return out, extra_pops, rounds


def d_skip(bitmaps: Sequence[bm.Bitmap], t: int, mu: float = 0.02,
           l_override: int | None = None, stats: dict | None = None) -> bm.Bitmap:
    """Hybrid pruning: the L largest streams are probed lazily while a
    skip-pruned merge with threshold T-L runs over the rest."""
    n = _check(bitmaps, t, t_min=2)
    count_skips = stats is not None
    longest = max(b.cardinality() for b in bitmaps)
    l = l_override if l_override is not None else choose_l(mu, t, longest)
    l = max(1, min(l, t - 1, n - 1))
    order = sorted(range(n), key=lambda i: (-bitmaps[i].cardinality(), i))
    large = [PosStream(bitmaps[i], count_skips) for i in order[:l]]
    small = [PosStream(bitmaps[i], count_skips) for i in order[l:]]
    t_eff = max(1, t - l)
    candidates, extra_pops, rounds = _skip_merge(small, t_eff)
    probes = 0
    out = []
    for value, count in candidates:
        needed = t - count
        if needed <= 0:
            out.append(value)
            continue
        hits = 0
        for k, s in enumerate(large):
            remaining = len(large) - k
            if hits + remaining < needed:
                break
            s.advance_to(value)
            probes += 1
            if s.value == value:
                hits += 1
                if hits >= needed:
                    out.append(value)
                    break
    if stats is not None:
        stats["l"] = l
        stats["probes"] = probes
        stats["extra_pops"] = extra_pops
        stats["rounds"] = rounds
        stats["skipped"] = sum(s.skipped for s in large) + sum(s.skipped for s in small)
    return _result(bitmaps, out)
