"""Bitmap representations and their Boolean set algebra.

Two interchangeable representations are provided:

* :class:`UncompressedBitmap` -- a plain array of 64-bit words, LSB-first
  within each word.  Trailing all-zero words may be dropped; every
  operation treats missing words as zero.
* :class:`RleBitmap` -- a word-aligned run-length encoding.  Marker words
  describe a run of fill words (all zeros or all ones) followed by a
  count of literal ("dirty") words.

Both types are immutable after construction and can be shared freely
across threads for reading.
"""

from __future__ import annotations

import struct
from io import BytesIO
from typing import BinaryIO, Iterable, Iterator, Union

from .errors import FormatError, InputError

W = 64
WORD_MASK = (1 << W) - 1

# Marker word layout, LSB first:
#   bit 0       fill bit (value of the fill words)
#   bits 1-32   number of fill words in the run
#   bits 33-63  number of literal words that follow the marker
_MAX_FILL_RUN = (1 << 32) - 1
_MAX_DIRTY = (1 << 31) - 1


def _make_marker(fill_bit: int, fill_run: int, dirty_count: int) -> int:
    return fill_bit | (fill_run << 1) | (dirty_count << 33)


def _split_marker(marker: int) -> tuple[int, int, int]:
    return marker & 1, (marker >> 1) & _MAX_FILL_RUN, marker >> 33


def _word_count(bit_length: int) -> int:
    return (bit_length + W - 1) // W


def _iter_word_bits(word: int, base: int) -> Iterator[int]:
    while word:
        low = word & -word
        yield base + low.bit_length() - 1
        word ^= low


class UncompressedBitmap:
    """Fixed-word-size bitmap over ``[0, bit_length)``.

    ``words`` may be shorter than ``ceil(bit_length / 64)``; missing
    trailing words are implicitly zero.
    """

    __slots__ = ("words", "bit_length", "_card")

    def __init__(self, words: list[int], bit_length: int):
        if bit_length < 0:
            raise InputError("bit_length must be nonnegative")
        while words and words[-1] == 0:
            words.pop()
        if len(words) > _word_count(bit_length):
            raise InputError("more words than bit_length allows")
        if words and len(words) == _word_count(bit_length) and bit_length % W:
            if words[-1] >> (bit_length % W):
                raise InputError("set bits at positions >= bit_length")
        self.words = words
        self.bit_length = bit_length
        self._card: int | None = None

    @classmethod
    def empty(cls, bit_length: int) -> "UncompressedBitmap":
        return cls([], bit_length)

    @classmethod
    def ones(cls, bit_length: int) -> "UncompressedBitmap":
        full, rem = divmod(bit_length, W)
        words = [WORD_MASK] * full
        if rem:
            words.append((1 << rem) - 1)
        return cls(words, bit_length)

    @classmethod
    def from_positions(cls, positions: Iterable[int], bit_length: int) -> "UncompressedBitmap":
        words = [0] * _word_count(bit_length)
        prev = -1
        for p in positions:
            if p <= prev:
                raise InputError("positions must be strictly ascending")
            if p >= bit_length:
                raise InputError(f"position {p} out of range [0, {bit_length})")
            words[p >> 6] |= 1 << (p & 63)
            prev = p
        return cls(words, bit_length)

    def cardinality(self) -> int:
        if self._card is None:
            self._card = sum(w.bit_count() for w in self.words)
        return self._card

    def get(self, position: int) -> bool:
        if not 0 <= position < self.bit_length:
            raise InputError("position out of range")
        wi = position >> 6
        if wi >= len(self.words):
            return False
        return bool(self.words[wi] >> (position & 63) & 1)

    __contains__ = get

    def iter_set_bits(self) -> Iterator[int]:
        for wi, word in enumerate(self.words):
            if word:
                yield from _iter_word_bits(word, wi << 6)

    def positions(self) -> list[int]:
        return list(self.iter_set_bits())

    def iter_runs(self) -> Iterator[tuple[int, int, int]]:
        """Yield maximal ``(start, end_inclusive, bit)`` runs covering [0, bit_length)."""
        r = self.bit_length
        if r == 0:
            return
        start = 0
        prev = self.get(0)
        for p in range(1, r):
            cur = self.get(p)
            if cur != prev:
                yield start, p - 1, int(prev)
                start, prev = p, cur
        yield start, r - 1, int(prev)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UncompressedBitmap):
            return NotImplemented
        return self.bit_length == other.bit_length and self.words == other.words

    def __repr__(self) -> str:
        return f"UncompressedBitmap(card={self.cardinality()}, r={self.bit_length})"

    def __and__(self, other: "UncompressedBitmap") -> "UncompressedBitmap":
        return and_(self, other)

    def __or__(self, other: "UncompressedBitmap") -> "UncompressedBitmap":
        return or_(self, other)

    def __xor__(self, other: "UncompressedBitmap") -> "UncompressedBitmap":
        return xor(self, other)

    def andnot(self, other: "UncompressedBitmap") -> "UncompressedBitmap":
        return andnot(self, other)


class RleBitmap:
    """Word-aligned run-length-encoded bitmap.

    ``words`` alternates marker words and the literal words they
    announce.  The canonical empty bitmap has no words at all, and a
    canonical encoding never splits a fill run between two markers of
    the same fill bit.
    """

    __slots__ = ("words", "bit_length", "_card")

    def __init__(self, words: list[int], bit_length: int):
        if bit_length < 0:
            raise InputError("bit_length must be nonnegative")
        self.words = words
        self.bit_length = bit_length
        self._card: int | None = None

    @classmethod
    def empty(cls, bit_length: int) -> "RleBitmap":
        words = []
        remaining = _word_count(bit_length)
        while remaining:
            run = min(remaining, _MAX_FILL_RUN)
            words.append(_make_marker(0, run, 0))
            remaining -= run
        return cls(words, bit_length)

    @classmethod
    def ones(cls, bit_length: int) -> "RleBitmap":
        return compress(UncompressedBitmap.ones(bit_length))

    @classmethod
    def from_positions(cls, positions: Iterable[int], bit_length: int) -> "RleBitmap":
        return compress(UncompressedBitmap.from_positions(positions, bit_length))

    def iter_word_segments(self, total_words: int | None = None):
        """Yield ``('f', bit, count)`` fill segments and ``('d', start, count)``
        dirty segments, zero-extended to ``total_words`` when given."""
        words = self.words
        n = len(words)
        i = 0
        covered = 0
        while i < n:
            fill_bit, fill_run, dirty = _split_marker(words[i])
            i += 1
            if fill_run:
                yield "f", fill_bit, fill_run
                covered += fill_run
            if dirty:
                if i + dirty > n:
                    raise FormatError("marker announces more literal words than present")
                yield "d", i, dirty
                i += dirty
                covered += dirty
        limit = _word_count(self.bit_length) if total_words is None else total_words
        if covered > limit:
            raise FormatError("encoded words exceed bit_length")
        if covered < limit:
            yield "f", 0, limit - covered

    def iter_runs(self) -> Iterator[tuple[int, int, int]]:
        """Yield maximal ``(start, end_inclusive, bit)`` runs covering [0, bit_length)."""
        r = self.bit_length
        if r == 0:
            return
        start = 0
        pos = 0
        prev: int | None = None
        for kind, a, b in self.iter_word_segments():
            if kind == "f":
                bits = min(b * W, r - pos)
                if prev is not None and a != prev:
                    yield start, pos - 1, prev
                    start = pos
                prev = a
                pos += bits
            else:
                for wi in range(a, a + b):
                    word = self.words[wi]
                    n = min(W, r - pos)
                    for k in range(n):
                        bit = (word >> k) & 1
                        if prev is not None and bit != prev:
                            yield start, pos - 1, prev
                            start = pos
                        prev = bit
                        pos += 1
                    if pos >= r:
                        break
            if pos >= r:
                break
        if prev is not None:
            yield start, r - 1, prev

    def run_count(self) -> int:
        """Number of maximal runs of identical bits over [0, bit_length)."""
        r = self.bit_length
        if r == 0:
            return 0
        runs = 0
        prev = -1  # no bit seen yet
        pos = 0
        for kind, a, b in self.iter_word_segments():
            if kind == "f":
                if a != prev:
                    runs += 1
                    prev = a
                pos += b * W
            else:
                for wi in range(a, a + b):
                    word = self.words[wi]
                    if pos + W > r:
                        word &= (1 << (r - pos)) - 1
                    if prev == -1:
                        prev = word & 1
                        runs += 1
                    # transitions inside the word, plus the boundary transition
                    t = (word ^ ((word << 1) | prev)) & WORD_MASK
                    if pos + W > r:
                        t &= (1 << (r - pos)) - 1
                    runs += t.bit_count()
                    prev = (word >> (W - 1)) & 1 if pos + W <= r else (word >> (r - pos - 1)) & 1
                    pos += W
            if pos >= r:
                break
        return runs

    def cardinality(self) -> int:
        if self._card is None:
            total = 0
            for kind, a, b in self.iter_word_segments():
                if kind == "f":
                    total += a * b * W
                else:
                    total += sum(self.words[wi].bit_count() for wi in range(a, a + b))
            self._card = total
        return self._card

    def iter_set_bits(self) -> Iterator[int]:
        pos = 0
        for kind, a, b in self.iter_word_segments():
            if kind == "f":
                if a:
                    yield from range(pos, pos + b * W)
                pos += b * W
            else:
                for wi in range(a, a + b):
                    yield from _iter_word_bits(self.words[wi], pos)
                    pos += W

    def positions(self) -> list[int]:
        return list(self.iter_set_bits())

    def get(self, position: int) -> bool:
        if not 0 <= position < self.bit_length:
            raise InputError("position out of range")
        target = position >> 6
        pos = 0
        for kind, a, b in self.iter_word_segments():
            if target < pos + b:
                if kind == "f":
                    return bool(a)
                return bool(self.words[a + (target - pos)] >> (position & 63) & 1)
            pos += b
        return False

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RleBitmap):
            return NotImplemented
        return self.bit_length == other.bit_length and self.words == other.words

    def __repr__(self) -> str:
        return f"RleBitmap(card={self.cardinality()}, r={self.bit_length}, words={len(self.words)})"

    def __and__(self, other: "RleBitmap") -> "RleBitmap":
        return and_(self, other)

    def __or__(self, other: "RleBitmap") -> "RleBitmap":
        return or_(self, other)

    def __xor__(self, other: "RleBitmap") -> "RleBitmap":
        return xor(self, other)

    def andnot(self, other: "RleBitmap") -> "RleBitmap":
        return andnot(self, other)


Bitmap = Union[UncompressedBitmap, RleBitmap]


class RleBuilder:
    """Accumulates words into a canonical run-length encoding.

    Adjacent fills of the same bit are merged and literal words that
    happen to be all-zero or all-one are turned into fills.  The
    finished encoding covers every appended word, so equal bitmaps have
    identical word sequences.
    """

    __slots__ = ("words", "_fill_bit", "_fill_run", "_dirty")

    def __init__(self):
        self.words: list[int] = []
        self._fill_bit = 0
        self._fill_run = 0
        self._dirty: list[int] = []

    def _flush(self):
        run, bit = self._fill_run, self._fill_bit
        dirty = self._dirty
        while run > _MAX_FILL_RUN:
            self.words.append(_make_marker(bit, _MAX_FILL_RUN, 0))
            run -= _MAX_FILL_RUN
        while len(dirty) > _MAX_DIRTY:
            self.words.append(_make_marker(bit, run, _MAX_DIRTY))
            self.words.extend(dirty[:_MAX_DIRTY])
            dirty = dirty[_MAX_DIRTY:]
            run, bit = 0, 0
        self.words.append(_make_marker(bit, run, len(dirty)))
        self.words.extend(dirty)
        self._fill_bit = 0
        self._fill_run = 0
        self._dirty = []

    def append_fill(self, bit: int, count: int):
        if count <= 0:
            return
        if self._dirty or (self._fill_run and self._fill_bit != bit):
            self._flush()
        self._fill_bit = bit
        self._fill_run += count

    def append_word(self, word: int):
        if word == 0:
            self.append_fill(0, 1)
        elif word == WORD_MASK:
            self.append_fill(1, 1)
        else:
            self._dirty.append(word)

    def finish(self, bit_length: int) -> RleBitmap:
        if self._dirty or self._fill_run:
            self._flush()
        return RleBitmap(self.words, bit_length)


def compress(bitmap: UncompressedBitmap) -> RleBitmap:
    """Run-length encode an uncompressed bitmap (canonical form)."""
    builder = RleBuilder()
    for word in bitmap.words:
        builder.append_word(word)
    # cover implicit trailing zero words so the encoding is canonical
    builder.append_fill(0, _word_count(bitmap.bit_length) - len(bitmap.words))
    return builder.finish(bitmap.bit_length)


def decompress(bitmap: RleBitmap) -> UncompressedBitmap:
    """Expand a run-length-encoded bitmap back to word-array form."""
    words: list[int] = []
    limit = _word_count(bitmap.bit_length)
    for kind, a, b in bitmap.iter_word_segments():
        if kind == "f":
            words.extend([WORD_MASK if a else 0] * b)
        else:
            words.extend(bitmap.words[a : a + b])
    if len(words) > limit:
        raise FormatError("encoded words exceed bit_length")
    try:
        return UncompressedBitmap(words, bitmap.bit_length)
    except InputError as exc:
        raise FormatError(str(exc)) from None


# ---------------------------------------------------------------------------
# Boolean operations


def _u_and(a: UncompressedBitmap, b: UncompressedBitmap) -> UncompressedBitmap:
    # work stops at the shorter operand's last word: the rest is zero anyway
    words = [x & y for x, y in zip(a.words, b.words)]
    return UncompressedBitmap(words, max(a.bit_length, b.bit_length))


def _u_or(a: UncompressedBitmap, b: UncompressedBitmap) -> UncompressedBitmap:
    if len(a.words) < len(b.words):
        a, b = b, a
    n = len(b.words)
    words = [x | y for x, y in zip(a.words, b.words)]
    words.extend(a.words[n:])
    return UncompressedBitmap(words, max(a.bit_length, b.bit_length))


def _u_xor(a: UncompressedBitmap, b: UncompressedBitmap) -> UncompressedBitmap:
    if len(a.words) < len(b.words):
        a, b = b, a
    n = len(b.words)
    words = [x ^ y for x, y in zip(a.words, b.words)]
    words.extend(a.words[n:])
    return UncompressedBitmap(words, max(a.bit_length, b.bit_length))


def _u_andnot(a: UncompressedBitmap, b: UncompressedBitmap) -> UncompressedBitmap:
    n = len(b.words)
    words = [x & ~y for x, y in zip(a.words, b.words)]
    words.extend(a.words[n:])
    return UncompressedBitmap(words, max(a.bit_length, b.bit_length))


def _u_not(a: UncompressedBitmap, bit_length: int) -> UncompressedBitmap:
    full, rem = divmod(bit_length, W)
    nw = full + (1 if rem else 0)
    src = a.words
    words = [(~src[i] if i < len(src) else WORD_MASK) & WORD_MASK for i in range(nw)]
    if rem:
        words[-1] &= (1 << rem) - 1
    return UncompressedBitmap(words, bit_length)


_FILL_OPS = {
    "and": lambda x, y: x & y,
    "or": lambda x, y: x | y,
    "xor": lambda x, y: x ^ y,
    "andnot": lambda x, y: x & ~y & 1,
}


def _rle_binary(kind: str, a: RleBitmap, b: RleBitmap) -> RleBitmap:
    r = max(a.bit_length, b.bit_length)
    total = _word_count(r)
    fill_op = _FILL_OPS[kind]
    builder = RleBuilder()

    seg_a = a.iter_word_segments(total)
    seg_b = b.iter_word_segments(total)
    cur_a = next(seg_a, None)
    cur_b = next(seg_b, None)
    off_a = off_b = 0  # words already consumed within the current segment
    while cur_a is not None and cur_b is not None:
        ka, xa, na = cur_a
        kb, xb, nb = cur_b
        take = min(na - off_a, nb - off_b)
        if ka == "f" and kb == "f":
            builder.append_fill(fill_op(xa, xb), take)
        elif ka == "f" or kb == "f":
            if ka == "f":
                fill, fill_first = xa, True
                src, start = b.words, xb + off_b
            else:
                fill, fill_first = xb, False
                src, start = a.words, xa + off_a
            emitted = False
            if kind == "and":
                if fill == 0:
                    builder.append_fill(0, take)
                    emitted = True
            elif kind == "or":
                if fill == 1:
                    builder.append_fill(1, take)
                    emitted = True
            elif kind == "andnot":
                if fill_first:
                    if fill == 0:
                        builder.append_fill(0, take)
                        emitted = True
                    else:  # ~dirty
                        for i in range(take):
                            builder.append_word(src[start + i] ^ WORD_MASK)
                        emitted = True
                else:
                    if fill == 1:
                        builder.append_fill(0, take)
                        emitted = True
            if not emitted:
                if kind == "xor" and fill == 1:
                    for i in range(take):
                        builder.append_word(src[start + i] ^ WORD_MASK)
                else:  # identity: copy the dirty side
                    for i in range(take):
                        builder.append_word(src[start + i])
        else:
            wa, wb = a.words, b.words
            ia, ib = xa + off_a, xb + off_b
            if kind == "and":
                for i in range(take):
                    builder.append_word(wa[ia + i] & wb[ib + i])
            elif kind == "or":
                for i in range(take):
                    builder.append_word(wa[ia + i] | wb[ib + i])
            elif kind == "xor":
                for i in range(take):
                    builder.append_word(wa[ia + i] ^ wb[ib + i])
            else:
                for i in range(take):
                    builder.append_word(wa[ia + i] & ~wb[ib + i] & WORD_MASK)
        off_a += take
        off_b += take
        if off_a == na:
            cur_a = next(seg_a, None)
            off_a = 0
        if off_b == nb:
            cur_b = next(seg_b, None)
            off_b = 0
    return builder.finish(r)


def _rle_not(a: RleBitmap, bit_length: int) -> RleBitmap:
    total = _word_count(bit_length)
    rem = bit_length % W
    builder = RleBuilder()
    pos = 0
    for kind, x, n in a.iter_word_segments(total):
        if kind == "f":
            flipped = 1 - x
            if rem and pos + n == total:
                if n > 1:
                    builder.append_fill(flipped, n - 1)
                word = WORD_MASK if flipped else 0
                builder.append_word(word & ((1 << rem) - 1))
            else:
                builder.append_fill(flipped, n)
        else:
            for i in range(n):
                word = a.words[x + i] ^ WORD_MASK
                if rem and pos + i + 1 == total:
                    word &= (1 << rem) - 1
                builder.append_word(word)
        pos += n
    return builder.finish(bit_length)


def _check_same_type(a: Bitmap, b: Bitmap):
    if type(a) is not type(b):
        raise InputError(
            "mixed bitmap representations; convert explicitly with compress/decompress"
        )


def and_(a: Bitmap, b: Bitmap) -> Bitmap:
    _check_same_type(a, b)
    if isinstance(a, UncompressedBitmap):
        return _u_and(a, b)
    return _rle_binary("and", a, b)


def or_(a: Bitmap, b: Bitmap) -> Bitmap:
    _check_same_type(a, b)
    if isinstance(a, UncompressedBitmap):
        return _u_or(a, b)
    return _rle_binary("or", a, b)


def xor(a: Bitmap, b: Bitmap) -> Bitmap:
    _check_same_type(a, b)
    if isinstance(a, UncompressedBitmap):
        return _u_xor(a, b)
    return _rle_binary("xor", a, b)


def andnot(a: Bitmap, b: Bitmap) -> Bitmap:
    _check_same_type(a, b)
    if isinstance(a, UncompressedBitmap):
        return _u_andnot(a, b)
    return _rle_binary("andnot", a, b)


_BINARY_OPS = {"and": and_, "or": or_, "xor": xor, "andnot": andnot}


def binary_op(kind: str, a: Bitmap, b: Bitmap) -> Bitmap:
    """Positionwise Boolean combination; ``kind`` is one of and/or/xor/andnot."""
    try:
        op = _BINARY_OPS[kind.lower()]
    except KeyError:
        raise InputError(f"unknown operation {kind!r}") from None
    return op(a, b)


def not_(a: Bitmap, bit_length: int) -> Bitmap:
    """Complement within ``[0, bit_length)``; requires ``bit_length >= a.bit_length``."""
    if bit_length < a.bit_length:
        raise InputError("complement universe smaller than the bitmap")
    if isinstance(a, UncompressedBitmap):
        return _u_not(a, bit_length)
    return _rle_not(a, bit_length)


def wide_or(bitmaps: list[Bitmap]) -> Bitmap:
    """OR of one or more bitmaps of the same representation."""
    if not bitmaps:
        raise InputError("wide_or of an empty list")
    first = bitmaps[0]
    if len(bitmaps) == 1:
        return first
    if isinstance(first, UncompressedBitmap):
        # accumulate into one mutable word array: the result bitmap doubles
        # as an array of single-bit counters
        r = max(b.bit_length for b in bitmaps)
        acc = [0] * max(len(b.words) for b in bitmaps)
        for b in bitmaps:
            _check_same_type(first, b)
            for i, wrd in enumerate(b.words):
                acc[i] |= wrd
        return UncompressedBitmap(acc, r)
    out = first
    for b in bitmaps[1:]:
        out = or_(out, b)
    return out


def wide_and(bitmaps: list[Bitmap]) -> Bitmap:
    """AND of one or more bitmaps of the same representation."""
    if not bitmaps:
        raise InputError("wide_and of an empty list")
    out = bitmaps[0]
    for b in bitmaps[1:]:
        out = and_(out, b)
    return out


def empty_like(bitmap: Bitmap, bit_length: int) -> Bitmap:
    return type(bitmap).empty(bit_length)


def ones_like(bitmap: Bitmap, bit_length: int) -> Bitmap:
    return type(bitmap).ones(bit_length)


# ---------------------------------------------------------------------------
# Serialization: magic, representation tag, bit_length, word count, raw words
# (all integers little-endian)

_MAGIC = b"BQBM"
_HEADER = struct.Struct("<4scQQ")
_TAGS = {UncompressedBitmap: b"U", RleBitmap: b"R"}


def write_bitmap(fp: BinaryIO, bitmap: Bitmap) -> None:
    fp.write(_HEADER.pack(_MAGIC, _TAGS[type(bitmap)], bitmap.bit_length, len(bitmap.words)))
    fp.write(struct.pack(f"<{len(bitmap.words)}Q", *bitmap.words))


def read_bitmap(fp: BinaryIO) -> Bitmap:
    head = fp.read(_HEADER.size)
    if len(head) != _HEADER.size:
        raise FormatError("truncated bitmap header")
    magic, tag, bit_length, count = _HEADER.unpack(head)
    if magic != _MAGIC:
        raise FormatError("bad bitmap magic")
    payload = fp.read(8 * count)
    if len(payload) != 8 * count:
        raise FormatError("truncated bitmap payload")
    words = list(struct.unpack(f"<{count}Q", payload))
    if tag == b"U":
        try:
            return UncompressedBitmap(words, bit_length)
        except InputError as exc:
            raise FormatError(str(exc)) from None
    if tag == b"R":
        bm = RleBitmap(words, bit_length)
        decompress(bm)  # validates the marker stream
        return bm
    raise FormatError(f"unknown representation tag {tag!r}")


def dumps_bitmap(bitmap: Bitmap) -> bytes:
    buf = BytesIO()
    write_bitmap(buf, bitmap)
    return buf.getvalue()


def loads_bitmap(data: bytes) -> Bitmap:
    return read_bitmap(BytesIO(data))


def load_text_sets(path) -> list[list[int]]:
    """Read one set per line: comma-separated ascending integers.

    Blank lines denote empty sets.
    """
    sets: list[list[int]] = []
    with open(path, "r", encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, 1):
            line = line.strip()
            if not line:
                sets.append([])
                continue
            try:
                values = [int(tok) for tok in line.split(",")]
            except ValueError:
                raise InputError(f"line {lineno}: not a comma-separated integer list") from None
            if any(v < 0 for v in values):
                raise InputError(f"line {lineno}: negative position")
            if any(b <= a for a, b in zip(values, values[1:])):
                raise InputError(f"line {lineno}: positions must be strictly ascending")
            sets.append(values)
    return sets
