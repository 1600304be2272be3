"""Bit-parallel threshold computations that need no explicit circuit.

``looped_threshold`` fills in the threshold recurrence row by row with
whole-bitmap operations; ``csv_threshold`` accumulates a redundant
carry-save vertical counter and subtracts the threshold at the end.
"""

from __future__ import annotations

from typing import Sequence

from .. import bitmaps as bm
from ..errors import InputError


def looped_threshold(bitmaps: Sequence[bm.Bitmap], t: int,
                     stats: dict | None = None) -> bm.Bitmap:
    """Threshold via the recurrence C_j <- C_j | (C_{j-1} & B_i).

    Exactly ``2NT - N - T^2 + T - 1`` binary bitmap operations are
    issued for ``1 <= T <= N``.
    """
    n = len(bitmaps)
    if not 1 <= t <= n:
        raise InputError(f"threshold {t} outside [1, {n}]")
    r = max(b.bit_length for b in bitmaps)
    empty = type(bitmaps[0]).empty(r)
    ops = 0
    c: list = [None] + [empty] * t  # 1-indexed
    c[1] = bitmaps[0]
    for i in range(2, n + 1):
        b = bitmaps[i - 1]
        for j in range(min(t, i), 1, -1):
            c[j] = bm.or_(c[j], bm.and_(c[j - 1], b))
            ops += 2
        c[1] = bm.or_(c[1], b)
        ops += 1
    if stats is not None:
        stats["bitmap_ops"] = ops
    result = c[t]
    if result.bit_length < r:
        result = bm.or_(result, empty)
    return result


def looped_op_count(n: int, t: int) -> int:
    """Closed form for the number of binary operations issued."""
    return 2 * n * t - n - t * t + t - 1


def csv_threshold(bitmaps: Sequence[bm.Bitmap], t: int,
                  stats: dict | None = None) -> bm.Bitmap:
    """Threshold via a redundantly encoded vertical counter.

    Each counter digit is a pair of bitmaps encoding 0, 1 or 2; digits
    are propagated on the trailing-zeros schedule so an amortized two
    digit updates happen per input.  The first two inputs seed the
    first digit directly.  Finally the counter is converted to binary,
    ``t`` is subtracted in two's complement and the negated sign bit is
    the answer.
    """
    n = len(bitmaps)
    if not 2 <= t < n:
        raise InputError(f"csv threshold needs 2 <= T < N, got T={t}, N={n}")
    r = max(b.bit_length for b in bitmaps)
    empty = type(bitmaps[0]).empty(r)
    ops = 0

    def and_(x, y):
        nonlocal ops
        ops += 1
        return bm.and_(x, y)

    def or_(x, y):
        nonlocal ops
        ops += 1
        return bm.or_(x, y)

    def xor(x, y):
        nonlocal ops
        ops += 1
        return bm.xor(x, y)

    m = (2 * n).bit_length() - 1  # floor(log2(2N)); m+1 digit pairs
    c1 = [empty] * (m + 1)
    c2 = [empty] * (m + 1)
    c1[0] = bitmaps[0]
    c2[0] = bitmaps[1]
    time = 1
    for i in range(2, n):
        carry = bitmaps[i]
        time += 1
        x = (time & -time).bit_length() - 1  # trailing zeros
        for p in range(x):
            a, b = c1[p], c2[p]
            c1[p] = empty
            s = xor(a, b)
            c2[p] = xor(s, carry)
            carry = or_(and_(a, b), and_(carry, s))
        c1[x] = carry

    # redundant digits -> conventional binary
    v = [empty] * (m + 1)
    cin = empty
    for idx in range(m):
        a, b = c1[idx], c2[idx]
        s = xor(a, b)
        v[idx] = xor(s, cin)
        cin = or_(and_(a, b), and_(cin, s))

    # subtract t and keep only the sign bit of the difference
    minus_t = (1 << (m + 1)) - t
    cin = empty
    for idx in range(m):
        a = v[idx]
        if (minus_t >> idx) & 1:
            cin = or_(a, cin)
        else:
            cin = and_(cin, a)
    if stats is not None:
        stats["bitmap_ops"] = ops
    # top digit: result = NOT(sign) folded into the xor with the carry
    if (minus_t >> m) & 1:
        result = bm.xor(v[m], cin)
    else:
        result = bm.not_(bm.xor(v[m], cin), r)
    if result.bit_length < r:
        result = bm.or_(result, empty)
    return result
