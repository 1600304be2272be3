"""Compilation of circuits to straight-line programs over bitmaps.

A :class:`BitProgram` is a flat instruction list interpreted over whole
bitmaps (vertical evaluation) or over batches of words (horizontal
evaluation, uncompressed inputs only).  Slots are reclaimed immediately
after a value's last use and returned to a free list, so peak storage
stays close to the circuit's register need.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from io import BytesIO
from typing import BinaryIO, Sequence

from .. import bitmaps as bm
from ..errors import FormatError, InputError
from .core import AND, ANDNOT, CONST0, CONST1, INPUT, NOT, OR, XOR, Circuit

OP_ZERO = 0
OP_ONE = 1
OP_AND = 2
OP_OR = 3
OP_XOR = 4
OP_ANDNOT = 5
OP_NOT = 6
OP_RECLAIM = 7

OP_NAMES = {
    OP_ZERO: "zero",
    OP_ONE: "one",
    OP_AND: "and",
    OP_OR: "or",
    OP_XOR: "xor",
    OP_ANDNOT: "andnot",
    OP_NOT: "not",
    OP_RECLAIM: "reclaim",
}

_GATE_OPS = {AND: OP_AND, OR: OP_OR, XOR: OP_XOR, ANDNOT: OP_ANDNOT, NOT: OP_NOT}

# operand count per opcode, including the destination slot
_OPERANDS = {
    OP_ZERO: 1,
    OP_ONE: 1,
    OP_AND: 3,
    OP_OR: 3,
    OP_XOR: 3,
    OP_ANDNOT: 3,
    OP_NOT: 2,
    OP_RECLAIM: 1,
}


@dataclass
class BitProgram:
    """Straight-line code: ``(opcode, dst, a, b)`` tuples, -1 for unused."""

    arity: int
    n_slots: int
    result_slot: int
    instructions: list[tuple[int, int, int, int]]
    peak_slots: int

    @property
    def op_count(self) -> int:
        """Number of value-producing operations (reclaims excluded)."""
        return sum(1 for op, *_ in self.instructions if op != OP_RECLAIM)

    def opcode_sequence(self) -> list[int]:
        return [op for op, *_ in self.instructions if op != OP_RECLAIM]


def compile_circuit(circuit: Circuit) -> BitProgram:
    """Lay out an (ideally optimized) circuit as straight-line code.

    Inputs occupy slots ``0..arity-1``.  A reclaim is emitted right
    after each value's final use, including input slots.
    """
    nodes = circuit.nodes
    arity = len(circuit.inputs)

    # consumers per node, restricted to the output's fan-in
    needed: set[int] = set()
    stack = [circuit.output]
    while stack:
        i = stack.pop()
        if i in needed:
            continue
        needed.add(i)
        kind, a, b = nodes[i]
        if kind in (INPUT, CONST0, CONST1):
            continue
        stack.append(a)
        if kind != NOT:
            stack.append(b)

    use_count = {i: 0 for i in needed}
    for i in sorted(needed):
        kind, a, b = nodes[i]
        if kind in (INPUT, CONST0, CONST1):
            continue
        use_count[a] += 1
        if kind != NOT:
            use_count[b] += 1

    slot_of: dict[int, int] = {}
    for pos, node in enumerate(circuit.inputs):
        slot_of[node] = pos
    free: list[int] = []
    next_slot = arity
    live = arity
    peak = arity
    instructions: list[tuple[int, int, int, int]] = []

    def alloc() -> int:
        nonlocal next_slot, live, peak
        slot = free.pop() if free else next_slot
        if slot == next_slot:
            next_slot += 1
        live += 1
        peak = max(peak, live)
        return slot

    def release(node: int):
        nonlocal live
        slot = slot_of.pop(node)
        free.append(slot)
        live -= 1
        instructions.append((OP_RECLAIM, slot, -1, -1))

    # inputs that nothing reads can be reclaimed immediately
    for node in circuit.inputs:
        if use_count.get(node, 0) == 0 and node != circuit.output:
            release(node)

    for i in sorted(needed):
        kind, a, b = nodes[i]
        if kind == INPUT:
            continue
        if kind in (CONST0, CONST1):
            dst = alloc()
            slot_of[i] = dst
            instructions.append((OP_ONE if kind == CONST1 else OP_ZERO, dst, -1, -1))
            continue
        sa = slot_of[a]
        sb = slot_of[b] if kind != NOT else -1
        dst = alloc()
        slot_of[i] = dst
        instructions.append((_GATE_OPS[kind], dst, sa, sb))
        use_count[a] -= 1
        if use_count[a] == 0 and a != circuit.output:
            release(a)
        if kind != NOT:
            use_count[b] -= 1
            if use_count[b] == 0 and b != circuit.output:
                release(b)

    return BitProgram(arity, next_slot, slot_of[circuit.output], instructions, peak)


def execute(program: BitProgram, inputs: Sequence[bm.Bitmap]) -> bm.Bitmap:
    """Run a program vertically: each slot holds a whole bitmap."""
    proto = _check_inputs(program, inputs)
    r = max(b.bit_length for b in inputs)
    slots: list = [None] * program.n_slots
    for i, b in enumerate(inputs):
        slots[i] = b
    ones = None
    for op, dst, a, b in program.instructions:
        if op == OP_AND:
            slots[dst] = bm.and_(slots[a], slots[b])
        elif op == OP_OR:
            slots[dst] = bm.or_(slots[a], slots[b])
        elif op == OP_XOR:
            slots[dst] = bm.xor(slots[a], slots[b])
        elif op == OP_ANDNOT:
            slots[dst] = bm.andnot(slots[a], slots[b])
        elif op == OP_NOT:
            slots[dst] = bm.not_(slots[a], r)
        elif op == OP_ZERO:
            slots[dst] = type(proto).empty(r)
        elif op == OP_ONE:
            if ones is None:
                ones = type(proto).ones(r)
            slots[dst] = ones
        else:  # reclaim
            slots[dst] = None
    result = slots[program.result_slot]
    if result.bit_length < r:
        result = bm.or_(result, type(proto).empty(r))
    return result


def execute_horizontal(program: BitProgram, inputs: Sequence[bm.Bitmap],
                       batch_words: int = 256) -> bm.UncompressedBitmap:
    """Run a program one batch of words at a time (uncompressed only)."""
    proto = _check_inputs(program, inputs)
    if not isinstance(proto, bm.UncompressedBitmap):
        raise InputError("horizontal execution requires uncompressed bitmaps")
    r = max(b.bit_length for b in inputs)
    total = (r + bm.W - 1) // bm.W
    out_words: list[int] = []
    in_words = [b.words for b in inputs]
    slots: list = [None] * program.n_slots
    full = bm.WORD_MASK
    for start in range(0, total, batch_words):
        width = min(batch_words, total - start)
        for i, words in enumerate(in_words):
            chunk = words[start : start + width]
            chunk.extend([0] * (width - len(chunk)))
            slots[i] = chunk
        zeros = [0] * width
        ones = [full] * width
        for op, dst, a, b in program.instructions:
            if op == OP_AND:
                slots[dst] = [x & y for x, y in zip(slots[a], slots[b])]
            elif op == OP_OR:
                slots[dst] = [x | y for x, y in zip(slots[a], slots[b])]
            elif op == OP_XOR:
                slots[dst] = [x ^ y for x, y in zip(slots[a], slots[b])]
            elif op == OP_ANDNOT:
                slots[dst] = [x & ~y for x, y in zip(slots[a], slots[b])]
            elif op == OP_NOT:
                slots[dst] = [x ^ full for x in slots[a]]
            elif op == OP_ZERO:
                slots[dst] = zeros
            elif op == OP_ONE:
                slots[dst] = ones
            else:
                slots[dst] = None
        out_words.extend(slots[program.result_slot])
    if r % bm.W:
        out_words[-1] &= (1 << (r % bm.W)) - 1
    del out_words[total:]
    return bm.UncompressedBitmap(out_words, r)


def _check_inputs(program: BitProgram, inputs: Sequence[bm.Bitmap]):
    if len(inputs) != program.arity:
        raise InputError(f"program expects {program.arity} inputs, got {len(inputs)}")
    proto = inputs[0]
    if any(type(b) is not type(proto) for b in inputs):
        raise InputError("program inputs must share one representation")
    return proto


# ---------------------------------------------------------------------------
# Disk format: magic+version, then unsigned varints for the header fields
# and instruction operands; one byte per opcode.

_MAGIC = b"BQP1"


def _write_varint(out: bytearray, value: int):
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return


def _read_varint(buf: bytes, pos: int) -> tuple[int, int]:
    shift = 0
    value = 0
    while True:
        if pos >= len(buf):
            raise FormatError("truncated varint")
        byte = buf[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7


def dumps_program(program: BitProgram) -> bytes:
    out = bytearray(_MAGIC)
    for field in (program.arity, program.n_slots, program.result_slot,
                  program.peak_slots, len(program.instructions)):
        _write_varint(out, field)
    for op, dst, a, b in program.instructions:
        out.append(op)
        count = _OPERANDS[op]
        _write_varint(out, dst)
        if count >= 2:
            _write_varint(out, a)
        if count >= 3:
            _write_varint(out, b)
    return bytes(out)


def loads_program(data: bytes) -> BitProgram:
    if data[:4] != _MAGIC:
        raise FormatError("bad program magic")
    pos = 4
    arity, pos = _read_varint(data, pos)
    n_slots, pos = _read_varint(data, pos)
    result_slot, pos = _read_varint(data, pos)
    peak, pos = _read_varint(data, pos)
    count, pos = _read_varint(data, pos)
    instructions = []
    for _ in range(count):
        if pos >= len(data):
            raise FormatError("truncated instruction stream")
        op = data[pos]
        pos += 1
        if op not in _OPERANDS:
            raise FormatError(f"unknown opcode {op}")
        dst, pos = _read_varint(data, pos)
        a = b = -1
        if _OPERANDS[op] >= 2:
            a, pos = _read_varint(data, pos)
        if _OPERANDS[op] >= 3:
            b, pos = _read_varint(data, pos)
        instructions.append((op, dst, a, b))
    return BitProgram(arity, n_slots, result_slot, instructions, peak)


def save_program(fp: BinaryIO, program: BitProgram) -> None:
    fp.write(dumps_program(program))


def load_program(fp: BinaryIO) -> BitProgram:
    return loads_program(fp.read())


def emit_source(program: BitProgram) -> str:
    """Human-readable straight-line rendering, for debugging."""
    lines = [f"// arity={program.arity} slots={program.n_slots} peak={program.peak_slots}"]
    for i in range(program.arity):
        lines.append(f"w{i} = input[{i}];")
    sym = {OP_AND: "&", OP_OR: "|", OP_XOR: "^"}
    for op, dst, a, b in program.instructions:
        if op in sym:
            lines.append(f"w{dst} = w{a} {sym[op]} w{b};")
        elif op == OP_ANDNOT:
            lines.append(f"w{dst} = w{a} & ~w{b};")
        elif op == OP_NOT:
            lines.append(f"w{dst} = ~w{a};")
        elif op == OP_ZERO:
            lines.append(f"w{dst} = 0;")
        elif op == OP_ONE:
            lines.append(f"w{dst} = ~0;")
        else:
            lines.append(f"reclaim(w{dst});")
    lines.append(f"return w{program.result_slot};")
    return "\n".join(lines)
