"""Boolean circuit construction and optimization for threshold queries.

Circuits are DAGs of two-input gates (plus NOT) built by four
constructions: sum-of-products, an odd-even sorting network, a balanced
tree of ripple-carry adders, and a layered sideways-sum adder.  The
adder-based builders compare the resulting Hamming weight against the
threshold with a gate-sharing constant comparator.

Gate counts are measured on two-input gates after :func:`optimize`,
which is a constant-propagation pass plus a reachability prune.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from ..errors import InputError, ResourceError
from ..oracle import SymmetricSpec

INPUT = "input"
CONST0 = "const0"
CONST1 = "const1"
AND = "and"
OR = "or"
XOR = "xor"
ANDNOT = "andnot"
NOT = "not"

GATE_KINDS = (AND, OR, XOR, ANDNOT, NOT)

# Default cap on choose(N, T) for sum-of-products construction.
SOP_TERM_CAP = 200_000


@dataclass
class Circuit:
    """A gate DAG with designated ordered inputs and a single output."""

    nodes: list[tuple[str, int, int]]
    inputs: list[int]
    output: int

    @property
    def arity(self) -> int:
        return len(self.inputs)

    def gate_count(self) -> int:
        """Two-input operations reachable from the output."""
        return _reachable_gates(self.nodes, [self.output])

    def evaluate(self, bits: Sequence[int]) -> int:
        """Evaluate over scalar 0/1 inputs (reference semantics)."""
        if len(bits) != len(self.inputs):
            raise InputError("wrong number of input bits")
        values = [0] * len(self.nodes)
        for node, bit in zip(self.inputs, bits):
            values[node] = int(bool(bit))
        for i, (kind, a, b) in enumerate(self.nodes):
            if kind == INPUT:
                continue
            if kind == CONST0:
                values[i] = 0
            elif kind == CONST1:
                values[i] = 1
            elif kind == AND:
                values[i] = values[a] & values[b]
            elif kind == OR:
                values[i] = values[a] | values[b]
            elif kind == XOR:
                values[i] = values[a] ^ values[b]
            elif kind == ANDNOT:
                values[i] = values[a] & (1 - values[b])
            else:
                values[i] = 1 - values[a]
        return values[self.output]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.nodes == other.nodes and self.inputs == other.inputs
                and self.output == other.output)


def _reachable_gates(nodes, roots) -> int:
    seen = set()
    stack = [r for r in roots]
    count = 0
    while stack:
        i = stack.pop()
        if i in seen:
            continue
        seen.add(i)
        kind, a, b = nodes[i]
        if kind in (INPUT, CONST0, CONST1):
            continue
        count += 1
        stack.append(a)
        if kind != NOT:
            stack.append(b)
    return count


class CircuitBuilder:
    """Emits nodes in creation order; creation order is topological."""

    def __init__(self, n_inputs: int):
        self.nodes: list[tuple[str, int, int]] = [(INPUT, -1, -1) for _ in range(n_inputs)]
        self.inputs = list(range(n_inputs))
        self._consts: dict[int, int] = {}

    def const(self, value: int) -> int:
        node = self._consts.get(value)
        if node is None:
            node = len(self.nodes)
            self.nodes.append((CONST1 if value else CONST0, -1, -1))
            self._consts[value] = node
        return node

    def gate(self, kind: str, a: int, b: int = -1) -> int:
        node = len(self.nodes)
        self.nodes.append((kind, a, b))
        return node

    def wide(self, kind: str, operands: Sequence[int]) -> int:
        """Balanced binary tree of two-input gates over ``operands``."""
        if not operands:
            raise InputError("wide gate needs at least one operand")
        level = list(operands)
        while len(level) > 1:
            nxt = []
            for i in range(0, len(level) - 1, 2):
                nxt.append(self.gate(kind, level[i], level[i + 1]))
            if len(level) % 2:
                nxt.append(level[-1])
            level = nxt
        return level[0]

    def finish(self, output: int) -> Circuit:
        return Circuit(self.nodes, self.inputs, output)


# ---------------------------------------------------------------------------
# Adder cells.  Emission order matters only for straight-line program
# layout; the full adder computes the carry as (a AND b) OR (cin AND s1)
# with s1 = a XOR b.


def _half_adder(b: CircuitBuilder, x: int, y: int) -> tuple[int, int]:
    carry = b.gate(AND, x, y)
    total = b.gate(XOR, x, y)
    return total, carry


def _full_adder(b: CircuitBuilder, x: int, y: int, cin: int) -> tuple[int, int]:
    s1 = b.gate(XOR, x, y)
    total = b.gate(XOR, s1, cin)
    t1 = b.gate(AND, s1, cin)
    t2 = b.gate(AND, x, y)
    carry = b.gate(OR, t1, t2)
    return total, carry


def _ripple_add(b: CircuitBuilder, x: list[int], y: list[int]) -> list[int]:
    """Add two equal-length bit vectors (LSB first), returning len+1 bits."""
    out = []
    total, carry = _half_adder(b, x[0], y[0])
    out.append(total)
    for xi, yi in zip(x[1:], y[1:]):
        total, carry = _full_adder(b, xi, yi, carry)
        out.append(total)
    out.append(carry)
    return out


def _tree_weight(b: CircuitBuilder, leaves: list[int]) -> list[int]:
    """Balanced adder tree over a power-of-two number of single bits."""
    vecs = [[leaf] for leaf in leaves]
    while len(vecs) > 1:
        vecs = [_ripple_add(b, vecs[i], vecs[i + 1]) for i in range(0, len(vecs), 2)]
    return vecs[0]


def _sideways_weight(b: CircuitBuilder, bits: list[int]) -> list[int]:
    """Layered sideways sum: each level turns weight-2^x bits into one
    output bit of that weight plus carries of weight 2^(x+1).  The sum
    bit of each adder feeds the next adder's carry-in."""
    weight = []
    while True:
        if len(bits) == 1:
            weight.append(bits[0])
            return weight
        carries = []
        s = bits[0]
        j = 1
        while j < len(bits):
            if j + 1 < len(bits):
                s, c = _full_adder(b, s, bits[j], bits[j + 1])
                j += 2
            else:
                s, c = _half_adder(b, s, bits[j])
                j += 1
            carries.append(c)
        weight.append(s)
        bits = carries


def _geq_const(b: CircuitBuilder, weight_bits: Sequence[int], t: int) -> int:
    """Gate node computing ``weight > t-1`` for constant ``t``.

    Prefix conjunctions over the constant's one-bits are shared between
    the output terms, so trailing ones cost nothing and repeated
    prefixes are reused.
    """
    n = len(weight_bits)
    if not 1 <= t <= (1 << n):
        raise InputError(f"threshold {t} not representable in {n} weight bits")
    a = t - 1
    terms = []
    pm_node: int | None = None
    pending: list[int] = []  # one-bit positions seen, not yet folded into pm
    for j in range(n - 1, -1, -1):
        if (a >> j) & 1:
            pending.append(weight_bits[j])
            continue
        if pm_node is None and not pending:
            terms.append(weight_bits[j])  # leading zero: bare weight bit
            continue
        while pending:
            nxt = pending.pop(0)
            pm_node = nxt if pm_node is None else b.gate(AND, pm_node, nxt)
        terms.append(b.gate(AND, pm_node, weight_bits[j]))
    if not terms:
        return b.const(0)  # t-1 is all ones: the weight can never exceed it
    return b.wide(OR, terms)


def _weight_bit_count(n: int) -> int:
    # floor(log2(2N)) bits always hold the Hamming weight of N inputs
    return (2 * n).bit_length() - 1


def build_geq_const(n_inputs: int, weight_bits: Sequence[int],
                    builder: CircuitBuilder, t: int) -> int:
    """Exposed comparator construction; see :func:`_geq_const`."""
    del n_inputs
    return _geq_const(builder, list(weight_bits), t)


def geq_const_gate_count(t: int, n_bits: int) -> int:
    """Gate count of the constant comparator alone, for ``n_bits`` weight bits."""
    b = CircuitBuilder(n_bits)
    out = _geq_const(b, b.inputs, t)
    return _reachable_gates(b.nodes, [out])


def build_sop(n: int, t: int, term_cap: int = SOP_TERM_CAP) -> Circuit:
    """Monotone sum-of-products: one AND term per T-subset of inputs."""
    _check_nt(n, t)
    if math.comb(n, t) > term_cap:
        raise ResourceError(f"choose({n},{t}) exceeds the term cap {term_cap}")
    b = CircuitBuilder(n)
    terms = [b.wide(AND, combo) if len(combo) > 1 else combo[0]
             for combo in combinations(b.inputs, t)]
    return b.finish(b.wide(OR, terms))


def build_sorter(n: int, t: int) -> Circuit:
    """Odd-even sorting network; output is the T-th largest wire.

    Each comparator is one AND (min) plus one OR (max).  The unused
    output fan is left in place for :func:`optimize` to prune.
    """
    _check_nt(n, t)
    b = CircuitBuilder(n)
    wires = _oddeven_sort(b, list(b.inputs))
    return b.finish(wires[n - t])


def _oddeven_sort(b: CircuitBuilder, wires: list[int]) -> list[int]:
    if len(wires) <= 1:
        return wires
    mid = (len(wires) + 1) // 2
    return _oddeven_merge(b, _oddeven_sort(b, wires[:mid]), _oddeven_sort(b, wires[mid:]))


def _oddeven_merge(b: CircuitBuilder, x: list[int], y: list[int]) -> list[int]:
    """Merge two ascending wire lists (zeros first) into one."""
    if not x:
        return y
    if not y:
        return x
    if len(x) == 1 and len(y) == 1:
        return [b.gate(AND, x[0], y[0]), b.gate(OR, x[0], y[0])]
    d = _oddeven_merge(b, x[0::2], y[0::2])
    e = _oddeven_merge(b, x[1::2], y[1::2])
    out = [d[0]]
    for i in range(len(e)):
        if i + 1 < len(d):
            out.append(b.gate(AND, d[i + 1], e[i]))
            out.append(b.gate(OR, d[i + 1], e[i]))
        else:
            out.append(e[i])
    if len(d) > len(e) + 1:
        out.append(d[-1])
    return out


def build_tree_adder(n: int, t: int) -> Circuit:
    """Adder-tree threshold circuit.

    Inputs are padded with constant zeros to a power of two; the
    comparator reads the low ``floor(log2(2N))`` weight bits, which
    always suffice for a weight of at most N.
    """
    _check_nt(n, t)
    b = CircuitBuilder(n)
    padded = 1 << max(1, (n - 1).bit_length())
    leaves = list(b.inputs) + [b.const(0)] * (padded - n)
    weight = _tree_weight(b, leaves)
    return b.finish(_geq_const(b, weight[: _weight_bit_count(n)], t))


def build_sideways_sum(n: int, t: int) -> Circuit:
    """Sideways-sum threshold circuit (no input padding needed)."""
    _check_nt(n, t)
    b = CircuitBuilder(n)
    weight = _sideways_weight(b, list(b.inputs))
    return b.finish(_geq_const(b, weight[: _weight_bit_count(n)], t))


def weight_gate_count(n: int, kind: str) -> int:
    """Gates in the Hamming-weight part alone (constants folded)."""
    b = CircuitBuilder(n)
    if kind == "tree":
        padded = 1 << max(1, (n - 1).bit_length())
        bits = _tree_weight(b, list(b.inputs) + [b.const(0)] * (padded - n))
    elif kind == "sideways":
        bits = _sideways_weight(b, list(b.inputs))
    else:
        raise InputError(f"unknown weight circuit kind {kind!r}")
    rep, folded = _fold(b.nodes)
    roots = [_resolve(rep, w) for w in bits]
    return _reachable_gates_folded(folded, [r for kind_, r in roots if kind_ == "n"])


def build_symmetric(spec: SymmetricSpec, strategy: str = "sorter") -> Circuit:
    """Circuit for an arbitrary symmetric function.

    ``sorter`` ORs together ANDNOTs of adjacent sorter outputs (one per
    accepted weight); ``adder`` applies a two-level cover over the
    sideways-sum weight bits, with weights above the arity treated as
    don't-cares.
    """
    n = spec.arity
    if n < 1:
        raise InputError("arity must be at least 1")
    b = CircuitBuilder(n)
    if strategy == "sorter":
        wires = _oddeven_sort(b, list(b.inputs))
        # ge[k] = 1 iff weight >= k, for k in 1..n
        ge = [wires[n - k] for k in range(1, n + 1)]
        terms = []
        for k in range(n + 1):
            if not spec.accept[k]:
                continue
            if k == 0:
                terms.append(b.gate(NOT, ge[0]))
            elif k == n:
                terms.append(ge[n - 1])
            else:
                terms.append(b.gate(ANDNOT, ge[k - 1], ge[k]))
        out = b.wide(OR, terms) if terms else b.const(0)
        return b.finish(out)
    if strategy == "adder":
        weight = _sideways_weight(b, list(b.inputs))
        nbits = len(weight)
        on = {k for k in range(n + 1) if spec.accept[k]}
        dont_care = set(range(n + 1, 1 << nbits))
        implicants = _two_level_cover(on, dont_care, nbits)
        if not implicants:
            return b.finish(b.const(0))
        terms = []
        for value, mask in implicants:
            # mask bit set -> that weight bit is tested
            pos = [weight[i] for i in range(nbits) if (mask >> i) & 1 and (value >> i) & 1]
            neg = [weight[i] for i in range(nbits) if (mask >> i) & 1 and not (value >> i) & 1]
            if pos:
                node = b.wide(AND, pos)
                for m in neg:
                    node = b.gate(ANDNOT, node, m)
            elif neg:
                node = b.gate(NOT, neg[0])
                for m in neg[1:]:
                    node = b.gate(ANDNOT, node, m)
            else:
                node = b.const(1)  # function is constant true
            terms.append(node)
        return b.finish(b.wide(OR, terms))
    raise InputError(f"unknown strategy {strategy!r}")


def _two_level_cover(on: set[int], dont_care: set[int], n_bits: int):
    """Small Quine-McCluskey: prime implicants plus a greedy cover.

    Implicants are ``(value, mask)`` pairs; a minterm m is covered when
    ``m & mask == value``.  Sizes here are tiny (n_bits <= 7).
    """
    if not on:
        return []
    full_mask = (1 << n_bits) - 1
    current = {(m, full_mask) for m in on | dont_care}
    primes = set()
    while current:
        merged = set()
        nxt = set()
        items = sorted(current)
        index = {}
        for value, mask in items:
            index.setdefault(mask, set()).add(value)
        for value, mask in items:
            for bit in range(n_bits):
                probe = 1 << bit
                if mask & probe and (value | probe) in index.get(mask, ()) and not value & probe:
                    nxt.add((value, mask ^ probe))
                    merged.add((value, mask))
                    merged.add((value | probe, mask))
        primes |= current - merged
        current = nxt
    # greedy set cover of the ON minterms
    remaining = set(on)
    chosen = []
    candidates = sorted(primes, key=lambda im: (bin(im[1]).count("1"), im))
    while remaining:
        best = max(candidates, key=lambda im: (len({m for m in remaining if m & im[1] == im[0]}),
                                               -bin(im[1]).count("1")))
        covered = {m for m in remaining if m & best[1] == best[0]}
        if not covered:
            raise AssertionError("cover construction failed")
        chosen.append(best)
        remaining -= covered
    return chosen


def _check_nt(n: int, t: int):
    if n < 1:
        raise InputError("need at least one input")
    if not 1 <= t <= n:
        raise InputError(f"threshold {t} outside [1, {n}]")


# ---------------------------------------------------------------------------
# Optimization: constant propagation, unary collapse, reachability.


def _resolve(rep, i):
    """Follow replacement links; returns ('c', value) or ('n', node)."""
    while True:
        r = rep[i]
        if isinstance(r, tuple):
            return r
        if r == i:
            return ("n", i)
        i = r


def _fold(nodes):
    """Constant folding over the node list.

    Returns ``(rep, folded)`` where ``rep[i]`` resolves node i to a
    constant or a surviving node, and ``folded[i]`` holds the rewritten
    ``(kind, a, b)`` for surviving gates.
    """
    rep: list = list(range(len(nodes)))
    folded: list = list(nodes)
    for i, (kind, a, b) in enumerate(nodes):
        if kind in (INPUT,):
            continue
        if kind == CONST0:
            rep[i] = ("c", 0)
            continue
        if kind == CONST1:
            rep[i] = ("c", 1)
            continue
        ra = _resolve(rep, a)
        rb = _resolve(rep, b) if kind != NOT else None
        if kind == NOT:
            if ra[0] == "c":
                rep[i] = ("c", 1 - ra[1])
            elif folded[ra[1]][0] == NOT:
                rep[i] = folded[ra[1]][1]  # double negation
            else:
                folded[i] = (NOT, ra[1], -1)
            continue
        ca, cb = ra[0] == "c", rb[0] == "c"
        va, vb = ra[1], rb[1]
        if kind == AND:
            if ca and cb:
                rep[i] = ("c", va & vb)
            elif ca:
                rep[i] = ("c", 0) if va == 0 else rb
            elif cb:
                rep[i] = ("c", 0) if vb == 0 else ra
            elif va == vb:
                rep[i] = ra
            else:
                folded[i] = (AND, va, vb)
        elif kind == OR:
            if ca and cb:
                rep[i] = ("c", va | vb)
            elif ca:
                rep[i] = ("c", 1) if va == 1 else rb
            elif cb:
                rep[i] = ("c", 1) if vb == 1 else ra
            elif va == vb:
                rep[i] = ra
            else:
                folded[i] = (OR, va, vb)
        elif kind == XOR:
            if ca and cb:
                rep[i] = ("c", va ^ vb)
            elif ca:
                rep[i] = rb if va == 0 else _as_not(folded, rep, i, rb)
            elif cb:
                rep[i] = ra if vb == 0 else _as_not(folded, rep, i, ra)
            elif va == vb:
                rep[i] = ("c", 0)
            else:
                folded[i] = (XOR, va, vb)
        elif kind == ANDNOT:
            if ca and cb:
                rep[i] = ("c", va & (1 - vb))
            elif ca:
                rep[i] = ("c", 0) if va == 0 else _as_not(folded, rep, i, rb)
            elif cb:
                rep[i] = ra if vb == 0 else ("c", 0)
            elif va == vb:
                rep[i] = ("c", 0)
            else:
                folded[i] = (ANDNOT, va, vb)
        else:
            raise InputError(f"unknown gate kind {kind!r}")
        if isinstance(rep[i], tuple) and rep[i][0] == "n":
            rep[i] = rep[i][1]
    return rep, folded


def _as_not(folded, rep, i, operand):
    """Rewrite node i as NOT(operand), collapsing double negation."""
    node = operand[1]
    if folded[node][0] == NOT:
        return folded[node][1]
    folded[i] = (NOT, node, -1)
    return ("n", i)


def _reachable_gates_folded(folded, roots):
    seen = set()
    stack = list(roots)
    count = 0
    while stack:
        i = stack.pop()
        if i in seen:
            continue
        seen.add(i)
        kind, a, b = folded[i]
        if kind in (INPUT, CONST0, CONST1):
            continue
        count += 1
        stack.append(a)
        if kind != NOT:
            stack.append(b)
    return count


def optimize(circuit: Circuit) -> Circuit:
    """Semantics-preserving cleanup: fold constants, collapse unary
    rewrites, drop everything outside the output's fan-in."""
    rep, folded = _fold(circuit.nodes)
    root = _resolve(rep, circuit.output)

    new_ids: dict[int, int] = {}
    nodes: list[tuple[str, int, int]] = []
    for node in circuit.inputs:  # inputs always survive, in order
        new_ids[node] = len(nodes)
        nodes.append((INPUT, -1, -1))
    inputs = [new_ids[node] for node in circuit.inputs]

    if root[0] == "c":
        kind = CONST1 if root[1] else CONST0
        nodes.append((kind, -1, -1))
        return Circuit(nodes, inputs, len(nodes) - 1)

    # collect the fan-in of the root among folded gates
    needed = set()
    stack = [root[1]]
    while stack:
        i = stack.pop()
        if i in needed:
            continue
        needed.add(i)
        kind, a, b = folded[i]
        if kind in (INPUT, CONST0, CONST1):
            continue
        stack.append(a)
        if kind != NOT:
            stack.append(b)

    for i in sorted(needed):
        kind, a, b = folded[i]
        if kind == INPUT:
            continue  # already emitted
        na = new_ids[a]
        nb = new_ids[b] if kind != NOT else -1
        new_ids[i] = len(nodes)
        nodes.append((kind, na, nb))
    return Circuit(nodes, inputs, new_ids[root[1]])
