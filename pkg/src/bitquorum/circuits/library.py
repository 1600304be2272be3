"""Tabulated threshold programs and the padding reduction.

A stored ``(N, T)`` program answers any ``(N', T')`` with ``N' <= N``
and ``T' in [T - (N - N'), T]``: feed the real inputs plus ``T - T'``
all-ones pads and all-zero pads for the rest.  Tabulating every T for
N in powers of two keeps the library small while covering every query
up to the configured maximum arity.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

from .. import bitmaps as bm
from ..errors import InputError, NoCoveringCircuit
from .core import Circuit, build_sideways_sum, build_sorter, build_sop, build_tree_adder, optimize
from .programs import BitProgram, compile_circuit, dumps_program, execute, loads_program

BUILDERS = {
    "sop": build_sop,
    "sorter": build_sorter,
    "tree": build_tree_adder,
    "sideways": build_sideways_sum,
}


@dataclass(frozen=True)
class PaddingPlan:
    """How to answer an (n_requested, t_requested) query with a stored circuit."""

    n: int
    t: int
    zero_pads: int
    one_pads: int

    def pad_inputs(self, inputs: Sequence[bm.Bitmap]) -> list[bm.Bitmap]:
        r = max(b.bit_length for b in inputs)
        cls = type(inputs[0])
        padded = list(inputs)
        padded.extend([cls.empty(r)] * self.zero_pads)
        if self.one_pads:
            ones = cls.ones(r)
            padded.extend([ones] * self.one_pads)
        return padded


def covers(key: tuple[int, int], n_req: int, t_req: int) -> bool:
    n, t = key
    return n_req <= n and t - (n - n_req) <= t_req <= t


def plan_padding(n_req: int, t_req: int,
                 available: Iterable[tuple[int, int]]) -> PaddingPlan:
    """Choose the smallest covering entry: by N, then by |T - T'|."""
    if n_req < 1 or not 1 <= t_req <= n_req:
        raise InputError(f"bad request ({n_req}, {t_req})")
    best = None
    for key in available:
        if covers(key, n_req, t_req):
            rank = (key[0], abs(key[1] - t_req), key[1])
            if best is None or rank < best[0]:
                best = (rank, key)
    if best is None:
        raise NoCoveringCircuit(f"no stored circuit covers ({n_req}, {t_req})")
    n, t = best[1]
    one_pads = t - t_req
    return PaddingPlan(n, t, zero_pads=n - n_req - one_pads, one_pads=one_pads)


def tabulation_levels(n_max: int) -> list[int]:
    """Input arities to tabulate: powers of two up to n_max, plus n_max."""
    levels = []
    n = 2
    while n <= n_max:
        levels.append(n)
        n *= 2
    if n_max >= 2 and n_max not in levels:
        levels.append(n_max)
    return levels


class CircuitLibrary:
    """Lazily built, optionally disk-backed store of threshold programs."""

    def __init__(self, n_max: int = 64, builder: str = "sideways",
                 cache_dir: str | None = None):
        if builder not in BUILDERS:
            raise InputError(f"unknown builder {builder!r}")
        self.n_max = n_max
        self.builder = builder
        self.cache_dir = cache_dir
        self._programs: dict[tuple[int, int], BitProgram] = {}
        self._keys = [(n, t) for n in tabulation_levels(n_max) for t in range(1, n + 1)]

    def keys(self) -> list[tuple[int, int]]:
        return list(self._keys)

    def build_circuit(self, n: int, t: int) -> Circuit:
        return optimize(BUILDERS[self.builder](n, t))

    def program(self, n: int, t: int) -> BitProgram:
        key = (n, t)
        prog = self._programs.get(key)
        if prog is not None:
            return prog
        path = self._path(key)
        if path and os.path.exists(path):
            with open(path, "rb") as fp:
                prog = loads_program(fp.read())
        else:
            prog = compile_circuit(self.build_circuit(n, t))
            if path:
                os.makedirs(os.path.dirname(path), exist_ok=True)
                with open(path, "wb") as fp:
                    fp.write(dumps_program(prog))
        self._programs[key] = prog
        return prog

    def plan(self, n_req: int, t_req: int) -> PaddingPlan:
        return plan_padding(n_req, t_req, self._keys)

    def threshold(self, inputs: Sequence[bm.Bitmap], t: int) -> bm.Bitmap:
        """Answer a threshold query through the tabulated programs."""
        plan = self.plan(len(inputs), t)
        prog = self.program(plan.n, plan.t)
        return execute(prog, plan.pad_inputs(inputs))

    def _path(self, key: tuple[int, int]) -> str | None:
        if self.cache_dir is None:
            return None
        return os.path.join(self.cache_dir, f"{self.builder}_n{key[0]}_t{key[1]}.bqp")
