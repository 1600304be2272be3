"""Circuit synthesis, compilation and bit-parallel threshold programs."""

from .bitparallel import csv_threshold, looped_op_count, looped_threshold
from .core import (
    Circuit,
    CircuitBuilder,
    build_geq_const,
    build_sideways_sum,
    build_sop,
    build_sorter,
    build_symmetric,
    build_tree_adder,
    geq_const_gate_count,
    optimize,
    weight_gate_count,
)
from .library import BUILDERS, CircuitLibrary, PaddingPlan, covers, plan_padding, tabulation_levels
from .programs import (
    BitProgram,
    compile_circuit,
    dumps_program,
    emit_source,
    execute,
    execute_horizontal,
    load_program,
    loads_program,
    save_program,
)

__all__ = [
    "BitProgram",
    "BUILDERS",
    "Circuit",
    "CircuitBuilder",
    "CircuitLibrary",
    "PaddingPlan",
    "build_geq_const",
    "build_sideways_sum",
    "build_sop",
    "build_sorter",
    "build_symmetric",
    "build_tree_adder",
    "compile_circuit",
    "covers",
    "csv_threshold",
    "dumps_program",
    "emit_source",
    "execute",
    "execute_horizontal",
    "geq_const_gate_count",
    "load_program",
    "loads_program",
    "looped_op_count",
    "looped_threshold",
    "optimize",
    "plan_padding",
    "save_program",
    "tabulation_levels",
    "weight_gate_count",
]
