"""Competition execution: schedules, the algorithm registry, timed runs
with a mandatory correctness pass, and workload scoring."""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, Sequence

from .. import bitmaps as bm
from .. import counters, heaps, runmerge
from ..circuits import (
    BUILDERS,
    compile_circuit,
    csv_threshold,
    execute,
    looped_threshold,
    optimize,
)
from ..errors import CorrectnessError, InputError, ResourceError
from ..oracle import brute_threshold, rowscan
from .datagen import Dataset, table_index
from .similarity import make_similarity
from .timing import TimingResult, time_adaptive

# The small schedule is the fixed 25-pair list used for narrow queries.
SMALL_PAIRS: list[tuple[int, int]] = [
    (4, 3),
    (8, 3), (8, 4), (8, 6), (8, 7),
    (16, 3), (16, 4), (16, 5), (16, 6), (16, 9), (16, 12), (16, 13), (16, 14), (16, 15),
    (32, 3), (32, 4), (32, 6), (32, 9), (32, 13), (32, 15), (32, 19), (32, 21),
    (32, 28), (32, 30), (32, 31),
]

DEFAULT_MUS = (0.005, 0.02, 0.05, 0.1)


def threshold_values(n: int) -> list[int]:
    """T candidates for one N: the 3, 4, 6, 9, ... ladder and its
    reflections N+2-T', kept within [2, N-1]."""
    ladder = []
    t = 3
    while t <= n - 1:
        ladder.append(t)
        t = (3 * t) // 2
    values = set(ladder) | {n + 2 - t for t in ladder}
    return sorted(v for v in values if 2 <= v <= n - 1)


def schedule_pairs(n_max: int) -> list[tuple[int, int]]:
    """Generated (N, T) grid: N doubles from 4 up to ``n_max``."""
    pairs = []
    n = 4
    while n <= n_max:
        pairs.extend((n, t) for t in threshold_values(n))
        n *= 2
    return pairs


def load_schedule_file(path: str) -> list[tuple[int, int]]:
    """One ``N T`` pair per line; '#' starts a comment."""
    pairs = []
    with open(path, "r", encoding="utf-8") as fp:
        for lineno, line in enumerate(fp, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise InputError(f"{path}:{lineno}: expected 'N T'")
            pairs.append((int(parts[0]), int(parts[1])))
    return pairs


def get_schedule(name: str) -> list[tuple[int, int]]:
    if name == "small":
        return list(SMALL_PAIRS)
    if name == "medium":
        return schedule_pairs(128)
    if name == "large":
        return schedule_pairs(512)
    return load_schedule_file(name)


# ---------------------------------------------------------------------------
# Algorithm registry


@dataclass
class RunContext:
    """Per-run shared state: prebuilt circuit programs and tunables."""

    mu_values: tuple[float, ...] = DEFAULT_MUS
    programs: dict = field(default_factory=dict)

    def program(self, builder: str, n: int, t: int):
        key = (builder, n, t)
        prog = self.programs.get(key)
        if prog is None:
            prog = compile_circuit(optimize(BUILDERS[builder](n, t)))
            self.programs[key] = prog
        return prog


def _circuit_algo(builder: str, bitmaps, t, ctx: RunContext):
    return execute(ctx.program(builder, len(bitmaps), t), bitmaps)


@dataclass(frozen=True)
class Algorithm:
    name: str
    fn: Callable
    reprs: frozenset = frozenset({"uncompressed", "ewah"})

    def run(self, bitmaps, t, ctx):
        return self.fn(bitmaps, t, ctx)


def _wrap(fn):
    return lambda bitmaps, t, ctx: fn(bitmaps, t)


ALGORITHMS: dict[str, Algorithm] = {}


def _register(name, fn, reprs=("uncompressed", "ewah")):
    ALGORITHMS[name] = Algorithm(name, fn, frozenset(reprs))


def dsk_name(mu: float) -> str:
    text = f"{mu:g}"
    return "dsk" + (text[1:] if text.startswith("0.") else text)


def ensure_dsk(mu: float) -> str:
    name = dsk_name(mu)
    if name not in ALGORITHMS:
        _register(name, _wrap(partial(heaps.d_skip, mu=mu)))
    return name


_register("scancount", _wrap(counters.scan_count))
_register("hashcount", _wrap(counters.hash_count))
_register("wsort", _wrap(counters.w_sort))
_register("w2ctn", _wrap(partial(counters.w2ct, variant="N")))
_register("w2cta", _wrap(partial(counters.w2ct, variant="A")))
_register("w2cti", _wrap(partial(counters.w2ct, variant="I")))
_register("wheap", _wrap(heaps.w_heap))
_register("mgopt", _wrap(heaps.mg_opt))
_register("mgskip", _wrap(heaps.mg_skip))
for _mu in DEFAULT_MUS:
    ensure_dsk(_mu)
_register("cdom", _wrap(runmerge.cdom_threshold), reprs=("ewah",))
_register("looped", _wrap(looped_threshold))
_register("csvckt", _wrap(csv_threshold))
_register("treeadd", partial(_circuit_algo, "tree"))
_register("ssum", partial(_circuit_algo, "sideways"))
_register("srtckt", partial(_circuit_algo, "sorter"))
_register("sopckt", partial(_circuit_algo, "sop"))

DEFAULT_ALGOS = ("scancount", "wheap", "mgopt", "mgskip", "dsk", "cdom",
                 "looped", "csvckt", "treeadd", "ssum", "srtckt")


def expand_algo_names(names: Iterable[str],
                      mu_values: Sequence[float] = DEFAULT_MUS) -> list[str]:
    """Expand the 'dsk' shorthand into one entry per mu value."""
    out = []
    for name in names:
        if name == "dsk":
            out.extend(ensure_dsk(mu) for mu in mu_values)
        elif name in ALGORITHMS:
            out.append(name)
        else:
            raise InputError(f"unknown algorithm {name!r}; known: {sorted(ALGORITHMS)}")
    return out


# ---------------------------------------------------------------------------
# Competition rows


@dataclass
class ResultRow:
    dataset: str
    algorithm: str
    n: int
    t: int
    seed: int
    reps: int
    total_ms: float
    ms_per_exec: float
    rank: int
    flags: str


CSV_HEADER = ["dataset", "algorithm", "N", "T", "seed", "reps", "total_ms",
              "ms_per_exec", "rank", "flags"]


def write_results_csv(path: str, rows: Sequence[ResultRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fp:
        writer = csv.writer(fp)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([r.dataset, r.algorithm, r.n, r.t, r.seed, r.reps,
                             f"{r.total_ms:.6g}", f"{r.ms_per_exec:.6g}", r.rank, r.flags])


def read_results_csv(path: str) -> list[ResultRow]:
    rows = []
    with open(path, "r", newline="", encoding="utf-8") as fp:
        reader = csv.DictReader(fp)
        for rec in reader:
            rows.append(ResultRow(
                rec["dataset"], rec["algorithm"], int(rec["N"]), int(rec["T"]),
                int(rec["seed"]), int(rec["reps"] or 0), float(rec["total_ms"] or 0.0),
                float(rec["ms_per_exec"] or 0.0), int(rec["rank"] or -1), rec["flags"]))
    return rows


def _flags_for(rank: int, ms: float, best_ms: float) -> str:
    flags = []
    if rank == 0:
        flags.append("win")
    if ms <= 1.5 * best_ms:
        flags.append("good")
    if ms <= 2.0 * best_ms:
        flags.append("fair")
    if ms >= 10.0 * best_ms:
        flags.append("terrible")
    return "+".join(flags) or "slow"


def run_competitions(datasets: Sequence[Dataset], pairs: Sequence[tuple[int, int]],
                     algo_names: Sequence[str] = DEFAULT_ALGOS,
                     repr_kind: str = "ewah", seed: int = 0, rid_count: int = 1,
                     min_total_ms: float = 1000.0,
                     mu_values: Sequence[float] = DEFAULT_MUS,
                     verify_only: bool = False,
                     progress: Callable[[str], None] | None = None) -> list[ResultRow]:
    """Time every algorithm on every (dataset, N, T) similarity query.

    Before anything is timed, every algorithm's output is checked
    against the brute-force reference; a mismatch aborts the run.  A
    synthetic best-of row is added across the d_skip mu variants,
    flagged ``bestof`` because no single tuning achieves it.
    """
    names = expand_algo_names(algo_names, mu_values)
    ctx = RunContext(mu_values=tuple(mu_values))
    rows: list[ResultRow] = []
    for dataset in datasets:
        data = dataset.to_repr(repr_kind)
        for n, t in pairs:
            query = make_similarity(data, rid_count, n, seed)
            inputs = query.bitmaps
            position_lists = {}
            for b in inputs:
                if id(b) not in position_lists:
                    position_lists[id(b)] = b.positions()
            expected = brute_threshold([position_lists[id(b)] for b in inputs], t)
            timed: list[tuple[str, TimingResult]] = []
            dnf: list[str] = []
            for name in names:
                algo = ALGORITHMS[name]
                if repr_kind not in algo.reprs:
                    continue
                try:
                    got = algo.run(inputs, t, ctx)
                except (ResourceError, InputError):
                    dnf.append(name)
                    continue
                if got.positions() != expected:
                    raise CorrectnessError(
                        f"{name} disagrees with the reference on "
                        f"{dataset.name} N={n} T={t}")
                if verify_only:
                    timed.append((name, TimingResult(0.0, 1)))
                    continue
                timed.append((name, time_adaptive(lambda: algo.run(inputs, t, ctx),
                                                  min_total_ms)))
            if progress is not None:
                progress(f"{dataset.name} N={n} T={t}: "
                         f"{len(timed)} algorithms, {len(dnf)} DNF")
            if verify_only:
                rows.extend(ResultRow(dataset.name, name, n, t, seed, 0, 0.0, 0.0,
                                      -1, "verified") for name, _ in timed)
            else:
                order = sorted(timed, key=lambda item: item[1].ms_per_exec)
                best_ms = order[0][1].ms_per_exec if order else 0.0
                rank_of = {name: i for i, (name, _) in enumerate(order)}
                for name, result in timed:
                    rows.append(ResultRow(
                        dataset.name, name, n, t, seed, result.reps, result.total_ms,
                        result.ms_per_exec, rank_of[name],
                        _flags_for(rank_of[name], result.ms_per_exec, best_ms)))
                mu_rows = [(name, res) for name, res in timed if name.startswith("dsk")]
                if len(mu_rows) > 1:
                    best_name, best = min(mu_rows, key=lambda item: item[1].ms_per_exec)
                    rows.append(ResultRow(
                        dataset.name, "dsk", n, t, seed, best.reps, best.total_ms,
                        best.ms_per_exec, rank_of[best_name],
                        _flags_for(rank_of[best_name], best.ms_per_exec, best_ms)
                        + "+bestof"))
            rows.extend(ResultRow(dataset.name, name, n, t, seed, 0, 0.0, 0.0,
                                  -1, "dnf") for name in dnf)
    return rows


def workload_components(rows: Sequence[ResultRow]) -> tuple[dict[str, dict[str, float]], list[str]]:
    """Per-dataset normalized times: total time over the dataset's
    competitions divided by the fastest algorithm's total."""
    per_ds: dict[str, dict[str, list[float]]] = {}
    competitions: dict[str, set[tuple[int, int, int]]] = {}
    dnf: set[tuple[str, str]] = set()
    for row in rows:
        if row.flags == "verified" or "bestof" in row.flags:
            continue
        competitions.setdefault(row.dataset, set()).add((row.n, row.t, row.seed))
        if row.flags == "dnf":
            dnf.add((row.dataset, row.algorithm))
            continue
        per_ds.setdefault(row.dataset, {}).setdefault(row.algorithm, []).append(
            row.ms_per_exec)
    warnings: list[str] = []
    components: dict[str, dict[str, float]] = {}
    for ds, algos in per_ds.items():
        total_comps = len(competitions[ds])
        complete = {}
        for name, times in algos.items():
            if (ds, name) in dnf or len(times) < total_comps:
                warnings.append(f"{name} excluded on {ds}: DNF or missing cells")
                continue
            complete[name] = sum(times)
        if not complete:
            continue
        fastest = min(complete.values())
        if fastest <= 0:
            warnings.append(f"{ds}: nonpositive fastest time, skipped")
            continue
        components[ds] = {name: total / fastest for name, total in complete.items()}
    return components, warnings


def normalized_workload(rows: Sequence[ResultRow]) -> tuple[dict[str, float], list[str]]:
    """Per-algorithm workload score: the sum over datasets of normalized
    time.  An algorithm fastest everywhere scores the dataset count."""
    components, warnings = workload_components(rows)
    scores: dict[str, float] = {}
    for ds_scores in components.values():
        for name, value in ds_scores.items():
            scores[name] = scores.get(name, 0.0) + value
    return scores, warnings


def compare_rowscan(table, trials: int = 10, seed: int = 0, t_low: int = 2,
                    min_total_ms: float = 200.0) -> dict[str, dict[str, float]]:
    """Row-scanning against counter-based index lookups on one table.

    Two query families: one random value per attribute, and similarity
    (all criteria taken from one random row).  Outputs are verified
    equal before timing.  Returned times are ms per query batch.
    """
    rng = random.Random(f"rowscan;{seed}")
    index = table_index(table)
    d = table.attribute_count
    domains = [sorted(table.column_values(a)) for a in range(d)]
    families: dict[str, list[tuple[list[tuple[int, int]], int]]] = {
        "random": [], "similarity": []}
    for _ in range(trials):
        criteria = [(a, rng.choice(domains[a])) for a in range(d)]
        families["random"].append((criteria, rng.randint(t_low, max(t_low, d - 1))))
        row = table.rows[rng.randrange(len(table.rows))]
        criteria = [(a, row[a]) for a in range(d)]
        families["similarity"].append((criteria, rng.randint(t_low, max(t_low, d - 1))))
    report: dict[str, dict[str, float]] = {}
    for family, queries in families.items():
        bitmap_queries = []
        for criteria, t in queries:
            maps = [index[key] for key in criteria if key in index]
            rle = [bm.compress(b) for b in maps]
            expected = rowscan(table, criteria, t)
            got = counters.scan_count(maps, t, len(table.rows))
            if got.positions() != expected:
                raise CorrectnessError("index path disagrees with the row scan")
            bitmap_queries.append((criteria, t, maps, rle))

        def scan_rows():
            for criteria, t, _, _ in bitmap_queries:
                rowscan(table, criteria, t)

        def scan_index_u():
            for _, t, maps, _ in bitmap_queries:
                counters.scan_count(maps, t, len(table.rows))

        def scan_index_c():
            for _, t, _, rle in bitmap_queries:
                counters.scan_count(rle, t, len(table.rows))

        report[family] = {
            "rowscan": time_adaptive(scan_rows, min_total_ms).ms_per_exec,
            "scancount_uncompressed": time_adaptive(scan_index_u, min_total_ms).ms_per_exec,
            "scancount_ewah": time_adaptive(scan_index_c, min_total_ms).ms_per_exec,
        }
    return report
