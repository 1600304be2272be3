"""Render competition results: delimited summary plus matplotlib figures.

Figures are written next to the CSV output: a stacked normalized-
workload bar chart and a time-versus-threshold chart for the widest
query size present.
"""

from __future__ import annotations

import csv
import os
from collections import defaultdict
from typing import Sequence

from .competitions import ResultRow, normalized_workload, workload_components


def write_workload_csv(path: str, rows: Sequence[ResultRow]) -> list[str]:
    components, warnings = workload_components(rows)
    scores, _ = normalized_workload(rows)
    with open(path, "w", newline="", encoding="utf-8") as fp:
        writer = csv.writer(fp)
        writer.writerow(["algorithm", "dataset", "normalized_time"])
        for ds in sorted(components):
            for name, value in sorted(components[ds].items()):
                writer.writerow([name, ds, f"{value:.6g}"])
        writer.writerow([])
        writer.writerow(["algorithm", "total_score"])
        for name, score in sorted(scores.items(), key=lambda kv: kv[1]):
            writer.writerow([name, f"{score:.6g}"])
    return warnings


def render_report(rows: Sequence[ResultRow], out_dir: str,
                  prefix: str = "report") -> list[str]:
    """Write ``<prefix>-workload.csv`` and the figure files; returns paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)
    produced = []

    workload_csv = os.path.join(out_dir, f"{prefix}-workload.csv")
    write_workload_csv(workload_csv, rows)
    produced.append(workload_csv)

    components, _ = workload_components(rows)
    if components:
        datasets = sorted(components)
        algos = sorted({name for ds in components.values() for name in ds})
        totals = {name: sum(components[ds].get(name, 0.0) for ds in datasets)
                  for name in algos}
        algos.sort(key=lambda name: totals[name])
        fig, ax = plt.subplots(figsize=(max(6, 0.7 * len(algos)), 4.5))
        bottoms = [0.0] * len(algos)
        for ds in datasets:
            heights = [components[ds].get(name, 0.0) for name in algos]
            ax.bar(algos, heights, bottom=bottoms, label=ds)
            bottoms = [b + h for b, h in zip(bottoms, heights)]
        ax.set_ylabel("normalized time (sum over datasets)")
        ax.set_title("Workload, normalized per dataset")
        ax.legend(fontsize="small")
        plt.setp(ax.get_xticklabels(), rotation=45, ha="right")
        fig.tight_layout()
        path = os.path.join(out_dir, f"{prefix}-workload.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        produced.append(path)

    timed = [r for r in rows if r.flags not in ("dnf", "verified")
             and "bestof" not in r.flags and r.ms_per_exec > 0]
    if timed:
        widest = max(r.n for r in timed)
        series: dict[str, dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
        for r in timed:
            if r.n == widest:
                series[r.algorithm][r.t].append(r.ms_per_exec)
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for name in sorted(series):
            points = sorted((t, sum(v) / len(v)) for t, v in series[name].items())
            ax.plot([p[0] for p in points], [p[1] for p in points],
                    marker="o", label=name)
        ax.set_xlabel("threshold T")
        ax.set_ylabel("ms per execution")
        ax.set_yscale("log")
        ax.set_title(f"Time vs T at N={widest}")
        ax.legend(fontsize="small", ncols=2)
        fig.tight_layout()
        path = os.path.join(out_dir, f"{prefix}-time-vs-t.png")
        fig.savefig(path, dpi=120)
        plt.close(fig)
        produced.append(path)
    return produced
