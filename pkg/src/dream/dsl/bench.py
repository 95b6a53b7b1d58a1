"""Timing sweeps over built-in scenarios."""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

from ..errors import UniverseTooLarge
from ..system import convergence_step, run
from .scenarios import BUILTINS, load


@dataclass(frozen=True)
class BenchRow:
    params: str
    mean_ms: float | None
    stddev_ms: float | None
    status: str
    convergence: int | None = None


def parse_sweep(text: str) -> tuple[str, list[int]]:
    """``name=v1,v2,...`` or ``name=lo..hi`` into a name and integer values."""
    if "=" not in text:
        raise ValueError(f"sweep {text!r} must look like name=v1,v2,...")
    name, raw = text.split("=", 1)
    name = name.strip()
    if ".." in raw:
        lo, hi = raw.split("..", 1)
        values = list(range(int(lo), int(hi) + 1))
    else:
        values = [int(v) for v in raw.split(",") if v.strip()]
    if not name or not values:
        raise ValueError(f"sweep {text!r} names no values")
    return name, values


def bench(scenario: str, sweep: str, reps: int = 3, steps: int = 20, seed: int = 0, search: str = "vector",
          fixed: dict | None = None) -> list[BenchRow]:
    """Mean and population standard deviation of the run time for each sweep value."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    name, values = parse_sweep(sweep)
    if scenario in BUILTINS and name not in BUILTINS[scenario].params:
        raise ValueError(f"scenario {scenario} has no parameter {name!r}")
    rows = []
    for v in values:
        params = {**(fixed or {}), name: v, "steps": steps, "seed": seed}
        system = load(scenario, **params)
        times = []
        conv = None
        try:
            for _ in range(reps):
                t0 = time.perf_counter()
                trace = run(system, search=search)
                times.append((time.perf_counter() - t0) * 1000.0)
        except UniverseTooLarge:
            rows.append(BenchRow(f"{name}={v}", None, None, "bound-exceeded"))
            continue
        if any(m.name == "flocks" for m in system.metrics):
            conv = convergence_step(trace.series("flocks"))
        rows.append(BenchRow(f"{name}={v}", statistics.fmean(times), statistics.pstdev(times), "ok", conv))
    return rows


def to_csv(rows: list[BenchRow]) -> str:
    lines = ["params,mean_ms,stddev_ms,status,convergence"]
    for r in rows:
        mean = "" if r.mean_ms is None else f"{r.mean_ms:.3f}"
        sd = "" if r.stddev_ms is None else f"{r.stddev_ms:.3f}"
        conv = "" if r.convergence is None else str(r.convergence)
        lines.append(f"{r.params},{mean},{sd},{r.status},{conv}")
    return "\n".join(lines) + "\n"
