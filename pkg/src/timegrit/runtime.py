"""Block partitioning of time points across workers, plus the counted-work speedup model.

Workers are simulated in-process with deterministic round-robin scheduling:
each sweep is executed worker by worker over disjoint index ranges, reading
neighbour data only through the explicit left-boundary exchange.  The message
contract therefore matches what a distributed backend would need, while runs
stay bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hierarchy import TemporalHierarchy


@dataclass(frozen=True)
class TimePartition:
    """Contiguous per-worker point ranges on every level of a hierarchy.

    Ranges on the finest level are balanced (sizes differ by at most one);
    coarser ranges follow the C-point mapping, so the owner of coarse point j
    also owns the corresponding fine point.  Workers may own empty ranges on
    coarse levels.
    """

    num_workers: int
    ranges: tuple[tuple[tuple[int, int], ...], ...]  # [level][worker] -> (start, stop)

    def owned_range(self, level: int, worker: int) -> tuple[int, int]:
        return self.ranges[level][worker]

    def owner(self, level: int, index: int) -> int:
        for w, (start, stop) in enumerate(self.ranges[level]):
            if start <= index < stop:
                return w
        raise IndexError(f"index {index} outside level {level} partition")


def partition(hierarchy: TemporalHierarchy, num_workers: int) -> TimePartition:
    """Split every level's points into aligned contiguous worker blocks."""
    if num_workers < 1:
        raise ValueError(f"num_workers must be >= 1, got {num_workers}")
    n_fine = hierarchy.grids[0].num_points
    base, extra = divmod(n_fine, num_workers)
    fine_ranges = []
    start = 0
    for w in range(num_workers):
        size = base + (1 if w < extra else 0)
        fine_ranges.append((start, start + size))
        start += size
    all_ranges = [tuple(fine_ranges)]
    for level in range(1, hierarchy.num_levels):
        stride = hierarchy.fine_stride(level)
        level_ranges = []
        for (f_start, f_stop) in fine_ranges:
            # coarse j is owned iff fine index j*stride falls in [f_start, f_stop)
            c_start = -(-f_start // stride)  # ceil division
            c_stop = -(-f_stop // stride)
            level_ranges.append((c_start, c_stop))
        all_ranges.append(tuple(level_ranges))
    return TimePartition(num_workers=num_workers, ranges=tuple(all_ranges))


def exchange_left_boundary(part: TimePartition, level: int, values: np.ndarray) -> dict:
    """Give each worker a read-only copy of its left neighbour's last owned value.

    Returns a dict worker -> ndarray (or None for workers with no left data).
    In the simulated runtime this is a copy; a message-passing backend would
    send exactly these vectors.
    """
    ghosts: dict[int, np.ndarray | None] = {}
    for w in range(part.num_workers):
        start, stop = part.owned_range(level, w)
        if w == 0 or start == 0 or start >= stop:
            ghosts[w] = None
            continue
        left_index = start - 1
        if not (0 <= left_index < values.shape[0]):
            raise RuntimeError(
                f"boundary exchange failed at level {level}: index {left_index} out of range"
            )
        ghosts[w] = values[left_index].copy()
    return ghosts


def global_residual_norm(part: TimePartition, local_blocks: list[np.ndarray]) -> float:
    """Euclidean norm over all C-point residual blocks, reduced per worker.

    Partial sums of squares are formed per worker and combined in rank order,
    which keeps the result identical (to roundoff) for any worker count.
    """
    if len(local_blocks) != part.num_workers:
        raise ValueError("one residual block per worker required")
    total = 0.0
    for block in local_blocks:
        block = np.asarray(block, dtype=float)
        total += float(np.sum(block * block))
    return math.sqrt(total)


@dataclass(frozen=True)
class PhaseCount:
    """Propagator applications of one sweep: per-worker counts on one level."""

    iteration: int
    level: int
    parallel: bool
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def max_worker(self) -> int:
        return max(self.counts) if self.counts else 0


@dataclass
class WorkLog:
    """Append-only record of the propagator applications a solve performed."""

    num_workers: int
    phases: list[PhaseCount] = field(default_factory=list)

    def add(self, iteration: int, level: int, parallel: bool, counts) -> None:
        counts = tuple(int(c) for c in np.atleast_1d(counts))
        if len(counts) == 1 and self.num_workers > 1:
            raise ValueError("per-worker counts required")
        self.phases.append(PhaseCount(iteration, level, parallel, counts))

    def level_totals(self, num_levels: int, iteration: int | None = None) -> list[int]:
        totals = [0] * num_levels
        for ph in self.phases:
            if iteration is None or ph.iteration == iteration:
                totals[ph.level] += ph.total
        return totals

    def iteration_total(self, iteration: int) -> int:
        return sum(ph.total for ph in self.phases if ph.iteration == iteration)


@dataclass(frozen=True)
class WorkModel:
    """Counted-work model of one solve, basis for speedup estimates.

    `num_fine_steps` is the cost basis: sequential time stepping performs
    exactly that many fine propagator applications.  Phase counts come from an
    actual instrumented run (iteration 0 holds setup work).
    """

    num_fine_steps: int
    num_levels: int
    phases: tuple[PhaseCount, ...]
    level_unit_costs: tuple[float, ...]

    @property
    def num_iterations(self) -> int:
        return max((ph.iteration for ph in self.phases), default=0)

    def level_totals(self) -> list[int]:
        totals = [0] * self.num_levels
        for ph in self.phases:
            totals[ph.level] += ph.total
        return totals

    def critical_path(self, num_workers: int, iters: int | None = None) -> float:
        """Modelled critical-path cost for `num_workers` balanced workers.

        Parallel sweeps distribute their counted applications in balanced
        blocks (ceil(total / workers)); sequential phases are paid in full.
        Setup phases (iteration 0) are always included.
        """
        if num_workers < 1:
            raise ValueError("num_workers must be >= 1")
        cost = 0.0
        for ph in self.phases:
            if iters is not None and ph.iteration > iters:
                continue
            unit = self.level_unit_costs[ph.level]
            if ph.parallel:
                cost += math.ceil(ph.total / num_workers) * unit
            else:
                cost += ph.total * unit
        return cost

    def sequential_cost(self) -> float:
        return self.num_fine_steps * self.level_unit_costs[0]


def build_work_model(hierarchy: TemporalHierarchy, log: WorkLog,
                     level_unit_costs=None) -> WorkModel:
    if level_unit_costs is None:
        level_unit_costs = (1.0,) * hierarchy.num_levels
    level_unit_costs = tuple(float(c) for c in level_unit_costs)
    if len(level_unit_costs) != hierarchy.num_levels:
        raise ValueError("one unit cost per level required")
    return WorkModel(
        num_fine_steps=hierarchy.grids[0].num_intervals,
        num_levels=hierarchy.num_levels,
        phases=tuple(log.phases),
        level_unit_costs=level_unit_costs,
    )


def estimate_speedup(work: WorkModel, num_workers: int, iters: int | None = None) -> float:
    """Speedup of the counted parallel run over sequential time stepping.

    Ratio of the sequential fine-step cost to the modelled critical-path cost;
    monotone in `num_workers` until the sequential coarse-level terms saturate.
    """
    return work.sequential_cost() / work.critical_path(num_workers, iters)


def speedup_crossover(work: WorkModel, max_workers: int = 1 << 20) -> int | None:
    """Smallest worker count with estimated speedup > 1, or None if saturated below 1."""
    w = 1
    while w <= max_workers:
        if estimate_speedup(work, w) > 1.0:
            return w
        w *= 2
    return None


def write_work_model_csv(path, work: WorkModel, worker_counts) -> None:
    """Work-model table: one row per modelled worker count."""
    level_cols = ",".join(f"phi_level_{l}" for l in range(work.num_levels))
    totals = work.level_totals()
    with open(path, "w") as fh:
        fh.write(f"num_workers,{level_cols},critical_path_cost,estimated_speedup\n")
        for w in worker_counts:
            crit = work.critical_path(int(w))
            speed = work.sequential_cost() / crit
            cols = ",".join(str(t) for t in totals)
            fh.write(f"{int(w)},{cols},{crit:.6g},{speed:.10g}\n")
