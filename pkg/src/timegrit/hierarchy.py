"""Multilevel temporal grids with C/F point classification."""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np


class HierarchyError(ValueError):
    """Raised for inconsistent temporal grids or hierarchies."""


@dataclass(frozen=True)
class TemporalGrid:
    """Uniform time grid: point i sits at ``t_start + i*dt`` for i = 0..num_intervals."""

    level: int
    t_start: float
    dt: float
    num_intervals: int

    def __post_init__(self):
        if not np.isfinite(self.dt) or self.dt <= 0.0:
            raise HierarchyError(f"dt must be positive, got {self.dt}")
        if self.num_intervals < 1:
            raise HierarchyError(f"num_intervals must be >= 1, got {self.num_intervals}")

    @property
    def num_points(self) -> int:
        return self.num_intervals + 1

    @property
    def t_end(self) -> float:
        return self.t_start + self.dt * self.num_intervals

    def time(self, i: int) -> float:
        return self.t_start + i * self.dt

    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.num_points)


@dataclass(frozen=True)
class TemporalHierarchy:
    """Nested time grids, level 0 finest; ``grids[l+1].dt = factors[l] * grids[l].dt``."""

    grids: tuple[TemporalGrid, ...]
    factors: tuple[int, ...]

    def __post_init__(self):
        if len(self.grids) != len(self.factors) + 1:
            raise HierarchyError("need exactly one coarsening factor per level pair")
        for lvl, m in enumerate(self.factors):
            fine, coarse = self.grids[lvl], self.grids[lvl + 1]
            if coarse.num_intervals * m != fine.num_intervals:
                raise HierarchyError(
                    f"level {lvl}: factor {m} does not divide {fine.num_intervals} intervals"
                )

    @property
    def num_levels(self) -> int:
        return len(self.grids)

    @property
    def coarsest(self) -> int:
        return self.num_levels - 1

    def fine_stride(self, level: int) -> int:
        """Spacing of level-`level` points on the finest grid."""
        return prod(self.factors[:level])

    def coarse_to_fine(self, level: int, index: int) -> int:
        return index * self.fine_stride(level)

    def fine_to_coarse(self, level: int, fine_index: int) -> int:
        stride = self.fine_stride(level)
        if fine_index % stride != 0:
            raise HierarchyError(f"fine index {fine_index} is not a level-{level} point")
        return fine_index // stride


@dataclass(frozen=True)
class CFPartition:
    """Split of one grid's points into C-points (kept on the coarse grid) and F-runs."""

    c_indices: np.ndarray
    f_intervals: tuple[range, ...]


def build_hierarchy(t_start: float, t_end: float, num_intervals: int,
                    factors: list[int] | tuple[int, ...]) -> TemporalHierarchy:
    """Build a multilevel time-grid hierarchy by repeated integer coarsening.

    Each entry of `factors` must be >= 2 and divide the interval count of the
    level it coarsens; the result has ``len(factors) + 1`` levels.
    """
    if not np.isfinite(t_start) or not np.isfinite(t_end) or t_end <= t_start:
        raise HierarchyError(f"need t_end > t_start, got [{t_start}, {t_end}]")
    if num_intervals < 1:
        raise HierarchyError(f"num_intervals must be >= 1, got {num_intervals}")
    dt = (t_end - t_start) / num_intervals
    grids = [TemporalGrid(level=0, t_start=t_start, dt=dt, num_intervals=num_intervals)]
    n = num_intervals
    for lvl, m in enumerate(factors):
        m = int(m)
        if m < 2:
            raise HierarchyError(f"level {lvl}: coarsening factor must be >= 2, got {m}")
        if n % m != 0:
            raise HierarchyError(
                f"level {lvl}: factor {m} does not divide {n} intervals"
            )
        n //= m
        grids.append(TemporalGrid(level=lvl + 1, t_start=t_start,
                                  dt=grids[-1].dt * m, num_intervals=n))
    return TemporalHierarchy(grids=tuple(grids), factors=tuple(int(m) for m in factors))


def cf_partition(grid: TemporalGrid, m: int) -> CFPartition:
    """Classify grid points: every m-th point is a C-point, the rest are F-points."""
    if m < 1:
        raise HierarchyError(f"coarsening factor must be >= 1, got {m}")
    if grid.num_intervals % m != 0:
        raise HierarchyError(
            f"factor {m} does not divide {grid.num_intervals} intervals"
        )
    c_indices = np.arange(0, grid.num_intervals + 1, m)
    if m == 1:
        f_intervals: tuple[range, ...] = ()
    else:
        f_intervals = tuple(range(j * m + 1, (j + 1) * m)
                            for j in range(grid.num_intervals // m))
    return CFPartition(c_indices=c_indices, f_intervals=f_intervals)
