"""Multigrid reduction in time: FAS cycles over a temporal hierarchy.

The fine-level equations are the block system of one-step integration,

    u_0 = given,      u_i - Phi_l(u_{i-1}) = g_i   (i = 1..N),

on every level l, with Phi_l the rediscretized propagator using that level's
step size.  A cycle performs F-/C-relaxation, forms the C-point residual,
restricts solution and residual by injection, builds the coarse forcing in
full-approximation-storage form (so nonlinear propagators work unchanged),
recurses, corrects C-points and re-relaxes F-points.  The two-level variant
with F-relaxation and a sequentially solved coarse level reproduces the
Parareal iteration exactly.

Iterations are organised so no sweep is executed twice on an unchanged state:
the trailing F-relaxation of one cycle serves as the leading relaxation of the
next, and the halting residual doubles as the next restriction residual when
relaxation leaves the state untouched.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .hierarchy import HierarchyError, TemporalHierarchy
from .propagators import Propagator, PropagatorStepError, _normalize_forcing, sequential_solve
from . import runtime
from .runtime import TimePartition, WorkLog, WorkModel, build_work_model, global_residual_norm


@dataclass
class SpaceTimeVector:
    """State vectors over all points of one level's time grid.

    `owned_range` annotates the contiguous block a worker is responsible for;
    in the simulated runtime every vector carries the full range.
    """

    level: int
    values: np.ndarray  # (num_points, state_dim)
    owned_range: tuple[int, int] | None = None

    @property
    def num_points(self) -> int:
        return self.values.shape[0]

    @property
    def state_dim(self) -> int:
        return self.values.shape[1]

    def copy(self) -> "SpaceTimeVector":
        return SpaceTimeVector(self.level, self.values.copy(), self.owned_range)


@dataclass
class MgritOptions:
    """Solver controls.

    relaxation: "F" or "FCF"; None picks F for two-level hierarchies and FCF
    for deeper ones.  Halting tests the absolute Euclidean norm of the
    finest-level C-point residual, optionally weighted per state component.
    """

    relaxation: str | None = None
    halt_tol: float = 1e-8
    max_iters: int = 50
    num_workers: int = 1
    level_unit_costs: tuple[float, ...] | None = None
    residual_weights: np.ndarray | None = None

    def __post_init__(self):
        if self.halt_tol <= 0.0:
            raise ValueError(f"halt_tol must be positive, got {self.halt_tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.relaxation not in (None, "F", "FCF"):
            raise ValueError(f"relaxation must be 'F' or 'FCF', got {self.relaxation!r}")
        if self.num_workers < 1:
            raise ValueError(f"num_workers must be >= 1, got {self.num_workers}")
        if self.residual_weights is not None:
            self.residual_weights = np.asarray(self.residual_weights, dtype=float)
            if np.any(self.residual_weights < 0.0):
                raise ValueError("residual weights must be nonnegative")

    def effective_relaxation(self, num_levels: int) -> str:
        if self.relaxation is not None:
            return self.relaxation
        return "F" if num_levels == 2 else "FCF"


@dataclass
class IterationStats:
    iteration: int
    residual_norm: float
    fine_phi_count: int
    coarse_phi_count: int
    wall_seconds: float


@dataclass
class ConvergenceRecord:
    """Per-iteration residual norms and work counts; row 0 is setup relaxation."""

    halt_tol: float
    converged: bool = False
    iterations: list[IterationStats] = field(default_factory=list)

    @property
    def residual_norms(self) -> np.ndarray:
        return np.array([it.residual_norm for it in self.iterations])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("iteration,residual_norm,fine_phi_count,coarse_phi_count,wall_seconds\n")
            for it in self.iterations:
                fh.write(f"{it.iteration},{it.residual_norm:.16e},"
                         f"{it.fine_phi_count},{it.coarse_phi_count},{it.wall_seconds:.6f}\n")


@dataclass
class SolveResult:
    solution: SpaceTimeVector
    record: ConvergenceRecord
    work: WorkModel


class _Engine:
    """Shared machinery: partition-aware sweeps with work accounting."""

    def __init__(self, hierarchy: TemporalHierarchy, propagators, options: MgritOptions,
                 part: TimePartition | None = None, work: WorkLog | None = None):
        if len(propagators) != hierarchy.num_levels:
            raise ValueError("one propagator per level required")
        self.hier = hierarchy
        self.props = list(propagators)
        self.opts = options
        self.part = part if part is not None else runtime.partition(hierarchy, options.num_workers)
        self.work = work if work is not None else WorkLog(self.part.num_workers)
        self.relaxation = options.effective_relaxation(hierarchy.num_levels)

    # -- sweeps ------------------------------------------------------------

    def _intervals_of(self, level: int, worker: int, m: int, nc: int):
        """F-intervals assigned to `worker`: those whose first F-point it owns."""
        start, stop = self.part.owned_range(level, worker)
        if start >= stop:
            return range(0)
        j_min = max(0, -(-(start - 1) // m))
        j_max = min(nc - 1, (stop - 2) // m)
        return range(j_min, j_max + 1)

    def _cpoints_of(self, level: int, worker: int, m: int, nc: int):
        """Interior C-point indices j (point j*m) owned by `worker`."""
        start, stop = self.part.owned_range(level, worker)
        if start >= stop:
            return range(0)
        j_min = max(1, -(-start // m))
        j_max = min(nc, (stop - 1) // m)
        return range(j_min, j_max + 1)

    def f_relax(self, level: int, u: np.ndarray, g, iteration: int) -> None:
        """Propagate across every F-interval from its left C-point; C-points fixed."""
        m = self.hier.factors[level]
        if m == 1:
            return
        grid = self.hier.grids[level]
        prop = self.props[level]
        nc = grid.num_intervals // m
        ghosts = runtime.exchange_left_boundary(self.part, level, u)
        counts = [0] * self.part.num_workers
        for w in range(self.part.num_workers):
            start, _ = self.part.owned_range(level, w)
            for j in self._intervals_of(level, w, m, nc):
                left = j * m
                if left >= start:
                    state = u[left]
                else:
                    state = ghosts[w]  # neighbour's last owned value is this C-point
                t = grid.time(left)
                for i in range(left + 1, left + m):
                    try:
                        state = prop.step(t, grid.dt, state)
                    except Exception as exc:
                        raise PropagatorStepError(level, i, exc) from exc
                    if g is not None:
                        state = state + g[i]
                    u[i] = state
                    t += grid.dt
                    counts[w] += 1
        self.work.add(iteration, level, True, counts)

    def c_relax(self, level: int, u: np.ndarray, g, iteration: int) -> None:
        """Set each interior C-point from its preceding point; F-points fixed.

        Reads go to a pre-sweep snapshot only in the degenerate m = 1 case,
        where neighbouring C-points would otherwise alias.
        """
        m = self.hier.factors[level]
        grid = self.hier.grids[level]
        prop = self.props[level]
        nc = grid.num_intervals // m
        source = u.copy() if m == 1 else u
        ghosts = runtime.exchange_left_boundary(self.part, level, u)
        counts = [0] * self.part.num_workers
        for w in range(self.part.num_workers):
            start, _ = self.part.owned_range(level, w)
            for j in self._cpoints_of(level, w, m, nc):
                i = j * m
                prev = source[i - 1] if i - 1 >= start else ghosts[w]
                try:
                    state = prop.step(grid.time(i - 1), grid.dt, prev)
                except Exception as exc:
                    raise PropagatorStepError(level, i, exc) from exc
                if g is not None:
                    state = state + g[i]
                u[i] = state
                counts[w] += 1
        self.work.add(iteration, level, True, counts)

    def residual(self, level: int, u: np.ndarray, g, iteration: int) -> np.ndarray:
        """C-point residual r_j = g_{jm} + Phi(u_{jm-1}) - u_{jm}, with r_0 = 0.

        After F-relaxation the point left of each C-point carries the value
        propagated across the whole F-interval, so this is the residual of the
        coarse-point (Schur-complement) system.
        """
        m = self.hier.factors[level]
        grid = self.hier.grids[level]
        prop = self.props[level]
        nc = grid.num_intervals // m
        r = np.zeros((nc + 1, u.shape[1]))
        ghosts = runtime.exchange_left_boundary(self.part, level, u)
        counts = [0] * self.part.num_workers
        for w in range(self.part.num_workers):
            start, _ = self.part.owned_range(level, w)
            for j in self._cpoints_of(level, w, m, nc):
                i = j * m
                prev = u[i - 1] if i - 1 >= start else ghosts[w]
                try:
                    state = prop.step(grid.time(i - 1), grid.dt, prev)
                except Exception as exc:
                    raise PropagatorStepError(level, i, exc) from exc
                if g is not None:
                    state = state + g[i]
                r[j] = state - u[i]
                counts[w] += 1
        self.work.add(iteration, level, True, counts)
        return r

    def fas_forcing(self, coarse_level: int, u_c: np.ndarray, r: np.ndarray,
                    iteration: int) -> np.ndarray:
        """Coarse forcing in FAS form: ghat_j = r_j + u_c_j - Phi_c(u_c_{j-1})."""
        grid = self.hier.grids[coarse_level]
        prop = self.props[coarse_level]
        ghat = np.empty_like(u_c)
        ghat[0] = u_c[0]
        ghosts = runtime.exchange_left_boundary(self.part, coarse_level, u_c)
        counts = [0] * self.part.num_workers
        for w in range(self.part.num_workers):
            start, stop = self.part.owned_range(coarse_level, w)
            for j in range(max(1, start), stop):
                prev = u_c[j - 1] if j - 1 >= start else ghosts[w]
                try:
                    state = prop.step(grid.time(j - 1), grid.dt, prev)
                except Exception as exc:
                    raise PropagatorStepError(coarse_level, j, exc) from exc
                ghat[j] = r[j] + u_c[j] - state
                counts[w] += 1
        self.work.add(iteration, coarse_level, True, counts)
        return ghat

    def coarsest_solve(self, ghat: np.ndarray, iteration: int) -> np.ndarray:
        """Sequential time stepping on the coarsest level (replicated, costed once)."""
        lvl = self.hier.coarsest
        grid = self.hier.grids[lvl]
        v = sequential_solve(self.props[lvl], grid, ghat[0], forcing=ghat)
        counts = [0] * self.part.num_workers
        counts[0] = grid.num_intervals
        self.work.add(iteration, lvl, False, counts)
        return v

    def residual_norm(self, level: int, r: np.ndarray) -> float:
        if self.opts.residual_weights is not None:
            r = r * self.opts.residual_weights
        blocks = []
        for w in range(self.part.num_workers):
            cs, ce = self.part.owned_range(level + 1, w)
            blocks.append(r[cs:ce])
        return global_residual_norm(self.part, blocks)

    # -- cycles ------------------------------------------------------------

    def cycle(self, level: int, u: np.ndarray, g, iteration: int, *,
              entry_consistent: bool = False,
              entry_residual: np.ndarray | None = None,
              compute_exit_residual: bool = False):
        """One recursive cycle at `level`; returns (u, exit C-point residual or None)."""
        if level == self.hier.coarsest:
            u0 = g[0] if g is not None else u[0]
            grid = self.hier.grids[level]
            u[:] = sequential_solve(self.props[level], grid, u0, forcing=g)
            counts = [0] * self.part.num_workers
            counts[0] = grid.num_intervals
            self.work.add(iteration, level, False, counts)
            return u, None

        if not entry_consistent:
            self.f_relax(level, u, g, iteration)
            entry_residual = None
        if self.relaxation == "FCF":
            self.c_relax(level, u, g, iteration)
            self.f_relax(level, u, g, iteration)
            entry_residual = None
        r = entry_residual if entry_residual is not None \
            else self.residual(level, u, g, iteration)

        m = self.hier.factors[level]
        u_c = u[::m].copy()  # injection
        ghat = self.fas_forcing(level + 1, u_c, r, iteration)
        v = u_c.copy()
        v, _ = self.cycle(level + 1, v, ghat, iteration)
        u[m::m] += v[1:] - u_c[1:]
        self.f_relax(level, u, g, iteration)

        r_exit = self.residual(level, u, g, iteration) if compute_exit_residual else None
        return u, r_exit


def _as_engine(hierarchy, propagators, options) -> _Engine:
    return _Engine(hierarchy, propagators, options or MgritOptions())


# -- public operations -----------------------------------------------------

def f_relax(hierarchy, propagators, u: SpaceTimeVector, g=None,
            options: MgritOptions | None = None) -> SpaceTimeVector:
    """F-relaxation on u's level: independent sweeps across every F-interval."""
    _as_engine(hierarchy, propagators, options).f_relax(u.level, u.values, g, 0)
    return u


def c_relax(hierarchy, propagators, u: SpaceTimeVector, g=None,
            options: MgritOptions | None = None) -> SpaceTimeVector:
    """C-relaxation on u's level; never touches u_0."""
    _as_engine(hierarchy, propagators, options).c_relax(u.level, u.values, g, 0)
    return u


def residual(hierarchy, propagators, u: SpaceTimeVector, g=None,
             options: MgritOptions | None = None) -> np.ndarray:
    """C-point residual of u's level as an array of shape (nc + 1, dim)."""
    return _as_engine(hierarchy, propagators, options).residual(u.level, u.values, g, 0)


def restrict_injection(values: np.ndarray, m: int) -> np.ndarray:
    """Injection: coarse value j = fine value at index j*m."""
    if m < 1:
        raise ValueError(f"coarsening factor must be >= 1, got {m}")
    return np.asarray(values)[::m].copy()


def fas_coarse_equation(hierarchy, propagators, coarse_level: int,
                        restricted_u: np.ndarray, restricted_residual: np.ndarray,
                        options: MgritOptions | None = None) -> np.ndarray:
    """Coarse-level forcing for the FAS coarse problem u_j - Phi_c(u_{j-1}) = ghat_j.

    For linear propagators this reduces to the correction-scheme right-hand
    side of the exact coarse-point system.
    """
    eng = _as_engine(hierarchy, propagators, options)
    return eng.fas_forcing(coarse_level, np.asarray(restricted_u, dtype=float),
                           np.asarray(restricted_residual, dtype=float), 0)


def v_cycle(hierarchy, propagators, u: SpaceTimeVector, g=None,
            options: MgritOptions | None = None) -> SpaceTimeVector:
    """One V-cycle starting at u's level: relax, residual, restrict, recurse,
    correct C-points, then F-relax."""
    eng = _as_engine(hierarchy, propagators, options)
    eng.cycle(u.level, u.values, g, 0)
    return u


def solve(hierarchy: TemporalHierarchy, propagators, u0, forcing=None,
          options: MgritOptions | None = None) -> SolveResult:
    """Iterate V-cycles until the finest-level C-point residual drops below tolerance.

    The initial guess copies u0 to every time point.  Returns the space-time
    solution (F-point equations hold on exit), the convergence record and the
    counted-work model.  Non-convergence within max_iters is reported through
    ``record.converged``, not an exception.
    """
    options = options or MgritOptions()
    if hierarchy.num_levels < 2:
        raise HierarchyError("time-multigrid solve needs at least two levels")
    eng = _Engine(hierarchy, propagators, options)
    grid = hierarchy.grids[0]
    u0 = np.asarray(u0, dtype=float).reshape(-1)
    g = _normalize_forcing(forcing, grid, u0.shape[0])
    u = np.tile(u0, (grid.num_points, 1))

    record = ConvergenceRecord(halt_tol=options.halt_tol)
    fcf = eng.relaxation == "FCF"

    def _log_iteration(k, norm, t0):
        totals = eng.work.level_totals(hierarchy.num_levels, iteration=k)
        record.iterations.append(IterationStats(
            iteration=k, residual_norm=norm,
            fine_phi_count=totals[0], coarse_phi_count=sum(totals[1:]),
            wall_seconds=time.perf_counter() - t0))

    t0 = time.perf_counter()
    eng.f_relax(0, u, g, 0)
    r = eng.residual(0, u, g, 0)
    _log_iteration(0, eng.residual_norm(0, r), t0)

    m = hierarchy.factors[0]
    for k in range(1, options.max_iters + 1):
        t0 = time.perf_counter()
        if fcf:
            eng.c_relax(0, u, g, k)
            eng.f_relax(0, u, g, k)
            r = eng.residual(0, u, g, k)
            norm = eng.residual_norm(0, r)
        u_c = u[::m].copy()
        ghat = eng.fas_forcing(1, u_c, r, k)
        v = u_c.copy()
        v, _ = eng.cycle(1, v, ghat, k)
        u[m::m] += v[1:] - u_c[1:]
        eng.f_relax(0, u, g, k)
        if not fcf:
            r = eng.residual(0, u, g, k)
            norm = eng.residual_norm(0, r)
        _log_iteration(k, norm, t0)
        if norm < options.halt_tol:
            record.converged = True
            break

    solution = SpaceTimeVector(level=0, values=u, owned_range=(0, grid.num_points))
    work = build_work_model(hierarchy, eng.work, options.level_unit_costs)
    return SolveResult(solution=solution, record=record, work=work)


def parareal_iterate(coarse_prop: Propagator, fine_prop: Propagator, fine_grid,
                     m: int, U: np.ndarray, fine_forcing=None) -> np.ndarray:
    """One Parareal update of the coarse-point values U.

    U_new[j+1] = G(U_new[j]) + F(U[j]) - G(U[j]), where F composes m fine
    steps across coarse interval j (these sweeps are independent across j)
    and G is one coarse step.
    """
    U = np.asarray(U, dtype=float)
    if fine_grid.num_intervals % m != 0:
        raise ValueError(f"factor {m} does not divide {fine_grid.num_intervals}")
    nc = fine_grid.num_intervals // m
    if U.shape[0] != nc + 1:
        raise ValueError(f"expected {nc + 1} coarse values, got {U.shape[0]}")
    g = _normalize_forcing(fine_forcing, fine_grid, U.shape[1])
    dt_c = fine_grid.dt * m

    F = np.empty_like(U)
    for j in range(nc):  # independent fine sweeps
        state = U[j]
        t = fine_grid.time(j * m)
        for i in range(j * m + 1, (j + 1) * m + 1):
            state = fine_prop.step(t, fine_grid.dt, state)
            if g is not None:
                state = state + g[i]
            t += fine_grid.dt
        F[j + 1] = state

    U_new = np.empty_like(U)
    U_new[0] = U[0]
    for j in range(nc):
        t_j = fine_grid.time(j * m)
        g_new = coarse_prop.step(t_j, dt_c, U_new[j])
        g_old = coarse_prop.step(t_j, dt_c, U[j])
        U_new[j + 1] = g_new + (F[j + 1] - g_old)
    return U_new
