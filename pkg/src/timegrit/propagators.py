"""One-step time integrators and the sequential reference solve.

A propagator is the map ``u_out = Phi(t_from, dt, u_in)`` advancing a state
vector over one step.  Time stepping with an additive per-point forcing g is

    u_i = Phi(t_{i-1}, dt, u_{i-1}) + g_i,        u_0 given,

which is the convention all solver routines in this package share: physical
sources live inside the propagator, the extra g carries coarse-grid forcing
(zero on the finest level).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Callable

import numpy as np

from .hierarchy import TemporalGrid


class PropagatorStepError(RuntimeError):
    """A propagator failed at a specific time point."""

    def __init__(self, level: int, index: int, cause: Exception):
        super().__init__(f"propagator failed at level {level}, time index {index}: {cause}")
        self.level = level
        self.index = index
        self.cause = cause


class Propagator(ABC):
    """Deterministic one-step map over a fixed-dimension state."""

    state_dim: int = 1
    is_linear: bool = False

    @abstractmethod
    def step(self, t_from: float, dt: float, u: np.ndarray) -> np.ndarray:
        """Advance `u` from `t_from` to `t_from + dt`; must not mutate `u`."""


def step_dahlquist_backward_euler(lam: float, dt: float, u: float) -> float:
    """Backward-Euler update for u' = lam*u: returns u / (1 - lam*dt)."""
    denom = 1.0 - lam * dt
    if denom == 0.0:
        raise ZeroDivisionError(f"singular step: 1 - lam*dt = 0 for lam={lam}, dt={dt}")
    return u / denom


class DahlquistProblem(Propagator):
    """Scalar test problem u' = lam*u integrated by backward Euler."""

    state_dim = 1
    is_linear = True

    def __init__(self, lam: float, u0: float = 1.0):
        self.lam = float(lam)
        self.u0 = float(u0)

    def step(self, t_from, dt, u):
        return np.asarray(u) / (1.0 - self.lam * dt) if (1.0 - self.lam * dt) != 0.0 \
            else self._singular(dt)

    def _singular(self, dt):
        raise ZeroDivisionError(f"singular step: 1 - lam*dt = 0 for lam={self.lam}, dt={dt}")

    def initial_state(self) -> np.ndarray:
        return np.array([self.u0])


class ImplicitOdePropagator(Propagator):
    """Backward Euler with Newton on a general ODE u' = f(t, u).

    `f` maps (t, u) -> ndarray and `dfdu` maps (t, u) -> Jacobian matrix.
    Intended for small nonlinear verification problems.
    """

    def __init__(self, f: Callable, dfdu: Callable, state_dim: int,
                 newton_tol: float = 1e-12, newton_max_iters: int = 30):
        self.f = f
        self.dfdu = dfdu
        self.state_dim = state_dim
        self.newton_tol = newton_tol
        self.newton_max_iters = newton_max_iters

    def step(self, t_from, dt, u):
        t_new = t_from + dt
        u_new = np.array(u, dtype=float, copy=True)
        eye = np.eye(self.state_dim)
        scale = max(float(np.linalg.norm(u)), 1.0)
        for _ in range(self.newton_max_iters):
            r = u_new - u - dt * self.f(t_new, u_new)
            if np.linalg.norm(r) <= self.newton_tol * scale:
                return u_new
            jac = eye - dt * np.asarray(self.dfdu(t_new, u_new))
            u_new = u_new - np.linalg.solve(jac, r)
        r = u_new - u - dt * self.f(t_new, u_new)
        if np.linalg.norm(r) <= self.newton_tol * scale:
            return u_new
        raise RuntimeError(
            f"Newton stalled after {self.newton_max_iters} iterations, |r| = {np.linalg.norm(r):.3e}"
        )


def _normalize_forcing(forcing, grid: TemporalGrid, state_dim: int):
    """Accept None, a callable g(t) -> vector, or an array (num_points, state_dim)."""
    if forcing is None:
        return None
    if callable(forcing):
        g = np.zeros((grid.num_points, state_dim))
        for i in range(1, grid.num_points):
            g[i] = np.asarray(forcing(grid.time(i)), dtype=float).reshape(state_dim)
        return g
    g = np.asarray(forcing, dtype=float)
    if g.shape != (grid.num_points, state_dim):
        raise ValueError(
            f"forcing shape {g.shape} does not match ({grid.num_points}, {state_dim})"
        )
    return g


def sequential_solve(prop: Propagator, grid: TemporalGrid, u0,
                     forcing=None) -> np.ndarray:
    """Reference time-stepping solve; returns values of shape (num_points, state_dim).

    Computes u_i = Phi(u_{i-1}) + g_i for i >= 1.  This is the oracle every
    iterative solve in this package is compared against.
    """
    u0 = np.asarray(u0, dtype=float).reshape(-1)
    dim = u0.shape[0]
    if prop.state_dim != dim:
        raise ValueError(f"u0 has dimension {dim}, propagator expects {prop.state_dim}")
    g = _normalize_forcing(forcing, grid, dim)
    values = np.empty((grid.num_points, dim))
    values[0] = u0
    u = u0
    for i in range(1, grid.num_points):
        try:
            u = prop.step(grid.time(i - 1), grid.dt, u)
        except Exception as exc:  # report the failing step index
            raise PropagatorStepError(grid.level, i, exc) from exc
        if g is not None:
            u = u + g[i]
        values[i] = u
    return values
