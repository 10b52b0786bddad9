"""Parallel-in-time solvers (MGRIT / Parareal) with a 2D eddy-current benchmark."""

from .hierarchy import (CFPartition, HierarchyError, TemporalGrid, TemporalHierarchy,
                        build_hierarchy, cf_partition)
from .mgrit import (ConvergenceRecord, MgritOptions, SolveResult, SpaceTimeVector,
                    c_relax, f_relax, fas_coarse_equation, parareal_iterate,
                    residual, restrict_injection, solve, v_cycle)
from .propagators import (DahlquistProblem, ImplicitOdePropagator, Propagator,
                          PropagatorStepError, sequential_solve,
                          step_dahlquist_backward_euler)
from .runtime import (TimePartition, WorkModel, estimate_speedup,
                      exchange_left_boundary, global_residual_norm, partition,
                      speedup_crossover)

__version__ = "0.1.0"

__all__ = [
    "CFPartition", "ConvergenceRecord", "DahlquistProblem", "HierarchyError",
    "ImplicitOdePropagator", "MgritOptions", "Propagator", "PropagatorStepError",
    "SolveResult", "SpaceTimeVector", "TemporalGrid", "TemporalHierarchy",
    "TimePartition", "WorkModel", "build_hierarchy", "c_relax", "cf_partition",
    "estimate_speedup", "exchange_left_boundary", "f_relax", "fas_coarse_equation",
    "global_residual_norm", "parareal_iterate", "partition", "residual",
    "restrict_injection", "sequential_solve", "solve", "speedup_crossover",
    "step_dahlquist_backward_euler", "v_cycle",
]
