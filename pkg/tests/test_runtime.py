import math

import numpy as np
import pytest

from timegrit.hierarchy import build_hierarchy
from timegrit.mgrit import MgritOptions, solve
from timegrit.propagators import DahlquistProblem
from timegrit.runtime import (WorkLog, estimate_speedup,
                              exchange_left_boundary, global_residual_norm,
                              partition, speedup_crossover, write_work_model_csv)


def test_partition_two_workers_balanced():
    hier = build_hierarchy(0.0, 1.0, 8, [4])
    part = partition(hier, 2)
    assert part.owned_range(0, 0) == (0, 5)
    assert part.owned_range(0, 1) == (5, 9)


def test_partition_single_worker_owns_everything():
    hier = build_hierarchy(0.0, 1.0, 8, [2])
    part = partition(hier, 1)
    assert part.owned_range(0, 0) == (0, 9)
    assert part.owned_range(1, 0) == (0, 5)


def test_partition_scale_even_split():
    hier = build_hierarchy(0.0, 0.2, 32768, [256])
    part = partition(hier, 64)
    sizes = [part.owned_range(0, w)[1] - part.owned_range(0, w)[0] for w in range(64)]
    assert max(sizes) - min(sizes) <= 1
    assert sum(sizes) == 32769
    # 32768 intervals over 64 workers: 512 fine intervals each
    widths = [(stop - start) for start, stop in part.ranges[0]]
    assert max(widths) in (512, 513)


def test_partition_alignment_coarse_owner_owns_fine_point():
    hier = build_hierarchy(0.0, 1.0, 64, [4, 4])
    for workers in (2, 3, 5, 7):
        part = partition(hier, workers)
        for lvl in (1, 2):
            stride = hier.fine_stride(lvl)
            n = hier.grids[lvl].num_points
            for j in range(n):
                assert part.owner(lvl, j) == part.owner(0, j * stride)


def test_partition_coarse_ranges_may_be_empty():
    hier = build_hierarchy(0.0, 1.0, 16, [16])
    part = partition(hier, 8)  # only 2 coarse points for 8 workers
    sizes = [stop - start for start, stop in part.ranges[1]]
    assert sum(sizes) == 2
    assert any(s == 0 for s in sizes)


def test_partition_rejects_bad_worker_count():
    hier = build_hierarchy(0.0, 1.0, 8, [2])
    with pytest.raises(ValueError):
        partition(hier, 0)


def test_exchange_single_worker_noop():
    hier = build_hierarchy(0.0, 1.0, 8, [2])
    part = partition(hier, 1)
    ghosts = exchange_left_boundary(part, 0, np.arange(9.0).reshape(-1, 1))
    assert ghosts == {0: None}


def test_exchange_ghost_is_neighbours_last_value():
    hier = build_hierarchy(0.0, 1.0, 8, [4])
    part = partition(hier, 2)
    values = np.arange(9.0).reshape(-1, 1)
    ghosts = exchange_left_boundary(part, 0, values)
    assert ghosts[0] is None
    start, _ = part.owned_range(0, 1)
    assert ghosts[1][0] == values[start - 1, 0]
    # copies, not views
    ghosts[1][0] = -1.0
    assert values[start - 1, 0] != -1.0


def test_global_norm_examples():
    hier = build_hierarchy(0.0, 1.0, 8, [2])
    part1 = partition(hier, 1)
    assert global_residual_norm(part1, [np.zeros((5, 1))]) == 0.0
    block = np.zeros((5, 1))
    block[3, 0] = -2.5
    assert global_residual_norm(part1, [block]) == 2.5


def test_global_norm_worker_count_invariant(rng):
    hier = build_hierarchy(0.0, 1.0, 64, [4])
    r = rng.normal(size=(17, 3))
    part1 = partition(hier, 1)
    part4 = partition(hier, 4)
    n1 = global_residual_norm(part1, [r[slice(*part1.owned_range(1, 0))]])
    n4 = global_residual_norm(part4, [r[slice(*part4.owned_range(1, w))] for w in range(4)])
    assert abs(n1 - n4) <= 1e-13 * n1


def test_relaxation_bitwise_invariant_across_workers():
    hier = build_hierarchy(0.0, 10.0, 256, [8])
    prop = DahlquistProblem(-1.0)
    props = [prop, prop]
    solutions = {}
    for w in (1, 4):
        res = solve(hier, props, [1.0],
                    options=MgritOptions(halt_tol=1e-10, num_workers=w))
        solutions[w] = res.solution.values
    np.testing.assert_array_equal(solutions[1], solutions[4])


def test_full_solve_partition_invariance_dahlquist():
    hier = build_hierarchy(0.0, 10.0, 512, [4, 4])
    prop = DahlquistProblem(-1.0)
    props = [prop] * 3
    histories = {}
    for w in (1, 2, 4):
        res = solve(hier, props, [1.0],
                    options=MgritOptions(halt_tol=1e-10, num_workers=w, relaxation="FCF"))
        histories[w] = res.record.residual_norms
    for w in (2, 4):
        assert histories[w].shape == histories[1].shape
        np.testing.assert_allclose(histories[w], histories[1], rtol=1e-12)


# -- work model ---------------------------------------------------------------

def run_two_level(nt=1024, m=4, tol=1e-8):
    hier = build_hierarchy(0.0, 10.0, nt, [m])
    prop = DahlquistProblem(-1.0)
    return solve(hier, [prop, prop], [1.0], options=MgritOptions(halt_tol=tol))


def test_workmodel_counts_match_formula():
    nt, m = 1024, 4
    result = run_two_level(nt, m)
    iters = len(result.record.iterations) - 1
    # per iteration: trailing F (nt*(m-1)/m) + residual (nt/m) fine applications,
    # plus ghat (nt/m) + coarse solve (nt/m); setup adds one F sweep + residual
    for stats in result.record.iterations[1:]:
        assert stats.fine_phi_count == nt
        assert stats.coarse_phi_count == nt // m * 2
    setup = result.record.iterations[0]
    assert setup.fine_phi_count == nt * (m - 1) // m + nt // m


def test_speedup_below_one_on_single_worker():
    result = run_two_level()
    assert estimate_speedup(result.work, 1) < 1.0


def test_speedup_monotone_and_crossover():
    result = run_two_level(nt=32768, m=256)
    speeds = [estimate_speedup(result.work, w) for w in (1, 2, 4, 8, 16, 32, 64, 128)]
    assert all(b >= a for a, b in zip(speeds, speeds[1:]))
    cross = speedup_crossover(result.work)
    assert cross is not None and cross > 1
    assert estimate_speedup(result.work, cross) > 1.0


def test_speedup_matches_counted_formula():
    nt, m, workers = 32768, 256, 128
    result = run_two_level(nt=nt, m=m)
    iters = len(result.record.iterations) - 1
    # plug counted applications into the critical-path formula by hand
    crit = 0.0
    for stats in result.record.iterations:
        fine = stats.fine_phi_count
        crit += math.ceil(fine / workers)
        if stats.iteration > 0:  # setup performs no coarse-level work
            crit += math.ceil((nt // m) / workers) + nt // m
    assert estimate_speedup(result.work, workers) == pytest.approx(nt / crit, rel=1e-12)


def test_speedup_saturates_at_sequential_term():
    result = run_two_level(nt=1024, m=4)
    a = estimate_speedup(result.work, 10 ** 6)
    b = estimate_speedup(result.work, 10 ** 7)
    assert a == pytest.approx(b, rel=1e-9)


def test_work_model_csv(tmp_path):
    result = run_two_level()
    path = tmp_path / "work.csv"
    write_work_model_csv(path, result.work, [1, 2, 4])
    lines = path.read_text().splitlines()
    assert lines[0] == "num_workers,phi_level_0,phi_level_1,critical_path_cost,estimated_speedup"
    assert len(lines) == 4


def test_worklog_validates_counts():
    log = WorkLog(num_workers=2)
    with pytest.raises(ValueError):
        log.add(0, 0, True, [5])  # needs per-worker counts
    log.add(0, 0, True, [3, 2])
    assert log.phases[0].total == 5 and log.phases[0].max_worker == 3
