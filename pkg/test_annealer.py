import numpy as np
import pytest

from conftest import brute_force
from services.annealer import AnnealConfig, SimulatedAnnealer, solve_sa
from transpiler.benchmarks import generate_benchmark
from transpiler.layout import Layout
from transpiler.qubo import (
    PenaltyConfig,
    QuboProblem,
    build_mapping_qubo,
    build_routing_qubo,
    energy,
)
from transpiler.topology import grid, line


def qubo(n, linear, quadratic=(), offset=0.0) -> QuboProblem:
    return QuboProblem.from_dict(
        {
            'num_vars': n,
            'offset': offset,
            'linear': list(linear),
            'quadratic': [list(t) for t in quadratic],
        }
    )


def random_qubo(n: int, rng) -> QuboProblem:
    upper = np.triu(rng.integers(-5, 6, size=(n, n)), 1)
    a, b = np.nonzero(upper)
    return qubo(
        n,
        rng.integers(-5, 6, size=n).tolist(),
        [(int(i), int(j), float(upper[i, j])) for i, j in zip(a, b)],
    )


def test_config_validation():
    with pytest.raises(ValueError):
        AnnealConfig(num_sweeps=0)
    with pytest.raises(ValueError):
        AnnealConfig(initial_temperature=0.01, final_temperature=0.1)
    with pytest.raises(ValueError):
        AnnealConfig(final_temperature=0)


def test_single_variable():
    result = solve_sa(qubo(1, [-5.0], offset=2.0), AnnealConfig(50, 2))
    assert result.best_assignment.tolist() == [1]
    assert result.best_energy == pytest.approx(-3.0)


def test_two_variables_pick_one_bit():
    q = qubo(2, [-1.0, -1.0], [(0, 1, 3.0)])
    result = solve_sa(q, AnnealConfig(100, 4))
    assert sum(result.best_assignment) == 1
    assert result.best_energy == pytest.approx(-1.0)


def test_reported_energy_is_exact():
    rng = np.random.default_rng(8)
    q = random_qubo(12, rng)
    result = solve_sa(q, AnnealConfig(200, 3, seed=5))
    assert result.best_energy == energy(q, result.best_assignment)
    assert result.restarts_run == 3
    assert len(result.restart_energies) == 3


def test_reproducible_for_same_seed():
    rng = np.random.default_rng(9)
    q = random_qubo(14, rng)
    cfg = AnnealConfig(150, 4, seed=42)
    a, b = solve_sa(q, cfg), solve_sa(q, cfg)
    assert a.best_assignment.tolist() == b.best_assignment.tolist()
    assert a.best_energy == b.best_energy


def test_threads_do_not_change_the_result():
    rng = np.random.default_rng(10)
    q = random_qubo(14, rng)
    serial = solve_sa(q, AnnealConfig(150, 4, seed=3))
    threaded = solve_sa(q, AnnealConfig(150, 4, seed=3, workers=3))
    assert serial.best_assignment.tolist() == threaded.best_assignment.tolist()


def test_more_restarts_never_worse():
    rng = np.random.default_rng(12)
    q = random_qubo(16, rng)
    few = solve_sa(q, AnnealConfig(40, 2, seed=1))
    many = solve_sa(q, AnnealConfig(40, 6, seed=1))
    assert many.best_energy <= few.best_energy


def test_incremental_energy_checked_during_flips():
    rng = np.random.default_rng(13)
    q = random_qubo(10, rng)
    solve_sa(q, AnnealConfig(30, 2, debug_check=True))


def test_incremental_energy_checked_during_group_moves():
    c = generate_benchmark('ghz', 4, 0)
    q = build_mapping_qubo(c, grid(2, 3), PenaltyConfig())
    solve_sa(q, AnnealConfig(30, 2, group_moves=True, debug_check=True))


def test_group_moves_stay_feasible():
    c = generate_benchmark('qv', 4, 1)
    g = grid(2, 3)
    q = build_mapping_qubo(c, g, PenaltyConfig())
    result = solve_sa(q, AnnealConfig(100, 2, group_moves=True))
    occupancy = q.codec.occupancy(result.best_assignment)[0]
    assert (occupancy.sum(axis=1) == 1).all()
    assert (occupancy.sum(axis=0) <= 1).all()


def test_group_moves_find_chain_layout():
    c = generate_benchmark('ghz', 3, 0)
    g = line(3)
    q = build_mapping_qubo(c, g, PenaltyConfig())
    result = solve_sa(q, AnnealConfig(200, 4, group_moves=True))
    pos = q.codec.occupancy(result.best_assignment)[0].argmax(axis=1)
    assert g.dist[pos[0], pos[1]] == 1
    assert g.dist[pos[1], pos[2]] == 1


def test_warm_start_must_be_one_hot_for_group_moves():
    prior = Layout([0, 1], 3)
    q = build_routing_qubo([(0, 1, 3.0)], prior, line(3), PenaltyConfig())
    annealer = SimulatedAnnealer(q, AnnealConfig(10, 1, group_moves=True))
    annealer.solve(prior.stationary_bits(q.codec))
    with pytest.raises(ValueError):
        annealer.solve(np.zeros(q.num_vars, dtype=np.int8))


def test_dict_pair_lookup_matches_dense(monkeypatch):
    import services.annealer as annealer_module

    c = generate_benchmark('qv', 4, 2)
    q = build_mapping_qubo(c, grid(2, 3), PenaltyConfig())
    cfg = AnnealConfig(60, 2, seed=7, group_moves=True)
    dense = solve_sa(q, cfg)
    monkeypatch.setattr(annealer_module, 'DENSE_PAIR_LIMIT', 0)
    sparse = solve_sa(q, cfg)
    assert dense.best_assignment.tolist() == sparse.best_assignment.tolist()


def test_finds_brute_force_optimum_on_small_qubos():
    rng = np.random.default_rng(21)
    hits = 0
    for trial in range(10):
        q = random_qubo(12, rng)
        _, optimum, _ = brute_force(q)
        result = solve_sa(q, AnnealConfig(300, 8, seed=trial))
        hits += result.best_energy == pytest.approx(optimum)
    assert hits >= 9


@pytest.mark.slow
def test_solver_quality_acceptance():
    rng = np.random.default_rng(16)
    hits = 0
    for trial in range(100):
        q = random_qubo(16, rng)
        _, optimum, _ = brute_force(q)
        result = solve_sa(q, AnnealConfig(seed=trial))
        hits += result.best_energy == pytest.approx(optimum)
    assert hits >= 95
