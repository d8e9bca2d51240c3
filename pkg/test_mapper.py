import numpy as np
import pytest

from services.annealer import AnnealConfig, SolveResult
from transpiler.benchmarks import generate_benchmark
from transpiler.circuit import Circuit, Gate, first_interaction_weights
from transpiler.exceptions import MappingError
from transpiler.layout import Layout
from transpiler.mapper import (
    count_violations,
    repair_mapping,
    solve_initial_mapping,
)
from transpiler.options import TranspileConfig
from transpiler.topology import grid, line
from utils import PhaseTimer


class ZeroSolver:
    """Returns the all-zero assignment, violating every one-hot row."""

    name = 'zero'

    def __init__(self):
        self.calls = 0

    def solve(self, q, cfg=None, initial=None):
        self.calls += 1
        bits = np.zeros(q.num_vars, dtype=np.int8)
        return SolveResult(bits, q.energy(bits), 0.0, 1)


def test_count_violations():
    ok = np.array([[1, 0, 0], [0, 1, 0]])
    assert count_violations(ok) == 0
    # row 0 empty, row 1 doubled, column 1 shared
    bad = np.array([[0, 0, 0], [0, 1, 1]])
    assert count_violations(bad) == 2
    shared = np.array([[0, 1, 0], [0, 1, 0]])
    assert count_violations(shared) == 1


def test_repair_keeps_valid_layout():
    occupancy = Layout([2, 0], 3).occupancy()
    weights = {(0, 1): 5.0}
    assert repair_mapping(occupancy, weights, line(3)) == Layout([2, 0], 3)


def test_repair_places_missing_qubit_next_to_partner():
    g = line(5)
    # logical 1 lost its slot, logical 0 sits on 3
    occupancy = np.zeros((2, 5), dtype=np.int8)
    occupancy[0, 3] = 1
    layout = repair_mapping(occupancy, {(0, 1): 5.0}, g)
    assert layout.physical(0) == 3
    assert g.dist[3, layout.physical(1)] == 1


def test_repair_gives_contested_slot_to_heavier_qubit():
    g = line(4)
    occupancy = np.zeros((3, 4), dtype=np.int8)
    occupancy[0, 1] = 1
    occupancy[1, 1] = 1
    occupancy[2, 2] = 1
    weights = {(1, 2): 9.0, (0, 2): 2.0}
    layout = repair_mapping(occupancy, weights, g)
    assert layout.physical(1) == 1
    assert layout.physical(2) == 2
    assert layout.physical(0) in (0, 3)


def test_ghz_chain_on_line(solver):
    c = generate_benchmark('ghz', 4, 0)
    g = line(4)
    cfg = TranspileConfig(
        mapping_anneal=AnnealConfig(300, 4, group_moves=True)
    )
    layout = solve_initial_mapping(c, g, cfg, solver, PhaseTimer())
    for (i, j) in first_interaction_weights(c, 10.0):
        assert g.dist[layout.physical(i), layout.physical(j)] == 1


def test_mapping_is_seeded(solver):
    c = generate_benchmark('qv', 4, 3)
    g = grid(2, 3)
    cfg = TranspileConfig(
        mapping_anneal=AnnealConfig(100, 2, group_moves=True), seed=11
    )
    a = solve_initial_mapping(c, g, cfg, solver)
    b = solve_initial_mapping(c, g, cfg, solver)
    assert a == b


def test_too_many_logical_qubits(solver):
    with pytest.raises(MappingError):
        solve_initial_mapping(
            generate_benchmark('ghz', 5, 0),
            line(4),
            TranspileConfig(),
            solver,
        )


def test_empty_circuit(solver):
    layout = solve_initial_mapping(
        Circuit(0, ()), line(2), TranspileConfig(), solver
    )
    assert layout.num_logical == 0


def test_lambda_escalation_gives_up():
    c = Circuit(3, [Gate.cnot(0, 1), Gate.cnot(1, 2)])
    cfg = TranspileConfig(repair_limit=0, lambda_retries=2)
    zero = ZeroSolver()
    with pytest.raises(MappingError, match='lambda'):
        solve_initial_mapping(c, line(3), cfg, zero)
    assert zero.calls == 3


def test_few_violations_are_repaired():
    c = Circuit(2, [Gate.cnot(0, 1)])
    layout = solve_initial_mapping(
        c, line(3), TranspileConfig(repair_limit=2), ZeroSolver()
    )
    assert line(3).dist[layout.physical(0), layout.physical(1)] == 1
