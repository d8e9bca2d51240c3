import numpy as np
import pytest

from transpiler.benchmarks import generate_benchmark
from transpiler.circuit import Circuit, Gate, GateKind
from transpiler.exceptions import RoutingError
from transpiler.layout import Layout
from transpiler.options import TranspileConfig
from transpiler.qubo import VariableCodec
from transpiler.router import (
    STRATEGIES,
    classify_executable,
    greedy_step,
    repair_routing,
    route_full,
    routing_violations,
    solve_routing_step,
    transpile,
    weighted_distance,
)
from transpiler.topology import grid, line
from transpiler.verifier import verify_equivalence
from utils import PhaseTimer


@pytest.fixture
def blocked_circuit() -> Circuit:
    return Circuit(
        3,
        [
            Gate.cnot(0, 1),
            Gate.cnot(0, 2),
            Gate.single('h', 2),
            Gate.single('h', 1),
            Gate.cnot(1, 2),
        ],
    )


def test_classify_respects_dependencies(blocked_circuit):
    found = classify_executable(
        blocked_circuit.gates, Layout.trivial(3, 3), line(3)
    )
    gates = blocked_circuit.gates
    assert found.executable == [gates[0], gates[3]]
    assert found.residual == [gates[1], gates[2], gates[4]]
    assert list(found.blocked) == [(0, 2)]
    assert set(found.routing_pairs) == {(0, 2), (1, 2)}
    # the blocked pair is in the first residual layer
    assert found.routing_pairs[(0, 2)] > found.routing_pairs[(1, 2)]


def test_classify_front_only_and_window(blocked_circuit):
    layout = Layout.trivial(3, 3)
    gates = blocked_circuit.gates
    cfg = TranspileConfig(front_only=True)
    front = classify_executable(gates, layout, line(3), cfg)
    assert set(front.routing_pairs) == {(0, 2)}
    cfg = TranspileConfig(route_window=1)
    window = classify_executable(gates, layout, line(3), cfg)
    assert set(window.routing_pairs) == {(0, 2)}


def test_classify_everything_executable():
    c = generate_benchmark('ghz', 3, 0)
    found = classify_executable(c.gates, Layout.trivial(3, 3), line(3))
    assert found.executable == list(c.gates)
    assert found.residual == [] and found.blocked == {}


def test_classify_keeps_measurements_waiting():
    gates = [
        Gate.cnot(0, 2),
        Gate.single('measure', 2, cbit=1),
        Gate.single('measure', 1, cbit=0),
    ]
    found = classify_executable(gates, Layout.trivial(3, 3), line(3))
    assert found.executable == [gates[2]]
    assert found.residual == gates[:2]


def test_weighted_distance():
    layout = Layout([0, 3, 1], 4)
    pairs = {(0, 1): 2.0, (1, 2): 0.5}
    assert weighted_distance(pairs, layout, line(4)) == pytest.approx(7.0)


def test_greedy_step_walks_to_adjacency():
    g = line(5)
    layout = Layout([0, 4], 5)
    step = greedy_step({(0, 1): 3.0}, layout, g)
    assert len(step) == 3
    after = step.apply(layout)
    assert g.dist[after.physical(0), after.physical(1)] == 1


def test_greedy_step_picks_heaviest_pair():
    g = line(6)
    layout = Layout([0, 2, 3, 5], 6)
    step = greedy_step({(0, 1): 1.0, (2, 3): 4.0}, layout, g)
    after = step.apply(layout)
    assert g.dist[after.physical(2), after.physical(3)] == 1


def test_repair_reverts_jumps_and_collisions():
    g = line(3)
    codec = VariableCodec.routing(2, 3, 1)
    prior = Layout([0, 1], 3)
    # logical 0 jumps 0 -> 2
    jump = Layout([2, 1], 3).occupancy().ravel()
    assert routing_violations(jump, prior, codec, g) == 1
    fixed = repair_routing(jump, prior, codec, g)
    assert routing_violations(fixed, prior, codec, g) == 0
    assert codec.occupancy(fixed)[0].argmax(axis=1).tolist() == [0, 1]

    prior = Layout([0, 2], 3)
    clash = np.zeros(codec.num_vars, dtype=np.int8)
    clash[codec.encode(0, 1)] = 1
    clash[codec.encode(1, 1)] = 1
    assert routing_violations(clash, prior, codec, g) == 1
    fixed = repair_routing(clash, prior, codec, g)
    assert codec.occupancy(fixed)[0].argmax(axis=1).tolist() == [0, 2]


def test_repair_cascades():
    g = line(3)
    codec = VariableCodec.routing(2, 3, 1)
    prior = Layout([0, 1], 3)
    # logical 0 takes slot 1, logical 1 has no slot and must stay on 1
    bits = np.zeros(codec.num_vars, dtype=np.int8)
    bits[codec.encode(0, 1)] = 1
    fixed = repair_routing(bits, prior, codec, g)
    assert codec.occupancy(fixed)[0].argmax(axis=1).tolist() == [0, 1]


def test_routing_step_on_three_qubit_line(fast_config, solver):
    g = grid(1, 3)
    layout = Layout([0, 2], 3)
    blocked = {(0, 1): 11.0}
    step, target = solve_routing_step(blocked, layout, g, fast_config, solver)
    assert 1 <= len(step) <= 2
    assert step.apply(layout) == target
    assert g.dist[target.physical(0), target.physical(1)] == 1


def test_routing_step_needs_blocked_pairs(fast_config, solver):
    with pytest.raises(RoutingError):
        solve_routing_step({}, Layout([0, 1], 2), line(2), fast_config, solver)


def test_route_full_progresses(fast_config, solver):
    c = Circuit(2, [Gate.cnot(0, 1), Gate.single('x', 0), Gate.cnot(1, 0)])
    initial = Layout([0, 4], 5)
    gates, final, iterations = route_full(
        c, initial, line(5), fast_config, solver, PhaseTimer()
    )
    assert iterations >= 1
    assert sum(1 for h in gates if h.kind is GateKind.SWAP) >= 3
    assert line(5).dist[final.physical(0), final.physical(1)] == 1


def test_ghz3_on_line(fast_config, solver):
    c = generate_benchmark('ghz', 3, 0)
    result = transpile(c, line(3), 'full', fast_config, solver)
    ok, message = verify_equivalence(c, result, line(3))
    assert ok, message
    assert result.swap_count == 0
    assert result.equivalent_cnot == 2


@pytest.mark.parametrize('strategy', STRATEGIES)
@pytest.mark.parametrize(
    'family, n, rows, cols',
    [('ghz', 5, 2, 3), ('qv', 4, 2, 2), ('qaoa_grid', 9, 3, 3)],
)
def test_strategies_produce_equivalent_circuits(
    strategy, family, n, rows, cols, fast_config, solver
):
    c = generate_benchmark(family, n, 1)
    g = grid(rows, cols)
    result = transpile(c, g, strategy, fast_config, solver)
    ok, message = verify_equivalence(c, result, g)
    assert ok, message
    assert result.strategy == strategy
    assert result.original_cnot == c.cnot_count()
    assert result.equivalent_cnot == (
        result.original_cnot + 3 * result.swap_count
    )
    assert result.phase_timings['total'] >= 0


def test_measurements_survive_routing(fast_config, solver):
    gates = [Gate.single('h', 0), Gate.cnot(0, 3)]
    gates += [Gate.single('measure', q, cbit=q) for q in range(4)]
    c = Circuit(4, gates, 'measured', num_clbits=4)
    g = line(4)
    for strategy in STRATEGIES:
        result = transpile(c, g, strategy, fast_config, solver)
        ok, message = verify_equivalence(c, result, g)
        assert ok, message
        assert result.circuit.num_clbits == 4


def test_input_swaps_count_as_three_cnots(fast_config, solver):
    c = Circuit(2, [Gate.swap(0, 1), Gate.cnot(0, 1)])
    result = transpile(c, line(2), 'full', fast_config, solver)
    assert result.original_cnot == 4
    assert result.swap_count == 0
    ok, message = verify_equivalence(c, result, line(2))
    assert ok, message


def test_unknown_strategy(fast_config, solver):
    with pytest.raises(ValueError, match='unknown strategy'):
        transpile(
            generate_benchmark('ghz', 3, 0),
            line(3),
            'magic',
            fast_config,
            solver,
        )


def test_heuristic_only_rejects_large_circuits(fast_config, solver):
    with pytest.raises(RoutingError):
        transpile(
            generate_benchmark('ghz', 4, 0),
            line(3),
            'heuristic-only',
            fast_config,
            solver,
        )


def test_full_timings_cover_phases(fast_config, solver):
    c = generate_benchmark('qv', 4, 0)
    result = transpile(c, line(4), 'full', fast_config, solver)
    assert {'map', 'route', 'total'} <= set(result.phase_timings)
    assert result.phase_timings['total'] >= result.phase_timings['map']
