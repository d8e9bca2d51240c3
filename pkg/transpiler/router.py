import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from services.annealer import QuboSolver
from transpiler.circuit import (
    Circuit,
    Gate,
    Pair,
    compute_layers,
    first_interaction_layers,
    interaction_weight,
)
from transpiler.exceptions import RoutingError
from transpiler.layout import Layout, SwapStep, decode_movements
from transpiler.mapper import (
    count_violations,
    run_solver,
    solve_initial_mapping,
)
from transpiler.options import TranspileConfig, derive_seed
from transpiler.qubo import VariableCodec, build_routing_qubo
from transpiler.result import TranspileResult, make_result
from transpiler.sabre import heuristic_route
from transpiler.topology import CouplingGraph
from utils import PhaseTimer

logger = logging.getLogger(__name__)

STRATEGIES = ('full', 'hybrid', 'heuristic-only')


@dataclass
class Classification:
    # logical gates runnable now, in program order
    executable: List[Gate]
    residual: List[Gate]
    # directly blocked gates (not merely waiting on one) and their weights
    blocked: Dict[Pair, float]
    # pairs handed to the routing QUBO
    routing_pairs: Dict[Pair, float]


def classify_executable(
    residual: Sequence[Gate],
    layout: Layout,
    g: CouplingGraph,
    cfg: Optional[TranspileConfig] = None,
) -> Classification:
    cfg = cfg or TranspileConfig()
    executable: List[Gate] = []
    remaining: List[Gate] = []
    blocked_pairs = set()
    stalled = set()
    for gate in residual:
        if any(q in stalled for q in gate.qubits):
            remaining.append(gate)
            stalled.update(gate.qubits)
            continue
        if gate.is_two_qubit:
            a, b = gate.qubits
            if not g.is_edge(layout.physical(a), layout.physical(b)):
                remaining.append(gate)
                stalled.update(gate.qubits)
                blocked_pairs.add(gate.pair())
                continue
        executable.append(gate)

    if not remaining:
        return Classification(executable, remaining, {}, {})

    num_qubits = layout.num_logical
    clbits = max(
        (h.cbit + 1 for h in remaining if h.cbit is not None), default=0
    )
    rest = Circuit(num_qubits, tuple(remaining), num_clbits=clbits)
    first = first_interaction_layers(rest, compute_layers(rest))
    weights = {
        pair: interaction_weight(t, cfg.penalty.w_max, cfg.decay)
        for pair, t in first.items()
    }
    blocked = {pair: weights[pair] for pair in sorted(blocked_pairs)}
    if cfg.front_only:
        routing = dict(blocked)
    elif cfg.route_window is not None:
        routing = {
            pair: w
            for pair, w in weights.items()
            if first[pair] < cfg.route_window or pair in blocked
        }
    else:
        routing = weights
    return Classification(executable, remaining, blocked, routing)


def weighted_distance(
    pairs: Dict[Pair, float], layout: Layout, g: CouplingGraph
) -> float:
    return sum(
        w * g.dist[layout.physical(i), layout.physical(j)]
        for (i, j), w in pairs.items()
    )


def repair_routing(
    bits, prior: Layout, codec: VariableCodec, g: CouplingGraph
) -> np.ndarray:
    """Make a routing assignment valid by reverting offending moves.

    A logical qubit whose row is not one-hot or whose move is not a coupler
    stays put; qubits that then collide are sent back too, until no slot is
    claimed twice.
    """
    occupancy = codec.occupancy(bits)
    current = list(prior.log_to_phys)
    fixed = []
    for t in range(codec.time_steps):
        proposed = list(current)
        for i, row in enumerate(occupancy[t]):
            slots = np.flatnonzero(row)
            if len(slots) == 1 and g.dist[current[i], slots[0]] <= 1:
                proposed[i] = int(slots[0])
        while True:
            claims: Dict[int, List[int]] = {}
            for i, p in enumerate(proposed):
                claims.setdefault(p, []).append(i)
            clashes = [c for c in claims.values() if len(c) > 1]
            if not clashes:
                break
            for claimants in clashes:
                for i in claimants:
                    proposed[i] = current[i]
        fixed.append(Layout(proposed, prior.num_physical).occupancy())
        current = proposed
    return np.concatenate([f.ravel() for f in fixed])


def routing_violations(
    bits, prior: Layout, codec: VariableCodec, g: CouplingGraph
) -> int:
    occupancy = codec.occupancy(bits).astype(int)
    total = 0
    previous = list(prior.log_to_phys)
    for t in range(codec.time_steps):
        total += count_violations(occupancy[t])
        step = []
        for i, row in enumerate(occupancy[t]):
            slots = np.flatnonzero(row)
            if len(slots) == 1:
                prev = previous[i]
                if prev is not None and g.dist[prev, slots[0]] > 1:
                    total += 1
                step.append(int(slots[0]))
            else:
                step.append(None)
        previous = step
    return total


def greedy_step(
    blocked: Dict[Pair, float], layout: Layout, g: CouplingGraph
) -> SwapStep:
    """SWAPs along a shortest path until the heaviest blocked pair touches."""
    (i, j), _ = min(blocked.items(), key=lambda kv: (-kv[1], kv[0]))
    path = g.shortest_path(layout.physical(i), layout.physical(j))
    return SwapStep(tuple(zip(path[:-2], path[1:-1])))


def solve_routing_step(
    blocked: Dict[Pair, float],
    layout: Layout,
    g: CouplingGraph,
    cfg: TranspileConfig,
    solver: QuboSolver,
    routing_pairs: Optional[Dict[Pair, float]] = None,
    iteration: int = 0,
    timer: Optional[PhaseTimer] = None,
) -> Tuple[SwapStep, Layout]:
    """One QUBO routing step, with a greedy step if it makes no progress."""
    if not blocked:
        raise RoutingError('routing step needs at least one blocked pair')
    pairs = routing_pairs or blocked
    timer = timer or PhaseTimer()

    penalty = cfg.penalty
    step = None
    for attempt in range(cfg.lambda_retries + 1):
        q = build_routing_qubo(pairs, layout, g, penalty)
        anneal = replace(
            cfg.routing_anneal,
            seed=derive_seed(cfg.seed, iteration + 1, attempt),
        )
        initial = layout.stationary_bits(q.codec)
        result = run_solver(solver, q, anneal, initial, timer)
        with timer.phase('decode'):
            bits = result.best_assignment
            violations = routing_violations(bits, layout, q.codec, g)
            last = attempt == cfg.lambda_retries
            if violations <= cfg.repair_limit or last:
                if violations:
                    logger.debug('routing repair: %d violation(s)', violations)
                    bits = repair_routing(bits, layout, q.codec, g)
                step, target = decode_movements(layout, bits, q.codec, g)
                break
        logger.warning(
            'routing step %d: %d violations, doubling lambda %.1f',
            iteration,
            violations,
            q.lam,
        )
        penalty = replace(penalty, lam=2 * q.lam)

    if weighted_distance(blocked, target, g) >= weighted_distance(
        blocked, layout, g
    ):
        logger.debug(
            'routing step %d made no progress, using a greedy step', iteration
        )
        step = greedy_step(blocked, layout, g)
        target = step.apply(layout)
    return step, target


def route_full(
    c: Circuit,
    initial: Layout,
    g: CouplingGraph,
    cfg: TranspileConfig,
    solver: QuboSolver,
    timer: PhaseTimer,
) -> Tuple[List[Gate], Layout, int]:
    live = initial.copy()
    out: List[Gate] = []
    residual: List[Gate] = list(c.gates)
    iteration = 0
    while True:
        found = classify_executable(residual, live, g, cfg)
        out.extend(h.remap(live.log_to_phys) for h in found.executable)
        residual = found.residual
        if not residual:
            break
        iteration += 1
        if iteration > cfg.max_iterations:
            raise RoutingError(
                f'routing did not finish within {cfg.max_iterations} '
                f'iterations ({len(residual)} gates left)'
            )
        step, live = solve_routing_step(
            found.blocked,
            live,
            g,
            cfg,
            solver,
            found.routing_pairs,
            iteration,
            timer,
        )
        out.extend(Gate.swap(p, q, inserted=True) for p, q in step.swaps)
        if iteration % 10 == 0:
            logger.info(
                'iteration %d: %d gates left, %d SWAPs so far',
                iteration,
                len(residual),
                sum(1 for h in out if h.inserted),
            )
    return out, live, iteration


def transpile_full(
    c: Circuit, g: CouplingGraph, cfg: TranspileConfig, solver: QuboSolver
) -> TranspileResult:
    """QUBO mapping followed by iterative QUBO routing."""
    timer = PhaseTimer()
    with timer.phase('total'):
        with timer.phase('map'):
            layout = solve_initial_mapping(c, g, cfg, solver, timer)
        with timer.phase('route'):
            gates, final, iterations = route_full(
                c, layout, g, cfg, solver, timer
            )
    result = make_result(
        c, gates, layout, final, g, 'full', timer, iterations
    )
    _log_result(result)
    return result


def transpile_hybrid(
    c: Circuit, g: CouplingGraph, cfg: TranspileConfig, solver: QuboSolver
) -> TranspileResult:
    """QUBO mapping followed by heuristic routing."""
    timer = PhaseTimer()
    with timer.phase('total'):
        with timer.phase('map'):
            layout = solve_initial_mapping(c, g, cfg, solver, timer)
        result = heuristic_route(c, layout, g, cfg, 'hybrid', timer)
    result = replace(result, phase_timings=timer.as_ms())
    _log_result(result)
    return result


def transpile_heuristic_only(
    c: Circuit, g: CouplingGraph, cfg: TranspileConfig, solver=None
) -> TranspileResult:
    """Identity layout plus heuristic routing, the baseline arm."""
    if c.num_qubits > g.num_physical:
        raise RoutingError(
            f'circuit needs {c.num_qubits} qubits, device has '
            f'{g.num_physical}'
        )
    timer = PhaseTimer()
    with timer.phase('total'):
        layout = Layout.trivial(c.num_qubits, g.num_physical)
        result = heuristic_route(c, layout, g, cfg, 'heuristic-only', timer)
    result = replace(result, phase_timings=timer.as_ms())
    _log_result(result)
    return result


TRANSPILERS = {
    'full': transpile_full,
    'hybrid': transpile_hybrid,
    'heuristic-only': transpile_heuristic_only,
}


def transpile(
    c: Circuit,
    g: CouplingGraph,
    strategy: str,
    cfg: TranspileConfig,
    solver: QuboSolver,
) -> TranspileResult:
    if strategy not in TRANSPILERS:
        raise ValueError(
            f'unknown strategy {strategy!r}, '
            f'choose from {", ".join(STRATEGIES)}'
        )
    return TRANSPILERS[strategy](c, g, cfg, solver)


def _log_result(result: TranspileResult):
    logger.info(
        '%s [%s]: %d SWAPs, equivalent CNOT %d (original %d)',
        result.circuit.name,
        result.strategy,
        result.swap_count,
        result.equivalent_cnot,
        result.original_cnot,
    )
