"""Initial placement: mapping QUBO, solver call, greedy one-hot repair."""
import logging
from dataclasses import replace
from typing import Dict, List, Optional

import numpy as np

from services.annealer import AnnealConfig, QuboSolver, SolveResult, solve_sa
from transpiler.circuit import Circuit, Pair, first_interaction_weights
from transpiler.exceptions import MappingError, RemoteSolverError
from transpiler.layout import Layout
from transpiler.options import TranspileConfig, derive_seed
from transpiler.qubo import QuboProblem, build_mapping_qubo
from transpiler.topology import CouplingGraph
from utils import PhaseTimer

logger = logging.getLogger(__name__)


def run_solver(
    solver: QuboSolver,
    q: QuboProblem,
    anneal: AnnealConfig,
    initial: Optional[np.ndarray] = None,
    timer: Optional[PhaseTimer] = None,
) -> SolveResult:
    """Solve q, falling back to the local annealer if the remote one fails."""
    try:
        result = solver.solve(q, anneal, initial)
    except RemoteSolverError as e:
        logger.warning('%s, falling back to simulated annealing', e)
        result = solve_sa(q, anneal, initial)
    if timer is not None and result.source == 'remote':
        timer.add('remote', result.wall_time)
    return result


def count_violations(occupancy: np.ndarray) -> int:
    """One-hot row errors plus surplus occupants per physical qubit."""
    rows = np.abs(occupancy.sum(axis=1) - 1).sum()
    cols = np.clip(occupancy.sum(axis=0) - 1, 0, None).sum()
    return int(rows + cols)


def incident_weights(
    num_logical: int, weights: Dict[Pair, float]
) -> List[float]:
    totals = [0.0] * num_logical
    for (i, j), w in weights.items():
        totals[i] += w
        totals[j] += w
    return totals


def repair_mapping(
    occupancy: np.ndarray,
    weights: Dict[Pair, float],
    g: CouplingGraph,
) -> Layout:
    """Greedy repair of a decoded (L, P) occupancy matrix.

    Heavier logical qubits (by incident weight) claim their decoded slots
    first; the rest take the free slot nearest their heaviest placed partner.
    """
    L, P = occupancy.shape
    totals = incident_weights(L, weights)
    order = sorted(range(L), key=lambda i: (-totals[i], i))
    placed: Dict[int, int] = {}
    taken = set()

    for i in order:
        for p in np.flatnonzero(occupancy[i]).tolist():
            if p not in taken:
                placed[i] = p
                taken.add(p)
                break

    partners: Dict[int, List[tuple]] = {i: [] for i in range(L)}
    for (i, j), w in weights.items():
        partners[i].append((w, j))
        partners[j].append((w, i))

    for i in order:
        if i in placed:
            continue
        free = [p for p in range(P) if p not in taken]
        anchors = sorted(
            (-w, j) for w, j in partners[i] if j in placed
        )
        if anchors:
            anchor = placed[anchors[0][1]]
            p = min(free, key=lambda p: (g.dist[anchor, p], p))
        else:
            p = free[0]
        placed[i] = p
        taken.add(p)
        logger.debug('repair: logical %d placed on %d', i, p)

    return Layout([placed[i] for i in range(L)], P)


def solve_initial_mapping(
    c: Circuit,
    g: CouplingGraph,
    cfg: TranspileConfig,
    solver: QuboSolver,
    timer: Optional[PhaseTimer] = None,
) -> Layout:
    if c.num_qubits > g.num_physical:
        raise MappingError(
            f'circuit needs {c.num_qubits} qubits but the device has '
            f'{g.num_physical}'
        )
    if c.num_qubits == 0:
        return Layout([], g.num_physical)

    weights = first_interaction_weights(c, cfg.penalty.w_max, cfg.decay)
    penalty = cfg.penalty
    for attempt in range(cfg.lambda_retries + 1):
        q = build_mapping_qubo(c, g, penalty, cfg.decay)
        anneal = replace(
            cfg.mapping_anneal, seed=derive_seed(cfg.seed, 0, attempt)
        )
        result = run_solver(solver, q, anneal, timer=timer)
        occupancy = q.codec.occupancy(result.best_assignment)[0]
        violations = count_violations(occupancy)
        if violations <= cfg.repair_limit:
            layout = repair_mapping(occupancy, weights, g)
            logger.info(
                'initial mapping for %s: energy %.3f, %d violation(s) '
                'repaired',
                c.name,
                result.best_energy,
                violations,
            )
            return layout
        logger.warning(
            'mapping has %d one-hot violations (limit %d), doubling '
            'lambda %.1f',
            violations,
            cfg.repair_limit,
            q.lam,
        )
        penalty = replace(penalty, lam=2 * q.lam)

    raise MappingError(
        f'mapping still violates one-hot constraints after '
        f'{cfg.lambda_retries} lambda escalations'
    )
