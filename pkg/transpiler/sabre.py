"""Front-layer SWAP routing with a lookahead window.

Candidate SWAPs are the couplers touching a front-layer gate. Each is scored
by the mean front distance plus lookahead_decay times the mean distance of
the next `lookahead` two-qubit gates; the lowest score wins.
"""
import heapq
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from transpiler.circuit import Circuit, Gate
from transpiler.exceptions import RoutingError
from transpiler.layout import Layout
from transpiler.options import TranspileConfig, derive_seed
from transpiler.result import TranspileResult, make_result
from transpiler.topology import CouplingGraph
from utils import PhaseTimer

logger = logging.getLogger(__name__)

RELEASE_VALVE_FACTOR = 10


class _Dag:
    def __init__(self, gates: Sequence[Gate], num_qubits: int):
        self.gates = gates
        self.succs: List[List[int]] = [[] for _ in gates]
        self.indeg = [0] * len(gates)
        last = [-1] * num_qubits
        for k, gate in enumerate(gates):
            for q in gate.qubits:
                if last[q] >= 0:
                    self.succs[last[q]].append(k)
                    self.indeg[k] += 1
                last[q] = k


class _Router:
    def __init__(
        self,
        c: Circuit,
        initial: Layout,
        g: CouplingGraph,
        cfg: TranspileConfig,
        edge_rank: np.ndarray,
    ):
        self.c = c
        self.g = g
        self.cfg = cfg
        self.layout = initial.copy()
        self.edge_rank = edge_rank
        self.dag = _Dag(c.gates, c.num_qubits)
        self.indeg = list(self.dag.indeg)
        self.front = [k for k, d in enumerate(self.indeg) if d == 0]
        heapq.heapify(self.front)
        # unexecuted two-qubit gates in program order
        self.pending = [k for k, h in enumerate(c.gates) if h.is_two_qubit]
        self.done = [False] * len(c.gates)
        self.out: List[Gate] = []
        self.last_swap: Optional[Tuple[int, int]] = None
        self.swaps = 0

    def _distance(self, k: int) -> int:
        a, b = self.c.gates[k].qubits
        return self.g.dist[self.layout.physical(a), self.layout.physical(b)]

    def _executable(self, k: int) -> bool:
        gate = self.c.gates[k]
        return not gate.is_two_qubit or self._distance(k) == 1

    def _execute(self, k: int):
        gate = self.c.gates[k]
        self.out.append(gate.remap(self.layout.log_to_phys))
        self.done[k] = True
        for s in self.dag.succs[k]:
            self.indeg[s] -= 1
            if self.indeg[s] == 0:
                heapq.heappush(self.front, s)

    def execute_ready(self) -> bool:
        executed = False
        progress = True
        while progress:
            progress = False
            blocked = []
            while self.front:
                k = heapq.heappop(self.front)
                if self._executable(k):
                    self._execute(k)
                    executed = progress = True
                else:
                    blocked.append(k)
            for k in blocked:
                heapq.heappush(self.front, k)
        if executed:
            self.pending = [k for k in self.pending if not self.done[k]]
        return executed

    def _swap(self, p: int, q: int):
        self.layout.apply_swap(p, q)
        self.out.append(Gate.swap(p, q, inserted=True))
        self.swaps += 1
        self.last_swap = (p, q) if p < q else (q, p)

    def _score(self, front: List[int], extended: List[int]) -> float:
        score = np.mean([self._distance(k) for k in front])
        if extended:
            score += self.cfg.lookahead_decay * np.mean(
                [self._distance(k) for k in extended]
            )
        return float(score)

    def candidates(self, front: List[int]) -> List[Tuple[int, int]]:
        edges = set()
        for k in front:
            for logical in self.c.gates[k].qubits:
                p = self.layout.physical(logical)
                for q in self.g.neighbors(p):
                    edges.add((p, q) if p < q else (q, p))
        rank = self.edge_rank
        return sorted(edges, key=lambda e: rank[self.g.edge_index(*e)])

    def step(self):
        front = sorted(self.front)
        in_front = set(front)
        extended = [k for k in self.pending if k not in in_front][
            : self.cfg.lookahead
        ]
        front_before = sum(self._distance(k) for k in front)

        best, best_score = None, None
        for p, q in self.candidates(front):
            self.layout.apply_swap(p, q)
            score = self._score(front, extended)
            front_after = sum(self._distance(k) for k in front)
            self.layout.apply_swap(p, q)
            # 不立即撤销上一次 SWAP, 除非它严格改善前沿
            if (p, q) == self.last_swap and front_after >= front_before:
                continue
            if best_score is None or score < best_score:
                best, best_score = (p, q), score
        if best is None:
            self.release(front[0])
        else:
            self._swap(*best)

    def release(self, k: int):
        """Walk gate k's operands together along a shortest path."""
        a, b = self.c.gates[k].qubits
        path = self.g.shortest_path(
            self.layout.physical(a), self.layout.physical(b)
        )
        for p, q in zip(path[:-2], path[1:-1]):
            self._swap(p, q)

    def run(self) -> int:
        valve = RELEASE_VALVE_FACTOR * self.g.num_physical
        since_progress = 0
        self.execute_ready()
        while self.front:
            self.step()
            since_progress += 1
            if self.execute_ready():
                since_progress = 0
            elif since_progress >= valve:
                logger.warning(
                    'no gate executed after %d SWAPs, routing gate %d '
                    'directly',
                    since_progress,
                    min(self.front),
                )
                self.release(min(self.front))
                self.execute_ready()
                since_progress = 0
        if not all(self.done):
            raise RoutingError('heuristic routing stopped with gates left')
        return self.swaps


def heuristic_route(
    c: Circuit,
    initial: Layout,
    g: CouplingGraph,
    cfg: Optional[TranspileConfig] = None,
    strategy: str = 'heuristic',
    timer: Optional[PhaseTimer] = None,
) -> TranspileResult:
    """Route c from initial, best of cfg.route_trials trials.

    Trial 0 breaks score ties by edge index; later trials use a seeded
    random edge order.
    """
    cfg = cfg or TranspileConfig()
    if c.num_qubits > g.num_physical:
        raise RoutingError(
            f'circuit needs {c.num_qubits} qubits, device has '
            f'{g.num_physical}'
        )
    timer = timer or PhaseTimer()
    best = None
    with timer.phase('route'):
        for trial in range(cfg.route_trials):
            if trial == 0:
                rank = np.arange(len(g.edges))
            else:
                rng = np.random.default_rng(derive_seed(cfg.seed, trial))
                rank = rng.permutation(len(g.edges))
            router = _Router(c, initial, g, cfg, rank)
            swaps = router.run()
            logger.debug('trial %d: %d SWAPs', trial, swaps)
            if best is None or swaps < best.swaps:
                best = router
    return make_result(
        c, best.out, initial, best.layout, g, strategy, timer
    )
