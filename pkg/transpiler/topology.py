import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from transpiler.exceptions import TopologyError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


@dataclass(frozen=True)
class AllowedTransitions:
    """Self-loops plus both orientations of every coupler."""

    pairs: FrozenSet[Edge]

    def __contains__(self, pair: Edge) -> bool:
        return pair in self.pairs

    def mask(self, num_physical: int) -> np.ndarray:
        """Boolean (P, P) matrix, True where p -> q is a legal move."""
        allowed = np.zeros((num_physical, num_physical), dtype=bool)
        if self.pairs:
            ps, qs = zip(*self.pairs)
            allowed[list(ps), list(qs)] = True
        return allowed


@dataclass(frozen=True, eq=False)
class CouplingGraph:
    num_physical: int
    edges: Tuple[Edge, ...]
    dist: np.ndarray = field(repr=False)
    predecessors: np.ndarray = field(repr=False)
    name: str = 'device'

    def __post_init__(self):
        self.dist.setflags(write=False)
        self.predecessors.setflags(write=False)
        adjacency: Dict[int, List[int]] = {
            p: [] for p in range(self.num_physical)
        }
        for p, q in self.edges:
            adjacency[p].append(q)
            adjacency[q].append(p)
        object.__setattr__(
            self,
            '_adjacency',
            {p: tuple(sorted(v)) for p, v in adjacency.items()},
        )
        object.__setattr__(
            self, '_edge_index', {e: k for k, e in enumerate(self.edges)}
        )

    def neighbors(self, p: int) -> Tuple[int, ...]:
        return self._adjacency[p]

    def is_edge(self, p: int, q: int) -> bool:
        return self.dist[p, q] == 1

    def edge_index(self, p: int, q: int) -> int:
        return self._edge_index[(p, q) if p < q else (q, p)]

    @property
    def max_distance(self) -> int:
        return int(self.dist.max())

    def shortest_path(self, p: int, q: int) -> List[int]:
        """Physical qubits from p to q inclusive."""
        path = [q]
        while path[-1] != p:
            path.append(int(self.predecessors[p, path[-1]]))
        return path[::-1]

    def allowed_transitions(self) -> AllowedTransitions:
        pairs = {(p, p) for p in range(self.num_physical)}
        pairs.update(self.edges)
        pairs.update((q, p) for p, q in self.edges)
        return AllowedTransitions(frozenset(pairs))


def from_edge_list(
    n: int, edges: Sequence[Edge], name: str = 'device'
) -> CouplingGraph:
    if n < 1:
        raise TopologyError('a device needs at least one physical qubit')
    normalized = set()
    for p, q in edges:
        if not (0 <= p < n and 0 <= q < n):
            raise TopologyError(f'edge ({p}, {q}) has an endpoint >= {n}')
        if p == q:
            raise TopologyError(f'self-loop on physical qubit {p}')
        edge = (p, q) if p < q else (q, p)
        if edge in normalized:
            raise TopologyError(f'duplicate edge {edge}')
        normalized.add(edge)
    ordered = tuple(sorted(normalized))

    rows = [p for p, _ in ordered]
    cols = [q for _, q in ordered]
    graph = coo_matrix(
        (np.ones(len(ordered)), (rows, cols)), shape=(n, n)
    ).tocsr()
    count, _ = connected_components(graph, directed=False)
    if count != 1:
        raise TopologyError(
            f'coupling graph is disconnected ({count} components)'
        )
    # unweighted shortest paths are computed breadth-first
    dist, predecessors = shortest_path(
        graph, directed=False, unweighted=True, return_predecessors=True
    )
    logger.debug('built %s: %d qubits, %d edges', name, n, len(ordered))
    return CouplingGraph(
        n, ordered, dist.astype(np.int32), predecessors.astype(np.int32), name
    )


def grid(rows: int, cols: int) -> CouplingGraph:
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise TopologyError(f'invalid grid {rows}x{cols}')
    edges = []
    for r in range(rows):
        for c in range(cols):
            node = r * cols + c
            if c + 1 < cols:
                edges.append((node, node + 1))
            if r + 1 < rows:
                edges.append((node, node + cols))
    return from_edge_list(rows * cols, edges, name=f'grid:{rows}x{cols}')


def line(n: int) -> CouplingGraph:
    return from_edge_list(
        n, [(p, p + 1) for p in range(n - 1)], name=f'line:{n}'
    )


def load_topology_file(path: str) -> CouplingGraph:
    """First line 'n <count>', then one 'p q' edge per line."""
    with open(path, encoding='utf-8') as f:
        lines = [
            line.split('#', 1)[0].strip() for line in f.read().splitlines()
        ]
    lines = [line for line in lines if line]
    if not lines:
        raise TopologyError(f'{path}: empty topology file')
    header = lines[0].split()
    if len(header) != 2 or header[0] != 'n' or not header[1].isdigit():
        raise TopologyError(f'{path}: first line must be "n <count>"')
    edges = []
    for number, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise TopologyError(f'{path}: bad edge line {number}: {line!r}')
        edges.append((int(parts[0]), int(parts[1])))
    return from_edge_list(int(header[1]), edges, name=f'file:{path}')


def save_topology_file(g: CouplingGraph, path: str):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(f'n {g.num_physical}\n')
        for p, q in g.edges:
            f.write(f'{p} {q}\n')


def parse_topology(spec: str) -> CouplingGraph:
    """'grid:RxC' or 'file:PATH'"""
    kind, _, value = spec.partition(':')
    if kind == 'grid':
        try:
            rows, cols = (int(v) for v in value.lower().split('x'))
        except ValueError:
            raise TopologyError(
                f'--topology: bad grid {value!r}, expected grid:RxC'
            )
        return grid(rows, cols)
    if kind == 'file' and value:
        try:
            return load_topology_file(value)
        except OSError as e:
            raise TopologyError(f'--topology: cannot read {value}: {e}')
    raise TopologyError(
        f'--topology: unknown topology {spec!r}, use grid:RxC or file:PATH'
    )
