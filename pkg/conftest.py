import itertools
from typing import List, Tuple

import numpy as np
import pytest

from services.annealer import AnnealConfig, LocalSolver
from transpiler.options import TranspileConfig
from transpiler.qubo import QuboProblem
from transpiler.topology import from_edge_list


def brute_force(q: QuboProblem) -> Tuple[List[int], float, np.ndarray]:
    """Every assignment of q (at most 20 bits) with its energy.

    Returns the lowest-index optimum, its energy, and the full (2^n,)
    energy table where row k encodes bit b as (k >> b) & 1.
    """
    if q.num_vars > 20:
        raise ValueError(f'{q.num_vars} variables is too many to enumerate')
    codes = np.arange(2**q.num_vars)
    bits = ((codes[:, None] >> np.arange(q.num_vars)) & 1).astype(float)
    pairwise = np.asarray((q.quadratic @ bits.T).T)
    energies = q.offset + bits @ q.linear + np.einsum(
        'ij,ij->i', bits, pairwise
    )
    best = int(np.argmin(energies))
    return bits[best].astype(int).tolist(), float(energies[best]), energies


def enumerate_bits(n: int):
    for code in range(2**n):
        yield np.array([(code >> b) & 1 for b in range(n)], dtype=np.int8)


def random_connected_graph(n: int, rng: np.random.Generator, extra: float):
    """Random spanning tree plus each remaining pair with probability extra."""
    order = rng.permutation(n).tolist()
    edges = set()
    for k in range(1, n):
        parent = order[int(rng.integers(k))]
        child = order[k]
        edges.add((min(parent, child), max(parent, child)))
    for p, q in itertools.combinations(range(n), 2):
        if (p, q) not in edges and rng.random() < extra:
            edges.add((p, q))
    return from_edge_list(n, sorted(edges), name=f'random:{n}')


@pytest.fixture
def fast_config() -> TranspileConfig:
    return TranspileConfig(
        mapping_anneal=AnnealConfig(
            num_sweeps=300, num_restarts=4, group_moves=True
        ),
        routing_anneal=AnnealConfig(
            num_sweeps=60, num_restarts=1, group_moves=True
        ),
    )


@pytest.fixture
def solver() -> LocalSolver:
    return LocalSolver()


@pytest.fixture
def triangle():
    return from_edge_list(3, [(0, 1), (1, 2), (0, 2)], name='triangle')
