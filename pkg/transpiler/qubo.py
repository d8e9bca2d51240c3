"""QUBO formulations of initial mapping and SWAP routing.

Both problems are stored in the form

    E(x) = offset + sum_a linear[a] x_a + sum_{a<b} Q[a, b] x_a x_b

with Q kept as an upper-triangular ``scipy.sparse`` CSR matrix.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from transpiler.circuit import (
    DEFAULT_DECAY,
    Circuit,
    first_interaction_weights,
)
from transpiler.exceptions import MappingError, QuboBudgetError
from transpiler.topology import CouplingGraph

if TYPE_CHECKING:
    from transpiler.layout import Layout

logger = logging.getLogger(__name__)

ANNEALER_CAPACITY = 8192

WeightedPair = Tuple[int, int, float]


class CodecKind(Enum):
    MAPPING = 'mapping'
    ROUTING = 'routing'


@dataclass(frozen=True)
class VariableCodec:
    kind: CodecKind
    num_logical: int
    num_physical: int
    time_steps: int = 1

    @classmethod
    def mapping(cls, num_logical: int, num_physical: int):
        return cls(CodecKind.MAPPING, num_logical, num_physical, 1)

    @classmethod
    def routing(cls, num_logical: int, num_physical: int, time_steps: int):
        return cls(CodecKind.ROUTING, num_logical, num_physical, time_steps)

    @property
    def num_vars(self) -> int:
        return self.time_steps * self.num_logical * self.num_physical

    def encode(self, i: int, p: int, t: int = 1) -> int:
        if not (0 <= i < self.num_logical and 0 <= p < self.num_physical):
            raise IndexError(f'({i}, {p}) outside the codec range')
        if self.kind is CodecKind.MAPPING:
            return i * self.num_physical + p
        if not 1 <= t <= self.time_steps:
            raise IndexError(f'time step {t} outside [1, {self.time_steps}]')
        return ((t - 1) * self.num_logical + i) * self.num_physical + p

    def decode(self, index: int) -> Tuple[int, ...]:
        """(i, p) for mapping, (i, p, t) for routing."""
        if not 0 <= index < self.num_vars:
            raise IndexError(f'variable {index} outside [0, {self.num_vars})')
        block, rest = divmod(index, self.num_logical * self.num_physical)
        i, p = divmod(rest, self.num_physical)
        if self.kind is CodecKind.MAPPING:
            return i, p
        return i, p, block + 1

    def groups(self) -> np.ndarray:
        """Variable indices shaped (time block, logical, physical).

        Each row [block, i, :] is one one-hot group.
        """
        return np.arange(self.num_vars).reshape(
            self.time_steps, self.num_logical, self.num_physical
        )

    def occupancy(self, bits) -> np.ndarray:
        return np.asarray(bits, dtype=bool)[self.groups()]


@dataclass(frozen=True)
class PenaltyConfig:
    # None picks the per-instance default, see default_lambda_*
    lam: Optional[float] = None
    w_swap: float = 3.0
    w_max: float = 10.0
    time_steps: int = 2
    var_budget: Optional[int] = ANNEALER_CAPACITY

    def __post_init__(self):
        if self.lam is not None and self.lam <= 0:
            raise ValueError(f'lambda must be positive, got {self.lam}')
        if self.w_swap < 0:
            raise ValueError(f'w_swap must be non-negative, got {self.w_swap}')
        if self.w_max <= 0:
            raise ValueError(f'w_max must be positive, got {self.w_max}')
        if self.time_steps < 1:
            raise ValueError(f'T must be >= 1, got {self.time_steps}')


@dataclass(frozen=True, eq=False)
class QuboProblem:
    num_vars: int
    linear: np.ndarray = field(repr=False)
    # strictly upper-triangular
    quadratic: csr_matrix = field(repr=False)
    offset: float = 0.0
    codec: Optional[VariableCodec] = None
    lam: float = 0.0

    def symmetric(self) -> csr_matrix:
        return (self.quadratic + self.quadratic.T).tocsr()

    def energy(self, x) -> float:
        return energy(self, x)

    def to_dict(self) -> Dict:
        coo = self.quadratic.tocoo()
        return {
            'num_vars': self.num_vars,
            'offset': float(self.offset),
            'linear': [float(v) for v in self.linear],
            'quadratic': [
                [int(a), int(b), float(v)]
                for a, b, v in zip(coo.row, coo.col, coo.data)
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'QuboProblem':
        n = int(data['num_vars'])
        linear = np.asarray(data['linear'], dtype=float)
        if linear.shape != (n,):
            raise ValueError(f'linear has {linear.size} entries, expected {n}')
        builder = _Builder(n)
        builder.linear += linear
        builder.offset = float(data.get('offset', 0.0))
        terms = data.get('quadratic', [])
        if terms:
            a, b, v = zip(*terms)
            builder.add_quadratic(
                np.asarray(a, dtype=np.int64),
                np.asarray(b, dtype=np.int64),
                np.asarray(v, dtype=float),
            )
        return builder.build()


class _Builder:
    """Accumulates QUBO terms as COO chunks."""

    def __init__(self, num_vars: int):
        self.num_vars = num_vars
        self.linear = np.zeros(num_vars)
        self.offset = 0.0
        self._rows: List[np.ndarray] = []
        self._cols: List[np.ndarray] = []
        self._vals: List[np.ndarray] = []

    def add_linear(self, index, values):
        np.add.at(self.linear, np.asarray(index).ravel(), values)

    def add_quadratic(self, a, b, values):
        a, b, values = np.broadcast_arrays(
            np.asarray(a, dtype=np.int64),
            np.asarray(b, dtype=np.int64),
            np.asarray(values, dtype=float),
        )
        a, b, values = a.ravel(), b.ravel(), values.ravel()
        same = a == b
        if same.any():
            # x_a * x_a == x_a
            np.add.at(self.linear, a[same], values[same])
        keep = ~same
        self._rows.append(np.minimum(a[keep], b[keep]))
        self._cols.append(np.maximum(a[keep], b[keep]))
        self._vals.append(values[keep])

    def add_one_hot(self, groups: np.ndarray, lam: float):
        """lam * (sum_p x_p - 1)^2 for every row of groups."""
        size = groups.shape[-1]
        rows = groups.reshape(-1, size)
        self.add_linear(rows, -lam)
        pu, qu = np.triu_indices(size, 1)
        self.add_quadratic(rows[:, pu], rows[:, qu], 2 * lam)
        self.offset += lam * rows.shape[0]

    def add_collisions(self, block: np.ndarray, lam: float):
        """lam * x_ip * x_jp for i < j, block shaped (logical, physical)."""
        iu, ju = np.triu_indices(block.shape[0], 1)
        self.add_quadratic(block[iu, :], block[ju, :], lam)

    def add_interactions(
        self,
        block: np.ndarray,
        pairs: Iterable[WeightedPair],
        dist: np.ndarray,
    ):
        for i, j, w in pairs:
            a, b = np.meshgrid(block[i], block[j], indexing='ij')
            self.add_quadratic(a, b, w * dist)

    def build(self, codec=None, lam: float = 0.0) -> QuboProblem:
        n = self.num_vars
        if self._rows:
            rows = np.concatenate(self._rows)
            cols = np.concatenate(self._cols)
            vals = np.concatenate(self._vals)
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
            vals = np.zeros(0)
        quadratic = coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        quadratic.sum_duplicates()
        quadratic.eliminate_zeros()
        return QuboProblem(n, self.linear, quadratic, self.offset, codec, lam)


def _check_budget(num_vars: int, cfg: PenaltyConfig):
    if cfg.var_budget is not None and num_vars > cfg.var_budget:
        raise QuboBudgetError(num_vars, cfg.var_budget)


def _as_weighted_pairs(unresolved) -> List[WeightedPair]:
    if isinstance(unresolved, dict):
        return [(i, j, w) for (i, j), w in sorted(unresolved.items())]
    return [(int(i), int(j), float(w)) for i, j, w in unresolved]


def default_lambda_mapping(
    pairs: List[WeightedPair], g: CouplingGraph
) -> float:
    return 2 * sum(w for _, _, w in pairs) * g.max_distance + 1


def default_lambda_routing(
    pairs: List[WeightedPair],
    g: CouplingGraph,
    num_logical: int,
    cfg: PenaltyConfig,
) -> float:
    T = cfg.time_steps
    worst = T * sum(w for _, _, w in pairs) * g.max_distance
    worst += cfg.w_swap * 2 * T * num_logical
    return 2 * worst + 1


def build_mapping_qubo(
    c: Circuit,
    g: CouplingGraph,
    cfg: PenaltyConfig,
    decay: float = DEFAULT_DECAY,
) -> QuboProblem:
    L, P = c.num_qubits, g.num_physical
    if L > P:
        raise MappingError(
            f'circuit needs {L} qubits but the device has {P}'
        )
    codec = VariableCodec.mapping(L, P)
    _check_budget(codec.num_vars, cfg)

    weights = first_interaction_weights(c, cfg.w_max, decay)
    pairs = [(i, j, w) for (i, j), w in sorted(weights.items())]
    lam = cfg.lam if cfg.lam is not None else default_lambda_mapping(pairs, g)

    block = codec.groups()[0]
    builder = _Builder(codec.num_vars)
    builder.add_interactions(block, pairs, g.dist.astype(float))
    builder.add_one_hot(block, lam)
    builder.add_collisions(block, lam)
    q = builder.build(codec, lam)
    logger.debug(
        'mapping QUBO: %d vars, %d couplings, lambda=%.1f',
        q.num_vars,
        q.quadratic.nnz,
        lam,
    )
    return q


def build_routing_qubo(
    unresolved,
    prior: 'Layout',
    g: CouplingGraph,
    cfg: PenaltyConfig,
) -> QuboProblem:
    """Routing QUBO over time steps 1..T, the prior layout is folded in.

    unresolved is a list of (i, j, w) or a {(i, j): w} dict.
    """
    pairs = _as_weighted_pairs(unresolved)
    L, P, T = prior.num_logical, g.num_physical, cfg.time_steps
    for i, j, _ in pairs:
        if i not in prior or j not in prior:
            raise MappingError(f'prior layout does not place pair ({i}, {j})')
    codec = VariableCodec.routing(L, P, T)
    _check_budget(codec.num_vars, cfg)

    lam = cfg.lam
    if lam is None:
        lam = default_lambda_routing(pairs, g, L, cfg)
    dist = g.dist.astype(float)
    forbidden = ~g.allowed_transitions().mask(P)
    blocks = codec.groups()
    prior_bits = np.zeros((L, P))
    for i in range(L):
        prior_bits[i, prior.physical(i)] = 1.0

    builder = _Builder(codec.num_vars)
    for t in range(T):
        builder.add_interactions(blocks[t], pairs, dist)
        builder.add_one_hot(blocks[t], lam)
        builder.add_collisions(blocks[t], lam)

    # movement cost, x_{i,p,0} is the known prior layout
    w = cfg.w_swap
    builder.add_linear(blocks[0], (w * (1 - 2 * prior_bits)).ravel())
    builder.offset += w * prior_bits.sum()
    for t in range(1, T):
        builder.add_linear(blocks[t - 1], w)
        builder.add_linear(blocks[t], w)
        builder.add_quadratic(blocks[t - 1], blocks[t], -2 * w)

    # transitions outside self-loops and couplers
    for i in range(L):
        builder.add_linear(
            blocks[0][i], lam * forbidden[prior.physical(i)].astype(float)
        )
    ps, qs = np.nonzero(forbidden)
    for t in range(1, T):
        builder.add_quadratic(blocks[t - 1][:, ps], blocks[t][:, qs], lam)

    q = builder.build(codec, lam)
    logger.debug(
        'routing QUBO: %d pairs, %d vars, %d couplings, lambda=%.1f',
        len(pairs),
        q.num_vars,
        q.quadratic.nnz,
        lam,
    )
    return q


def energy(q: QuboProblem, x) -> float:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != q.num_vars:
        raise ValueError(
            f'assignment has {x.shape[0]} bits, problem has {q.num_vars}'
        )
    return float(q.offset + q.linear @ x + x @ (q.quadratic @ x))
