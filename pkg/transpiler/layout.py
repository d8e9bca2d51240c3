import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from transpiler.circuit import Pair
from transpiler.exceptions import MappingError, RoutingError
from transpiler.qubo import VariableCodec
from transpiler.topology import CouplingGraph

logger = logging.getLogger(__name__)


class Layout:
    """Injective placement of logical qubits 0..L-1 on physical qubits."""

    def __init__(self, log_to_phys: Sequence[int], num_physical: int):
        self._log_to_phys = [int(p) for p in log_to_phys]
        self._phys_to_log: List[Optional[int]] = [None] * num_physical
        for i, p in enumerate(self._log_to_phys):
            if not 0 <= p < num_physical:
                raise MappingError(
                    f'logical {i} placed on {p}, device has {num_physical}'
                )
            if self._phys_to_log[p] is not None:
                raise MappingError(
                    f'logical {self._phys_to_log[p]} and {i} share '
                    f'physical {p}'
                )
            self._phys_to_log[p] = i

    @classmethod
    def trivial(cls, num_logical: int, num_physical: int) -> 'Layout':
        return cls(range(num_logical), num_physical)

    @classmethod
    def from_occupancy(cls, occupancy: np.ndarray) -> 'Layout':
        """Strict decode of an (L, P) 0/1 matrix."""
        occupancy = np.asarray(occupancy)
        if (occupancy.sum(axis=1) != 1).any():
            raise MappingError('a logical qubit is not placed exactly once')
        return cls(occupancy.argmax(axis=1).tolist(), occupancy.shape[1])

    @property
    def num_logical(self) -> int:
        return len(self._log_to_phys)

    @property
    def num_physical(self) -> int:
        return len(self._phys_to_log)

    @property
    def log_to_phys(self) -> Tuple[int, ...]:
        return tuple(self._log_to_phys)

    @property
    def phys_to_log(self) -> Dict[int, int]:
        return {
            p: i for p, i in enumerate(self._phys_to_log) if i is not None
        }

    def __contains__(self, logical: int) -> bool:
        return 0 <= logical < len(self._log_to_phys)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Layout)
            and self._log_to_phys == other._log_to_phys
            and self.num_physical == other.num_physical
        )

    def __repr__(self) -> str:
        return f'Layout({self._log_to_phys}, num_physical={self.num_physical})'

    def physical(self, logical: int) -> int:
        return self._log_to_phys[logical]

    def logical(self, physical: int) -> Optional[int]:
        return self._phys_to_log[physical]

    def copy(self) -> 'Layout':
        return Layout(self._log_to_phys, self.num_physical)

    def apply_swap(self, p: int, q: int):
        a, b = self._phys_to_log[p], self._phys_to_log[q]
        self._phys_to_log[p], self._phys_to_log[q] = b, a
        if a is not None:
            self._log_to_phys[a] = q
        if b is not None:
            self._log_to_phys[b] = p

    def occupancy(self) -> np.ndarray:
        bits = np.zeros((self.num_logical, self.num_physical), dtype=np.int8)
        bits[np.arange(self.num_logical), self._log_to_phys] = 1
        return bits

    def stationary_bits(self, codec: VariableCodec) -> np.ndarray:
        """Assignment keeping every qubit in place at every codec block."""
        return np.tile(self.occupancy().ravel(), codec.time_steps)


@dataclass(frozen=True)
class SwapStep:
    swaps: Tuple[Pair, ...] = ()

    def __len__(self) -> int:
        return len(self.swaps)

    def __add__(self, other: 'SwapStep') -> 'SwapStep':
        return SwapStep(self.swaps + other.swaps)

    def apply(self, layout: Layout) -> Layout:
        result = layout.copy()
        for p, q in self.swaps:
            result.apply_swap(p, q)
        return result

    def validate(self, g: CouplingGraph):
        for p, q in self.swaps:
            if not g.is_edge(p, q):
                raise RoutingError(f'SWAP ({p}, {q}) is not a coupler')


def movement_swaps(
    prior: Layout, target: Layout, g: CouplingGraph
) -> SwapStep:
    """SWAPs realizing simultaneous single-hop moves from prior to target.

    Moves form paths (ending on a vacated or empty slot) and cycles. A
    component p1 -> p2 -> ... -> pk becomes the SWAPs (p_{k-1}, p_k), ...,
    (p1, p2), i.e. k - 1 SWAPs.
    """
    succ: Dict[int, int] = {}
    for i in range(prior.num_logical):
        src, dst = prior.physical(i), target.physical(i)
        if src == dst:
            continue
        if not g.is_edge(src, dst):
            raise RoutingError(
                f'logical {i} jumps {src} -> {dst}, not a coupler'
            )
        succ[src] = dst

    targets = set(succ.values())
    starts = sorted(p for p in succ if p not in targets)
    seen = set()
    components: List[List[int]] = []
    for start in starts:
        chain = [start]
        while chain[-1] in succ:
            chain.append(succ[chain[-1]])
        seen.update(chain)
        components.append(chain)
    for start in sorted(succ):
        if start in seen:
            continue
        # cycle, the closing hop is implied
        chain = [start]
        while succ[chain[-1]] != start:
            chain.append(succ[chain[-1]])
        seen.update(chain)
        components.append(chain)

    swaps: List[Pair] = []
    for chain in components:
        for k in range(len(chain) - 1, 0, -1):
            swaps.append((chain[k - 1], chain[k]))
    step = SwapStep(tuple(swaps))
    if step.apply(prior) != target:
        raise RoutingError('decoded SWAPs do not reproduce the target layout')
    return step


def decode_movements(
    prior: Layout,
    bits,
    codec: VariableCodec,
    g: CouplingGraph,
) -> Tuple[SwapStep, Layout]:
    """SWAPs for the movements between consecutive time steps of bits."""
    occupancy = codec.occupancy(bits)
    current = prior
    step = SwapStep()
    for t in range(codec.time_steps):
        try:
            target = Layout.from_occupancy(occupancy[t])
        except MappingError as e:
            raise RoutingError(f'time step {t + 1}: {e}') from e
        step = step + movement_swaps(current, target, g)
        current = target
    return step, current
