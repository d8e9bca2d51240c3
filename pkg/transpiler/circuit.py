import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from transpiler.exceptions import CircuitError

# opcode -> number of angle parameters
SINGLE_QUBIT_GATES = {
    'id': 0,
    'h': 0,
    'x': 0,
    'y': 0,
    'z': 0,
    's': 0,
    'sdg': 0,
    't': 0,
    'tdg': 0,
    'rx': 1,
    'ry': 1,
    'rz': 1,
    'u1': 1,
    'u2': 2,
    'u3': 3,
}
MEASURE = 'measure'
BARRIER = 'barrier'

DEFAULT_DECAY = 0.1

Pair = Tuple[int, int]


class GateKind(Enum):
    CNOT = 'cx'
    SWAP = 'swap'
    SINGLE = 'single'


@dataclass(frozen=True, slots=True)
class Gate:
    kind: GateKind
    qubits: Tuple[int, ...]
    opcode: str
    params: Tuple[float, ...] = ()
    # classical bit written by a measure
    cbit: Optional[int] = None
    # True for SWAPs added by routing (as opposed to SWAPs of the input)
    inserted: bool = False

    def __post_init__(self):
        expected = 1 if self.kind is GateKind.SINGLE else 2
        if len(self.qubits) != expected:
            raise CircuitError(
                f'{self.opcode} expects {expected} qubit(s), '
                f'got {self.qubits}'
            )
        if expected == 2 and self.qubits[0] == self.qubits[1]:
            raise CircuitError(
                f'{self.opcode} operands must be distinct, got {self.qubits}'
            )
        if any(q < 0 for q in self.qubits):
            raise CircuitError(f'negative qubit index in {self.qubits}')

    @classmethod
    def cnot(cls, control: int, target: int) -> 'Gate':
        return cls(GateKind.CNOT, (control, target), 'cx')

    @classmethod
    def swap(cls, a: int, b: int, inserted: bool = False) -> 'Gate':
        return cls(GateKind.SWAP, (a, b), 'swap', inserted=inserted)

    @classmethod
    def single(
        cls,
        opcode: str,
        target: int,
        params: Sequence[float] = (),
        cbit: Optional[int] = None,
    ) -> 'Gate':
        return cls(
            GateKind.SINGLE,
            (target,),
            opcode,
            tuple(float(p) for p in params),
            cbit,
        )

    @property
    def is_two_qubit(self) -> bool:
        return self.kind is not GateKind.SINGLE

    def pair(self) -> Pair:
        """Unordered operand pair of a two-qubit gate, as (min, max)."""
        a, b = self.qubits
        return (a, b) if a < b else (b, a)

    def remap(
        self, mapping: Union[Sequence[int], Mapping[int, int]]
    ) -> 'Gate':
        return Gate(
            self.kind,
            tuple(mapping[q] for q in self.qubits),
            self.opcode,
            self.params,
            self.cbit,
            self.inserted,
        )

    def same_operation(self, other: 'Gate') -> bool:
        """Equality ignoring operands and the routing marker."""
        return (
            self.kind is other.kind
            and self.opcode == other.opcode
            and self.params == other.params
            and self.cbit == other.cbit
        )


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: Tuple[Gate, ...] = ()
    name: str = 'circuit'
    num_clbits: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'gates', tuple(self.gates))
        if self.num_qubits < 0:
            raise CircuitError('num_qubits must be non-negative')
        for index, gate in enumerate(self.gates):
            if any(q >= self.num_qubits for q in gate.qubits):
                raise CircuitError(
                    f'gate {index} ({gate.opcode}) uses qubit '
                    f'{max(gate.qubits)} but circuit has '
                    f'{self.num_qubits} qubits'
                )
            if gate.cbit is not None and gate.cbit >= self.num_clbits:
                raise CircuitError(
                    f'gate {index} writes classical bit {gate.cbit} but '
                    f'circuit has {self.num_clbits}'
                )

    def __len__(self) -> int:
        return len(self.gates)

    def cnot_count(self) -> int:
        return sum(1 for g in self.gates if g.kind is GateKind.CNOT)

    def swap_count(self) -> int:
        return sum(1 for g in self.gates if g.kind is GateKind.SWAP)

    def equivalent_cnot_count(self) -> int:
        """CNOTs plus 3 per SWAP."""
        return self.cnot_count() + 3 * self.swap_count()

    def two_qubit_gates(self) -> List[Gate]:
        return [g for g in self.gates if g.is_two_qubit]

    def with_gates(self, gates: Sequence[Gate], **changes) -> 'Circuit':
        fields = {
            'num_qubits': self.num_qubits,
            'name': self.name,
            'num_clbits': self.num_clbits,
        }
        fields.update(changes)
        return Circuit(gates=tuple(gates), **fields)


@dataclass(frozen=True)
class LayerAssignment:
    layer_of_gate: Tuple[int, ...]

    @property
    def num_layers(self) -> int:
        return max(self.layer_of_gate) + 1 if self.layer_of_gate else 0

    def layers(self) -> List[List[int]]:
        """Gate indices grouped by layer."""
        grouped = [[] for _ in range(self.num_layers)]
        for index, layer in enumerate(self.layer_of_gate):
            grouped[layer].append(index)
        return grouped


def compute_layers(c: Circuit) -> LayerAssignment:
    """ASAP layering: one past the latest earlier gate sharing an operand."""
    last = [-1] * c.num_qubits
    layers = []
    for gate in c.gates:
        layer = 1 + max(last[q] for q in gate.qubits)
        for q in gate.qubits:
            last[q] = layer
        layers.append(layer)
    return LayerAssignment(tuple(layers))


def interaction_weight(t: int, w_max: float, decay: float = DEFAULT_DECAY):
    return w_max * math.exp(-decay * t) + 1.0


def first_interaction_layers(
    c: Circuit, layers: Optional[LayerAssignment] = None
) -> Dict[Pair, int]:
    layers = layers or compute_layers(c)
    first: Dict[Pair, int] = {}
    for gate, layer in zip(c.gates, layers.layer_of_gate):
        if gate.is_two_qubit:
            first.setdefault(gate.pair(), layer)
    return first


def first_interaction_weights(
    c: Circuit,
    w_max: float,
    decay: float = DEFAULT_DECAY,
    layers: Optional[LayerAssignment] = None,
) -> Dict[Pair, float]:
    """Weight of each interacting logical pair, keyed by (min, max).

    A pair whose first two-qubit gate sits at layer t weighs
    w_max * exp(-decay * t) + 1. Pairs that never interact are absent.
    """
    if w_max <= 0:
        raise ValueError(f'w_max must be positive, got {w_max}')
    return {
        pair: interaction_weight(t, w_max, decay)
        for pair, t in first_interaction_layers(c, layers).items()
    }


def _format_param(value: float) -> str:
    return repr(float(value))


def emit_qasm(c: Circuit) -> str:
    lines = ['OPENQASM 2.0;', 'include "qelib1.inc";']
    lines.append(f'qreg q[{c.num_qubits}];')
    if c.num_clbits:
        lines.append(f'creg c[{c.num_clbits}];')
    for gate in c.gates:
        operands = ','.join(f'q[{q}]' for q in gate.qubits)
        if gate.opcode == MEASURE:
            lines.append(f'measure {operands} -> c[{gate.cbit}];')
        elif gate.params:
            params = ','.join(_format_param(p) for p in gate.params)
            lines.append(f'{gate.opcode}({params}) {operands};')
        else:
            lines.append(f'{gate.opcode} {operands};')
    return '\n'.join(lines) + '\n'
