import logging
from typing import List, Optional, Tuple

from transpiler.circuit import Circuit, GateKind
from transpiler.result import TranspileResult
from transpiler.topology import CouplingGraph

logger = logging.getLogger(__name__)


def verify_equivalence(
    original: Circuit,
    result: TranspileResult,
    graph: Optional[CouplingGraph] = None,
) -> Tuple[bool, str]:
    """Replay result.circuit and pull every gate back to logical qubits.

    Inserted SWAPs update the physical -> logical permutation, every other
    gate must match the next pending original gate on each of its qubits.
    With a graph, two-qubit gates must also sit on couplers.
    """
    perm: List[Optional[int]] = [None] * result.circuit.num_qubits
    for p, i in result.initial_layout.phys_to_log.items():
        perm[p] = i

    # per logical qubit, the original gate indices touching it, in order
    pending: List[List[int]] = [[] for _ in range(original.num_qubits)]
    for k, gate in enumerate(original.gates):
        for q in gate.qubits:
            pending[q].append(k)
    cursor = [0] * original.num_qubits
    matched = 0

    for m, gate in enumerate(result.circuit.gates):
        if graph is not None and gate.is_two_qubit:
            if not graph.is_edge(*gate.qubits):
                return False, (
                    f'output gate {m} ({gate.opcode} on {gate.qubits}) is '
                    f'not on a coupler'
                )
        if gate.kind is GateKind.SWAP and gate.inserted:
            a, b = gate.qubits
            perm[a], perm[b] = perm[b], perm[a]
            continue

        logical = tuple(perm[p] for p in gate.qubits)
        if any(i is None for i in logical):
            return False, (
                f'output gate {m} ({gate.opcode} on {gate.qubits}) acts on '
                f'an unmapped physical qubit'
            )
        first = logical[0]
        if cursor[first] >= len(pending[first]):
            return False, (
                f'output gate {m} ({gate.opcode} on {gate.qubits}) has no '
                f'pending original gate on logical {first}'
            )
        k = pending[first][cursor[first]]
        expected = original.gates[k]
        in_order = all(
            cursor[i] < len(pending[i]) and pending[i][cursor[i]] == k
            for i in logical
        )
        if (
            not in_order
            or expected.qubits != logical
            or not expected.same_operation(gate)
        ):
            return False, (
                f'output gate {m} ({gate.opcode} on physical {gate.qubits}, '
                f'logical {logical}) does not match original gate {k} '
                f'({expected.opcode} on {expected.qubits})'
            )
        for i in logical:
            cursor[i] += 1
        matched += 1

    if matched != len(original.gates):
        missing = min(
            pending[i][cursor[i]]
            for i in range(original.num_qubits)
            if cursor[i] < len(pending[i])
        )
        return False, (
            f'original gate {missing} '
            f'({original.gates[missing].opcode} on '
            f'{original.gates[missing].qubits}) never appears in the output'
        )

    final = result.final_layout
    for i in range(final.num_logical):
        if perm[final.physical(i)] != i:
            return False, (
                f'final layout places logical {i} on {final.physical(i)} '
                f'but the SWAPs leave it elsewhere'
            )
    if result.equivalent_cnot != result.original_cnot + 3 * result.swap_count:
        return False, 'equivalent CNOT count is not original + 3 x SWAPs'
    return True, 'ok'
