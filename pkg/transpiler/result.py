from dataclasses import dataclass, field
from typing import Dict, Sequence

from transpiler.circuit import Circuit, Gate, GateKind
from transpiler.layout import Layout
from transpiler.topology import CouplingGraph
from utils import PhaseTimer


@dataclass(frozen=True)
class TranspileResult:
    circuit: Circuit
    initial_layout: Layout
    final_layout: Layout
    original_cnot: int
    swap_count: int
    equivalent_cnot: int
    strategy: str = ''
    # milliseconds per phase: map, route, decode, remote, total
    phase_timings: Dict[str, float] = field(default_factory=dict)
    iterations: int = 0

    def summary(self) -> Dict:
        return {
            'circuit': self.circuit.name,
            'strategy': self.strategy,
            'original_cnot': self.original_cnot,
            'swap_count': self.swap_count,
            'equivalent_cnot': self.equivalent_cnot,
            'initial_layout': list(self.initial_layout.log_to_phys),
            'final_layout': list(self.final_layout.log_to_phys),
            'iterations': self.iterations,
            'phase_timings_ms': dict(self.phase_timings),
        }


def make_result(
    original: Circuit,
    gates: Sequence[Gate],
    initial: Layout,
    final: Layout,
    g: CouplingGraph,
    strategy: str,
    timer: PhaseTimer = None,
    iterations: int = 0,
) -> TranspileResult:
    swaps = sum(1 for h in gates if h.kind is GateKind.SWAP and h.inserted)
    original_cnot = original.equivalent_cnot_count()
    routed = Circuit(
        g.num_physical, tuple(gates), original.name, original.num_clbits
    )
    return TranspileResult(
        circuit=routed,
        initial_layout=initial.copy(),
        final_layout=final.copy(),
        original_cnot=original_cnot,
        swap_count=swaps,
        equivalent_cnot=original_cnot + 3 * swaps,
        strategy=strategy,
        phase_timings=timer.as_ms() if timer else {},
        iterations=iterations,
    )
