import math
import os
from typing import Callable, Dict, List, Sequence, Tuple

import networkx as nx
import numpy as np

from transpiler.circuit import Circuit, Gate
from transpiler.exceptions import CircuitError

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'data')

# 基准集的电路规模
STANDARD_SUITE = [
    ('bv', 30),
    ('grover', 4),
    ('qaoa_grid', 25),
    ('ghz', 50),
    ('qaoa_random', 30),
    ('qv', 10),
    ('asp', 50),
]
# standard 是 table2 的别名
SUITES = {'table2': STANDARD_SUITE, 'standard': STANDARD_SUITE}
BUNDLED_QASM = {('bv', 30): os.path.join(DATA_DIR, 'bv_n30.qasm')}


def _zz(gates: List[Gate], a: int, b: int, angle: float):
    """exp(-i angle/2 Z⊗Z) as CNOT-RZ-CNOT."""
    gates.append(Gate.cnot(a, b))
    gates.append(Gate.single('rz', b, [angle]))
    gates.append(Gate.cnot(a, b))


def _multi_controlled_z(gates: List[Gate], qubits: Sequence[int]):
    """Phase -1 on |1...1> as a Gray-code phase polynomial.

    Uses 2^n - 2 CNOTs and 2^n - 1 u1 phases for n qubits.
    """
    n = len(qubits)
    scale = math.pi / 2 ** (n - 1)

    def phase(size: int) -> float:
        return scale if size % 2 else -scale

    for m in range(n - 1, 0, -1):
        target, controls = qubits[m], qubits[:m]
        previous = 0
        gates.append(Gate.single('u1', target, [phase(1)]))
        for i in range(1, 2**m):
            code = i ^ (i >> 1)
            flipped = (code ^ previous).bit_length() - 1
            gates.append(Gate.cnot(controls[flipped], target))
            gates.append(
                Gate.single('u1', target, [phase(1 + bin(code).count('1'))])
            )
            previous = code
        # last Gray code has only the top bit set
        gates.append(Gate.cnot(controls[m - 1], target))
    gates.append(Gate.single('u1', qubits[0], [phase(1)]))


def _random_su4(gates: List[Gate], a: int, b: int, rng: np.random.Generator):
    """Random two-qubit block on a fixed 3-CNOT template."""

    def local(q):
        gates.append(
            Gate.single('u3', q, rng.uniform(0, 2 * math.pi, 3).tolist())
        )

    local(a)
    local(b)
    gates.append(Gate.cnot(b, a))
    gates.append(Gate.single('rz', a, [rng.uniform(0, 2 * math.pi)]))
    gates.append(Gate.single('ry', b, [rng.uniform(0, 2 * math.pi)]))
    gates.append(Gate.cnot(a, b))
    gates.append(Gate.single('ry', b, [rng.uniform(0, 2 * math.pi)]))
    gates.append(Gate.cnot(b, a))
    local(a)
    local(b)


def ghz(n: int, seed: int = 0) -> Circuit:
    gates = [Gate.single('h', 0)]
    gates.extend(Gate.cnot(k, k + 1) for k in range(n - 1))
    return Circuit(n, gates, f'ghz_{n}')


def bv(n: int, seed: int = 0) -> Circuit:
    """Bernstein-Vazirani: n-1 data qubits and a shared ancilla target."""
    rng = np.random.default_rng(seed)
    secret = rng.integers(0, 2, n - 1)
    if not secret.any():
        secret[0] = 1
    ancilla = n - 1
    gates = [Gate.single('x', ancilla)]
    gates.extend(Gate.single('h', q) for q in range(n))
    gates.extend(
        Gate.cnot(q, ancilla) for q in range(n - 1) if secret[q]
    )
    gates.extend(Gate.single('h', q) for q in range(n - 1))
    return Circuit(n, gates, f'bv_{n}')


def grover(n: int, seed: int = 0) -> Circuit:
    iterations = int(math.floor(math.pi / 4 * math.sqrt(2**n)))
    qubits = list(range(n))
    gates = [Gate.single('h', q) for q in qubits]
    for _ in range(iterations):
        # oracle marks |1...1>
        _multi_controlled_z(gates, qubits)
        # diffuser
        gates.extend(Gate.single('h', q) for q in qubits)
        gates.extend(Gate.single('x', q) for q in qubits)
        _multi_controlled_z(gates, qubits)
        gates.extend(Gate.single('x', q) for q in qubits)
        gates.extend(Gate.single('h', q) for q in qubits)
    return Circuit(n, gates, f'grover_{n}')


def _qaoa(
    n: int, edges: List[Tuple[int, int]], seed: int, name: str
) -> Circuit:
    rng = np.random.default_rng(seed)
    gamma, beta = rng.uniform(0, math.pi, 2)
    gates = [Gate.single('h', q) for q in range(n)]
    for a, b in edges:
        _zz(gates, a, b, 2 * gamma)
    gates.extend(Gate.single('rx', q, [2 * beta]) for q in range(n))
    return Circuit(n, gates, name)


def grid_dims(n: int) -> Tuple[int, int]:
    rows = max(d for d in range(1, math.isqrt(n) + 1) if n % d == 0)
    return rows, n // rows


def qaoa_grid(n: int, seed: int = 0) -> Circuit:
    rows, cols = grid_dims(n)
    if rows < 2:
        raise CircuitError(
            f'qaoa_grid needs n = rows x cols with rows, cols >= 2, got {n}'
        )
    graph = nx.grid_2d_graph(rows, cols)
    edges = sorted(
        tuple(sorted((r1 * cols + c1, r2 * cols + c2)))
        for (r1, c1), (r2, c2) in graph.edges()
    )
    return _qaoa(n, edges, seed, f'qaoa_grid_{n}')


def qaoa_random(n: int, seed: int = 0) -> Circuit:
    if n < 4 or n % 2:
        raise CircuitError(
            f'qaoa_random needs an even n >= 4 for a 3-regular graph, got {n}'
        )
    graph = nx.random_regular_graph(3, n, seed=seed)
    edges = sorted(tuple(sorted(e)) for e in graph.edges())
    return _qaoa(n, edges, seed, f'qaoa_random_{n}')


def qv(n: int, seed: int = 0) -> Circuit:
    """Quantum volume with depth equal to width."""
    rng = np.random.default_rng(seed)
    gates: List[Gate] = []
    for _ in range(n):
        perm = rng.permutation(n)
        for k in range(n // 2):
            _random_su4(gates, int(perm[2 * k]), int(perm[2 * k + 1]), rng)
    return Circuit(n, gates, f'qv_{n}')


def asp(n: int, seed: int = 0, steps: int = 3) -> Circuit:
    """Adiabatic state preparation, Trotterized over a 1D chain."""
    rng = np.random.default_rng(seed)
    coupling = rng.uniform(0.5, 1.5)
    dt = 1.0
    gates = [Gate.single('h', q) for q in range(n)]
    for step in range(steps):
        s = (step + 1) / (steps + 1)
        gates.extend(
            Gate.single('rx', q, [2 * (1 - s) * dt]) for q in range(n)
        )
        for q in range(n - 1):
            _zz(gates, q, q + 1, 2 * s * coupling * dt)
    return Circuit(n, gates, f'asp_{n}')


GENERATORS: Dict[str, Callable[..., Circuit]] = {
    'ghz': ghz,
    'bv': bv,
    'grover': grover,
    'qaoa_grid': qaoa_grid,
    'qaoa_random': qaoa_random,
    'qv': qv,
    'asp': asp,
}


def generate_benchmark(family: str, n: int, seed: int = 0) -> Circuit:
    """生成基准电路, 对相同的 (family, n, seed) 结果确定"""
    if family not in GENERATORS:
        raise CircuitError(
            f'unknown benchmark family {family!r}, '
            f'choose from {", ".join(GENERATORS)}'
        )
    if n < 2:
        raise CircuitError(f'{family} needs at least 2 qubits, got {n}')
    return GENERATORS[family](n, seed)


def parse_bench_spec(spec: str) -> Tuple[str, int, int]:
    """'family:n[:seed]' -> (family, n, seed)"""
    parts = spec.split(':')
    if len(parts) not in (2, 3):
        raise CircuitError(f'bad benchmark spec {spec!r}, use family:n:seed')
    try:
        n = int(parts[1])
        seed = int(parts[2]) if len(parts) == 3 else 0
    except ValueError:
        raise CircuitError(f'bad benchmark spec {spec!r}, use family:n:seed')
    return parts[0], n, seed


def load_suite_circuit(family: str, n: int, seed: int) -> Circuit:
    """Suite circuit: the bundled QASM file where one exists."""
    path = BUNDLED_QASM.get((family, n))
    if path and os.path.exists(path):
        from transpiler.qasm_parser import parse_qasm_file

        return parse_qasm_file(path)
    return generate_benchmark(family, n, seed)
