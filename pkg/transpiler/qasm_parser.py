"""OpenQASM 2.0 reader for the gate subset the transpiler routes.

Supported statements: the OPENQASM header, ``include "qelib1.inc"``,
qreg/creg declarations, ``cx``, ``swap``, the single-qubit gates listed in
``SINGLE_QUBIT_GATES``, ``measure`` and ``barrier``. Register-wide operands
are broadcast into per-qubit gates and all qregs (cregs) are flattened into
one index space in declaration order.
"""
import logging
import math
import re
from typing import Dict, List, Tuple

import pyparsing as pp

from transpiler.circuit import (
    BARRIER,
    MEASURE,
    SINGLE_QUBIT_GATES,
    Circuit,
    Gate,
)
from transpiler.exceptions import QasmParseError

logger = logging.getLogger(__name__)

ALLOWED_INCLUDES = {'qelib1.inc'}
TWO_QUBIT_ALIASES = {'cx': 'cx', 'CX': 'cx', 'swap': 'swap'}
# whitespace and comments pyparsing skips before a statement
_LEADING = re.compile(r'(?:\s+|//[^\n]*|/\*.*?\*/)*', re.DOTALL)


def _unary(tokens):
    sign, value = tokens[0]
    return -value if sign == '-' else value


def _binary(tokens):
    items = tokens[0]
    value = items[0]
    for op, rhs in zip(items[1::2], items[2::2]):
        if op == '+':
            value += rhs
        elif op == '-':
            value -= rhs
        elif op == '*':
            value *= rhs
        else:
            value /= rhs
    return value


def _build_grammar() -> pp.ParserElement:
    LBRACK, RBRACK, LPAR, RPAR, SEMI, ARROW = map(
        pp.Suppress, ['[', ']', '(', ')', ';', '->']
    )
    ident = pp.Word(pp.alphas + '_', pp.alphanums + '_')
    integer = pp.Word(pp.nums).set_parse_action(lambda t: int(t[0]))

    number = pp.pyparsing_common.number.copy().add_parse_action(
        lambda t: float(t[0])
    )
    pi = pp.Keyword('pi').set_parse_action(lambda: math.pi)
    expr = pp.infix_notation(
        number | pi,
        [
            (pp.one_of('+ -'), 1, pp.OpAssoc.RIGHT, _unary),
            (pp.one_of('* /'), 2, pp.OpAssoc.LEFT, _binary),
            (pp.one_of('+ -'), 2, pp.OpAssoc.LEFT, _binary),
        ],
    )

    reference = pp.Group(
        ident('reg') + pp.Opt(LBRACK + integer('index') + RBRACK)
    )
    references = pp.Group(pp.DelimitedList(reference))

    header = pp.Group(
        pp.Keyword('OPENQASM')('kind')
        + pp.Regex(r'\d+(\.\d+)?')('version')
        + SEMI
    )
    include = pp.Group(
        pp.Keyword('include')('kind') + pp.QuotedString('"')('path') + SEMI
    )
    register = pp.Group(
        (pp.Keyword('qreg') | pp.Keyword('creg'))('kind')
        + ident('reg')
        + LBRACK
        + integer('size')
        + RBRACK
        + SEMI
    )
    measure = pp.Group(
        pp.Keyword('measure')('kind')
        + references('qubits')
        + ARROW
        + references('clbits')
        + SEMI
    )
    barrier = pp.Group(
        pp.Keyword('barrier')('kind') + references('qubits') + SEMI
    )
    gate = pp.Group(
        ident('name')
        + pp.Opt(LPAR + pp.Group(pp.DelimitedList(expr))('params') + RPAR)
        + references('qubits')
        + SEMI
    )
    statement = pp.Group(
        pp.Located(header | include | register | measure | barrier | gate)
    )
    program = pp.ZeroOrMore(statement) + pp.StringEnd()
    program.ignore(pp.cpp_style_comment)
    return program


_GRAMMAR = _build_grammar()


class _Registers:
    def __init__(self, label: str):
        self.label = label
        self.offsets: Dict[str, Tuple[int, int]] = {}
        self.size = 0

    def declare(self, name: str, size: int, where: Tuple[int, int]):
        if name in self.offsets:
            raise QasmParseError(f'{self.label} {name} declared twice', *where)
        self.offsets[name] = (self.size, size)
        self.size += size

    def resolve(self, ref, where: Tuple[int, int]) -> List[int]:
        if ref['reg'] not in self.offsets:
            raise QasmParseError(
                f'unknown {self.label} {ref["reg"]}', *where
            )
        offset, size = self.offsets[ref['reg']]
        if 'index' not in ref:
            return list(range(offset, offset + size))
        index = ref['index']
        if index >= size:
            raise QasmParseError(
                f'{self.label} index {ref["reg"]}[{index}] out of declared '
                f'range {size}',
                *where,
            )
        return [offset + index]


def _broadcast(
    operands: List[List[int]], where: Tuple[int, int]
) -> List[Tuple[int, ...]]:
    width = max(len(o) for o in operands)
    for o in operands:
        if len(o) not in (1, width):
            raise QasmParseError('register size mismatch', *where)
    return [
        tuple(o[0] if len(o) == 1 else o[k] for o in operands)
        for k in range(width)
    ]


def parse_qasm(source: str, name: str = 'circuit') -> Circuit:
    try:
        statements = _GRAMMAR.parse_string(source, parse_all=True)
    except pp.ParseBaseException as e:
        raise QasmParseError(f'syntax error: {e.msg}', e.lineno, e.col) from e

    qregs = _Registers('qreg')
    cregs = _Registers('creg')
    gates: List[Gate] = []

    for located in statements:
        stmt = located[1][0]
        loc = _LEADING.match(source, located[0]).end()
        where = (pp.lineno(loc, source), pp.col(loc, source))
        kind = stmt.get('kind')

        if kind == 'OPENQASM':
            if not stmt['version'].startswith('2'):
                raise QasmParseError(
                    f'unsupported OpenQASM version {stmt["version"]}', *where
                )
        elif kind == 'include':
            if stmt['path'] not in ALLOWED_INCLUDES:
                raise QasmParseError(
                    f'unsupported include "{stmt["path"]}"', *where
                )
        elif kind in ('qreg', 'creg'):
            registers = qregs if kind == 'qreg' else cregs
            registers.declare(stmt['reg'], stmt['size'], where)
        elif kind == 'measure':
            qubits = [
                q for r in stmt['qubits'] for q in qregs.resolve(r, where)
            ]
            clbits = [
                c for r in stmt['clbits'] for c in cregs.resolve(r, where)
            ]
            if len(qubits) != len(clbits):
                raise QasmParseError(
                    'measure operands differ in size', *where
                )
            gates.extend(
                Gate.single(MEASURE, q, cbit=c) for q, c in zip(qubits, clbits)
            )
        elif kind == 'barrier':
            for ref in stmt['qubits']:
                gates.extend(
                    Gate.single(BARRIER, q) for q in qregs.resolve(ref, where)
                )
        else:
            gates.extend(_gate_statement(stmt, qregs, where))

    logger.debug(
        'parsed %s: %d qubits, %d gates', name, qregs.size, len(gates)
    )
    return Circuit(qregs.size, tuple(gates), name, cregs.size)


def _gate_statement(stmt, qregs: _Registers, where) -> List[Gate]:
    opcode = stmt['name']
    params = list(stmt['params']) if 'params' in stmt else []
    operands = [qregs.resolve(r, where) for r in stmt['qubits']]

    if opcode in TWO_QUBIT_ALIASES:
        if len(operands) != 2 or params:
            raise QasmParseError(f'{opcode} takes two qubits', *where)
        result = []
        for a, b in _broadcast(operands, where):
            if a == b:
                raise QasmParseError(
                    f'{opcode} operands must differ', *where
                )
            if TWO_QUBIT_ALIASES[opcode] == 'cx':
                result.append(Gate.cnot(a, b))
            else:
                result.append(Gate.swap(a, b))
        return result

    if opcode not in SINGLE_QUBIT_GATES:
        raise QasmParseError(f'unsupported gate "{opcode}"', *where)
    if len(operands) != 1:
        raise QasmParseError(f'{opcode} takes one qubit', *where)
    if len(params) != SINGLE_QUBIT_GATES[opcode]:
        raise QasmParseError(
            f'{opcode} takes {SINGLE_QUBIT_GATES[opcode]} parameter(s), '
            f'got {len(params)}',
            *where,
        )
    return [Gate.single(opcode, q, params) for q in operands[0]]


def parse_qasm_file(path: str) -> Circuit:
    with open(path, encoding='utf-8') as f:
        source = f.read()
    name = path.replace('\\', '/').rsplit('/', 1)[-1].rsplit('.', 1)[0]
    return parse_qasm(source, name=name)
