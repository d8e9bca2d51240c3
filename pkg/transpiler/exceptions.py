class TranspilerError(Exception):
    """Base class for every error raised by the transpiler."""


class QasmParseError(TranspilerError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        if line:
            message = f'line {line}, column {column}: {message}'
        super().__init__(message)


class CircuitError(TranspilerError):
    pass


class TopologyError(TranspilerError):
    pass


class QuboBudgetError(TranspilerError):
    def __init__(self, num_vars: int, budget: int):
        self.num_vars = num_vars
        self.budget = budget
        super().__init__(
            f'QUBO needs {num_vars} variables, budget is {budget} '
            '(disable the budget to use the local solver only)'
        )


class MappingError(TranspilerError):
    pass


class RoutingError(TranspilerError):
    pass


class SolverError(TranspilerError):
    pass


class RemoteSolverError(SolverError):
    pass
