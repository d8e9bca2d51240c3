import logging
import time
from typing import Optional

import numpy as np
import requests

from services.annealer import AnnealConfig, SolveResult
from transpiler.exceptions import RemoteSolverError
from transpiler.qubo import QuboProblem, energy

logger = logging.getLogger(__name__)


class RemoteSolver:
    """Client for an HTTP QUBO solver.

    Request body is QuboProblem.to_dict() plus the anneal knobs the service
    understands; the response must be {"assignment": [...], "energy": x}.
    """

    name = 'remote'

    def __init__(self, endpoint: str, timeout: float = 60.0):
        self.endpoint = endpoint.rstrip('/')
        self.timeout = timeout

    @property
    def solve_url(self) -> str:
        if self.endpoint.endswith('/solve'):
            return self.endpoint
        return f'{self.endpoint}/solve'

    def solve(
        self,
        q: QuboProblem,
        cfg: Optional[AnnealConfig] = None,
        initial: Optional[np.ndarray] = None,
    ) -> SolveResult:
        payload = q.to_dict()
        if cfg is not None:
            payload.update(
                {
                    'sweeps': cfg.num_sweeps,
                    'restarts': cfg.num_restarts,
                    'seed': cfg.seed,
                }
            )

        start = time.perf_counter()
        try:
            response = requests.post(
                self.solve_url, json=payload, timeout=self.timeout
            )
            response.raise_for_status()
            body = response.json()
        except requests.RequestException as e:
            raise RemoteSolverError(
                f'remote solver {self.solve_url} failed: {e}'
            ) from e
        except ValueError as e:
            raise RemoteSolverError(
                f'remote solver returned invalid JSON: {e}'
            ) from e
        wall = time.perf_counter() - start

        if not isinstance(body, dict) or 'assignment' not in body:
            raise RemoteSolverError('remote response has no "assignment"')
        bits = body['assignment']
        if not isinstance(bits, list) or not all(_is_bit(b) for b in bits):
            raise RemoteSolverError('assignment must be a list of 0/1 bits')
        if len(bits) != q.num_vars:
            raise RemoteSolverError(
                f'assignment has {len(bits)} bits, problem has {q.num_vars}'
            )
        restarts = body.get('restarts', 1)
        if not _is_count(restarts):
            raise RemoteSolverError(
                f'restarts must be a positive integer, got {restarts!r}'
            )

        assignment = np.asarray(bits, dtype=np.int8)
        local = energy(q, assignment)
        reported = body.get('energy')
        if not isinstance(reported, (int, float)) or not np.isclose(
            reported, local, rtol=1e-9, atol=1e-9
        ):
            logger.warning(
                '远程能量 %s 与本地计算 %.6f 不一致, 使用本地值', reported, local
            )

        return SolveResult(
            best_assignment=assignment,
            best_energy=local,
            wall_time=wall,
            restarts_run=restarts,
            source=self.name,
        )


def _is_bit(value) -> bool:
    # bool is an int subclass, 1.0 == 1
    return type(value) is int and value in (0, 1)


def _is_count(value) -> bool:
    return type(value) is int and value >= 1


def solve_remote(
    q: QuboProblem, endpoint: str, timeout: float = 60.0
) -> SolveResult:
    return RemoteSolver(endpoint, timeout).solve(q)
