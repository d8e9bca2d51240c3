"""Simulated annealing for QuboProblem instances.

Energies are tracked incrementally through a local field vector

    field[k] = linear[k] + sum_j Qsym[k, j] x_j

so a move changing the bits in S costs
sum_{k in S} s_k field[k] + sum_{k<l in S} s_k s_l Qsym[k, l].
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Protocol, Sequence, Tuple

import numpy as np

from transpiler.exceptions import SolverError
from transpiler.qubo import QuboProblem, energy

logger = logging.getLogger(__name__)

# dense pair table below this many variables, dict lookup above
DENSE_PAIR_LIMIT = 2048
T_INIT_SAMPLES = 256


class Schedule(Enum):
    GEOMETRIC = 'geometric'


@dataclass(frozen=True)
class AnnealConfig:
    num_sweeps: int = 2000
    num_restarts: int = 16
    # None: max |delta E| over sampled proposals from the starting state
    initial_temperature: Optional[float] = None
    final_temperature: float = 0.1
    seed: int = 0
    schedule: Schedule = Schedule.GEOMETRIC
    # one-hot moves inside the codec's groups, needs problem.codec
    group_moves: bool = False
    workers: int = 1
    debug_check: bool = False

    def __post_init__(self):
        if self.num_sweeps < 1:
            raise ValueError('num_sweeps must be >= 1')
        if self.num_restarts < 1:
            raise ValueError('num_restarts must be >= 1')
        if self.final_temperature <= 0:
            raise ValueError('final_temperature must be positive')
        if (
            self.initial_temperature is not None
            and self.initial_temperature < self.final_temperature
        ):
            raise ValueError(
                'initial_temperature must be >= final_temperature'
            )
        if self.workers < 1:
            raise ValueError('workers must be >= 1')


@dataclass(frozen=True)
class SolveResult:
    best_assignment: np.ndarray = field(repr=False)
    best_energy: float
    wall_time: float
    restarts_run: int
    restart_energies: Tuple[float, ...] = ()
    source: str = 'sa'


class QuboSolver(Protocol):
    name: str

    def solve(
        self,
        q: QuboProblem,
        cfg: AnnealConfig,
        initial: Optional[np.ndarray] = None,
    ) -> SolveResult:
        ...


class SimulatedAnnealer:
    def __init__(self, q: QuboProblem, cfg: AnnealConfig):
        if q.num_vars < 1:
            raise SolverError('cannot anneal an empty problem')
        self.q = q
        self.cfg = cfg
        self.n = q.num_vars
        self._linear = np.asarray(q.linear, dtype=float)
        self._sym = q.symmetric()
        self._indptr = self._sym.indptr
        self._indices = self._sym.indices
        self._data = self._sym.data
        if self.n <= DENSE_PAIR_LIMIT:
            self._dense = self._sym.toarray()
            self._pairs = None
        else:
            self._dense = None
            upper = q.quadratic.tocoo()
            self._pairs = {
                a * self.n + b: v
                for a, b, v in zip(
                    upper.row.tolist(), upper.col.tolist(), upper.data.tolist()
                )
            }
        self.grouped = cfg.group_moves and q.codec is not None
        if cfg.group_moves and q.codec is None:
            logger.debug('group moves requested without a codec, using flips')
        self._shape = q.codec.groups().shape if self.grouped else None

    def _pair(self, a: int, b: int) -> float:
        if self._dense is not None:
            return self._dense[a, b]
        if a > b:
            a, b = b, a
        return self._pairs.get(a * self.n + b, 0.0)

    def _delta(self, local: np.ndarray, flips: Sequence[Tuple[int, int]]):
        de = 0.0
        for idx, (k, s) in enumerate(flips):
            de += s * local[k]
            for l, t in flips[idx + 1:]:
                de += s * t * self._pair(k, l)
        return de

    def _apply(self, x, local, flips):
        for k, s in flips:
            x[k] += s
            lo, hi = self._indptr[k], self._indptr[k + 1]
            local[self._indices[lo:hi]] += s * self._data[lo:hi]

    def _random_state(self, rng: np.random.Generator) -> np.ndarray:
        x = np.zeros(self.n, dtype=np.int8)
        if not self.grouped:
            x[:] = rng.integers(0, 2, self.n)
            return x
        B, L, P = self._shape
        for b in range(B):
            slots = rng.permutation(P)[:L]
            x[(b * L + np.arange(L)) * P + slots] = 1
        return x

    def _group_state(self, x: np.ndarray):
        B, L, P = self._shape
        occupancy = x.reshape(B, L, P)
        if (occupancy.sum(axis=2) != 1).any() or (
            occupancy.sum(axis=1) > 1
        ).any():
            raise ValueError('group moves need an injective one-hot start')
        pos = occupancy.argmax(axis=2)
        occ = np.full((B, P), -1, dtype=np.int64)
        for b in range(B):
            occ[b, pos[b]] = np.arange(L)
        return pos, occ

    def _group_flips(self, pos, occ, b, i, q):
        B, L, P = self._shape
        p = pos[b, i]
        base = b * L * P
        flips = [(base + i * P + p, -1), (base + i * P + q, 1)]
        j = occ[b, q]
        if j >= 0:
            flips += [(base + j * P + q, -1), (base + j * P + p, 1)]
        return flips

    def _initial_temperature(self, x, local, rng, pos=None, occ=None):
        if self.cfg.initial_temperature is not None:
            return self.cfg.initial_temperature
        if not self.grouped:
            sample = float(np.abs(local).max())
        else:
            B, L, P = self._shape
            sample = 0.0
            if P > 1:
                for _ in range(T_INIT_SAMPLES):
                    b, i = rng.integers(B), rng.integers(L)
                    q = (pos[b, i] + rng.integers(1, P)) % P
                    flips = self._group_flips(pos, occ, b, i, q)
                    sample = max(sample, abs(self._delta(local, flips)))
        return max(sample, self.cfg.final_temperature, 1e-9)

    def _check(self, x, e):
        full = energy(self.q, x)
        if abs(full - e) > 1e-6 * max(1.0, abs(full)):
            raise SolverError(
                f'incremental energy {e} drifted from full recompute {full}'
            )

    def run_restart(
        self,
        seed: np.random.SeedSequence,
        initial: Optional[np.ndarray] = None,
    ) -> Tuple[np.ndarray, float]:
        rng = np.random.default_rng(seed)
        if initial is None:
            x = self._random_state(rng)
        else:
            x = np.asarray(initial, dtype=np.int8).copy()
            if x.shape != (self.n,):
                raise ValueError(
                    f'initial state has {x.size} bits, expected {self.n}'
                )
        local = self._linear + self._sym @ x.astype(float)
        e = energy(self.q, x)
        pos = occ = None
        if self.grouped:
            pos, occ = self._group_state(x)

        t0 = self._initial_temperature(x, local, rng, pos, occ)
        temperatures = np.geomspace(
            t0, self.cfg.final_temperature, self.cfg.num_sweeps
        )
        best_x, best_e = x.copy(), e

        for temperature in temperatures:
            if self.grouped:
                e = self._group_sweep(x, local, e, pos, occ, temperature, rng)
            else:
                e = self._flip_sweep(x, local, e, temperature, rng)
            if e < best_e - 1e-12:
                best_x, best_e = x.copy(), e
        return best_x, best_e

    def _flip_sweep(self, x, local, e, temperature, rng):
        order = rng.permutation(self.n).tolist()
        draws = rng.random(self.n).tolist()
        for k, u in zip(order, draws):
            s = 1 - 2 * int(x[k])
            de = s * local[k]
            if de <= 0 or u < math.exp(-de / temperature):
                self._apply(x, local, ((k, s),))
                e += de
                if self.cfg.debug_check:
                    self._check(x, e)
        return e

    def _group_sweep(self, x, local, e, pos, occ, temperature, rng):
        B, L, P = self._shape
        if P < 2:
            return e
        moves = B * L
        blocks = rng.integers(0, B, moves).tolist()
        logicals = rng.integers(0, L, moves).tolist()
        offsets = rng.integers(1, P, moves).tolist()
        draws = rng.random(moves).tolist()
        for b, i, offset, u in zip(blocks, logicals, offsets, draws):
            p = int(pos[b, i])
            q = (p + offset) % P
            flips = self._group_flips(pos, occ, b, i, q)
            de = self._delta(local, flips)
            if de <= 0 or u < math.exp(-de / temperature):
                self._apply(x, local, flips)
                j = occ[b, q]
                pos[b, i], occ[b, q] = q, i
                occ[b, p] = j
                if j >= 0:
                    pos[b, j] = p
                e += de
                if self.cfg.debug_check:
                    self._check(x, e)
        return e

    def solve(self, initial: Optional[np.ndarray] = None) -> SolveResult:
        """Anneal all restarts, initial (if any) seeds restart 0."""
        start = time.perf_counter()
        seeds = np.random.SeedSequence(self.cfg.seed).spawn(
            self.cfg.num_restarts
        )

        def run(index: int):
            return self.run_restart(
                seeds[index], initial if index == 0 else None
            )

        if self.cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=self.cfg.workers) as pool:
                outcomes = list(pool.map(run, range(self.cfg.num_restarts)))
        else:
            outcomes = [run(r) for r in range(self.cfg.num_restarts)]

        energies = [e for _, e in outcomes]
        # 能量相同时取编号最小的 restart
        winner = min(range(len(outcomes)), key=lambda r: (energies[r], r))
        best = outcomes[winner][0]
        wall = time.perf_counter() - start
        logger.debug(
            'SA %d vars: best %.3f from restart %d of %d (%.2fs)',
            self.n,
            energies[winner],
            winner,
            len(outcomes),
            wall,
        )
        return SolveResult(
            best_assignment=best,
            best_energy=energy(self.q, best),
            wall_time=wall,
            restarts_run=len(outcomes),
            restart_energies=tuple(energies),
        )


def solve_sa(
    q: QuboProblem,
    cfg: AnnealConfig,
    initial: Optional[np.ndarray] = None,
) -> SolveResult:
    return SimulatedAnnealer(q, cfg).solve(initial)


class LocalSolver:
    name = 'sa'

    def solve(
        self,
        q: QuboProblem,
        cfg: AnnealConfig,
        initial: Optional[np.ndarray] = None,
    ) -> SolveResult:
        return solve_sa(q, cfg, initial)
