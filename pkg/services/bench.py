import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from services.annealer import QuboSolver
from transpiler.benchmarks import load_suite_circuit
from transpiler.options import TranspileConfig
from transpiler.router import transpile
from transpiler.topology import CouplingGraph
from transpiler.verifier import verify_equivalence
from utils import format_timestamp

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    'circuit',
    'qubits',
    'strategy',
    'seed',
    'original_cnot',
    'swap_count',
    'equivalent_cnot',
    'map_ms',
    'route_ms',
    'total_ms',
    'verified',
]
TIMING_COLUMNS = ['map_ms', 'route_ms', 'decode_ms', 'remote_ms', 'total_ms']
COUNT_COLUMNS = ['qubits', 'seed', 'original_cnot', 'swap_count',
                 'equivalent_cnot']
SORT_KEYS = ['circuit', 'strategy', 'seed']


class BenchReport:
    def __init__(self, rows: List[Dict], generated_at: Optional[str] = None):
        self.rows = rows
        self.generated_at = generated_at or format_timestamp()

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.rows)
        for column in CSV_COLUMNS + ['status', 'error']:
            if column not in df.columns:
                df[column] = pd.NA
        for column in COUNT_COLUMNS:
            df[column] = df[column].astype('Int64')
        df = df.sort_values(SORT_KEYS, kind='stable').reset_index(drop=True)

        done = df['equivalent_cnot'].notna()
        expected = df['original_cnot'] + 3 * df['swap_count']
        if (df.loc[done, 'equivalent_cnot'] != expected[done]).any():
            raise ValueError(
                'report rows break equivalent_cnot = original + 3 x SWAPs'
            )
        return df

    @property
    def all_verified(self) -> bool:
        return bool(self.rows) and all(r['verified'] for r in self.rows)

    def write_csv(self, path: str):
        self.to_frame()[CSV_COLUMNS].to_csv(path, index=False)

    def to_dict(self) -> Dict:
        df = self.to_frame()
        stable = [c for c in df.columns if c not in TIMING_COLUMNS]
        rows = json.loads(df[stable].to_json(orient='records'))
        timing = json.loads(df[SORT_KEYS + [
            c for c in TIMING_COLUMNS if c in df.columns
        ]].to_json(orient='records'))
        return {
            'rows': rows,
            'timing': timing,
            'generated_at': self.generated_at,
        }

    def write_json(self, path: str):
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)


def _failed_row(name, qubits, strategy, seed, message) -> Dict:
    return {
        'circuit': name,
        'qubits': qubits,
        'strategy': strategy,
        'seed': seed,
        'original_cnot': None,
        'swap_count': None,
        'equivalent_cnot': None,
        'verified': False,
        'status': 'failed',
        'error': message,
    }


def run_case(
    family: str,
    n: int,
    strategy: str,
    seed: int,
    g: CouplingGraph,
    cfg: TranspileConfig,
    solver: QuboSolver,
) -> Dict:
    name = f'{family}_{n}'
    try:
        c = load_suite_circuit(family, n, seed)
        name = c.name
        result = transpile(c, g, strategy, replace(cfg, seed=seed), solver)
        verified, diagnostic = verify_equivalence(c, result, g)
    except Exception as e:
        logger.error('%s [%s] seed %d failed: %s', name, strategy, seed, e)
        return _failed_row(name, n, strategy, seed, str(e))

    if not verified:
        logger.error(
            '%s [%s] seed %d not equivalent: %s',
            name,
            strategy,
            seed,
            diagnostic,
        )
    timings = result.phase_timings
    logger.info(
        '%s [%s] seed %d: equivalent CNOT %d, %d SWAPs',
        name,
        strategy,
        seed,
        result.equivalent_cnot,
        result.swap_count,
    )
    return {
        'circuit': name,
        'qubits': c.num_qubits,
        'strategy': strategy,
        'seed': seed,
        'original_cnot': result.original_cnot,
        'swap_count': result.swap_count,
        'equivalent_cnot': result.equivalent_cnot,
        'verified': verified,
        'status': 'ok' if verified else 'unverified',
        'error': '' if verified else diagnostic,
        **{f'{k}_ms': v for k, v in timings.items()},
    }


def run_bench(
    cases: Sequence[Tuple[str, int]],
    strategies: Sequence[str],
    seeds: Sequence[int],
    g: CouplingGraph,
    cfg: TranspileConfig,
    solver: QuboSolver,
    workers: int = 1,
) -> BenchReport:
    """Cross product of cases x strategies x seeds, one row each."""
    jobs = [
        (family, n, strategy, seed)
        for family, n in cases
        for strategy in strategies
        for seed in seeds
    ]
    logger.info('running %d benchmark rows on %s', len(jobs), g.name)

    def run(job):
        return run_case(*job, g, cfg, solver)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(job) for job in jobs]
    return BenchReport(rows)
