import argparse
import json
import logging
import sys

import config
from services.annealer import AnnealConfig, LocalSolver
from services.bench import run_bench
from services.remote_solver import RemoteSolver
from transpiler.benchmarks import (
    SUITES,
    generate_benchmark,
    parse_bench_spec,
)
from transpiler.circuit import emit_qasm
from transpiler.exceptions import TranspilerError
from transpiler.options import TranspileConfig
from transpiler.qasm_parser import parse_qasm_file
from transpiler.qubo import PenaltyConfig
from transpiler.router import STRATEGIES, transpile
from transpiler.topology import parse_topology
from transpiler.verifier import verify_equivalence

logger = logging.getLogger(__name__)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--topology', default='grid:8x8',
                        help='grid:RxC or file:PATH')
    common.add_argument('--solver', default='sa',
                        help='sa, remote (uses QT_REMOTE_SOLVER_URL) or '
                             'remote:<url>')
    common.add_argument('--sweeps', type=int, default=2000,
                        help='mapping anneal sweeps')
    common.add_argument('--restarts', type=int, default=16,
                        help='mapping anneal restarts')
    common.add_argument('--routing-sweeps', type=int, default=200)
    common.add_argument('--routing-restarts', type=int, default=2)
    common.add_argument('--lambda', dest='lam', type=float, default=None,
                        help='penalty coefficient, default per instance')
    common.add_argument('--w-swap', type=float, default=3.0)
    common.add_argument('--w-max', type=float, default=10.0)
    common.add_argument('--time-steps', type=int, default=2)
    common.add_argument('--decay', type=float, default=0.1)
    common.add_argument('--var-budget', type=int, default=config.VAR_BUDGET,
                        help='QUBO variable cap, 0 disables it')
    common.add_argument('--front-only', action='store_true',
                        help='route only the directly blocked pairs')
    common.add_argument('--route-window', type=int, default=None)
    common.add_argument('--route-trials', type=int, default=1)
    common.add_argument('--lookahead', type=int, default=20)
    common.add_argument('--max-iterations', type=int, default=10000)
    common.add_argument('--workers', type=int, default=config.WORKERS)
    common.add_argument('--log-level', default=config.LOG_LEVEL)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog='qubo-transpiler',
        description='QUBO-based qubit mapping and routing',
    )
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('transpile', parents=[common],
                       help='map and route one circuit')
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument('--input', help='OpenQASM 2.0 file')
    source.add_argument('--bench', help='family:n[:seed]')
    p.add_argument('--strategy', choices=STRATEGIES, default='hybrid')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out', help='write the routed circuit as QASM')
    p.add_argument('--report', help='write a JSON report')

    b = sub.add_parser('bench', parents=[common],
                       help='run a benchmark suite')
    b.add_argument('cases', nargs='*', help='family:n entries')
    b.add_argument('--suite', choices=sorted(SUITES), default=None)
    b.add_argument('--strategies', default='full,hybrid,heuristic-only')
    b.add_argument('--seeds', type=int, default=1,
                   help='run seeds 0..k-1')
    b.add_argument('--csv', help='CSV report path')
    b.add_argument('--json', help='JSON report path')

    s = sub.add_parser('serve', help='run the QUBO solver service')
    s.add_argument('--host', default='0.0.0.0')
    s.add_argument('--port', type=int, default=8000)
    s.add_argument('--log-level', default=config.LOG_LEVEL)
    return parser


def make_solver(spec: str):
    kind, _, url = spec.partition(':')
    if kind == 'sa' and not url:
        return LocalSolver()
    if kind == 'remote':
        url = url or config.REMOTE_SOLVER_URL
        if not url:
            raise TranspilerError(
                '--solver remote needs a URL or QT_REMOTE_SOLVER_URL'
            )
        return RemoteSolver(url, config.REMOTE_TIMEOUT)
    raise TranspilerError(f'--solver: unknown solver {spec!r}')


def make_config(args, seed: int = 0) -> TranspileConfig:
    penalty = PenaltyConfig(
        lam=args.lam,
        w_swap=args.w_swap,
        w_max=args.w_max,
        time_steps=args.time_steps,
        var_budget=args.var_budget or None,
    )
    return TranspileConfig(
        penalty=penalty,
        mapping_anneal=AnnealConfig(
            num_sweeps=args.sweeps,
            num_restarts=args.restarts,
            group_moves=True,
            workers=args.workers,
        ),
        routing_anneal=AnnealConfig(
            num_sweeps=args.routing_sweeps,
            num_restarts=args.routing_restarts,
            group_moves=True,
        ),
        decay=args.decay,
        front_only=args.front_only,
        route_window=args.route_window,
        lookahead=args.lookahead,
        route_trials=args.route_trials,
        max_iterations=args.max_iterations,
        seed=seed,
    )


def cmd_transpile(args) -> int:
    g = parse_topology(args.topology)
    if args.input:
        c = parse_qasm_file(args.input)
    else:
        family, n, seed = parse_bench_spec(args.bench)
        c = generate_benchmark(family, n, seed)
    cfg = make_config(args, args.seed)
    solver = make_solver(args.solver)

    result = transpile(c, g, args.strategy, cfg, solver)
    verified, diagnostic = verify_equivalence(c, result, g)

    if args.out:
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write(emit_qasm(result.circuit))
    if args.report:
        report = result.summary()
        report.update(
            {
                'qubits': c.num_qubits,
                'seed': args.seed,
                'topology': g.name,
                'verified': verified,
            }
        )
        with open(args.report, 'w', encoding='utf-8') as f:
            json.dump(report, f, indent=2)

    print(
        f'{c.name} [{result.strategy}] '
        f'equivalent_cnot={result.equivalent_cnot} '
        f'swap_count={result.swap_count}'
    )
    if not verified:
        print(f'verification failed: {diagnostic}', file=sys.stderr)
        return 1
    return 0


def cmd_bench(args) -> int:
    g = parse_topology(args.topology)
    if args.suite:
        cases = list(SUITES[args.suite])
    else:
        cases = []
    for spec in args.cases:
        family, n, _ = parse_bench_spec(spec)
        cases.append((family, n))
    if not cases:
        raise TranspilerError('bench: give --suite table2 or family:n cases')
    strategies = [s.strip() for s in args.strategies.split(',') if s.strip()]
    for strategy in strategies:
        if strategy not in STRATEGIES:
            raise TranspilerError(f'--strategies: unknown {strategy!r}')
    if args.seeds < 1:
        raise TranspilerError('--seeds must be >= 1')

    report = run_bench(
        cases,
        strategies,
        list(range(args.seeds)),
        g,
        make_config(args),
        make_solver(args.solver),
        workers=args.workers,
    )
    try:
        if args.csv:
            report.write_csv(args.csv)
        if args.json:
            report.write_json(args.json)
    except OSError as e:
        print(f'cannot write report: {e}', file=sys.stderr)
        return 1

    frame = report.to_frame()
    print(
        frame[
            ['circuit', 'strategy', 'seed', 'equivalent_cnot', 'swap_count',
             'verified']
        ].to_string(index=False)
    )
    if not report.all_verified:
        print('some rows failed verification', file=sys.stderr)
        return 1
    return 0


def cmd_serve(args) -> int:
    from app import app

    app.run(host=args.host, port=args.port)
    return 0


COMMANDS = {
    'transpile': cmd_transpile,
    'bench': cmd_bench,
    'serve': cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config.setup_logging(args.log_level.upper())
    try:
        return COMMANDS[args.command](args)
    except (TranspilerError, ValueError, OSError) as e:
        print(f'error: {e}', file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
