import logging

from flask import Flask, jsonify, request

import config
from services.annealer import AnnealConfig, solve_sa
from transpiler.qubo import QuboProblem

app = Flask(__name__)
app.config['JSON_AS_ASCII'] = False

logger = logging.getLogger(__name__)

# 单次请求允许的最大退火量
MAX_SWEEPS = 100000
MAX_RESTARTS = 256


@app.route('/health', methods=['GET'])
def health():
    return jsonify({'status': 'ok', 'solver': 'sa'})


@app.route('/solve', methods=['POST'])
def solve():
    """
    求解一个 QUBO

    请求体为 QuboProblem.to_dict() 的 JSON, 可附带 sweeps / restarts / seed,
    返回 {"assignment": [...], "energy": ...}
    """
    body = request.get_json(silent=True)
    if not isinstance(body, dict):
        return jsonify({'status': 'error', 'message': '请求体必须是 JSON'}), 400

    try:
        problem = QuboProblem.from_dict(body)
        cfg = AnnealConfig(
            num_sweeps=min(int(body.get('sweeps', 2000)), MAX_SWEEPS),
            num_restarts=min(int(body.get('restarts', 16)), MAX_RESTARTS),
            seed=int(body.get('seed', 0)),
            workers=config.WORKERS,
        )
    except (KeyError, TypeError, ValueError) as e:
        return (
            jsonify({'status': 'error', 'message': f'无效的 QUBO: {e}'}),
            400,
        )

    if problem.num_vars < 1:
        return jsonify({'status': 'error', 'message': 'num_vars 必须 >= 1'}), 400
    if problem.num_vars > config.VAR_BUDGET:
        return (
            jsonify(
                {
                    'status': 'error',
                    'message': f'{problem.num_vars} variables exceed the '
                    f'budget of {config.VAR_BUDGET}',
                }
            ),
            413,
        )

    try:
        result = solve_sa(problem, cfg)
    except Exception as e:
        logger.exception('solve failed')
        return jsonify({'status': 'error', 'message': f'求解失败: {e}'}), 500

    logger.info(
        'solved %d vars: energy %.4f in %.2fs',
        problem.num_vars,
        result.best_energy,
        result.wall_time,
    )
    return jsonify(
        {
            'assignment': result.best_assignment.astype(int).tolist(),
            'energy': result.best_energy,
            'restarts': result.restarts_run,
            'wall_time': result.wall_time,
        }
    )


if __name__ == '__main__':
    config.setup_logging()
    app.run(host='0.0.0.0', port=8000)
