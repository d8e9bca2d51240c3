import logging

import pytest
import requests

import services.remote_solver as remote_module
from app import app
from services.annealer import AnnealConfig
from services.remote_solver import RemoteSolver, solve_remote
from transpiler.benchmarks import generate_benchmark
from transpiler.circuit import first_interaction_weights
from transpiler.exceptions import RemoteSolverError
from transpiler.mapper import run_solver
from transpiler.qubo import PenaltyConfig, QuboProblem, build_mapping_qubo
from transpiler.topology import line
from utils import PhaseTimer


class FakeResponse:
    def __init__(self, status_code, body):
        self.status_code = status_code
        self._body = body

    def raise_for_status(self):
        if self.status_code >= 400:
            raise requests.HTTPError(f'{self.status_code} error')

    def json(self):
        if isinstance(self._body, Exception):
            raise self._body
        return self._body


@pytest.fixture
def problem() -> QuboProblem:
    return build_mapping_qubo(
        generate_benchmark('ghz', 3, 0), line(3), PenaltyConfig()
    )


@pytest.fixture
def flask_backend(monkeypatch):
    """Send requests.post to the Flask test client."""
    client = app.test_client()

    def post(url, json=None, timeout=None):
        path = '/' + url.split('://', 1)[-1].split('/', 1)[-1]
        response = client.post(path, json=json)
        return FakeResponse(response.status_code, response.get_json())

    monkeypatch.setattr(remote_module.requests, 'post', post)
    return client


def reply_with(monkeypatch, body, status=200):
    def post(url, json=None, timeout=None):
        return FakeResponse(status, body)

    monkeypatch.setattr(remote_module.requests, 'post', post)


def test_health():
    response = app.test_client().get('/health')
    assert response.status_code == 200
    assert response.get_json()['status'] == 'ok'


def test_loopback_solve_matches_local_energy(flask_backend, problem):
    solver = RemoteSolver('http://solver:8000')
    result = solver.solve(problem, AnnealConfig(200, 4))
    assert result.source == 'remote'
    assert result.best_energy == pytest.approx(
        problem.energy(result.best_assignment)
    )
    # ghz-3 on a line: both CNOT pairs adjacent
    c = generate_benchmark('ghz', 3, 0)
    weights = first_interaction_weights(c, 10.0)
    assert result.best_energy == pytest.approx(sum(weights.values()))


def test_service_rejects_bad_payload(flask_backend):
    client = flask_backend
    assert client.post('/solve', data='nope').status_code == 400
    bad = {'num_vars': 2, 'linear': [1.0]}
    assert client.post('/solve', json=bad).status_code == 400


def test_wrong_energy_is_overwritten(monkeypatch, problem, caplog):
    bits = [1, 0, 0, 0, 1, 0, 0, 0, 1]
    reply_with(monkeypatch, {'assignment': bits, 'energy': -1234.0})
    with caplog.at_level(logging.WARNING):
        result = solve_remote(problem, 'http://solver')
    assert result.best_energy == pytest.approx(problem.energy(bits))
    assert any(r.levelno == logging.WARNING for r in caplog.records)


def test_length_mismatch(monkeypatch, problem):
    reply_with(monkeypatch, {'assignment': [0, 1], 'energy': 0.0})
    with pytest.raises(RemoteSolverError, match='bits'):
        solve_remote(problem, 'http://solver')


def test_malformed_response(monkeypatch, problem):
    reply_with(monkeypatch, {'energy': 1.0})
    with pytest.raises(RemoteSolverError):
        solve_remote(problem, 'http://solver')
    reply_with(monkeypatch, ValueError('not json'))
    with pytest.raises(RemoteSolverError, match='JSON'):
        solve_remote(problem, 'http://solver')


@pytest.mark.parametrize(
    'bits',
    [
        [True, False, False, False, True, False, False, False, True],
        [1.0, 0, 0, 0, 1, 0, 0, 0, 1],
        [1, 0, 0, 0, 2, 0, 0, 0, 1],
    ],
)
def test_non_integer_bits_rejected(monkeypatch, problem, bits):
    reply_with(monkeypatch, {'assignment': bits, 'energy': 0.0})
    with pytest.raises(RemoteSolverError, match='0/1'):
        solve_remote(problem, 'http://solver')


@pytest.mark.parametrize('restarts', ['many', None, 0, 2.5, [3]])
def test_bad_restarts_field(monkeypatch, problem, restarts):
    bits = [1, 0, 0, 0, 1, 0, 0, 0, 1]
    reply_with(
        monkeypatch,
        {'assignment': bits, 'energy': 0.0, 'restarts': restarts},
    )
    with pytest.raises(RemoteSolverError, match='restarts'):
        solve_remote(problem, 'http://solver')
    timer = PhaseTimer()
    result = run_solver(
        RemoteSolver('http://solver'),
        problem,
        AnnealConfig(50, 2),
        timer=timer,
    )
    assert result.source == 'sa'


def test_http_error(monkeypatch, problem):
    reply_with(monkeypatch, {'status': 'error'}, status=500)
    with pytest.raises(RemoteSolverError):
        solve_remote(problem, 'http://solver')


def test_unreachable_endpoint_falls_back_to_annealing(monkeypatch, problem):
    def post(url, json=None, timeout=None):
        raise requests.ConnectTimeout('timed out')

    monkeypatch.setattr(remote_module.requests, 'post', post)
    solver = RemoteSolver('http://10.255.255.1', timeout=0.01)
    with pytest.raises(RemoteSolverError):
        solver.solve(problem)
    timer = PhaseTimer()
    result = run_solver(solver, problem, AnnealConfig(50, 2), timer=timer)
    assert result.source == 'sa'
    assert 'remote' not in timer.seconds


def test_solve_url():
    assert RemoteSolver('http://a:1/').solve_url == 'http://a:1/solve'
    assert RemoteSolver('http://a:1/solve').solve_url == 'http://a:1/solve'
