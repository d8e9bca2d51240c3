from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from services.annealer import AnnealConfig
from transpiler.circuit import DEFAULT_DECAY
from transpiler.qubo import PenaltyConfig


def default_mapping_anneal() -> AnnealConfig:
    return AnnealConfig(num_sweeps=2000, num_restarts=16, group_moves=True)


def default_routing_anneal() -> AnnealConfig:
    return AnnealConfig(num_sweeps=200, num_restarts=2, group_moves=True)


@dataclass(frozen=True)
class TranspileConfig:
    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    mapping_anneal: AnnealConfig = field(
        default_factory=default_mapping_anneal
    )
    routing_anneal: AnnealConfig = field(
        default_factory=default_routing_anneal
    )
    decay: float = DEFAULT_DECAY
    # more one-hot violations than this trigger a lambda escalation
    repair_limit: int = 8
    lambda_retries: int = 3
    front_only: bool = False
    # residual layers fed to the routing QUBO, None for all
    route_window: Optional[int] = None
    lookahead: int = 20
    lookahead_decay: float = 0.5
    route_trials: int = 1
    max_iterations: int = 10000
    seed: int = 0

    def __post_init__(self):
        if self.decay < 0:
            raise ValueError('decay must be non-negative')
        if self.repair_limit < 0 or self.lambda_retries < 0:
            raise ValueError('repair_limit and lambda_retries must be >= 0')
        if self.route_window is not None and self.route_window < 1:
            raise ValueError('route_window must be >= 1')
        if self.lookahead < 0 or not 0 < self.lookahead_decay <= 1:
            raise ValueError('lookahead must be >= 0, decay in (0, 1]')
        if self.route_trials < 1:
            raise ValueError('route_trials must be >= 1')
        if self.max_iterations < 1:
            raise ValueError('max_iterations must be >= 1')


def derive_seed(base: int, *keys: int) -> int:
    """Stable per-call solver seed, e.g. (run seed, iteration, attempt)."""
    sequence = np.random.SeedSequence(base, spawn_key=tuple(keys))
    return int(sequence.generate_state(1)[0])
