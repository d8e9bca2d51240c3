import time
from collections import defaultdict
from contextlib import contextmanager
from datetime import datetime, timezone
from typing import Dict


def format_timestamp(dt: datetime = None) -> str:
    dt = dt or datetime.now(timezone.utc)
    return dt.strftime('%Y-%m-%dT%H:%M:%S.%f')[:-3] + 'Z'  # 保留毫秒


class PhaseTimer:
    """Wall-clock seconds accumulated per named phase."""

    def __init__(self):
        self.seconds: Dict[str, float] = defaultdict(float)

    @contextmanager
    def phase(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.seconds[name] += time.perf_counter() - start

    def add(self, name: str, seconds: float):
        self.seconds[name] += seconds

    def as_ms(self) -> Dict[str, float]:
        return {k: round(v * 1000.0, 3) for k, v in self.seconds.items()}
