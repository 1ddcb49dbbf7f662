"""Resource limits shared by the search routines.

Exceeding a limit raises :class:`BudgetExceeded`; no routine ever turns an
exhausted budget into an answer.
"""
from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, fields, replace

ENV_VAR = "RAMSEYFN_BUDGET"


class BudgetExceeded(RuntimeError):
    def __init__(self, what: str, limit):
        super().__init__(f"budget exceeded: {what} (limit {limit})")
        self.what = what
        self.limit = limit


@dataclass(frozen=True)
class Budget:
    max_vertices: int = 5000
    max_colorings: int = 2_000_000     # search nodes in arrow checks
    max_subsets: int = 2_000_000       # candidate structures, subsets, orderings
    max_seconds: float = 600.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"budget field {f.name} must be positive")

    def with_overrides(self, **kw) -> "Budget":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def as_dict(self) -> dict:
        return asdict(self)

    def vertices(self, n: int, what: str = "vertices") -> None:
        if n > self.max_vertices:
            raise BudgetExceeded(what, self.max_vertices)

    def clock(self) -> "Clock":
        return Clock(self.max_seconds)


class Clock:
    def __init__(self, seconds: float):
        self.deadline = time.monotonic() + seconds
        self.seconds = seconds

    def check(self) -> None:
        if time.monotonic() > self.deadline:
            raise BudgetExceeded("wall clock seconds", self.seconds)


class Counter:
    """Counts work units and raises once a limit is passed."""

    def __init__(self, limit: int, what: str, clock: Clock | None = None):
        self.limit, self.what, self.count = limit, what, 0
        self.clock = clock

    def tick(self, n: int = 1) -> None:
        self.count += n
        if self.count > self.limit:
            raise BudgetExceeded(self.what, self.limit)
        if self.clock is not None and self.count % 256 == 0:
            self.clock.check()


DEFAULT = Budget()


def load_budget(path: str | None = None) -> Budget:
    """Budget from a JSON file (``path`` or the file named by the env var)."""
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return DEFAULT
    with open(path) as fh:
        data = json.load(fh)
    known = {f.name for f in fields(Budget)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown budget fields: {sorted(unknown)}")
    return Budget(**data)
