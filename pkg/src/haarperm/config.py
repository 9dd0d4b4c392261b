"""Enumeration budgets, overridable through environment variables."""
from __future__ import annotations

import os
from dataclasses import dataclass, replace

ENV_PREFIX = "HAARPERM_"


@dataclass(frozen=True)
class Budgets:
    max_subsets: int = 2**15
    max_antichains: int = 10**6
    samples: int = 10**4
    workers: int = 1

    @classmethod
    def from_env(cls, environ=None) -> "Budgets":
        environ = os.environ if environ is None else environ
        values = {}
        for name in ("max_subsets", "max_antichains", "samples", "workers"):
            raw = environ.get(ENV_PREFIX + name.upper())
            if raw is not None:
                values[name] = int(raw)
        if values.get("workers", 1) < 1:
            raise ValueError(f"{ENV_PREFIX}WORKERS must be at least 1")
        return cls(**values)

    def updated(self, **overrides) -> "Budgets":
        return replace(self, **{k: int(v) for k, v in overrides.items() if v is not None})


def budgets() -> Budgets:
    return Budgets.from_env()
