"""Run configuration for the bench harness."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field

INDEX_KINDS = ("exact", "orlicz", "general", "symnorm-direct", "symnorm-nested")
ASSERTION_KEYS = ("min_recall", "max_mean_ratio", "max_violations")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything a bench run depends on. Unknown keys are rejected.

    ``eps`` sets the repetition count ceil(n^eps) and, when ``mu`` is unset,
    mu = n^-eps; ``tree_eps`` is the ring tree's space exponent.
    """

    norm: object = "l2"
    index: str = "exact"
    n: int = 1000
    d: int = 16
    queries: int = 100
    r: float = 1.0
    sep: float = 4.0
    spread: float = 4.0
    beta: float = 1.5
    tau: float | None = None
    eps: float = 0.25
    tree_eps: float = 0.5
    mu: float | None = None
    D: float = 2.0
    alpha: float = 8.0
    reps: int | None = None
    c_cl: float = 1.0
    leaf_cap: int = 8
    dual_tol: float = 0.02
    accept_factor: float | None = None
    seed: int = 0
    data_seed: int = 1
    bootstrap: int = 1000
    out_csv: str | None = None
    out_json: str | None = None
    assertions: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.index not in INDEX_KINDS:
            raise ConfigError(f"index must be one of {INDEX_KINDS}, got {self.index!r}")
        for name in ("n", "d", "leaf_cap"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.queries < 0 or self.queries > self.n:
            raise ConfigError("queries must lie in [0, n]")
        if not self.r > 0 or not self.sep > 1:
            raise ConfigError("need r > 0 and sep > 1")
        if not 0 < self.eps < 1 or not 0 < self.tree_eps < 1:
            raise ConfigError("eps and tree_eps must lie in (0, 1)")
        if self.mu is not None and not 0 < self.mu < 0.5:
            raise ConfigError("mu must lie in (0, 1/2)")
        if self.reps is not None and self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.bootstrap < 0:
            raise ConfigError("bootstrap must be >= 0")
        unknown = set(self.assertions) - set(ASSERTION_KEYS)
        if unknown:
            raise ConfigError(f"unknown assertion keys: {sorted(unknown)}")

    @property
    def mu_value(self) -> float:
        return self.n ** -self.eps if self.mu is None else self.mu

    @property
    def reps_value(self) -> int:
        return int(math.ceil(self.n**self.eps)) if self.reps is None else self.reps

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def replace(self, **changes) -> "RunConfig":
        return self.from_dict({**self.to_dict(), **changes})
