"""Run configuration: TOML file, validated before any backend call.

Unknown keys are errors — a typo in a tolerance name must not silently
fall back to a default.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass
class BackendConfig:
    kind: str = "scripted-mock"  # http-chat-endpoint | scripted-mock | replay-cache
    endpoint: str = ""
    model: str = "default"
    cache_dir: str = ""
    max_concurrency: int = 4
    rules: list = field(default_factory=list)  # [[pattern, response], ...] for the mock


@dataclass
class ExecutorConfig:
    kind: str = "stub"  # stub | command
    compile_cmd: str = ""
    run_cmd: str = ""
    compile_timeout: float = 30.0
    run_timeout: float = 10.0


@dataclass
class RetrievalConfig:
    store: str = ""
    chunk_size: int = 800
    overlap: int = 100
    k: int = 5


@dataclass
class StrategyConfig:
    name: str = "direct"  # direct | nl | rag
    iterative: bool = False
    max_iterations: int = 5


@dataclass
class Tolerances:
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9


@dataclass
class RunConfig:
    seed: int = 0
    workers: int = 4
    tolerances: Tolerances = field(default_factory=Tolerances)
    executor: ExecutorConfig = field(default_factory=ExecutorConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    backends: dict[str, BackendConfig] = field(default_factory=dict)

    def backend(self, role: str) -> BackendConfig:
        if role in self.backends:
            return self.backends[role]
        if "default" in self.backends:
            return self.backends["default"]
        return BackendConfig()


def _fill(cls, data: dict, path: str):
    allowed = set(cls.__dataclass_fields__)
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in [{path}]: {', '.join(sorted(unknown))}")
    return cls(**data)


def load_config(path) -> RunConfig:
    with open(path, "rb") as f:
        raw = tomllib.load(f)
    return parse_config(raw)


def parse_config(raw: dict) -> RunConfig:
    raw = dict(raw)
    cfg = RunConfig()
    sections = {
        "tolerances": (Tolerances, "tolerances"),
        "executor": (ExecutorConfig, "executor"),
        "retrieval": (RetrievalConfig, "retrieval"),
        "strategy": (StrategyConfig, "strategy"),
    }
    for key, (cls, attr) in sections.items():
        if key in raw:
            setattr(cfg, attr, _fill(cls, raw.pop(key), key))
    if "backends" in raw:
        for role, section in raw.pop("backends").items():
            cfg.backends[role] = _fill(BackendConfig, section, f"backends.{role}")
    for scalar in ("seed", "workers"):
        if scalar in raw:
            setattr(cfg, scalar, raw.pop(scalar))
    if raw:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(raw))}")
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.strategy.name not in ("direct", "nl", "rag"):
        raise ConfigError(f"unknown strategy {cfg.strategy.name!r}")
    if cfg.strategy.max_iterations < 1:
        raise ConfigError("max_iterations must be >= 1")
    if cfg.executor.kind not in ("stub", "command"):
        raise ConfigError(f"unknown executor kind {cfg.executor.kind!r}")
    if cfg.executor.kind == "command" and not cfg.executor.compile_cmd:
        raise ConfigError("command executor requires compile_cmd")
    for role, b in cfg.backends.items():
        if b.kind not in ("http-chat-endpoint", "scripted-mock", "replay-cache"):
            raise ConfigError(f"backends.{role}: unknown kind {b.kind!r}")
        if b.kind == "http-chat-endpoint" and not b.endpoint:
            raise ConfigError(f"backends.{role}: http backend requires endpoint")
        if b.kind == "replay-cache" and not b.cache_dir:
            raise ConfigError(f"backends.{role}: replay cache requires cache_dir")
    if cfg.strategy.name == "rag" and not cfg.retrieval.store:
        raise ConfigError("rag strategy requires a retrieval store path")


def build_backend(bc: BackendConfig):
    from . import backends as b

    if bc.kind == "scripted-mock":
        return b.ScriptedMockBackend(rules=[tuple(r) for r in bc.rules])
    if bc.kind == "replay-cache":
        return b.ReplayBackend(bc.cache_dir)
    return b.HttpChatBackend(bc.endpoint, bc.model)


def build_executor(ec: ExecutorConfig):
    from . import runner as r

    if ec.kind == "command":
        return r.CommandExecutor(ec.compile_cmd, ec.run_cmd)
    return r.StubExecutor([], default=r.ExecRecord(False, "stub executor: no fixture rules configured"))
