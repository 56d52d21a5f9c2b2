"""Configuration dataclasses, validation, serialization, and dotted overrides."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, fields


class ConfigError(ValueError):
    """A configuration value or combination violates its invariants."""


@dataclass
class EnvConfig:
    """Static parameters of the simulated host, its traffic, and its defenses."""

    n_ports: int = 12
    vulnerable_min: int = 3
    vulnerable_max: int = 7
    t_min: int = 300
    t_max: int = 600
    n_ips: int = 40
    attacker_ip_count: int = 4
    normal_req_min: int = 50
    normal_req_max: int = 70
    trap_detect_prob: float = 0.60
    exploit_rate: int = 30
    ip_change_min_actions: int = 10
    ip_rate_cap: int = 10
    port_rate_cap: int = 40
    max_steps: int = 500
    history_window: int = 150
    shaping: bool = False

    def validate(self) -> None:
        if self.n_ports < 1:
            raise ConfigError("env.n_ports: must be >= 1")
        if not (0 <= self.vulnerable_min <= self.vulnerable_max <= self.n_ports):
            raise ConfigError(
                "env.vulnerable_min/vulnerable_max: need "
                "0 <= vulnerable_min <= vulnerable_max <= n_ports"
            )
        if not (1 <= self.t_min <= self.t_max):
            raise ConfigError("env.t_min/t_max: need 1 <= t_min <= t_max")
        if self.n_ips < 2:
            raise ConfigError("env.n_ips: must be >= 2")
        if not (1 <= self.attacker_ip_count < self.n_ips):
            raise ConfigError("env.attacker_ip_count: need 1 <= attacker_ip_count < n_ips")
        if not (0 <= self.normal_req_min <= self.normal_req_max):
            raise ConfigError("env.normal_req_min/normal_req_max: need 0 <= min <= max")
        if not (0.0 <= self.trap_detect_prob <= 1.0):
            raise ConfigError("env.trap_detect_prob: must be in [0, 1]")
        if self.exploit_rate < 1:
            raise ConfigError("env.exploit_rate: must be >= 1")
        if self.ip_change_min_actions < 0:
            raise ConfigError("env.ip_change_min_actions: must be >= 0")
        if self.ip_rate_cap < 0 or self.port_rate_cap < 0:
            raise ConfigError("env.ip_rate_cap/port_rate_cap: must be >= 0")
        if self.max_steps < 1:
            raise ConfigError("env.max_steps: must be >= 1")
        if self.history_window < 1:
            raise ConfigError("env.history_window: must be >= 1")


@dataclass
class AgentConfig:
    """Learning hyperparameters for one side; defaults are the attacker's."""

    alpha: float = 0.001
    gamma: float = 0.95
    eps_initial: float = 1.0
    eps_decay: float = 0.995
    eps_min: float = 0.05
    batch_size: int = 512
    buffer_capacity: int = 75_000
    target_sync_period: int = 1000
    backend: str = "table"

    def validate(self, prefix: str = "agent") -> None:
        if self.alpha <= 0:
            raise ConfigError(f"{prefix}.alpha: must be > 0")
        if not (0.0 <= self.gamma <= 1.0):
            raise ConfigError(f"{prefix}.gamma: must be in [0, 1]")
        if not (0.0 <= self.eps_min <= self.eps_initial <= 1.0):
            raise ConfigError(f"{prefix}.eps_min/eps_initial: need 0 <= eps_min <= eps_initial <= 1")
        if not (0.0 < self.eps_decay <= 1.0):
            raise ConfigError(f"{prefix}.eps_decay: must be in (0, 1]")
        if self.batch_size < 1:
            raise ConfigError(f"{prefix}.batch_size: must be >= 1")
        if self.buffer_capacity < 1:
            raise ConfigError(f"{prefix}.buffer_capacity: must be >= 1")
        if self.target_sync_period < 1:
            raise ConfigError(f"{prefix}.target_sync_period: must be >= 1")
        if self.backend not in ("table", "dqn"):
            raise ConfigError(f"{prefix}.backend: must be 'table' or 'dqn'")


def attacker_defaults() -> AgentConfig:
    return AgentConfig()


def defender_defaults() -> AgentConfig:
    return AgentConfig(alpha=0.002, gamma=0.90, eps_decay=0.99)


@dataclass
class RewardTable:
    """Scalar reward values, overridable from the run config for ablations.

    The three mirrored values (successful_exploit, trap_hit, successful_defense)
    are stored as positive magnitudes and applied with opposite signs to the two
    sides; all *_cost values are the (negative) private cost to their owner.
    """

    successful_exploit: float = 100.0
    trap_hit: float = 80.0
    successful_defense: float = 100.0
    scan_cost: float = -0.125
    exploit_attempt_cost: float = -0.25
    cancel_cost: float = -4.0
    change_ip_cost: float = -8.0
    rate_limit_ip_cost: float = -8.0
    rate_limit_port_cost: float = -12.0
    close_port_cost: float = -40.0
    trap_set_cost: float = -4.0
    blocked_benign_cost: float = -8.0
    shaping_coeff: float = 0.05

    def validate(self) -> None:
        for name in ("successful_exploit", "trap_hit", "successful_defense"):
            if getattr(self, name) < 0:
                raise ConfigError(f"reward.{name}: mirrored magnitude must be >= 0")
        for name in (
            "scan_cost",
            "exploit_attempt_cost",
            "cancel_cost",
            "change_ip_cost",
            "rate_limit_ip_cost",
            "rate_limit_port_cost",
            "close_port_cost",
            "trap_set_cost",
            "blocked_benign_cost",
        ):
            if getattr(self, name) > 0:
                raise ConfigError(f"reward.{name}: cost must be <= 0")


@dataclass
class RunConfig:
    """Everything a training run needs: environment, both agents, and harness knobs."""

    env: EnvConfig = field(default_factory=EnvConfig)
    attacker: AgentConfig = field(default_factory=attacker_defaults)
    defender: AgentConfig = field(default_factory=defender_defaults)
    reward: RewardTable = field(default_factory=RewardTable)
    episodes: int = 20_000
    seed: int = 0
    out_dir: str = "runs/default"
    eval_episodes: int = 100
    eval_epsilon: float = 0.0
    checkpoint_every: int = 500
    learn_attacker: bool = True
    learn_defender: bool = True

    def validate(self) -> None:
        self.env.validate()
        self.attacker.validate("attacker")
        self.defender.validate("defender")
        self.reward.validate()
        if self.episodes < 1:
            raise ConfigError("episodes: must be >= 1")
        if self.eval_episodes < 0:
            raise ConfigError("eval_episodes: must be >= 0")
        if not (0.0 <= self.eval_epsilon <= 1.0):
            raise ConfigError("eval_epsilon: must be in [0, 1]")
        if self.checkpoint_every < 1:
            raise ConfigError("checkpoint_every: must be >= 1")


_SECTIONS = {"env": EnvConfig, "attacker": AgentConfig, "defender": AgentConfig, "reward": RewardTable}


def to_dict(cfg: RunConfig) -> dict:
    """Nested plain-dict form of a RunConfig (JSON-ready)."""
    return dataclasses.asdict(cfg)


def from_dict(data: dict, path: str = "") -> RunConfig:
    """Rebuild a RunConfig from a nested dict, rejecting unknown keys by path."""
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected an object")
    cfg = RunConfig()
    top_fields = {f.name for f in fields(RunConfig)}
    for key, value in data.items():
        if key not in top_fields:
            raise ConfigError(f"unknown config key: {key}")
        if key in _SECTIONS:
            setattr(cfg, key, _section_from_dict(_SECTIONS[key], value, key))
        else:
            setattr(cfg, key, _coerce(getattr(cfg, key), value, key))
    return cfg


def _section_from_dict(cls, data, section: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{section}: expected an object")
    obj = cls() if cls is not AgentConfig or section != "defender" else defender_defaults()
    known = {f.name for f in fields(cls)}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown config key: {section}.{key}")
        setattr(obj, key, _coerce(getattr(obj, key), value, f"{section}.{key}"))
    return obj


def _coerce(current, value, path: str):
    """Coerce ``value`` to the type of ``current``, or raise naming ``path``."""
    if isinstance(current, bool):
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "false"):
            return value.lower() == "true"
        raise ConfigError(f"{path}: expected a boolean, got {value!r}")
    if isinstance(current, int):
        if isinstance(value, bool):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        if isinstance(value, str):
            try:
                return int(value)
            except ValueError:
                pass
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    if isinstance(current, float):
        if isinstance(value, bool):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        if isinstance(value, (int, float)):
            return float(value)
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                pass
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if isinstance(current, str):
        if isinstance(value, str):
            return value
        raise ConfigError(f"{path}: expected a string, got {value!r}")
    raise ConfigError(f"{path}: unsupported config value type")


def apply_override(cfg: RunConfig, dotted: str, raw: str) -> None:
    """Apply one ``section.key=value`` (or ``key=value``) override in place.

    Values are parsed as JSON literals when possible, otherwise kept as strings;
    the target key must already exist in the config.
    """
    try:
        value = json.loads(raw)
    except (json.JSONDecodeError, TypeError):
        value = raw
    parts = dotted.split(".")
    if len(parts) == 1:
        key = parts[0]
        if key in _SECTIONS or not hasattr(cfg, key) or key not in {f.name for f in fields(RunConfig)}:
            raise ConfigError(f"unknown config key: {dotted}")
        setattr(cfg, key, _coerce(getattr(cfg, key), value, key))
        return
    if len(parts) == 2 and parts[0] in _SECTIONS:
        section = getattr(cfg, parts[0])
        if parts[1] not in {f.name for f in fields(type(section))}:
            raise ConfigError(f"unknown config key: {dotted}")
        setattr(section, parts[1], _coerce(getattr(section, parts[1]), value, dotted))
        return
    raise ConfigError(f"unknown config key: {dotted}")


def parse_override_arg(arg: str) -> tuple[str, str]:
    """Split a ``key=value`` CLI argument."""
    if "=" not in arg:
        raise ConfigError(f"override must look like key=value, got {arg!r}")
    key, _, value = arg.partition("=")
    key = key.strip()
    if not key:
        raise ConfigError(f"override must look like key=value, got {arg!r}")
    return key, value


def canonical_json(cfg: RunConfig) -> str:
    """Stable serialized form used for files and hashing."""
    return json.dumps(to_dict(cfg), indent=2, sort_keys=True)


def config_hash(cfg: RunConfig) -> str:
    """Hash of the config with the output path masked out.

    Two runs that differ only in where they write are the same experiment.
    """
    data = to_dict(cfg)
    data.pop("out_dir", None)
    blob = json.dumps(data, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def default_run_config() -> RunConfig:
    return RunConfig()
