"""Adversarial attack/defense simulation of a multi-port host, with
tabular and neural Q-learning agents and a reproducible self-play harness.
"""

from .config import (
    AgentConfig,
    ConfigError,
    EnvConfig,
    RewardTable,
    RunConfig,
    apply_override,
    attacker_defaults,
    canonical_json,
    config_hash,
    default_run_config,
    defender_defaults,
    from_dict,
    to_dict,
)
from .env import (
    AttackerAction,
    AttackerActionKind,
    ContractViolation,
    DefenderAction,
    DefenderActionKind,
    EnvState,
    ScanOutcome,
    StepEvents,
    TerminalKind,
    TerminalStatus,
    TrafficSummary,
    Turn,
    advance_traffic,
    attacker_act,
    attacker_action_count,
    attacker_action_from_index,
    attacker_action_index,
    defender_act,
    defender_action_count,
    defender_action_from_index,
    defender_action_index,
    new_episode,
    state_fingerprint,
    terminal_status,
)
from .observe import (
    ObservationLayout,
    attacker_layout,
    attacker_observe,
    defender_layout,
    defender_observe,
)
from .rewards import (
    EventKind,
    RewardEvent,
    RewardPair,
    mirrored_only,
    score_events,
)
from .agents import (
    DQNAgent,
    EpsilonSchedule,
    MLP,
    ReplayBuffer,
    TabularQAgent,
    q_loss_and_grads,
    select_action,
)
from .trainer import (
    EpisodeStats,
    EvalReport,
    FixedPortExploiter,
    IdleDefender,
    PortCloser,
    RandomAttacker,
    RandomDefender,
    TrainingLog,
    TrapLayer,
    evaluate,
    make_agent,
    moving_average,
    run_episode,
    train,
)

__version__ = "0.1.0"
