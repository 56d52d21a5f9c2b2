"""World state and mechanics of the multi-port attack/defense game.

One timestep is the fixed cycle attacker action -> defender action ->
traffic advance -> terminal check. Actions have instantaneous effects;
the exploit stream and background traffic are continuous processes that
progress only inside :func:`advance_traffic`.

All randomness flows through one per-episode numpy Generator held on the
state, so identical (config, seed, action sequence) replays are
bit-identical across runs and platforms.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .config import ConfigError, EnvConfig
from .rewards import EventKind, RewardEvent


class ContractViolation(ValueError):
    """A caller broke an operation's precondition (bad index, wrong turn)."""


class Turn(Enum):
    ATTACKER = "attacker"
    DEFENDER = "defender"
    TRAFFIC = "traffic"


# ---------------------------------------------------------------------------
# Actions
# ---------------------------------------------------------------------------


class AttackerActionKind(Enum):
    SCAN = "scan"
    EXPLOIT = "exploit"
    CHANGE_IP = "change_ip"
    CANCEL_EXPLOIT = "cancel_exploit"


@dataclass(frozen=True)
class AttackerAction:
    kind: AttackerActionKind
    port: Optional[int] = None

    @classmethod
    def scan(cls, port: int) -> "AttackerAction":
        return cls(AttackerActionKind.SCAN, port)

    @classmethod
    def exploit(cls, port: int) -> "AttackerAction":
        return cls(AttackerActionKind.EXPLOIT, port)

    @classmethod
    def change_ip(cls) -> "AttackerAction":
        return cls(AttackerActionKind.CHANGE_IP)

    @classmethod
    def cancel(cls) -> "AttackerAction":
        return cls(AttackerActionKind.CANCEL_EXPLOIT)


class DefenderActionKind(Enum):
    WAIT = "wait"
    RATE_LIMIT_IP = "rate_limit_ip"
    RATE_LIMIT_PORT = "rate_limit_port"
    SET_TRAP = "set_trap"
    CLOSE_PORT = "close_port"


@dataclass(frozen=True)
class DefenderAction:
    kind: DefenderActionKind
    port: Optional[int] = None
    ip: Optional[int] = None

    @classmethod
    def wait(cls) -> "DefenderAction":
        return cls(DefenderActionKind.WAIT)

    @classmethod
    def rate_limit_ip(cls, ip: int) -> "DefenderAction":
        return cls(DefenderActionKind.RATE_LIMIT_IP, ip=ip)

    @classmethod
    def rate_limit_port(cls, port: int) -> "DefenderAction":
        return cls(DefenderActionKind.RATE_LIMIT_PORT, port=port)

    @classmethod
    def set_trap(cls, port: int) -> "DefenderAction":
        return cls(DefenderActionKind.SET_TRAP, port=port)

    @classmethod
    def close_port(cls, port: int) -> "DefenderAction":
        return cls(DefenderActionKind.CLOSE_PORT, port=port)


def attacker_action_count(config: EnvConfig) -> int:
    """Scan x N, Exploit x N, ChangeIp, CancelExploit."""
    return 2 * config.n_ports + 2


def attacker_action_from_index(config: EnvConfig, index: int) -> AttackerAction:
    n = config.n_ports
    if not 0 <= index < attacker_action_count(config):
        raise ContractViolation(f"attacker action index out of range: {index}")
    if index < n:
        return AttackerAction.scan(index)
    if index < 2 * n:
        return AttackerAction.exploit(index - n)
    if index == 2 * n:
        return AttackerAction.change_ip()
    return AttackerAction.cancel()


def attacker_action_index(config: EnvConfig, action: AttackerAction) -> int:
    n = config.n_ports
    if action.kind is AttackerActionKind.SCAN:
        return action.port
    if action.kind is AttackerActionKind.EXPLOIT:
        return n + action.port
    if action.kind is AttackerActionKind.CHANGE_IP:
        return 2 * n
    return 2 * n + 1


def defender_action_count(config: EnvConfig) -> int:
    """Wait, RateLimitIp x M, RateLimitPort x N, SetTrap x N, ClosePort x N."""
    return 1 + config.n_ips + 3 * config.n_ports


def defender_action_from_index(config: EnvConfig, index: int) -> DefenderAction:
    n, m = config.n_ports, config.n_ips
    if not 0 <= index < defender_action_count(config):
        raise ContractViolation(f"defender action index out of range: {index}")
    if index == 0:
        return DefenderAction.wait()
    index -= 1
    if index < m:
        return DefenderAction.rate_limit_ip(index)
    index -= m
    if index < n:
        return DefenderAction.rate_limit_port(index)
    index -= n
    if index < n:
        return DefenderAction.set_trap(index)
    return DefenderAction.close_port(index - n)


def defender_action_index(config: EnvConfig, action: DefenderAction) -> int:
    n, m = config.n_ports, config.n_ips
    if action.kind is DefenderActionKind.WAIT:
        return 0
    if action.kind is DefenderActionKind.RATE_LIMIT_IP:
        return 1 + action.ip
    if action.kind is DefenderActionKind.RATE_LIMIT_PORT:
        return 1 + m + action.port
    if action.kind is DefenderActionKind.SET_TRAP:
        return 1 + m + n + action.port
    return 1 + m + 2 * n + action.port


# ---------------------------------------------------------------------------
# State components
# ---------------------------------------------------------------------------

# Attacker scan-memory codes; the observation stores code / 3.
SCAN_UNKNOWN = 0
SCAN_NOT_VULNERABLE = 1
SCAN_VULNERABLE = 2
SCAN_VULNERABLE_ANOMALY = 3

# Attacker action-outcome codes for the short own-history feature.
OUTCOME_NONE = 0
OUTCOME_SCAN = 1
OUTCOME_EXPLOIT = 2
OUTCOME_CHANGE_IP = 3
OUTCOME_CANCEL = 4
OUTCOME_ILLEGAL = 5
N_OUTCOME_CODES = 6


@dataclass
class PortState:
    id: int
    vulnerable: bool
    threshold: int  # 0 for non-vulnerable ports
    open: bool = True
    trapped: bool = False
    rate_limited: bool = False


@dataclass
class IpState:
    id: int
    kind: str  # "benign" | "attacker"
    blacklisted: bool = False
    rate_limited: bool = False
    actions_since_acquired: int = 0  # meaningful for attacker IPs only


@dataclass
class ExploitStream:
    ip: int
    port: int
    counter: int = 0
    active: bool = True


class TerminalKind(Enum):
    ONGOING = "ongoing"
    ATTACKER_WIN = "attacker_win"
    DEFENDER_WIN = "defender_win"


REASON_ALL_VULN_CLOSED = "all-vuln-closed"
REASON_IPS_EXHAUSTED = "attacker-ips-exhausted"
REASON_SURVIVED = "survived-max-steps"


@dataclass(frozen=True)
class TerminalStatus:
    kind: TerminalKind
    reason: Optional[str] = None

    @property
    def is_terminal(self) -> bool:
        return self.kind is not TerminalKind.ONGOING

    def token(self) -> str:
        """Stable string for metrics files."""
        if self.kind is TerminalKind.ATTACKER_WIN:
            return "attacker_win"
        if self.kind is TerminalKind.DEFENDER_WIN:
            return f"defender_win:{self.reason}"
        return "ongoing"


ONGOING = TerminalStatus(TerminalKind.ONGOING)


@dataclass(frozen=True)
class ScanOutcome:
    port: int
    vulnerable: bool
    anomaly: bool


@dataclass
class TrafficSummary:
    """Per-timestep request accounting; generated = delivered + dropped holds per port."""

    generated: np.ndarray  # per-port totals, benign + exploit
    delivered: np.ndarray
    dropped: np.ndarray
    benign_generated: int = 0
    benign_delivered: int = 0
    benign_dropped: int = 0
    exploit_attempted: int = 0
    exploit_delivered: int = 0


@dataclass
class StepEvents:
    """Outcome of one attacker/defender/traffic call."""

    events: list = field(default_factory=list)
    illegal: bool = False
    scan: Optional[ScanOutcome] = None
    traffic: Optional[TrafficSummary] = None
    terminal: Optional[TerminalStatus] = None


@dataclass
class EnvState:
    config: EnvConfig
    seed: int
    rng: np.random.Generator
    step_count: int
    turn: Turn
    ports: list
    ips: list
    reserved_ips: list
    current_ip_slot: int
    stream: Optional[ExploitStream]
    exploit_counters: np.ndarray  # (n_ips, n_ports) int64
    scan_memory: np.ndarray  # (n_ports,) int8
    recent_outcomes: deque
    window: deque  # per-step (n_ports, n_ips) delivered matrices
    window_benign: deque  # per-step (generated, dropped) pairs
    win_sum: np.ndarray  # running sum of `window`
    win_benign_generated: int = 0
    win_benign_dropped: int = 0
    terminal_emitted: bool = False
    benign_ids: np.ndarray = None  # derived: benign IP indices, fixed per episode

    @property
    def current_ip(self) -> int:
        return self.reserved_ips[self.current_ip_slot]

    @property
    def vulnerable_ports(self) -> list:
        return [p for p in self.ports if p.vulnerable]

    def actions_on_current_ip(self) -> int:
        return self.ips[self.current_ip].actions_since_acquired


# ---------------------------------------------------------------------------
# Episode setup
# ---------------------------------------------------------------------------


def new_episode(config: EnvConfig, seed: int) -> EnvState:
    """Draw a fresh world: vulnerable subset, thresholds, attacker IP pool.

    Identical (config, seed) produce bit-identical states.
    """
    if not isinstance(config, EnvConfig):
        raise ConfigError("new_episode needs an EnvConfig")
    config.validate()
    rng = np.random.default_rng(seed)

    n_vuln = int(rng.integers(config.vulnerable_min, config.vulnerable_max + 1))
    vuln_set = set(rng.choice(config.n_ports, size=n_vuln, replace=False).tolist()) if n_vuln else set()
    ports = []
    for pid in range(config.n_ports):
        if pid in vuln_set:
            threshold = int(rng.integers(config.t_min, config.t_max + 1))
            ports.append(PortState(id=pid, vulnerable=True, threshold=threshold))
        else:
            ports.append(PortState(id=pid, vulnerable=False, threshold=0))

    # Reserved IPs come back in randomized usage order; the rest are benign.
    reserved = rng.choice(config.n_ips, size=config.attacker_ip_count, replace=False).tolist()
    reserved = [int(i) for i in reserved]
    reserved_set = set(reserved)
    ips = [
        IpState(id=i, kind="attacker" if i in reserved_set else "benign")
        for i in range(config.n_ips)
    ]

    return EnvState(
        config=config,
        seed=seed,
        rng=rng,
        step_count=0,
        turn=Turn.ATTACKER,
        ports=ports,
        ips=ips,
        reserved_ips=reserved,
        current_ip_slot=0,
        stream=None,
        exploit_counters=np.zeros((config.n_ips, config.n_ports), dtype=np.int64),
        scan_memory=np.zeros(config.n_ports, dtype=np.int8),
        recent_outcomes=deque([OUTCOME_NONE] * 5, maxlen=5),
        window=deque(),
        window_benign=deque(),
        win_sum=np.zeros((config.n_ports, config.n_ips), dtype=np.int64),
        benign_ids=np.array(
            [i for i in range(config.n_ips) if i not in reserved_set], dtype=np.intp
        ),
    )


def _require_ongoing(state: EnvState, expected: Turn) -> None:
    if state.turn is not expected:
        raise ContractViolation(f"it is the {state.turn.value}'s turn, not the {expected.value}'s")
    # A decided episode always has its terminal event emitted by the traffic
    # advance before the turn comes back around, so the flag is authoritative
    # here and spares a full terminal scan on every action.
    if state.terminal_emitted:
        raise ContractViolation("episode already terminal")


def _check_port(state: EnvState, port) -> int:
    if port is None or not 0 <= port < state.config.n_ports:
        raise ContractViolation(f"port index out of range: {port}")
    return port


def _check_ip(state: EnvState, ip) -> int:
    if ip is None or not 0 <= ip < state.config.n_ips:
        raise ContractViolation(f"ip index out of range: {ip}")
    return ip


# ---------------------------------------------------------------------------
# Attacker turn
# ---------------------------------------------------------------------------


def attacker_act(state: EnvState, action: AttackerAction) -> StepEvents:
    """Resolve one attacker action and pass the turn to the defender.

    Illegal choices (early IP change, exhausted IP pool, second exploit on
    another port) degrade to costed no-ops so exploration never crashes an
    episode; the events carry an ``illegal`` flag for the harness to count.
    """
    _require_ongoing(state, Turn.ATTACKER)
    cfg = state.config
    out = StepEvents()
    outcome_code = OUTCOME_ILLEGAL
    changed_ip = False

    if action.kind is AttackerActionKind.SCAN:
        port = _check_port(state, action.port)
        p = state.ports[port]
        out.events.append(RewardEvent(EventKind.SCAN_COST))
        # A closed port has no service left to probe.
        visible_vulnerable = p.vulnerable and p.open
        anomaly = False
        if p.trapped:
            anomaly = bool(state.rng.random() < cfg.trap_detect_prob)
        out.scan = ScanOutcome(port=port, vulnerable=visible_vulnerable, anomaly=anomaly)
        if visible_vulnerable:
            state.scan_memory[port] = SCAN_VULNERABLE_ANOMALY if anomaly else SCAN_VULNERABLE
        else:
            state.scan_memory[port] = SCAN_NOT_VULNERABLE
        outcome_code = OUTCOME_SCAN

    elif action.kind is AttackerActionKind.EXPLOIT:
        port = _check_port(state, action.port)
        if state.stream is not None and state.stream.port != port:
            out.events.append(RewardEvent(EventKind.EXPLOIT_ATTEMPT_COST))
            out.illegal = True
        elif state.stream is not None:
            # Re-issuing the running exploit changes nothing.
            outcome_code = OUTCOME_EXPLOIT
        else:
            ip = state.current_ip
            counter = int(state.exploit_counters[ip, port])
            state.stream = ExploitStream(ip=ip, port=port, counter=counter)
            outcome_code = OUTCOME_EXPLOIT

    elif action.kind is AttackerActionKind.CHANGE_IP:
        out.events.append(RewardEvent(EventKind.CHANGE_IP_COST))
        can_change = (
            state.actions_on_current_ip() >= cfg.ip_change_min_actions
            and state.current_ip_slot + 1 < len(state.reserved_ips)
        )
        if can_change:
            state.current_ip_slot += 1
            new_ip = state.current_ip
            state.ips[new_ip].actions_since_acquired = 0
            if state.stream is not None:
                # The per-(IP, port) counter starts over for the new source.
                state.exploit_counters[new_ip, state.stream.port] = 0
                state.stream.ip = new_ip
                state.stream.counter = 0
            changed_ip = True
            outcome_code = OUTCOME_CHANGE_IP
        else:
            out.illegal = True

    elif action.kind is AttackerActionKind.CANCEL_EXPLOIT:
        out.events.append(RewardEvent(EventKind.CANCEL_COST))
        if state.stream is not None:
            state.stream.active = False
            state.stream = None
        outcome_code = OUTCOME_CANCEL

    else:  # pragma: no cover - enum is closed
        raise ContractViolation(f"unknown attacker action: {action}")

    if not changed_ip:
        state.ips[state.current_ip].actions_since_acquired += 1
    if out.illegal:
        outcome_code = OUTCOME_ILLEGAL
    state.recent_outcomes.append(outcome_code)
    state.turn = Turn.DEFENDER
    return out


# ---------------------------------------------------------------------------
# Defender turn
# ---------------------------------------------------------------------------


def defender_act(state: EnvState, action: DefenderAction) -> StepEvents:
    """Resolve one defender action and pass the turn to the traffic advance.

    Acting on a closed port is an illegal no-op; re-applying an active
    defense is a plain no-op. Either way the action's cost is still paid.
    """
    _require_ongoing(state, Turn.DEFENDER)
    out = StepEvents()

    if action.kind is DefenderActionKind.WAIT:
        pass

    elif action.kind is DefenderActionKind.RATE_LIMIT_IP:
        ip = _check_ip(state, action.ip)
        out.events.append(RewardEvent(EventKind.RATE_LIMIT_IP_COST))
        state.ips[ip].rate_limited = True

    elif action.kind is DefenderActionKind.RATE_LIMIT_PORT:
        port = _check_port(state, action.port)
        out.events.append(RewardEvent(EventKind.RATE_LIMIT_PORT_COST))
        if not state.ports[port].open:
            out.illegal = True
        else:
            state.ports[port].rate_limited = True

    elif action.kind is DefenderActionKind.SET_TRAP:
        port = _check_port(state, action.port)
        out.events.append(RewardEvent(EventKind.TRAP_SET_COST))
        if not state.ports[port].open:
            out.illegal = True
        else:
            state.ports[port].trapped = True

    elif action.kind is DefenderActionKind.CLOSE_PORT:
        port = _check_port(state, action.port)
        out.events.append(RewardEvent(EventKind.CLOSE_PORT_COST))
        if not state.ports[port].open:
            out.illegal = True
        else:
            state.ports[port].open = False
            # Closing tears the service down, trap included.
            state.ports[port].trapped = False

    else:  # pragma: no cover - enum is closed
        raise ContractViolation(f"unknown defender action: {action}")

    state.turn = Turn.TRAFFIC
    return out


# ---------------------------------------------------------------------------
# Traffic
# ---------------------------------------------------------------------------


def _cap_vector(vec: np.ndarray, cap: int) -> np.ndarray:
    """Scale integer demands down to ``cap``, deterministically.

    Floor-proportional allocation, with the remaining allowance handed out
    one request at a time in ascending index order.
    """
    total = int(vec.sum())
    if total <= cap:
        return vec
    if cap <= 0:
        return np.zeros_like(vec)
    out = (vec * cap) // total
    rem = cap - int(out.sum())
    if rem > 0:
        spare = vec - out
        n = len(vec)
        idx = 0
        while rem > 0:
            if spare[idx] > 0:
                out[idx] += 1
                spare[idx] -= 1
                rem -= 1
            idx = (idx + 1) % n
    return out


def advance_traffic(state: EnvState) -> StepEvents:
    """Run one timestep of background traffic and exploit progression.

    Benign volume is drawn uniformly in [normal_req_min, normal_req_max] and
    spread uniformly over (benign IP, open port) cells; the active exploit
    stream attempts ``exploit_rate`` requests. Delivery drops everything to
    closed ports and from blacklisted IPs, then clips per-IP rate caps, then
    per-port caps. Each dropped benign request costs the defender one
    blocked-request event.
    """
    # The cycle always completes: a mid-step terminal (a closure that shut
    # the last vulnerable port) still gets its traffic advance, which is
    # where the terminal event is emitted.
    if state.turn is not Turn.TRAFFIC:
        raise ContractViolation(f"it is the {state.turn.value}'s turn, not the traffic advance")
    if state.terminal_emitted:
        raise ContractViolation("episode already terminal")
    cfg = state.config
    out = StepEvents()
    n_ports, n_ips = cfg.n_ports, cfg.n_ips

    generated = np.zeros((n_ports, n_ips), dtype=np.int64)
    volume = int(state.rng.integers(cfg.normal_req_min, cfg.normal_req_max + 1))
    open_idx = [p.id for p in state.ports if p.open]
    # Users keep addressing the service's ports even when every one is shut.
    target_idx = open_idx if open_idx else list(range(n_ports))
    benign_cols = state.benign_ids
    if volume > 0 and benign_cols.size:
        # Multinomial over uniform cells == bincount of iid uniform draws,
        # and the latter is much cheaper at these volumes.
        cells = benign_cols.size * len(target_idx)
        picks = state.rng.integers(cells, size=volume)
        counts = np.bincount(picks, minlength=cells)
        generated[np.ix_(target_idx, benign_cols)] = counts.reshape(
            len(target_idx), benign_cols.size
        )

    stream = state.stream
    stream_active = stream is not None and stream.active
    exploit_attempted = 0
    if stream_active:
        exploit_attempted = cfg.exploit_rate
        generated[stream.port, stream.ip] += exploit_attempted

    delivered = generated.copy()
    closed = [p.id for p in state.ports if not p.open]
    if closed:
        delivered[closed, :] = 0
    blacklisted = [ip.id for ip in state.ips if ip.blacklisted]
    if blacklisted:
        delivered[:, blacklisted] = 0
    limited_ips = [ip.id for ip in state.ips if ip.rate_limited]
    if limited_ips:
        col_totals = delivered.sum(axis=0)
        for q in limited_ips:
            if col_totals[q] > cfg.ip_rate_cap:
                delivered[:, q] = _cap_vector(delivered[:, q].copy(), cfg.ip_rate_cap)
    limited_ports = [p.id for p in state.ports if p.rate_limited and p.open]
    if limited_ports:
        row_totals = delivered.sum(axis=1)
        for r in limited_ports:
            if row_totals[r] > cfg.port_rate_cap:
                delivered[r] = _cap_vector(delivered[r].copy(), cfg.port_rate_cap)

    dropped = generated - delivered
    benign_dropped = int(dropped[:, benign_cols].sum()) if benign_cols.size else 0
    if benign_dropped > 0:
        out.events.append(RewardEvent(EventKind.BLOCKED_BENIGN_REQUEST, count=benign_dropped))

    exploit_delivered = 0
    if stream_active:
        exploit_delivered = int(delivered[stream.port, stream.ip])
        state.exploit_counters[stream.ip, stream.port] += exploit_delivered
        stream.counter = int(state.exploit_counters[stream.ip, stream.port])
        out.events.append(RewardEvent(EventKind.EXPLOIT_ATTEMPT_COST))
        if cfg.shaping and exploit_delivered > 0:
            out.events.append(
                RewardEvent(EventKind.PROGRESS_DELTA, amount=float(exploit_delivered))
            )
        # Reaching a trap is caught with the trap's detection probability.
        if exploit_delivered > 0 and state.ports[stream.port].trapped:
            if state.rng.random() < cfg.trap_detect_prob:
                out.events.append(RewardEvent(EventKind.TRAP_HIT))
                state.ips[stream.ip].blacklisted = True
                # The cut-off IP's exploit progress is neutralized with it;
                # otherwise a later resume from the dead IP could replay a
                # counter that already crossed its threshold.
                state.exploit_counters[stream.ip, :] = 0
                stream.active = False
                state.stream = None

    state.window.append(delivered)
    state.window_benign.append((volume, benign_dropped))
    state.win_sum += delivered
    state.win_benign_generated += volume
    state.win_benign_dropped += benign_dropped
    if len(state.window) > cfg.history_window:
        state.win_sum -= state.window.popleft()
        old_gen, old_drop = state.window_benign.popleft()
        state.win_benign_generated -= old_gen
        state.win_benign_dropped -= old_drop

    state.step_count += 1
    state.turn = Turn.ATTACKER

    out.traffic = TrafficSummary(
        generated=generated.sum(axis=1),
        delivered=delivered.sum(axis=1),
        dropped=dropped.sum(axis=1),
        benign_generated=volume,
        benign_delivered=volume - benign_dropped,
        benign_dropped=benign_dropped,
        exploit_attempted=exploit_attempted,
        exploit_delivered=exploit_delivered,
    )

    status = terminal_status(state)
    if status.is_terminal and not state.terminal_emitted:
        if status.kind is TerminalKind.ATTACKER_WIN:
            out.events.append(RewardEvent(EventKind.SUCCESSFUL_EXPLOIT))
        else:
            out.events.append(RewardEvent(EventKind.SUCCESSFUL_DEFENSE))
        state.terminal_emitted = True
        out.terminal = status
    return out


# ---------------------------------------------------------------------------
# Terminal detection
# ---------------------------------------------------------------------------


def terminal_status(state: EnvState) -> TerminalStatus:
    """Current outcome; the attacker's win takes precedence on coincidence."""
    stream = state.stream
    if stream is not None and stream.active:
        p = state.ports[stream.port]
        if p.open and p.vulnerable and stream.counter >= p.threshold:
            return TerminalStatus(TerminalKind.ATTACKER_WIN)
    vuln = state.vulnerable_ports
    if vuln and all(not p.open for p in vuln):
        return TerminalStatus(TerminalKind.DEFENDER_WIN, REASON_ALL_VULN_CLOSED)
    if all(state.ips[i].blacklisted for i in state.reserved_ips):
        return TerminalStatus(TerminalKind.DEFENDER_WIN, REASON_IPS_EXHAUSTED)
    if state.step_count >= state.config.max_steps:
        return TerminalStatus(TerminalKind.DEFENDER_WIN, REASON_SURVIVED)
    return ONGOING


# ---------------------------------------------------------------------------
# Introspection
# ---------------------------------------------------------------------------


def state_fingerprint(state: EnvState) -> str:
    """SHA-256 over the complete mutable state, RNG position included."""
    h = hashlib.sha256()

    def put(obj) -> None:
        h.update(json.dumps(obj, sort_keys=True, default=str).encode())

    put(dataclasses.asdict(state.config))
    put([state.seed, state.step_count, state.turn.value, state.current_ip_slot,
         state.terminal_emitted])
    put([[p.id, p.vulnerable, p.threshold, p.open, p.trapped, p.rate_limited]
         for p in state.ports])
    put([[ip.id, ip.kind, ip.blacklisted, ip.rate_limited, ip.actions_since_acquired]
         for ip in state.ips])
    put(state.reserved_ips)
    put([state.stream.ip, state.stream.port, state.stream.counter, state.stream.active]
        if state.stream else None)
    h.update(state.exploit_counters.tobytes())
    h.update(state.scan_memory.tobytes())
    put(list(state.recent_outcomes))
    for step in state.window:
        h.update(step.tobytes())
    put(list(state.window_benign))
    h.update(state.win_sum.tobytes())
    put([state.win_benign_generated, state.win_benign_dropped])
    put(state.rng.bit_generator.state)
    return h.hexdigest()
