"""Mapping from step events to the (attacker, defender) reward pair.

Only the three mirrored events (successful exploit, trap hit, successful
defense) are strictly zero-sum; every other event is a private cost to the
side that caused it and contributes zero to the opponent.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Union

from .config import RewardTable

DEFAULT_REWARDS = RewardTable()


class EventKind(Enum):
    SUCCESSFUL_EXPLOIT = "successful_exploit"
    TRAP_HIT = "trap_hit"
    SUCCESSFUL_DEFENSE = "successful_defense"
    SCAN_COST = "scan_cost"
    EXPLOIT_ATTEMPT_COST = "exploit_attempt_cost"
    CANCEL_COST = "cancel_cost"
    CHANGE_IP_COST = "change_ip_cost"
    RATE_LIMIT_IP_COST = "rate_limit_ip_cost"
    RATE_LIMIT_PORT_COST = "rate_limit_port_cost"
    CLOSE_PORT_COST = "close_port_cost"
    TRAP_SET_COST = "trap_set_cost"
    BLOCKED_BENIGN_REQUEST = "blocked_benign_request"
    PROGRESS_DELTA = "progress_delta"


# Events whose attacker/defender contributions are exact negatives of each other.
MIRRORED_KINDS = frozenset(
    {EventKind.SUCCESSFUL_EXPLOIT, EventKind.TRAP_HIT, EventKind.SUCCESSFUL_DEFENSE}
)


@dataclass(frozen=True)
class RewardEvent:
    """One scoreable outcome of a timestep.

    ``count`` collapses repeated per-request events (blocked benign traffic)
    into a single record; ``amount`` carries the payload of PROGRESS_DELTA
    (delivered exploit requests this timestep) and is ignored elsewhere.
    """

    kind: EventKind
    count: int = 1
    amount: float = 0.0


@dataclass(frozen=True)
class RewardPair:
    attacker: float
    defender: float

    def __add__(self, other: "RewardPair") -> "RewardPair":
        return RewardPair(self.attacker + other.attacker, self.defender + other.defender)


ZERO_PAIR = RewardPair(0.0, 0.0)

EventsLike = Union["StepEvents", Iterable[RewardEvent]]  # noqa: F821 - env owns StepEvents


def score_events(
    events: EventsLike,
    shaping: bool = False,
    table: RewardTable = DEFAULT_REWARDS,
) -> RewardPair:
    """Sum per-event contributions into one (attacker, defender) pair.

    Accepts either a StepEvents carrier or any iterable of RewardEvent.
    With ``shaping`` off, PROGRESS_DELTA events score zero.
    """
    event_list = getattr(events, "events", events)
    att = 0.0
    dfn = 0.0
    for ev in event_list:
        n = ev.count
        kind = ev.kind
        if kind is EventKind.SUCCESSFUL_EXPLOIT:
            att += table.successful_exploit * n
            dfn -= table.successful_exploit * n
        elif kind is EventKind.TRAP_HIT:
            att -= table.trap_hit * n
            dfn += table.trap_hit * n
        elif kind is EventKind.SUCCESSFUL_DEFENSE:
            att -= table.successful_defense * n
            dfn += table.successful_defense * n
        elif kind is EventKind.SCAN_COST:
            att += table.scan_cost * n
        elif kind is EventKind.EXPLOIT_ATTEMPT_COST:
            att += table.exploit_attempt_cost * n
        elif kind is EventKind.CANCEL_COST:
            att += table.cancel_cost * n
        elif kind is EventKind.CHANGE_IP_COST:
            att += table.change_ip_cost * n
        elif kind is EventKind.RATE_LIMIT_IP_COST:
            dfn += table.rate_limit_ip_cost * n
        elif kind is EventKind.RATE_LIMIT_PORT_COST:
            dfn += table.rate_limit_port_cost * n
        elif kind is EventKind.CLOSE_PORT_COST:
            dfn += table.close_port_cost * n
        elif kind is EventKind.TRAP_SET_COST:
            dfn += table.trap_set_cost * n
        elif kind is EventKind.BLOCKED_BENIGN_REQUEST:
            dfn += table.blocked_benign_cost * n
        elif kind is EventKind.PROGRESS_DELTA:
            if shaping:
                att += ev.amount * table.shaping_coeff * n
        else:  # pragma: no cover - enum is closed
            raise ValueError(f"unknown event kind: {kind}")
    return RewardPair(att, dfn)


def mirrored_only(events: EventsLike) -> list[RewardEvent]:
    """The subset of events subject to the strict zero-sum identity."""
    event_list = getattr(events, "events", events)
    return [ev for ev in event_list if ev.kind in MIRRORED_KINDS]
