"""Per-side observation vectors and their discretization.

Both sides see normalized float vectors in [0, 1]. A layout object
describes each named block (size, categorical level count or continuous),
which is what the tabular learner uses to discretize and what gets
serialized next to run artifacts so downstream consumers can decode
vectors without touching this package's internals.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .config import EnvConfig
from .env import EnvState, N_OUTCOME_CODES

# Continuous features bin into three buckets: low / medium / high.
BIN_EDGES = (1.0 / 3.0, 2.0 / 3.0)


@dataclass(frozen=True)
class FeatureBlock:
    name: str
    size: int
    kind: str  # "categorical" | "continuous"
    levels: Optional[int] = None  # set for categorical blocks


@dataclass(frozen=True)
class ObservationLayout:
    side: str
    blocks: tuple

    @property
    def dim(self) -> int:
        return sum(b.size for b in self.blocks)

    def slices(self) -> dict:
        out, start = {}, 0
        for b in self.blocks:
            out[b.name] = slice(start, start + b.size)
            start += b.size
        return out

    def block(self, name: str) -> FeatureBlock:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def describe(self) -> dict:
        return {
            "side": self.side,
            "dim": self.dim,
            "bin_edges": list(BIN_EDGES),
            "features": [
                {"name": b.name, "size": b.size, "kind": b.kind, "levels": b.levels}
                for b in self.blocks
            ],
        }

    @cached_property
    def _codec(self):
        """Per-entry decode constants: (categorical mask, levels-1 scale)."""
        cat = np.zeros(self.dim, dtype=bool)
        scale = np.zeros(self.dim)
        i = 0
        for b in self.blocks:
            if b.kind == "categorical":
                cat[i:i + b.size] = True
                scale[i:i + b.size] = b.levels - 1
            i += b.size
        return cat, scale

    def discretize(self, vec: np.ndarray) -> tuple:
        """Vector -> hashable key: categorical entries recover their code,
        continuous entries fall into one of three bins."""
        if len(vec) != self.dim:
            raise ValueError(f"expected dim {self.dim}, got {len(vec)}")
        cat, scale = self._codec
        lo, hi = BIN_EDGES
        out = (vec >= lo).astype(np.int64) + (vec >= hi)
        out[cat] = np.rint(vec[cat] * scale[cat]).astype(np.int64)
        return tuple(out.tolist())


def attacker_layout(config: EnvConfig) -> ObservationLayout:
    return ObservationLayout(
        side="attacker",
        blocks=(
            FeatureBlock("scan_result", config.n_ports, "categorical", 4),
            FeatureBlock("exploit_progress", config.n_ports, "continuous"),
            FeatureBlock("ip_blacklisted", 1, "categorical", 2),
            FeatureBlock("actions_since_ip_change", 1, "continuous"),
            FeatureBlock("recent_outcomes", 5, "categorical", N_OUTCOME_CODES),
        ),
    )


def defender_layout(config: EnvConfig) -> ObservationLayout:
    return ObservationLayout(
        side="defender",
        blocks=(
            FeatureBlock("port_volume", config.n_ports, "continuous"),
            FeatureBlock("port_top_ip_share", config.n_ports, "continuous"),
            FeatureBlock("port_rate_limited", config.n_ports, "categorical", 2),
            FeatureBlock("port_trapped", config.n_ports, "categorical", 2),
            FeatureBlock("port_closed", config.n_ports, "categorical", 2),
            FeatureBlock("top_ip_volume", 3, "continuous"),
            FeatureBlock("benign_drop_fraction", 1, "continuous"),
        ),
    )


def attacker_observe(state: EnvState) -> np.ndarray:
    """What the attacker knows: its scan memory, its own stream's progress
    from the current source IP, and a short history of its action outcomes."""
    cfg = state.config
    n = cfg.n_ports
    out = np.empty(2 * n + 7)
    out[:n] = state.scan_memory
    out[:n] /= 3.0
    np.clip(
        state.exploit_counters[state.current_ip] / cfg.t_max, 0.0, 1.0, out=out[n:2 * n]
    )
    out[2 * n] = float(state.ips[state.current_ip].blacklisted)
    denom = cfg.ip_change_min_actions
    out[2 * n + 1] = (
        min(state.actions_on_current_ip() / denom, 1.0) if denom > 0 else 1.0
    )
    out[2 * n + 2:] = state.recent_outcomes
    out[2 * n + 2:] /= N_OUTCOME_CODES - 1
    return out


def defender_observe(state: EnvState) -> np.ndarray:
    """What the defender monitors: windowed per-port request rates and
    per-port source concentration, its own countermeasure flags, the
    heaviest source IPs against the per-IP budget, and collateral damage
    to benign traffic.

    Port volume is a fraction of the window's absolute capacity
    (port_rate_cap × history_window); the top-IP volumes are per-step rates
    against the per-IP budget, which keeps them steady while the window
    fills."""
    cfg = state.config
    n = cfg.n_ports
    out = np.zeros(5 * n + 4)
    steps = max(len(state.window), 1)
    per_port = state.win_sum.sum(axis=1).astype(np.float64)
    norm = float(cfg.port_rate_cap * cfg.history_window)
    if norm > 0:
        np.clip(per_port / norm, 0.0, 1.0, out=out[:n])
    busy = per_port > 0
    if busy.any():
        out[n:2 * n][busy] = state.win_sum.max(axis=1)[busy] / per_port[busy]
    for p in state.ports:
        out[2 * n + p.id] = p.rate_limited
        out[3 * n + p.id] = p.trapped
        out[4 * n + p.id] = not p.open

    per_ip = state.win_sum.sum(axis=0).astype(np.float64)
    if cfg.ip_rate_cap > 0 and per_ip.any():
        order = np.argsort(-per_ip, kind="stable")[:3]
        np.clip(
            per_ip[order] / (steps * cfg.ip_rate_cap), 0.0, 1.0,
            out=out[5 * n:5 * n + 3],
        )
    if state.win_benign_generated > 0:
        out[5 * n + 3] = state.win_benign_dropped / state.win_benign_generated
    return out
