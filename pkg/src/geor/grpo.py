"""Group-relative advantages and vanishing-advantage diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

ADV_EPS = 1e-6


@dataclass(frozen=True)
class CandidateGroup:
    """Responses sampled for one query, each paired with its scalar reward."""

    query_id: Hashable
    candidates: tuple[tuple[str, float], ...]

    def __post_init__(self):
        cands = tuple((str(t), float(r)) for t, r in self.candidates)
        if len(cands) < 2:
            raise ValueError(f"group needs at least 2 candidates, got {len(cands)}")
        for _, r in cands:
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"reward {r} outside [0, 1]")
        object.__setattr__(self, "candidates", cands)

    @classmethod
    def from_rewards(cls, rewards: Sequence[float], query_id: Hashable = None) -> "CandidateGroup":
        return cls(query_id, tuple(("", r) for r in rewards))

    @property
    def group_size(self) -> int:
        return len(self.candidates)

    @property
    def rewards(self) -> np.ndarray:
        return np.array([r for _, r in self.candidates], dtype=float)


@dataclass(frozen=True)
class AdvantageSet:
    advantages: np.ndarray = field(repr=False)
    reward_mean: float
    reward_std: float
    degenerate: bool


def group_advantages(group: CandidateGroup, eps: float = ADV_EPS) -> AdvantageSet:
    """Z-score the group's rewards with the population std.

    Groups whose std falls below ``eps`` are flagged degenerate and get
    exactly-zero advantages.
    """
    if not isinstance(group, CandidateGroup):
        group = CandidateGroup.from_rewards(group)
    r = group.rewards
    mean = float(r.mean())
    std = float(r.std())
    if std < eps:
        return AdvantageSet(np.zeros_like(r), mean, std, True)
    return AdvantageSet((r - mean) / (std + eps), mean, std, False)


def vanishing_advantage_rate(groups: Sequence[CandidateGroup], eps: float = ADV_EPS) -> float:
    """Fraction of groups whose advantages are all zero."""
    if len(groups) == 0:
        raise ValueError("need at least one group")
    return sum(group_advantages(g, eps).degenerate for g in groups) / len(groups)


@dataclass(frozen=True)
class VarianceSummary:
    per_group: np.ndarray
    mean: float


def group_reward_variance(groups: Sequence[CandidateGroup]) -> VarianceSummary:
    if len(groups) == 0:
        raise ValueError("need at least one group")
    per_group = np.array([g.rewards.var() for g in groups])
    return VarianceSummary(per_group, float(per_group.mean()))
