"""Toy coordinate policy trained with composite rewards and group advantages.

Each query owns an independent diagonal Gaussian over (lat, lon) in
degrees. An iteration samples a group per query, renders every draw as
``(lat, lon)`` text, scores it with :func:`geor.reward.composite_reward`,
normalises rewards within the group and applies a score-function step.
There is no clipping and no KL term.

By default the mean step is scaled by ``sigma**2`` (the inverse Fisher
information for a Gaussian mean). The plain gradient moves the mean by
``lr * z / sigma`` degrees, which diverges once the policy tightens to the
sub-kilometre scale where saturation happens. The log-std gradient is
already scale-free and is used as is.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .coords import render_pair
from .geodesy import GeoCoord, destination, wrap_lon
from .grpo import AdvantageSet, CandidateGroup, group_advantages, group_reward_variance
from .reward import composite_reward

LOG_STD_MIN = -20.0
LOG_STD_MAX = math.log(90.0)
_LOG_2PI = math.log(2.0 * math.pi)


def log_density(x, mean, log_std) -> float:
    """Log-density of a diagonal Gaussian, summed over dimensions."""
    x, mean, log_std = (np.asarray(a, dtype=float) for a in (x, mean, log_std))
    z = (x - mean) / np.exp(log_std)
    return float(np.sum(-0.5 * z * z - log_std - 0.5 * _LOG_2PI))


def log_density_grad(x, mean, log_std) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of :func:`log_density` w.r.t. ``mean`` and ``log_std``."""
    x, mean, log_std = (np.asarray(a, dtype=float) for a in (x, mean, log_std))
    var = np.exp(2.0 * log_std)
    diff = x - mean
    return diff / var, diff * diff / var - 1.0


@dataclass
class ToyPolicy:
    mean: np.ndarray
    log_std: np.ndarray
    learning_rate: float = 0.05
    rng_seed: int = 0
    natural_gradient: bool = True
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.mean = np.array(self.mean, dtype=float).reshape(-1, 2)
        self.log_std = np.array(self.log_std, dtype=float).reshape(-1, 2)
        if self.mean.shape != self.log_std.shape:
            raise ValueError("mean and log_std must have the same shape")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        self.rng = np.random.default_rng(self.rng_seed)

    @property
    def n_queries(self) -> int:
        return len(self.mean)

    @property
    def std(self) -> np.ndarray:
        return np.exp(self.log_std)


@dataclass(frozen=True)
class SampledGroup:
    group: CandidateGroup
    actions: np.ndarray  # raw (G, 2) draws, before clipping/wrapping


def to_coord(lat: float, lon: float) -> GeoCoord:
    return GeoCoord(min(max(lat, -90.0), 90.0), wrap_lon(lon))


def sample_candidates(policy: ToyPolicy, query: int, truth: GeoCoord, group_size: int = 8) -> SampledGroup:
    if group_size < 2:
        raise ValueError("group_size must be >= 2")
    draws = policy.mean[query] + policy.std[query] * policy.rng.standard_normal((group_size, 2))
    cands = []
    for lat, lon in draws:
        text = render_pair(to_coord(lat, lon), 4)
        cands.append((text, composite_reward(text, truth).r_total))
    return SampledGroup(CandidateGroup(query, tuple(cands)), draws)


def score_gradient_step(policy: ToyPolicy, sampled: SampledGroup, advantages: AdvantageSet) -> ToyPolicy:
    """In-place REINFORCE step on the query the group was drawn for.

    Degenerate groups leave the parameters untouched.
    """
    adv = np.asarray(advantages.advantages, dtype=float)
    if len(adv) != len(sampled.actions) or len(adv) != sampled.group.group_size:
        raise ValueError("advantages and sampled group are misaligned")
    if advantages.degenerate:
        return policy
    q = sampled.group.query_id
    g_mean, g_log_std = log_density_grad(sampled.actions, policy.mean[q], policy.log_std[q])
    step_mean = np.mean(adv[:, None] * g_mean, axis=0)
    step_log_std = np.mean(adv[:, None] * g_log_std, axis=0)
    if policy.natural_gradient:
        step_mean = step_mean * np.exp(2.0 * policy.log_std[q])
    policy.mean[q] += policy.learning_rate * step_mean
    policy.log_std[q] += policy.learning_rate * step_log_std
    policy.log_std[q] = np.clip(policy.log_std[q], LOG_STD_MIN, LOG_STD_MAX)
    policy.mean[q, 0] = min(max(policy.mean[q, 0], -90.0), 90.0)
    policy.mean[q, 1] = wrap_lon(policy.mean[q, 1])
    return policy


@dataclass(frozen=True)
class SimQuery:
    truth: GeoCoord
    tag: str = "easy"

    def __post_init__(self):
        if self.tag not in ("easy", "hard"):
            raise ValueError(f"tag must be 'easy' or 'hard', got {self.tag!r}")


@dataclass(frozen=True)
class SimConfig:
    iters: int = 200
    group_size: int = 8
    seed: int = 0
    lr: float = 0.05
    easy_offset_km: float = 0.02
    easy_std_deg: float = 5e-4
    hard_offset_km: float = 4000.0
    hard_std_deg: float = 10.0
    natural_gradient: bool = True


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    mean_reward: float
    vanishing_rate: float
    mean_group_variance: float


@dataclass
class SimTrace:
    config: SimConfig
    entries: list[TraceEntry] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(e, name) for e in self.entries])

    def to_rows(self) -> list[dict]:
        cfg = asdict(self.config)
        return [{**asdict(e), "config": cfg} for e in self.entries]


def init_policy(queries: Sequence[SimQuery], config: SimConfig) -> ToyPolicy:
    """Easy queries start ``easy_offset_km`` from the truth, hard ones far away."""
    rng = np.random.default_rng([config.seed, 1])
    means, log_stds = [], []
    for q in queries:
        offset, std = (
            (config.easy_offset_km, config.easy_std_deg) if q.tag == "easy"
            else (config.hard_offset_km, config.hard_std_deg)
        )
        start = destination(q.truth, float(rng.uniform(0.0, 360.0)), offset)
        means.append((start.lat_deg, start.lon_deg))
        log_stds.append((math.log(std), math.log(std)))
    return ToyPolicy(np.array(means), np.array(log_stds), config.lr, config.seed, config.natural_gradient)


def simulate_training(
    queries: Sequence[SimQuery],
    config: SimConfig = SimConfig(),
    policy: ToyPolicy | None = None,
) -> SimTrace:
    """Run ``config.iters`` sample/score/normalise/update rounds over all queries."""
    if len(queries) == 0:
        raise ValueError("need at least one query")
    if policy is None:
        policy = init_policy(queries, config)
    trace = SimTrace(config)
    for it in range(config.iters):
        groups, n_degenerate = [], 0
        for qi, q in enumerate(queries):
            sampled = sample_candidates(policy, qi, q.truth, config.group_size)
            adv = group_advantages(sampled.group)
            score_gradient_step(policy, sampled, adv)
            groups.append(sampled.group)
            n_degenerate += adv.degenerate
        rewards = np.concatenate([g.rewards for g in groups])
        trace.entries.append(TraceEntry(
            iteration=it,
            mean_reward=float(rewards.mean()),
            vanishing_rate=n_degenerate / len(groups),
            mean_group_variance=group_reward_variance(groups).mean,
        ))
    return trace
