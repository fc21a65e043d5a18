"""Mock-policy hill-climb harness exercising the full reward stack.

The "policy" is an explicit noise model over a fixed target plan: isotropic
Gaussian jitter applied per wall junction (shared endpoints move together,
so jitter degrades IoU smoothly instead of instantly breaking closure) plus
an independent per-wall deletion coin (which does break validity, via the
dangling room reference). Both have closed-form log-densities, so exact
policy ratios are available for the surrogate objective.

Each iteration samples a group of candidates from the current center and
noise scale; candidate 0 is always the center itself (zero jitter, no
deletions), so with deterministic rewards the best-of-group trajectory is
non-decreasing by construction. The best candidate becomes the next center
and the noise scale contracts geometrically - a derivative-free analogue of
"reinforce what scored best".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import Floorplan, Point2
from .metrics import MatchConfig
from .reward import (
    DEFAULT_CLIP_EPS,
    DEFAULT_KL_BETA,
    GroupSample,
    RewardWeights,
    compute_reward,
    group_advantages,
    grpo_objective,
)
from .schema_io import emit
from .validator import validate

CSV_COLUMNS = ("iteration", "mean_reward", "best_reward", "alpha_mean", "validity_rate")


@dataclass(frozen=True)
class SimConfig:
    group_size: int = 8
    iterations: int = 30
    seed: int = 0
    sigma0: float = 6.0
    delete_p: float = 0.02
    noise_decay: float = 0.8  # applied only on stagnant iterations
    sigma_floor: float = 1e-3
    warmup_scale: float = 2.0  # initial displacement, in units of sigma0
    clip_eps: float = DEFAULT_CLIP_EPS
    beta: float = DEFAULT_KL_BETA
    weights: RewardWeights = RewardWeights()
    match: MatchConfig = MatchConfig()

    def __post_init__(self):
        if self.group_size < 2:
            raise ValueError("group_size must be >= 2")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be positive")
        if not 0.0 <= self.delete_p < 1.0:
            raise ValueError("delete_p must be in [0, 1)")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    mean_reward: float
    best_reward: float
    alpha_mean: float
    validity_rate: float
    objective: float
    sigma: float


def _junction_index(plan: Floorplan) -> tuple[list[tuple[float, float]], list[tuple[int, int]]]:
    """Unique endpoint coordinates and per-wall (start, end) indices."""
    index: dict[tuple[float, float], int] = {}
    refs = []
    for w in plan.walls:
        pair = []
        for p in (w.start, w.end):
            key = (p.x, p.y)
            if key not in index:
                index[key] = len(index)
            pair.append(index[key])
        refs.append((pair[0], pair[1]))
    junctions = [None] * len(index)
    for key, i in index.items():
        junctions[i] = key
    return junctions, refs


def _plan_from_junctions(
    base: Floorplan, refs, junctions: np.ndarray, deleted: frozenset[int]
) -> Floorplan:
    walls = []
    for i, w in enumerate(base.walls):
        if i in deleted:
            continue
        si, ei = refs[i]
        walls.append(
            replace(
                w,
                start=Point2(float(junctions[si, 0]), float(junctions[si, 1])),
                end=Point2(float(junctions[ei, 0]), float(junctions[ei, 1])),
            )
        )
    return replace(base, walls=tuple(walls))


def _gauss_logpdf(deltas: np.ndarray, sigma: float) -> float:
    n = deltas.size
    return float(-0.5 * np.sum((deltas / sigma) ** 2) - n * math.log(sigma * math.sqrt(2 * math.pi)))


def _candidate_logp(
    jitter: np.ndarray, deleted: frozenset[int], n_walls: int, sigma: float, p: float
) -> float:
    logp = _gauss_logpdf(jitter, sigma)
    if p > 0.0:
        logp += len(deleted) * math.log(p) + (n_walls - len(deleted)) * math.log(1.0 - p)
    return logp


def run_simulation(gt: Floorplan, cfg: SimConfig = SimConfig()) -> list[IterationRecord]:
    """Seeded hill-climb; one record per iteration."""
    rng = np.random.default_rng(cfg.seed)
    junctions0, refs = _junction_index(gt)
    base = np.asarray(junctions0, dtype=float)
    n_walls = len(gt.walls)

    # warm start: displace the target far enough that the climb is visible,
    # shrinking the displacement until the starting center is still valid
    scale = cfg.warmup_scale * cfg.sigma0
    center = base
    for _ in range(20):
        trial = base + rng.normal(0.0, scale, size=base.shape)
        plan = _plan_from_junctions(gt, refs, trial, frozenset())
        if validate(emit(plan)).is_valid:
            center = trial
            break
        scale *= 0.7

    sigma = cfg.sigma0
    records = []
    for it in range(cfg.iterations):
        jitters = [np.zeros_like(center)]
        deletions = [frozenset()]
        for _ in range(cfg.group_size - 1):
            jitters.append(rng.normal(0.0, sigma, size=center.shape))
            if cfg.delete_p > 0.0:
                mask = rng.random(n_walls) < cfg.delete_p
                deletions.append(frozenset(int(i) for i in np.nonzero(mask)[0]))
            else:
                deletions.append(frozenset())

        cands = [center + j for j in jitters]
        plans = [
            _plan_from_junctions(gt, refs, c, d) for c, d in zip(cands, deletions)
        ]
        texts = [emit(p) for p in plans]
        breakdowns = [
            compute_reward(t, gt, cfg.weights, cfg.match) for t in texts
        ]
        rewards = [b.total for b in breakdowns]
        advantages = group_advantages(rewards)

        best = max(range(len(rewards)), key=lambda i: (rewards[i], -i))
        new_center = cands[best]
        # contract the search radius only when nothing beat the carried-over
        # center, so the climb does not starve itself of step budget
        improved = best != 0
        new_sigma = sigma if improved else max(sigma * cfg.noise_decay, cfg.sigma_floor)

        samples = []
        for jitter, deleted, text, reward, adv, cand in zip(
            jitters, deletions, texts, rewards, advantages, cands
        ):
            logp_old = _candidate_logp(jitter, deleted, n_walls, sigma, cfg.delete_p)
            logp_new = _candidate_logp(
                cand - new_center, deleted, n_walls, new_sigma, cfg.delete_p
            )
            samples.append(GroupSample(text, reward, adv, logp_old, logp_new))
        objective = grpo_objective(samples, cfg.clip_eps, cfg.beta)

        records.append(
            IterationRecord(
                iteration=it,
                mean_reward=sum(rewards) / len(rewards),
                best_reward=max(rewards),
                alpha_mean=sum(b.alpha for b in breakdowns) / len(breakdowns),
                validity_rate=sum(b.r_val for b in breakdowns) / len(breakdowns),
                objective=objective,
                sigma=sigma,
            )
        )
        center = new_center
        sigma = new_sigma
    return records


def records_to_csv(records) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in records:
        lines.append(
            f"{r.iteration},{r.mean_reward:.6f},{r.best_reward:.6f},"
            f"{r.alpha_mean:.6f},{r.validity_rate:.6f}"
        )
    return "\n".join(lines) + "\n"
