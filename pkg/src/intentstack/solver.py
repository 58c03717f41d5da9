"""Offline point-based POMDP solver.

Maintains a lower bound on the optimal value function as a set of alpha
vectors and an upper bound as a sawtooth interpolation over corner values
plus sampled belief points.  Beliefs reachable from the initial belief are
sampled by descending the action that maximizes the upper bound and the
observation that maximizes gap-weighted excess uncertainty; point-based
backups along the sampled path tighten both bounds until the gap at the root
closes to the target or the budget runs out.

The sampler contains no randomness, so identical inputs give identical
policies; the config seed is reserved for stochastic sampling variants and
for callers that fan out evaluation rollouts.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .pomdp import (
    AlphaVector,
    PolicySet,
    PomdpModel,
    observation_distribution,
    value,
)

_FIXED_POINT_TOL = 1e-6
_PRUNE_PERIOD = 50
_MAX_WITNESSES = 2000


@dataclass(frozen=True)
class SolverConfig:
    """Termination and budget knobs for solve().

    epsilon is the target upper-minus-lower gap at the root, in reward units.
    At least one of max_backups / max_seconds must be finite.
    """

    epsilon: float = 0.5
    max_backups: int | None = 20000
    max_seconds: float | None = 60.0
    seed: int = 0
    max_depth: int = 200

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be > 0")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.max_backups is None and self.max_seconds is None:
            raise ValueError("need a finite max_backups or max_seconds budget")


@dataclass
class SolveStats:
    root_lower: float
    root_upper: float
    backups_done: int
    beliefs_sampled: int
    elapsed: float
    converged: bool

    def __post_init__(self):
        if self.root_lower > self.root_upper + 1e-6:
            raise ValueError(
                f"root_lower {self.root_lower} exceeds root_upper {self.root_upper}"
            )

    def to_dict(self) -> dict:
        return {
            "root_lower": self.root_lower,
            "root_upper": self.root_upper,
            "backups_done": self.backups_done,
            "beliefs_sampled": self.beliefs_sampled,
            "elapsed": self.elapsed,
            "converged": self.converged,
        }


def blind_lower_bound(model: PomdpModel) -> PolicySet:
    """One alpha vector per action: the value of repeating that action forever.

    Each vector is the fixed point of
    ``alpha_a(s) = R(s, a) + discount * sum_s' T(s'|s,a) alpha_a(s')``,
    obtained by solving the linear system directly, so it sits within
    floating-point error of the fixed point and is a valid lower bound.
    """
    n = len(model.states)
    eye = np.eye(n)
    vectors = []
    for ai, a in enumerate(model.actions):
        alpha = np.linalg.solve(eye - model.discount * model.transition[ai], model.reward[:, ai])
        vectors.append(AlphaVector(values=alpha, action=a))
    return PolicySet(vectors)


def mdp_upper_bound(model: PomdpModel) -> np.ndarray:
    """Value of the fully observable relaxation, by value iteration to 1e-6.

    Pointwise dominates every POMDP alpha vector at the belief corners.
    """
    n = len(model.states)
    v = np.zeros(n)
    while True:
        q = model.reward.T + model.discount * (model.transition @ v)
        v_next = q.max(axis=0)
        if float(np.max(np.abs(v_next - v))) <= _FIXED_POINT_TOL:
            return v_next
        v = v_next


class _Vectors:
    """Alpha-vector matrix with amortized growth; rows are vectors."""

    def __init__(self, matrix: np.ndarray, action_indices):
        matrix = np.asarray(matrix, dtype=float)
        self.n, self.dim = matrix.shape
        self._mat = np.empty((max(4 * self.n, 64), self.dim))
        self._mat[: self.n] = matrix
        self.action_indices = list(action_indices)

    @property
    def matrix(self) -> np.ndarray:
        return self._mat[: self.n]

    def add(self, vector: np.ndarray, action_index: int) -> None:
        if self.n == self._mat.shape[0]:
            grown = np.empty((2 * self.n, self.dim))
            grown[: self.n] = self._mat[: self.n]
            self._mat = grown
        self._mat[self.n] = vector
        self.action_indices.append(action_index)
        self.n += 1

    def value(self, b: np.ndarray) -> float:
        return float(np.max(self.matrix @ b))

    def values(self, beliefs: np.ndarray) -> np.ndarray:
        return (beliefs @ self.matrix.T).max(axis=1)

    def keep(self, indices) -> None:
        indices = sorted(indices)
        self._mat[: len(indices)] = self._mat[indices]
        self.action_indices = [self.action_indices[i] for i in indices]
        self.n = len(indices)


class SawtoothBound:
    """Upper bound on V*: corner values plus sampled interior points.

    The value at a belief is the corner interpolation lowered by the best
    sampled point's improvement, scaled by how far the belief can be moved
    toward that point inside the simplex (the standard sawtooth projection).
    """

    def __init__(self, corner_values: np.ndarray):
        self.corner = np.asarray(corner_values, dtype=float)
        dim = len(self.corner)
        self._points = np.empty((64, dim))
        self._values = np.empty(64)
        self._n = 0

    @property
    def points(self) -> list[tuple[np.ndarray, float]]:
        return [(self._points[i].copy(), float(self._values[i])) for i in range(self._n)]

    def values(self, beliefs: np.ndarray) -> np.ndarray:
        beliefs = np.atleast_2d(np.asarray(beliefs, dtype=float))
        base = beliefs @ self.corner
        if self._n == 0:
            return base
        points = self._points[: self._n]
        drop = self._values[: self._n] - points @ self.corner
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = beliefs[:, None, :] / points[None, :, :]
        ratios = np.where(points[None, :, :] > 0.0, ratios, np.inf)
        ratio = ratios.min(axis=2)
        best_drop = (ratio * drop[None, :]).min(axis=1)
        return base + np.minimum(best_drop, 0.0)

    def value(self, b) -> float:
        return float(self.values(np.asarray(b, dtype=float)[None, :])[0])

    def add_point(self, b, v: float) -> None:
        if v >= self.value(b) - 1e-12:
            return
        if self._n == self._points.shape[0]:
            grown_p = np.empty((2 * self._n, self._points.shape[1]))
            grown_p[: self._n] = self._points[: self._n]
            grown_v = np.empty(2 * self._n)
            grown_v[: self._n] = self._values[: self._n]
            self._points, self._values = grown_p, grown_v
        self._points[self._n] = b
        self._values[self._n] = v
        self._n += 1

    def prune(self) -> None:
        """Drop points already implied by the corner values and kept points.

        Greedy sweep from the strongest improvement down, so of two points
        that imply each other (duplicated beliefs in particular) exactly one
        survives.  A point implied at its own belief by a single kept point
        is dominated by it everywhere, so dropping it never loosens the
        bound.
        """
        n = self._n
        if n < 2:
            return
        points = self._points[:n].copy()
        values = self._values[:n].copy()
        drop = values - points @ self.corner
        kept: list[int] = []
        for i in np.lexsort((np.arange(n), drop)):
            if drop[i] >= -1e-12:
                continue
            if kept:
                held = points[kept]
                with np.errstate(divide="ignore", invalid="ignore"):
                    ratios = np.where(held > 0.0, points[i][None, :] / held, np.inf)
                implied = float((ratios.min(axis=1) * drop[kept]).min())
                if implied <= drop[i] + 1e-12:
                    continue
            kept.append(i)
        kept.sort()
        self._points[: len(kept)] = points[kept]
        self._values[: len(kept)] = values[kept]
        self._n = len(kept)


def _backup_raw(model: PomdpModel, mat: np.ndarray, b: np.ndarray):
    """Point-based backup against an alpha matrix; returns (vector, action index)."""
    gamma = model.discount
    best_vec = None
    best_val = -math.inf
    best_ai = -1
    for ai in range(len(model.actions)):
        new_alpha = model.reward[:, ai].copy()
        t_a = model.transition[ai]
        o_a = model.observation_fn[ai]
        for zi in range(len(model.observations)):
            # projected[k, s] = sum_s' T(s'|s,a) O(z|s',a) alpha_k(s')
            projected = mat @ (t_a * o_a[np.newaxis, :, zi]).T
            k_star = int(np.argmax(projected @ b))
            new_alpha += gamma * projected[k_star]
        val = float(new_alpha @ b)
        if val > best_val:
            best_val = val
            best_vec = new_alpha
            best_ai = ai
    return best_vec, best_ai


def backup(model: PomdpModel, policy: PolicySet, b) -> AlphaVector:
    """Point-based Bellman backup of the policy at one belief.

    For every action, picks the best current vector for each successor belief
    and assembles the corresponding one-step lookahead vector; returns the
    assembled vector whose inner product with b is largest (ties to the
    lowest action index).  Starting from a blind bound, the value at b never
    decreases.
    """
    b = np.asarray(b, dtype=float)
    vec, ai = _backup_raw(model, policy.matrix(), b)
    return AlphaVector(values=vec, action=model.actions[ai])


def _prune_indices(mat: np.ndarray, witness_mat: np.ndarray) -> list[int]:
    k = mat.shape[0]
    keep = np.zeros(k, dtype=bool)
    if witness_mat.size:
        keep[np.unique((witness_mat @ mat.T).argmax(axis=1))] = True
    surviving: list[int] = []
    for i in list(np.flatnonzero(keep)) + [i for i in range(k) if not keep[i]]:
        if not keep[i] and surviving:
            if bool(np.any(np.all(mat[surviving] >= mat[i], axis=1))):
                continue
        surviving.append(i)
    surviving.sort()
    return surviving


def prune_policy(model: PomdpModel, policy: PolicySet, witnesses) -> PolicySet:
    """Drop vectors that are pointwise dominated or never the arg-max.

    ``witnesses`` is the collection of sampled beliefs at which the value
    function must be preserved; at each witness the arg-max vector is kept,
    so the value there is unchanged.
    """
    mat = policy.matrix()
    witness_mat = np.asarray(list(witnesses), dtype=float)
    keep = _prune_indices(mat, witness_mat)
    return PolicySet([policy.vectors[i] for i in keep])


def _excess_threshold(epsilon: float, gamma: float, depth: int) -> float:
    if gamma <= 0.0:
        return epsilon if depth == 0 else math.inf
    try:
        return epsilon * gamma ** (-depth)
    except OverflowError:
        return math.inf


def solve(model: PomdpModel, b0, config: SolverConfig | None = None):
    """Compute a policy whose root bound gap is at most config.epsilon.

    Returns ``(PolicySet, SolveStats)``.  Running out of budget before the
    gap target is reached is a success with ``converged=False`` in the stats.
    """
    config = config or SolverConfig()
    b0 = np.asarray(b0, dtype=float)
    gamma = model.discount
    n_a = len(model.actions)
    start = time.perf_counter()

    blind = blind_lower_bound(model)
    lb = _Vectors(blind.matrix(), range(n_a))
    ub = SawtoothBound(mdp_upper_bound(model))

    backups_done = 0
    beliefs_sampled = 0
    witnesses = [b0.copy()]
    converged = False

    def out_of_budget() -> bool:
        if config.max_backups is not None and backups_done >= config.max_backups:
            return True
        if config.max_seconds is not None and time.perf_counter() - start >= config.max_seconds:
            return True
        return False

    def expand(b):
        """Per-action upper-bound Q values plus the per-observation expansion."""
        q = np.empty(n_a)
        futures = []
        for ai in range(n_a):
            probs, posteriors = observation_distribution(model, b, ai)
            positive = np.flatnonzero(probs > 0.0)
            v_hi = ub.values(posteriors[positive])
            q[ai] = float(model.reward[:, ai] @ b) + gamma * float(probs[positive] @ v_hi)
            futures.append((positive, probs, posteriors, v_hi))
        return q, futures

    while True:
        gap = ub.value(b0) - lb.value(b0)
        if gap <= config.epsilon:
            converged = True
            break
        if out_of_budget():
            break

        # Descend: pick the upper-bound action, then the observation with the
        # largest probability-weighted excess gap at the child.
        path = []
        b = b0
        depth = 0
        while depth < config.max_depth:
            if ub.value(b) - lb.value(b) <= _excess_threshold(config.epsilon, gamma, depth):
                break
            q, futures = expand(b)
            best_ai = int(np.argmax(q))
            positive, probs, posteriors, v_hi = futures[best_ai]
            path.append(b)
            if len(positive) == 0:
                break
            child_threshold = _excess_threshold(config.epsilon, gamma, depth + 1)
            v_lo = lb.values(posteriors[positive])
            scores = probs[positive] * (v_hi - v_lo - child_threshold)
            best_child = int(np.argmax(scores))
            if scores[best_child] <= 0.0:
                break
            b = posteriors[positive[best_child]]
            depth += 1
        if not path:
            path.append(b0)

        # Back up the sampled path deepest-first, tightening both bounds.
        for bp in reversed(path):
            vec, ai = _backup_raw(model, lb.matrix, bp)
            lb.add(vec, ai)
            q, _ = expand(bp)
            ub.add_point(bp, float(q.max()))
            backups_done += 1
            beliefs_sampled += 1
            witnesses.append(np.array(bp))
            if backups_done % _PRUNE_PERIOD == 0:
                witness_mat = np.asarray(witnesses)
                lb.keep(_prune_indices(lb.matrix, witness_mat))
                ub.prune()
                if len(witnesses) > _MAX_WITNESSES:
                    witnesses = [witnesses[0]] + witnesses[-_MAX_WITNESSES // 2 :]
            if out_of_budget():
                break

    lb.keep(_prune_indices(lb.matrix, np.asarray(witnesses)))
    policy = PolicySet(
        [
            AlphaVector(values=lb.matrix[i].copy(), action=model.actions[lb.action_indices[i]])
            for i in range(lb.n)
        ]
    )
    root_lower = value(policy, b0)
    root_upper = ub.value(b0)
    stats = SolveStats(
        root_lower=root_lower,
        root_upper=max(root_upper, root_lower - 1e-9),
        backups_done=backups_done,
        beliefs_sampled=beliefs_sampled,
        elapsed=time.perf_counter() - start,
        converged=converged or root_upper - root_lower <= config.epsilon,
    )
    return policy, stats


def evaluate_policy(
    model: PomdpModel,
    policy: PolicySet,
    b0,
    episodes: int,
    seed: int,
    max_steps: int = 1000,
):
    """Monte Carlo mean and standard error of the discounted return.

    Each episode draws its own generator from (seed, episode index), samples
    a start state from b0, acts greedily on the tracked belief, and stops on
    terminal-tagged states or after max_steps.
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    b0 = np.asarray(b0, dtype=float)
    from .pomdp import best_action  # local import to keep module surface flat

    terminal = model.terminal_states
    returns = np.zeros(episodes)
    streams = np.random.SeedSequence(seed).spawn(episodes)
    for ep in range(episodes):
        rng = np.random.default_rng(streams[ep])
        s = int(rng.choice(len(model.states), p=b0))
        belief = b0.copy()
        total = 0.0
        discount_pow = 1.0
        for _ in range(max_steps):
            if s in terminal:
                break
            a = best_action(policy, belief, model.actions)
            ai = model.action_index(a)
            total += discount_pow * float(model.reward[s, ai])
            discount_pow *= model.discount
            s_next = int(rng.choice(len(model.states), p=model.transition[ai, s]))
            z = int(rng.choice(len(model.observations), p=model.observation_fn[ai, s_next]))
            probs, posteriors = observation_distribution(model, belief, ai)
            belief = posteriors[z]
            s = s_next
        returns[ep] = total
    mean = float(returns.mean())
    stderr = float(returns.std(ddof=1) / math.sqrt(episodes)) if episodes > 1 else 0.0
    return mean, stderr
