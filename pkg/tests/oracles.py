"""Independent reference implementations the test suite checks against.

Everything here is coded straight from the defining equations, separately
from the library: plain-Python Bayes updates, exhaustive belief-tree
expectimax, and belief-grid value iteration.  Nothing imports the solver or
the belief code under test.
"""

from __future__ import annotations

import numpy as np


def bayes_posterior(transition, observation_fn, belief, a: int, z: int):
    """Unnormalized Bayes then normalize, in plain Python loops.

    Returns (posterior list, observation probability).  transition is
    [a][s][s'], observation_fn is [a][s'][z], belief is a sequence over s.
    """
    n = len(belief)
    unnorm = []
    for s_next in range(n):
        predicted = 0.0
        for s in range(n):
            predicted += transition[a][s][s_next] * belief[s]
        unnorm.append(observation_fn[a][s_next][z] * predicted)
    total = sum(unnorm)
    if total <= 0.0:
        return None, 0.0
    return [u / total for u in unnorm], total


def observation_marginal(transition, observation_fn, belief, a: int, z: int) -> float:
    _, prob = bayes_posterior(transition, observation_fn, belief, a, z)
    return prob


def expectimax(transition, observation_fn, reward, discount: float, b0, depth: int):
    """Exhaustive belief-tree expectimax to a fixed horizon, zero leaves.

    Returns (root action values, tail) where tail = discount^depth *
    max|R| / (1 - discount) bounds the truncation error of every returned
    value in both directions.  The tree is expanded level by level with all
    beliefs of one level held in a single array, so the branching factor
    |A|*|Z| governs feasibility, not Python call overhead.
    """
    t = np.asarray(transition, dtype=float)
    o = np.asarray(observation_fn, dtype=float)
    r = np.asarray(reward, dtype=float)
    n_a, n_s, _ = t.shape
    n_z = o.shape[2]

    beliefs = np.asarray(b0, dtype=float)[None, :]
    level_imm = []
    level_pz = []
    for _ in range(depth):
        n = beliefs.shape[0]
        imm = beliefs @ r
        pz = np.empty((n, n_a, n_z))
        children = np.empty((n, n_a, n_z, n_s))
        for ai in range(n_a):
            predicted = beliefs @ t[ai]
            for zi in range(n_z):
                unnorm = predicted * o[ai, :, zi][None, :]
                total = unnorm.sum(axis=1)
                pz[:, ai, zi] = total
                safe = np.where(total > 0.0, total, 1.0)
                children[:, ai, zi] = unnorm / safe[:, None]
        level_imm.append(imm)
        level_pz.append(pz)
        beliefs = children.reshape(n * n_a * n_z, n_s)

    values = np.zeros(beliefs.shape[0])
    q = None
    for imm, pz in zip(reversed(level_imm), reversed(level_pz)):
        n = imm.shape[0]
        child_values = values.reshape(n, n_a, n_z)
        q = imm + discount * (pz * child_values).sum(axis=2)
        values = q.max(axis=1)
    r_max = float(np.abs(r).max())
    tail = discount**depth * r_max / (1.0 - discount)
    return q[0], tail


def grid_value_iteration_2state(
    transition, observation_fn, reward, discount: float, points: int = 101, tol: float = 1e-10
):
    """Value iteration for a 2-state POMDP on a belief grid.

    The belief is parameterized by p = b(state 0); successor beliefs are
    evaluated by linear interpolation between grid nodes.  Returns
    (grid, action values array of shape (points, |A|)).
    """
    t = np.asarray(transition, dtype=float)
    o = np.asarray(observation_fn, dtype=float)
    r = np.asarray(reward, dtype=float)
    n_a = t.shape[0]
    n_z = o.shape[2]
    grid = np.linspace(0.0, 1.0, points)
    beliefs = np.stack([grid, 1.0 - grid], axis=1)

    # Precompute, per (grid point, action, observation): probability and the
    # successor p-coordinate; zero-probability branches get a dummy target.
    imm = beliefs @ r
    pz = np.empty((points, n_a, n_z))
    succ = np.empty((points, n_a, n_z))
    for ai in range(n_a):
        predicted = beliefs @ t[ai]
        for zi in range(n_z):
            unnorm = predicted * o[ai, :, zi][None, :]
            total = unnorm.sum(axis=1)
            pz[:, ai, zi] = total
            safe = np.where(total > 0.0, total, 1.0)
            succ[:, ai, zi] = unnorm[:, 0] / safe

    v = np.zeros(points)
    while True:
        interp = np.interp(succ, grid, v)
        q = imm + discount * (pz * interp).sum(axis=2)
        v_next = q.max(axis=1)
        if float(np.max(np.abs(v_next - v))) <= tol:
            return grid, q
        v = v_next


def discounted_trace_return(rewards, discount: float) -> float:
    """Plain accumulation of discount^k * r_k."""
    total = 0.0
    power = 1.0
    for r in rewards:
        total += power * r
        power *= discount
    return total


def random_model_arrays(rng: np.random.Generator, n_s: int, n_a: int, n_z: int, discount: float):
    """Random dense POMDP tensors with Dirichlet rows and rewards in [-10, 10]."""
    transition = rng.dirichlet(np.ones(n_s), size=(n_a, n_s))
    observation_fn = rng.dirichlet(np.ones(n_z), size=(n_a, n_s))
    reward = rng.uniform(-10.0, 10.0, size=(n_s, n_a))
    return transition, observation_fn, reward, discount


def random_belief(rng: np.random.Generator, n: int):
    return rng.dirichlet(np.ones(n))
