import pytest

from intentstack.pomdp import uniform_belief
from intentstack.solver import SolverConfig, solve

from helpers import three_block_model, two_object_model


@pytest.fixture(scope="session")
def three_block():
    """Solved three-candidate demo model: (model, policy, stats)."""
    model = three_block_model()
    b0 = uniform_belief(model, over=model.states[:-1])
    policy, stats = solve(model, b0, SolverConfig(epsilon=0.5, max_backups=20000, max_seconds=None))
    return model, policy, stats


@pytest.fixture(scope="session")
def two_object():
    """Solved two-candidate reduction: (model, policy, stats)."""
    model = two_object_model()
    b0 = uniform_belief(model, over=model.states[:-1])
    policy, stats = solve(model, b0, SolverConfig(epsilon=0.5, max_backups=20000, max_seconds=None))
    return model, policy, stats
