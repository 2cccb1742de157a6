import numpy as np
import pytest

from cpsu_distill.distill.episodes import EpisodeLog
from cpsu_distill.policies.energy import EnergyOracle
from cpsu_distill.sim.config import SimConfig
from cpsu_distill.sim.state import Action, Observation
from cpsu_distill.trees import LeafNode, ObliqueNode, ObliqueTree


@pytest.fixture(scope="session")
def sim_config():
    return SimConfig()


@pytest.fixture(scope="session")
def frictionless_config():
    return SimConfig(cart_friction=0.0, pivot_friction=0.0)


@pytest.fixture(scope="session")
def energy_oracle(sim_config):
    return EnergyOracle(sim_config=sim_config)


@pytest.fixture
def separable_blobs():
    """200 points in two clusters split by x0 + x1 = 0."""
    rng = np.random.default_rng(3)
    centre = np.array([1.0, 1.0, 0.0, 0.0])
    pos = centre + 0.2 * rng.normal(size=(100, 4))
    neg = -centre + 0.2 * rng.normal(size=(100, 4))
    features = np.vstack([pos, neg])
    labels = np.array([2] * 100 + [0] * 100)
    return features, labels


def make_log(
    total_return=0.0,
    steps=1000,
    zenith_steps=0,
    seed=0,
    action=Action.NoOp,
):
    """Synthetic episode; the whole return is collected on the first step."""
    log = EpisodeLog(seed=seed)
    for i in range(steps):
        log.observations.append(Observation(u_norm=i / steps))
        log.actions.append(action)
        log.rewards.append(total_return if i == 0 else 0.0)
        log.rewards_without_bonus.append(0.0)
        log.in_zenith.append(i < zenith_steps)
    log.truncated = True
    return log


@pytest.fixture
def log_factory():
    return make_log


@pytest.fixture(scope="session")
def caterpillar_tree():
    """497 decision nodes in a right-leaning chain; no subtree can be collapsed."""
    decisions = 497
    nodes = []
    for i in range(decisions):
        base = len(nodes)
        nodes.append(
            ObliqueNode(weights=(1.0, 0.0, 0.0, 0.0), threshold=float(i), left=base + 1, right=base + 2)
        )
        nodes.append(LeafNode.one_hot(i % 3))
    nodes.append(LeafNode.one_hot(decisions % 3))
    return ObliqueTree(nodes=tuple(nodes), depth_limit=decisions)
