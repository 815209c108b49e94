import numpy as np
import pytest

from selfdual.rng import RngStream


@pytest.fixture
def rng():
    return RngStream(20240901)


def make_rng(tag: int) -> RngStream:
    return RngStream(20240901, tag)


def self_dual_scalar_fixtures():
    """Built-in self-dual scalar models (all have mean one)."""
    from fractions import Fraction as F

    from selfdual import dist

    return [
        dist.LogNormal.mean_one(0.25),
        dist.LogNormal.mean_one(0.5),
        dist.LogNormal.mean_one(0.75),
        dist.LpSelfDual(1.5),
        dist.LpSelfDual(2.0),
        dist.LpSelfDual(3.0),
        dist.HeavyTail(-0.5),
        dist.HeavyTail(0.0),
        dist.HeavyTail(1.0),
        dist.HeavyTail(3.0),
        dist.DiscreteAtoms([(F(1, 2), F(1, 3)), (F(1), F(1, 2)), (F(2), F(1, 6))]),
        dist.DiscreteAtoms([(F(1), F(1))]),
    ]


def moment_range(model):
    """Open interval of finite moments (lo, hi) for a fixture."""
    from selfdual import dist

    if isinstance(model, (dist.LogNormal, dist.DiscreteAtoms)):
        return (-np.inf, np.inf)
    if isinstance(model, dist.LpSelfDual):
        return (1.0 - model.p, model.p)
    if isinstance(model, dist.HeavyTail):
        return (-(1.0 + model.gamma), 2.0 + model.gamma)
    return (-np.inf, np.inf)
