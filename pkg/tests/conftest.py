"""Shared fixtures: the worked two-state example used throughout the suite.

Most tests exercise the Ratio win function with tilt states {1/2, 2} and a
symmetric two-state chain, because every closed form we can check by hand
exists for that configuration.
"""

import pytest

from tiltleague.match_model import Ratio
from tiltleague.measures import UniformInterval
from tiltleague.processes import markov2


@pytest.fixture
def uniform01():
    return UniformInterval(0.0, 1.0)


@pytest.fixture
def ratio_win():
    return Ratio()


def symmetric_chain(p: float):
    """Two-state chain on {1/2, 2} holding either state with probability p."""
    return markov2(0.5, 2.0, p, p)


@pytest.fixture
def chain_half():
    # p = 1/2 makes consecutive days independent; mixing vanishes exactly.
    return symmetric_chain(0.5)


@pytest.fixture
def chain_sticky():
    return symmetric_chain(0.92)
