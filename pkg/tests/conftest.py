import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for the oracles module

from freemarkov import GroupSpec, flip_system, matching_system, wsf_system
from freemarkov.verify import cycle_coarsening, semigroup_example


@pytest.fixture
def spec2():
    return GroupSpec(2, "group")


@pytest.fixture
def spec2s():
    return GroupSpec(2, "semigroup")


@pytest.fixture
def wsf2():
    return wsf_system(2)


@pytest.fixture
def matching2():
    return matching_system(2)


@pytest.fixture
def flip03():
    return flip_system(2, 0.3)


@pytest.fixture
def coarsened_cycle():
    return cycle_coarsening()


@pytest.fixture
def semigroup_ts():
    return semigroup_example()
