import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import make_fourbus, make_twobus, make_triangle

SCENARIO_DIR = Path(__file__).parent.parent / "scenarios"


@pytest.fixture
def fourbus():
    return make_fourbus()


@pytest.fixture
def twobus():
    return make_twobus()


@pytest.fixture
def triangle():
    return make_triangle()


@pytest.fixture
def scenario_dir():
    return SCENARIO_DIR
