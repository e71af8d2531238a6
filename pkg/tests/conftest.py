import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from nqdkit.filters import build_filter


@pytest.fixture(scope="session")
def f12():
    return build_filter(1.2)


@pytest.fixture(scope="session")
def f15():
    return build_filter(1.5)
