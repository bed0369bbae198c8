import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import synthimg  # noqa: E402


@pytest.fixture(scope="session")
def corpus():
    return synthimg.corpus()


@pytest.fixture(scope="session")
def meadow():
    return synthimg.meadow()
