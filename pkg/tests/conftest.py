import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kpzlab.rng import make_rng
from kpzlab import analysis


@pytest.fixture(scope="session")
def tw_reference_small():
    """Quick oracle reference for unit tests (n=400, 2e4 replicas)."""
    return analysis.tw_reference_build(make_rng(2024), n=400, replicas=20_000)
