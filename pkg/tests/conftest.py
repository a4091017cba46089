import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from enhfactor.numerics import QuadratureConfig


@pytest.fixture(scope="session")
def cfg():
    """Default tolerances as used in production."""
    return QuadratureConfig()


@pytest.fixture(scope="session")
def loose_cfg():
    """Cheaper tolerances for property tests that sweep many points."""
    return QuadratureConfig(abs_tol=1e-8, rel_tol=1e-8, max_subdivisions=600)
