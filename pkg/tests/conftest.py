import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from chancap.optim import OptimOptions


@pytest.fixture
def small_opts():
    """Reduced budgets for module-level tests."""
    return OptimOptions(restarts=4, max_iters=150, seed=1)


@pytest.fixture
def rng():
    return np.random.default_rng(123)
