import hypothesis
import numpy as np
import pytest

from drift_ap.mesh import BoundarySpec, build_grid
from drift_ap.model import ConservedState, drift_limit_state

hypothesis.settings.register_profile(
    "default", deadline=None, max_examples=50)
hypothesis.settings.load_profile("default")


@pytest.fixture
def small_grid():
    return build_grid(8, 8)


@pytest.fixture
def drift_bc():
    return BoundarySpec.uniform(*drift_limit_state())


def make_uniform_state(grid, n=1.0, mx=0.0, my=0.0, mz=0.0):
    return ConservedState(
        n=np.full(grid.shape, float(n)),
        mx=np.full(grid.shape, float(mx)),
        my=np.full(grid.shape, float(my)),
        mz=np.full(grid.shape, float(mz)),
    )


def make_drift_state(grid):
    return make_uniform_state(grid, *drift_limit_state())


def max_state_diff(a, b):
    return max(float(np.max(np.abs(getattr(a, f) - getattr(b, f))))
               for f in ConservedState.FIELDS)
