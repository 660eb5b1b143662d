import numpy as np
import pytest

from toricpatch import LatticeSet, PatchSpec


@pytest.fixture
def unit_square() -> LatticeSet:
    return LatticeSet.of([(0, 0), (0, 1), (1, 0), (1, 1)])


@pytest.fixture
def identity_square(unit_square) -> PatchSpec:
    return PatchSpec.build(unit_square, np.array(unit_square.points, float))


@pytest.fixture
def degenerate_square(unit_square) -> PatchSpec:
    """Bilinear patch whose (1,1) control coincides with (1,0)."""
    return PatchSpec.build(
        unit_square, np.array([(0, 0), (0, 1), (1, 0), (1, 0)], float))


@pytest.fixture
def degenerate_control() -> np.ndarray:
    return np.array([(0, 0), (0, 1), (1, 0), (1, 0)], float)


@pytest.fixture
def adjacent_swap_control() -> np.ndarray:
    """Identity square with the two right-edge corner images exchanged."""
    return np.array([(0, 0), (0, 1), (1, 1), (1, 0)], float)


@pytest.fixture
def pulled_corner_control() -> np.ndarray:
    """f(1,1) dragged inside the hull of the other three controls: a fold."""
    return np.array([(0, 0), (0, 1), (1, 0), (0.3, 0.3)], float)
