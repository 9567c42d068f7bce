import numpy as np
import pytest

from tspbnb import Instance


@pytest.fixture
def square():
    """Unit square corners; optimal tour is the perimeter of length 4."""
    return Instance(coords=np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float),
                    name="square")


@pytest.fixture
def collinear():
    """Three collinear points at x = 0, 1, 3."""
    return Instance(coords=np.array([[0, 0], [1, 0], [3, 0]], dtype=float),
                    name="collinear")
