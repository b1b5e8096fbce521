import math

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unimodular(rng: np.random.Generator, k: int = 3) -> np.ndarray:
    """A random k x k real matrix rescaled to determinant exactly 1 (up to rounding)."""
    while True:
        m = rng.uniform(-1.0, 1.0, size=(k, k))
        det = np.linalg.det(m)
        if abs(det) > 0.05:
            break
    if det < 0:
        m[0] = -m[0]
        det = -det
    return m / det ** (1.0 / k)


def brute_force_minimum(matrix: np.ndarray, box: int, norm: str = "sup") -> float:
    """min over nonzero integer x in [-box, box]^k of ||matrix @ x||."""
    k = matrix.shape[0]
    axes = [np.arange(-box, box + 1)] * k
    coeffs = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
    coeffs = coeffs[np.any(coeffs != 0, axis=1)]
    images = coeffs.astype(float) @ matrix.T
    if norm == "sup":
        values = np.max(np.abs(images), axis=1)
    else:
        values = np.sqrt(np.sum(images * images, axis=1))
    return float(values.min())


def box_covers_minimum(matrix: np.ndarray, radius: float, box: int) -> bool:
    """True when every x with ||matrix @ x||_sup <= radius lies in [-box, box]^k."""
    inverse = np.linalg.inv(matrix)
    return bool(np.all(np.sum(np.abs(inverse), axis=1) * radius <= box))


@pytest.fixture
def unimodular_factory(rng):
    return lambda k=3: random_unimodular(rng, k)


E = math.e
