import math

import numpy as np
import pytest

from mdgesture.rng import generator


@pytest.fixture
def rng():
    return generator(20240817)


def random_pairs(rng, n, lo=-0.9, hi=0.9, min_area=0.02):
    """Seeded random control pairs whose destinations are safely
    non-collinear (rejection sampled)."""
    while True:
        dst = rng.uniform(lo, hi, size=(n, 2))
        src = rng.uniform(lo, hi, size=(n, 2))
        ok = False
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    area = abs(
                        (dst[j, 0] - dst[i, 0]) * (dst[k, 1] - dst[i, 1])
                        - (dst[k, 0] - dst[i, 0]) * (dst[j, 1] - dst[i, 1])
                    )
                    if area > min_area:
                        ok = True
        mind = min(
            math.hypot(*(dst[i] - dst[j]))
            for i in range(n)
            for j in range(i + 1, n)
        )
        if ok and mind > 1e-3:
            return src, dst
