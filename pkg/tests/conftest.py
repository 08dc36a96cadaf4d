import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def naive_spectrum(points) -> np.ndarray:
    """Independent oracle: double loop over pairs, then a plain sort."""
    pts = [(float(p[0]), float(p[1])) for p in points]
    out = []
    for i in range(len(pts)):
        xi, yi = pts[i]
        for j in range(i + 1, len(pts)):
            dx = xi - pts[j][0]
            dy = yi - pts[j][1]
            out.append(math.sqrt(dx * dx + dy * dy))
    out.sort()
    return np.asarray(out)


def brute_prune(points, threshold) -> np.ndarray:
    """Independent oracle: keep points with no other point strictly within
    threshold, by full pairwise comparison."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    keep = np.ones(n, dtype=bool)
    t2 = threshold * threshold
    for i in range(n):
        for j in range(n):
            if i != j:
                d2 = (pts[i, 0] - pts[j, 0]) ** 2 + (pts[i, 1] - pts[j, 1]) ** 2
                if d2 < t2:
                    keep[i] = False
                    break
    return pts[keep]


@pytest.fixture(scope="session")
def rng_session():
    return np.random.default_rng(20240817)
