import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

DATA_DIR = os.path.join(os.path.dirname(__file__), "..", "data")
BENCH32 = os.path.join(DATA_DIR, "bench32.csv")


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def brute_spearman(x, y):
    """Definitional: Pearson correlation of average-tie ranks, computed with
    plain loops (independent of the library implementation)."""
    rx, ry = _brute_rank(x), _brute_rank(y)
    mx = sum(rx) / len(rx)
    my = sum(ry) / len(ry)
    num = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    dx = sum((a - mx) ** 2 for a in rx) ** 0.5
    dy = sum((b - my) ** 2 for b in ry) ** 0.5
    if dx == 0.0 or dy == 0.0:
        return 0.0
    return num / (dx * dy)


def _brute_rank(values):
    n = len(values)
    ranks = [0.0] * n
    for i, v in enumerate(values):
        less = sum(1 for w in values if w < v)
        equal = sum(1 for w in values if w == v)
        # average of the 1-based rank positions occupied by the tie group
        ranks[i] = less + (equal + 1) / 2.0
    return ranks


def brute_kendall(x, y):
    """Definitional tau-b via an O(n^2) pair scan."""
    n = len(x)
    concordant = discordant = tx = ty = 0
    for i in range(n):
        for j in range(i + 1, n):
            a = (x[i] > x[j]) - (x[i] < x[j])
            b = (y[i] > y[j]) - (y[i] < y[j])
            if a == 0 and b == 0:
                continue
            if a == 0:
                tx += 1
            elif b == 0:
                ty += 1
            elif a == b:
                concordant += 1
            else:
                discordant += 1
    denom = ((concordant + discordant + tx) * (concordant + discordant + ty)) ** 0.5
    if denom == 0.0:
        return 0.0
    return (concordant - discordant) / denom
