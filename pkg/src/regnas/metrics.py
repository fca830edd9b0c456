"""Rank statistics: average-tie ranks, Spearman rho, Kendall tau-b,
retrieving rate at a top fraction, and the regret trace."""

import math

import numpy as np

from .errors import LengthMismatch


def rank(values):
    """Average-tie ranking, rank 1 = smallest.  +inf sentinels tie at the top."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v))
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _check_pair(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"shapes {x.shape} vs {y.shape}")
    if len(x) < 2:
        raise LengthMismatch("need at least two samples")
    return x, y


def spearman_rho(x, y):
    """Pearson correlation of the rank vectors; 0 if either is constant."""
    x, y = _check_pair(x, y)
    rx, ry = rank(x), rank(y)
    dx, dy = rx - rx.mean(), ry - ry.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0.0:
        return 0.0
    return float(dx @ dy) / denom


def kendall_tau(x, y):
    """Tau-b: (C - D) / sqrt((C + D + Tx)(C + D + Ty)); 0 when degenerate."""
    x, y = _check_pair(x, y)
    # comparison-based signs stay exact when scores include +/-inf
    sx = (x[:, None] > x[None, :]).astype(int) - (x[:, None] < x[None, :]).astype(int)
    sy = (y[:, None] > y[None, :]).astype(int) - (y[:, None] < y[None, :]).astype(int)
    iu = np.triu_indices(len(x), k=1)
    sx, sy = sx[iu], sy[iu]
    conc = int(np.sum((sx * sy) > 0))
    disc = int(np.sum((sx * sy) < 0))
    tx = int(np.sum((sx == 0) & (sy != 0)))
    ty = int(np.sum((sy == 0) & (sx != 0)))
    denom = math.sqrt((conc + disc + tx) * (conc + disc + ty))
    if denom == 0.0:
        return 0.0
    return (conc - disc) / denom


def retrieving_rate(pred_scores, gt_scores, top_fraction):
    """|Pred@TopK intersect GT@TopK| / K with K = ceil(f*n); scores are
    higher-better and boundary ties break by stable index order."""
    pred, gt = _check_pair(pred_scores, gt_scores)
    if not (0.0 < top_fraction <= 1.0):
        raise ValueError(f"top_fraction {top_fraction} outside (0, 1]")
    n = len(pred)
    k = math.ceil(top_fraction * n)
    top_pred = set(np.argsort(-pred, kind="stable")[:k].tolist())
    top_gt = set(np.argsort(-gt, kind="stable")[:k].tolist())
    return len(top_pred & top_gt) / k


def regret(best_metric_trace, l_star):
    """Pointwise r(t) = L(t) - L*."""
    trace = np.asarray(best_metric_trace, dtype=float)
    if trace.size == 0:
        raise ValueError("empty trace")
    return trace - l_star
