"""Central-difference verification of Graph.backward.

The probe loss is the sum of per-output means, which exercises every output
tensor with a smooth scalar.  Run graphs in float64 (``graph.astype``) before
checking; single precision drowns the differences in rounding noise.
"""

import numpy as np


def _probe_loss(graph, inputs):
    outs = graph.forward(inputs, check_finite=False)
    return sum(float(np.mean(o)) for o in outs)


def grad_check(graph, inputs, epsilon=3e-6, max_entries_per_param=8, rng=None):
    """Max relative error between backward() and central differences.

    Checks up to ``max_entries_per_param`` randomly sampled entries of each
    parameter.  A graph with no parameters reached returns 0.0.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    outs = graph.forward(inputs, check_finite=False)
    graph.zero_grad()
    graph.backward([np.full(o.shape, 1.0 / o.size, dtype=o.dtype) for o in outs])

    base = _probe_loss(graph, inputs)
    worst = 0.0
    for p in graph.params():
        flat = p.value.reshape(-1)
        n = flat.size
        want = min(n, max_entries_per_param)
        idx = rng.permutation(n)
        checked = 0
        for i in idx:
            if checked >= want:
                break
            orig = flat[i]
            flat[i] = orig + epsilon
            lp = _probe_loss(graph, inputs)
            flat[i] = orig - epsilon
            lm = _probe_loss(graph, inputs)
            flat[i] = orig
            fwd = (lp - base) / epsilon
            bwd = (base - lm) / epsilon
            # a relu kink inside the stencil makes the one-sided slopes
            # disagree; that entry sits at a non-differentiable point, skip it
            if abs(fwd - bwd) / max(abs(fwd), abs(bwd), 1e-6) > 1e-4:
                continue
            checked += 1
            numeric = (lp - lm) / (2.0 * epsilon)
            analytic = p.grad.reshape(-1)[i]
            denom = max(abs(numeric), abs(analytic), 1e-6)
            worst = max(worst, abs(numeric - analytic) / denom)
    return worst
