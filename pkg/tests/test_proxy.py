import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from regnas import bench, cnn_space, proxy, rnn_space, signals


def _tiny_task(hw_channels=16, iterations=4):
    stage = signals.StageTargetSpec(
        (signals.BasisGroup((signals.BasisSpec(signals.Dot(50.0), "local"),), hw_channels),)
    )
    return proxy.ProxyTaskConfig(
        stages=(None, None, stage),
        noise=signals.NoiseSpec("gaussian", 0.0),
        iterations=iterations,
        batch=4,
    )


def test_stage_weights_n3():
    assert proxy.stage_weights(3) == (0.25, 0.5, 1.0)


def test_stage_weights_general():
    for n in range(1, 6):
        w = proxy.stage_weights(n)
        assert len(w) == n
        assert all(w[i] == 1.0 / 2 ** (n - 1 - i) for i in range(n))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=6))
def test_weighted_score_formula(losses):
    want = sum(l / 2 ** (len(losses) - 1 - i) for i, l in enumerate(losses))
    assert proxy.weighted_score(losses) == want  # same fp ops: exact


def test_weighted_quarter_half_one():
    assert proxy.weighted_score([4.0, 2.0, 1.0]) == 4.0 * 0.25 + 2.0 * 0.5 + 1.0


def test_degenerate_genotype_sentinel():
    task = _tiny_task()
    batch = bench.proxy_batch(4, 0)
    score = proxy.train_regression_cnn(cnn_space.CnnGenotype.from_id("000000"), task, batch, 0)
    assert math.isinf(score.weighted)
    assert score.diverged


def test_training_reduces_loss():
    task_short = _tiny_task(iterations=1)
    task_long = _tiny_task(iterations=60)
    g = cnn_space.CnnGenotype.from_id("143103")
    batch = bench.proxy_batch(4, 1)
    s_short = proxy.train_regression_cnn(g, task_short, batch, 3)
    s_long = proxy.train_regression_cnn(g, task_long, batch, 3)
    assert s_long.weighted < s_short.weighted


def test_inactive_stage_loss_zero():
    task = _tiny_task()
    batch = bench.proxy_batch(4, 0)
    score = proxy.train_regression_cnn(cnn_space.CnnGenotype.from_id("143103"), task, batch, 0)
    assert score.per_stage_loss[0] == 0.0 and score.per_stage_loss[1] == 0.0
    assert score.per_stage_loss[2] > 0.0
    assert score.weighted == pytest.approx(score.per_stage_loss[2])


def test_eval_deterministic():
    task = _tiny_task()
    g = cnn_space.CnnGenotype.from_id("143103")
    batch = bench.proxy_batch(4, 2)
    a = proxy.train_regression_cnn(g, task, batch, 11)
    b = proxy.train_regression_cnn(g, task, batch, 11)
    assert a.per_stage_loss == b.per_stage_loss


def test_score_population_parallel_matches_serial():
    task = _tiny_task()
    gs = [cnn_space.CnnGenotype.from_id(i) for i in ("143103", "103020", "000000")]
    serial = proxy.score_population(gs, task, 5, jobs=1)
    parallel = proxy.score_population(gs, task, 5, jobs=2)
    assert [s.per_stage_loss for s in serial] == [s.per_stage_loss for s in parallel]


def test_realize_targets_respects_none():
    task = _tiny_task()
    batch = bench.proxy_batch(4, 0)
    targets = proxy.realize_targets(task, batch, 0)
    assert targets[0] is None and targets[1] is None
    assert targets[2].shape == (4, 16, 8, 8)


def test_rnn_eval_runs_and_is_deterministic():
    spec_in = signals.RnnSignalSpec(
        bases=(signals.BasisSpec(signals.Sin1DBank((0.05, 0.1)), "local"),)
    )
    spec_out = signals.RnnSignalSpec(
        bases=(signals.BasisSpec(signals.Sin1DBank((0.4, 0.45)), "local"),)
    )
    task = proxy.RnnTaskConfig(spec_in, spec_out, d=32, seq_len=4, iterations=5, batch=4)
    g = rnn_space.vanilla_rnn_genotype()
    a = proxy.train_regression_rnn(g, task, 7)
    b = proxy.train_regression_rnn(g, task, 7)
    assert a == b
    assert math.isfinite(a)
