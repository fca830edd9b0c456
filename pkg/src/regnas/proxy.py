"""Regression-proxy scoring: fit a backbone to synthetic stage targets on one
batch, then rank by the stage-weighted validation loss (lower = better).

Training minimizes the unweighted sum of per-stage MSEs; the returned score
reweights stage i by 1/2^(N-i) so late stages dominate the ranking.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bench, cnn_space, rnn_space, rng as rngmod, signals
from .errors import DivergedError, ShapeMismatch
from .nn import mse_loss
from .optim import SGD, Adam

WORST_SCORE = math.inf


@dataclass(frozen=True)
class ProxyTaskConfig:
    """The searchable regression task for CNN scoring.

    ``stages[i]`` is a StageTargetSpec or None when stage i carries no target.
    """

    stages: tuple
    noise: signals.NoiseSpec | None = None
    iterations: int = 100
    batch: int = 16
    lr: float = 0.1
    weight_decay: float = 1e-5
    momentum: float = 0.0


@dataclass(frozen=True)
class RnnTaskConfig:
    input_spec: signals.RnnSignalSpec
    target_spec: signals.RnnSignalSpec
    d: int = 32
    seq_len: int = 8
    iterations: int = 100
    batch: int = 16
    lr: float = 1e-3
    weight_decay: float = 1.2e-6


@dataclass(frozen=True)
class EvalScore:
    per_stage_loss: tuple
    weighted: float
    diverged: bool = False


def stage_weights(n):
    return tuple(1.0 / 2 ** (n - i) for i in range(1, n + 1))


def weighted_score(per_stage_loss):
    n = len(per_stage_loss)
    return float(sum(l * w for l, w in zip(per_stage_loss, stage_weights(n))))


def _diverged_score(n):
    return EvalScore(tuple([WORST_SCORE] * n), WORST_SCORE, diverged=True)


def realize_targets(task, input_batch, seed, hw=8):
    targets = []
    for i, spec in enumerate(task.stages):
        if spec is None:
            targets.append(None)
        else:
            t = signals.realize_stage_target(
                spec, input_batch.shape[0], hw, hw, (seed, "target", i), images=input_batch
            )
            targets.append(t.astype(np.float32))
    return targets


def train_regression_cnn(genotype, task, input_batch, seed, macro=None):
    """Train ``iterations`` SGD steps against the realized targets; returns
    the per-stage and weighted validation losses on the same batch."""
    macro = macro if macro is not None else cnn_space.MacroConfig()
    n = macro.n_stages
    if len(task.stages) != n:
        raise ShapeMismatch(f"task has {len(task.stages)} stages, macro has {n}")
    if cnn_space.is_degenerate(genotype):
        return _diverged_score(n)
    targets = realize_targets(task, input_batch, seed, macro.adapter_hw)
    noised = signals.apply_input_noise(input_batch, task.noise, rngmod.stream(seed, "noise"))
    noised = noised.astype(np.float32)
    init = rngmod.stream(seed, "init", genotype.canonical_id())
    channels = [spec.channels if spec is not None else None for spec in task.stages]
    net = cnn_space.build_backbone(genotype, macro, channels, init)
    opt = SGD(net.graph.params(), task.lr, task.weight_decay, task.momentum)
    active = [i for i in range(n) if targets[i] is not None]
    try:
        for _ in range(task.iterations):
            outs = net.forward(noised)
            grads = []
            for out, i in zip(outs, active):
                loss, grad = mse_loss(out, targets[i])
                if not math.isfinite(loss):
                    raise DivergedError("regression loss diverged")
                grads.append(grad)
            opt.zero_grad()
            net.graph.backward(grads)
            opt.step()
        outs = net.forward(noised)
    except DivergedError:
        return _diverged_score(n)
    per_stage = [0.0] * n
    for out, i in zip(outs, active):
        per_stage[i] = mse_loss(out, targets[i])[0]
    return EvalScore(tuple(per_stage), weighted_score(per_stage))


def train_regression_rnn(genotype, task, seed):
    """100 Adam iterations on MSE over the unrolled sequence; returns the
    final loss (inf on divergence)."""
    if rnn_space.is_degenerate(genotype):
        return WORST_SCORE
    x, y = signals.realize_rnn_tensors(
        task.input_spec, task.target_spec, task.seq_len, task.batch, task.d, seed
    )
    x, y = x.astype(np.float32), y.astype(np.float32)
    init = rngmod.stream(seed, "rnn-init", genotype.canonical_id())
    net = rnn_space.build_rnn(genotype, task.d, task.seq_len, init)
    opt = Adam(net.params(), task.lr, task.weight_decay)
    try:
        for _ in range(task.iterations):
            pred = net.forward(x)
            loss, grad = mse_loss(pred, y)
            if not math.isfinite(loss):
                raise DivergedError("rnn regression loss diverged")
            opt.zero_grad()
            net.backward(grad)
            opt.step()
        return mse_loss(net.forward(x), y)[0]
    except DivergedError:
        return WORST_SCORE


def _eval_one(args):
    gid, task, seed, input_batch, macro = args
    g = cnn_space.CnnGenotype.from_id(gid)
    return train_regression_cnn(g, task, input_batch, seed, macro)


def score_population(genotypes, task, seed, input_batch=None, macro=None, jobs=1):
    """Independent evaluations sharing one input batch and one target
    realization schedule; results are ordered by input index."""
    if input_batch is None:
        input_batch = bench.proxy_batch(task.batch, rngmod.spawn_seed(seed, "batch"))
    work = [(g.canonical_id(), task, seed, input_batch, macro) for g in genotypes]
    if jobs <= 1 or len(work) <= 1:
        return [_eval_one(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_eval_one, work, chunksize=1))
