"""Built-in proxy tasks.

``single_task``: one Dot-100% local tensor attached to the last stage only.
``combo_task``: per stage, its three best-performing bases, each as its own
group with an equal share of the 64-channel stage budget (remainder to the
first).  Stage 1: high-frequency Sin1D, high-frequency Sin2D, Dot 100%;
stage 2: high Sin1D, medium Sin2D, Resize; stage 3: Dot 100%, high Sin1D,
Resize.  Sine tensors use global scope (invariance probing), Dot and Resize
local.  ``zero_task``: all-zero targets in every stage, the degenerate
reference whose ranking quality should trail combo.
"""

import numpy as np

from . import rng as rngmod
from .proxy import ProxyTaskConfig
from .signals import (
    BasisGroup,
    BasisSpec,
    Dot,
    NoiseSpec,
    Resize,
    Sin1DBank,
    Sin2DBank,
    StageTargetSpec,
)

FREQ_LOW = (0.0, 0.125)
FREQ_MED = (0.125, 0.375)
FREQ_HIGH = (0.375, 0.5)
STAGE_CHANNEL_BUDGET = 64
_PRESET_SEED = 20210520


def _bank(label, lo, hi):
    r = rngmod.stream(_PRESET_SEED, "preset-freqs", label)
    return tuple(float(f) for f in np.sort(r.uniform(max(lo, 1e-3), hi, size=10)))


def _split(total, parts):
    base = total // parts
    return [total - base * (parts - 1)] + [base] * (parts - 1)


def single_task():
    s3 = StageTargetSpec(
        (BasisGroup((BasisSpec(Dot(100.0), scope="local"),), STAGE_CHANNEL_BUDGET),)
    )
    return ProxyTaskConfig(stages=(None, None, s3), noise=NoiseSpec("gaussian", 0.0))


def combo_task():
    sin1d_h = BasisSpec(Sin1DBank(_bank("sin1d-high", *FREQ_HIGH)), scope="global")
    sin2d_h = BasisSpec(Sin2DBank(_bank("sin2d-high", *FREQ_HIGH)), scope="global")
    sin2d_m = BasisSpec(Sin2DBank(_bank("sin2d-med", *FREQ_MED)), scope="global")
    dot100 = BasisSpec(Dot(100.0), scope="local")
    resize = BasisSpec(Resize(), scope="local")
    per_stage = [
        (sin1d_h, sin2d_h, dot100),
        (sin1d_h, sin2d_m, resize),
        (dot100, sin1d_h, resize),
    ]
    stages = []
    for bases in per_stage:
        widths = _split(STAGE_CHANNEL_BUDGET, len(bases))
        stages.append(
            StageTargetSpec(tuple(BasisGroup((b,), w) for b, w in zip(bases, widths)))
        )
    return ProxyTaskConfig(stages=tuple(stages), noise=NoiseSpec("gaussian", 0.0))


def zero_task():
    stages = tuple(
        StageTargetSpec((BasisGroup((BasisSpec(Dot(0.0), scope="global"),), STAGE_CHANNEL_BUDGET),))
        for _ in range(3)
    )
    return ProxyTaskConfig(stages=stages, noise=NoiseSpec("gaussian", 0.0))


PRESETS = {"single": single_task, "combo": combo_task, "zero": zero_task}


def get_preset(name):
    return PRESETS[name]()
