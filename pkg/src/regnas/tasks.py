"""The searchable proxy-task space: sampling, block-wise mutation, fitness.

The minimum mutatable block is either one (basis group, channel count) pair
or the noise spec.  Mutation regenerates each block from scratch with
probability 0.2 and copies everything else verbatim.
"""

import json
from dataclasses import replace

from . import signals
from .errors import InvalidSpec, MissingGroundtruth
from .metrics import spearman_rho
from .proxy import ProxyTaskConfig, score_population

BLOCK_REGEN_PROB = 0.2
DOT_PERCENTAGES = (50.0, 100.0)
N_BANK_FREQS = 10


def sample_frequency_bank(rng):
    """10 candidate frequencies from a random [a, b] with 0 < a < b < 0.5."""
    while True:
        a, b = sorted(rng.uniform(0.0, 0.5, size=2))
        if 0.0 < a < b < 0.5:
            break
    return tuple(float(f) for f in rng.uniform(a, b, size=N_BANK_FREQS))


def _sample_basis(rng, allow_resize=True):
    kinds = ["sin1d", "sin2d", "dot", "gdot"] + (["resize"] if allow_resize else [])
    kind = kinds[rng.integers(len(kinds))]
    if kind == "sin1d":
        family = signals.Sin1DBank(sample_frequency_bank(rng))
    elif kind == "sin2d":
        family = signals.Sin2DBank(sample_frequency_bank(rng))
    elif kind == "dot":
        family = signals.Dot(DOT_PERCENTAGES[rng.integers(2)])
    elif kind == "gdot":
        family = signals.GDot(DOT_PERCENTAGES[rng.integers(2)], sigma=1.0)
    else:
        return signals.BasisSpec(signals.Resize(), scope="local")
    scope = "global" if rng.integers(2) == 0 else "local"
    return signals.BasisSpec(family, scope)


def sample_group(rng, allow_resize=True):
    n_bases = 1 + int(rng.integers(2))
    bases = tuple(_sample_basis(rng, allow_resize) for _ in range(n_bases))
    channels = signals.CHANNEL_CHOICES[rng.integers(len(signals.CHANNEL_CHOICES))]
    return signals.BasisGroup(bases, channels)


def sample_noise(rng):
    dist = "gaussian" if rng.integers(2) == 0 else "uniform"
    level = signals.NOISE_LEVELS[rng.integers(len(signals.NOISE_LEVELS))]
    return signals.NoiseSpec(dist, level)


def sample_task(rng, n_stages=3):
    stages = []
    for _ in range(n_stages):
        n_groups = 1 + int(rng.integers(3))
        stages.append(signals.StageTargetSpec(tuple(sample_group(rng) for _ in range(n_groups))))
    return ProxyTaskConfig(stages=tuple(stages), noise=sample_noise(rng))


def mutate_task(task, rng):
    stages = []
    for spec in task.stages:
        if spec is None:
            stages.append(None)
            continue
        groups = tuple(
            sample_group(rng) if rng.random() < BLOCK_REGEN_PROB else g for g in spec.groups
        )
        stages.append(signals.StageTargetSpec(groups))
    noise = sample_noise(rng) if rng.random() < BLOCK_REGEN_PROB else task.noise
    return replace(task, stages=tuple(stages), noise=noise)


def task_fitness(task, probe_genotypes, bench_table, seed, input_batch=None, jobs=1):
    """Spearman rho between negated proxy scores and oriented groundtruth."""
    ids = [g.canonical_id() for g in probe_genotypes]
    missing = [i for i in ids if i not in bench_table.rows]
    if missing:
        raise MissingGroundtruth(f"probes missing from bench table: {missing[:5]}")
    scores = score_population(probe_genotypes, task, seed, input_batch=input_batch, jobs=jobs)
    neg = [-s.weighted for s in scores]
    return spearman_rho(neg, bench_table.oriented(ids))


# --- JSON schema shared by the CLI and presets ------------------------------


def _family_to_json(family):
    if isinstance(family, signals.Sin1D):
        return {"family": "sin1d", "f": family.f, "phi": family.phi, "axis": family.axis}
    if isinstance(family, signals.Sin2D):
        return {"family": "sin2d", "fx": family.fx, "fy": family.fy, "phi": family.phi}
    if isinstance(family, signals.Sin1DBank):
        return {"family": "sin1d_bank", "freqs": list(family.freqs)}
    if isinstance(family, signals.Sin2DBank):
        return {"family": "sin2d_bank", "freqs": list(family.freqs)}
    if isinstance(family, signals.Dot):
        return {"family": "dot", "k": family.k}
    if isinstance(family, signals.GDot):
        return {"family": "gdot", "k": family.k, "sigma": family.sigma}
    if isinstance(family, signals.Resize):
        return {"family": "resize"}
    raise InvalidSpec(f"unknown family {family!r}")


def _family_from_json(obj):
    kind = obj["family"]
    if kind == "sin1d":
        return signals.Sin1D(obj["f"], obj.get("phi", 0.0), obj.get("axis", "x"))
    if kind == "sin2d":
        return signals.Sin2D(obj["fx"], obj["fy"], obj.get("phi", 0.0))
    if kind == "sin1d_bank":
        return signals.Sin1DBank(tuple(obj["freqs"]))
    if kind == "sin2d_bank":
        return signals.Sin2DBank(tuple(obj["freqs"]))
    if kind == "dot":
        return signals.Dot(obj["k"])
    if kind == "gdot":
        return signals.GDot(obj["k"], obj.get("sigma", 1.0))
    if kind == "resize":
        return signals.Resize()
    raise InvalidSpec(f"unknown family kind {kind!r}")


def task_to_json(task):
    stages = []
    for spec in task.stages:
        if spec is None:
            stages.append(None)
            continue
        stages.append(
            {
                "groups": [
                    {
                        "channels": g.channels,
                        "bases": [
                            {**_family_to_json(b.family), "scope": b.scope} for b in g.bases
                        ],
                    }
                    for g in spec.groups
                ]
            }
        )
    return {
        "stages": stages,
        "noise": None
        if task.noise is None
        else {"distribution": task.noise.distribution, "level": task.noise.level},
        "iterations": task.iterations,
        "batch": task.batch,
        "lr": task.lr,
        "weight_decay": task.weight_decay,
        "momentum": task.momentum,
    }


def task_from_json(obj):
    stages = []
    for s in obj["stages"]:
        if s is None:
            stages.append(None)
            continue
        groups = tuple(
            signals.BasisGroup(
                tuple(
                    signals.BasisSpec(_family_from_json(b), b.get("scope", "global"))
                    for b in g["bases"]
                ),
                g["channels"],
            )
            for g in s["groups"]
        )
        stages.append(signals.StageTargetSpec(groups))
    noise = obj.get("noise")
    return ProxyTaskConfig(
        stages=tuple(stages),
        noise=None if noise is None else signals.NoiseSpec(noise["distribution"], noise["level"]),
        iterations=obj.get("iterations", 100),
        batch=obj.get("batch", 16),
        lr=obj.get("lr", 0.1),
        weight_decay=obj.get("weight_decay", 1e-5),
        momentum=obj.get("momentum", 0.0),
    )


def save_task(task, path):
    with open(path, "w") as fh:
        json.dump(task_to_json(task), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_task(path):
    with open(path) as fh:
        return task_from_json(json.load(fh))
