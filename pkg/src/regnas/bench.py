"""Desk-scale groundtruth: a procedural 8-class image dataset, full training
of sampled genotypes, and the persisted id -> metric table used as the
ranking reference."""

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import cnn_space, nn, rng as rngmod
from .errors import DivergedError, DuplicateId, ParseError
from .optim import SGD

N_CLASSES = 8


@dataclass(frozen=True)
class DatasetConfig:
    n_train: int = 1024
    n_test: int = 512
    hw: int = 32
    noise_sigma: float = 1.5


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 4
    batch: int = 64
    lr: float = 0.05
    momentum: float = 0.9
    weight_decay: float = 5e-4


@dataclass
class ProceduralDataset:
    train_images: np.ndarray
    train_labels: np.ndarray
    test_images: np.ndarray
    test_labels: np.ndarray
    seed: int = 0


def _coords(hw):
    y, x = np.mgrid[0:hw, 0:hw].astype(float)
    return x, y


def _class_image(cls, hw, r):
    x, y = _coords(hw)
    if cls in (0, 1):
        # oriented stripes at two nearby frequencies
        freq = 4.0 if cls == 0 else 6.0
        theta = r.uniform(0, math.pi)
        phase = r.uniform(0, 2 * math.pi)
        u = (x * math.cos(theta) + y * math.sin(theta)) / hw
        base = 0.5 + 0.5 * np.sin(2 * math.pi * freq * u + phase)
    elif cls in (2, 3):
        # checkerboards at two nearby scales
        block = 3 if cls == 2 else 4
        ox, oy = r.integers(0, block, size=2)
        base = ((((x + ox) // block) + ((y + oy) // block)) % 2).astype(float)
    elif cls == 4:
        # radial gradient around a random center
        cx, cy = r.uniform(0.25 * hw, 0.75 * hw, size=2)
        d = np.sqrt((x - cx) ** 2 + (y - cy) ** 2)
        base = 1.0 - d / d.max()
    elif cls in (5, 6):
        # random dots at two nearby densities
        density = 0.1 if cls == 5 else 0.2
        base = (r.random((hw, hw)) < density).astype(float)
    else:
        base = np.full((hw, hw), r.uniform(0.3, 0.7))
    # grayscale replicated across channels: no colour shortcut
    return np.repeat(base[None, :, :], 3, axis=0)


def _gen_split(n, cfg, seed, tag):
    per_class = n // N_CLASSES
    images = np.zeros((n, 3, cfg.hw, cfg.hw), dtype=np.float32)
    labels = np.zeros(n, dtype=np.int64)
    idx = 0
    for cls in range(N_CLASSES):
        for j in range(per_class):
            r = rngmod.stream(seed, "dataset", tag, cls, j)
            img = _class_image(cls, cfg.hw, r)
            img = img + cfg.noise_sigma * r.standard_normal(img.shape)
            images[idx] = np.clip(img, 0.0, 1.0)
            labels[idx] = cls
            idx += 1
    # deterministic shuffle so batches are class-mixed
    perm = rngmod.stream(seed, "dataset", tag, "perm").permutation(idx)
    return images[perm], labels[perm]


def gen_dataset(cfg=DatasetConfig(), seed=0):
    tr_x, tr_y = _gen_split(cfg.n_train, cfg, seed, "train")
    te_x, te_y = _gen_split(cfg.n_test, cfg, seed, "test")
    return ProceduralDataset(tr_x, tr_y, te_x, te_y, seed)


def proxy_batch(b, seed, cfg=DatasetConfig()):
    """One fixed class-balanced image batch for proxy training."""
    images = np.zeros((b, 3, cfg.hw, cfg.hw), dtype=np.float32)
    for i in range(b):
        cls = i % N_CLASSES
        r = rngmod.stream(seed, "proxy-batch", cls, i)
        img = _class_image(cls, cfg.hw, r)
        img = img + cfg.noise_sigma * r.standard_normal(img.shape)
        images[i] = np.clip(img, 0.0, 1.0)
    return images


def _accuracy(graph, images, labels, batch):
    hits = 0
    for s in range(0, len(images), batch):
        logits = graph.forward(images[s : s + batch])[0]
        hits += int(np.sum(np.argmax(logits, axis=1) == labels[s : s + batch]))
    return hits / len(images)


def train_groundtruth(genotype, dataset, cfg=TrainConfig(), seed=0, macro=None):
    """Train backbone + GAP + linear head with cross-entropy; returns final
    test accuracy.  Degenerate or diverging genotypes score 0."""
    macro = macro if macro is not None else cnn_space.MacroConfig()
    if cnn_space.is_degenerate(genotype):
        return 0.0
    init = rngmod.stream(seed, "gt-init", genotype.canonical_id())
    graph = cnn_space.build_classifier(genotype, macro, N_CLASSES, init)
    opt = SGD(graph.params(), cfg.lr, cfg.weight_decay, cfg.momentum)
    n = len(dataset.train_images)
    steps_total = cfg.epochs * ((n + cfg.batch - 1) // cfg.batch)
    step = 0
    try:
        for epoch in range(cfg.epochs):
            perm = rngmod.stream(seed, "gt-shuffle", genotype.canonical_id(), epoch).permutation(n)
            for s in range(0, n, cfg.batch):
                sel = perm[s : s + cfg.batch]
                logits = graph.forward(dataset.train_images[sel])[0]
                loss, grad = nn.cross_entropy_loss(logits, dataset.train_labels[sel])
                if not math.isfinite(loss):
                    raise DivergedError("training loss diverged")
                opt.lr = 0.5 * cfg.lr * (1.0 + math.cos(math.pi * step / steps_total))
                opt.zero_grad()
                graph.backward([grad])
                opt.step()
                step += 1
        return _accuracy(graph, dataset.test_images, dataset.test_labels, cfg.batch)
    except DivergedError:
        return 0.0


@dataclass
class BenchTable:
    rows: dict  # canonical id -> metric
    metadata: dict = field(default_factory=dict)

    @property
    def higher_better(self):
        return bool(self.metadata.get("higher_better", True))

    def oriented(self, ids):
        """Metrics for ``ids`` with higher-better orientation applied."""
        sign = 1.0 if self.higher_better else -1.0
        return np.array([sign * self.rows[i] for i in ids])

    def save(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "metric"])
            for gid in sorted(self.rows):
                w.writerow([gid, f"{self.rows[gid]:.10g}"])
        with open(_sidecar(path), "w") as fh:
            json.dump(self.metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path, validate_ids=True):
        rows = {}
        try:
            with open(path, newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader, None)
                if header != ["id", "metric"]:
                    raise ParseError(f"bad header {header} in {path}")
                for rec in reader:
                    if len(rec) != 2:
                        raise ParseError(f"bad row {rec} in {path}")
                    gid, metric = rec[0], float(rec[1])
                    if gid in rows:
                        raise DuplicateId(gid)
                    rows[gid] = metric
        except (OSError, ValueError) as exc:
            raise ParseError(str(exc)) from exc
        metadata = {}
        if os.path.exists(_sidecar(path)):
            with open(_sidecar(path)) as fh:
                metadata = json.load(fh)
        table = cls(rows, metadata)
        if validate_ids and metadata.get("source") != "external":
            for gid in rows:
                cnn_space.CnnGenotype.from_id(gid)
        return table

    @classmethod
    def import_external(cls, path, higher_better):
        table = cls.load(path, validate_ids=False)
        table.metadata = {"source": "external", "higher_better": bool(higher_better)}
        return table


def _sidecar(path):
    return os.path.splitext(path)[0] + ".meta.json"


def config_hash(dataset_cfg, train_cfg):
    return hashlib.sha256(repr((dataset_cfg, train_cfg)).encode()).hexdigest()[:16]


def sample_bench_genotypes(sample_size, seed):
    """Uniform sample without replacement by canonical id."""
    r = rngmod.stream(seed, "bench-sample")
    seen, out = set(), []
    while len(out) < sample_size:
        g = cnn_space.sample_genotype(r)
        gid = g.canonical_id()
        if gid not in seen:
            seen.add(gid)
            out.append(g)
    return out


def build_bench_table(
    sample_size,
    seed,
    out_path,
    dataset_cfg=DatasetConfig(),
    train_cfg=TrainConfig(),
    progress=None,
):
    """Train the sampled genotypes, appending rows to ``out_path`` so an
    interrupted build resumes where it stopped."""
    genotypes = sample_bench_genotypes(sample_size, seed)
    done = {}
    if os.path.exists(out_path):
        done = BenchTable.load(out_path).rows
    metadata = {
        "source": "procedural",
        "higher_better": True,
        "seed": seed,
        "config_hash": config_hash(dataset_cfg, train_cfg),
    }
    dataset = None
    mode = "a" if done else "w"
    with open(out_path, mode, newline="") as fh:
        w = csv.writer(fh)
        if not done:
            w.writerow(["id", "metric"])
        for g in genotypes:
            gid = g.canonical_id()
            if gid in done:
                continue
            if dataset is None:
                dataset = gen_dataset(dataset_cfg, seed)
            acc = train_groundtruth(g, dataset, train_cfg, seed)
            done[gid] = acc
            w.writerow([gid, f"{acc:.10g}"])
            fh.flush()
            if progress is not None:
                progress(gid, acc)
    with open(_sidecar(out_path), "w") as fh:
        json.dump(metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return BenchTable(done, metadata)
