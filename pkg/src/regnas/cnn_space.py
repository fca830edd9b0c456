"""Cell-based CNN genotypes and the fully-convolutional backbone builder.

A genotype is one op per edge of a 4-node cell DAG, edges ordered
(0-1, 0-2, 0-3, 1-2, 1-3, 2-3).  The backbone is a stem, one cell block per
stage with average-pool reductions between stages, a feature tap after every
stage, and a pool+1x1 adapter head per tap that emits (b, c'_i, 8, 8).
"""

from dataclasses import dataclass, field

import numpy as np

from . import nn
from .errors import DegenerateError, InvalidSpec

EDGE_ORDER = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
OPS = ("none", "skip", "conv1x1", "conv3x3", "avgpool3x3")
NUM_EDGES = len(EDGE_ORDER)
SPACE_SIZE = len(OPS) ** NUM_EDGES  # 15625


@dataclass(frozen=True)
class CnnGenotype:
    edge_ops: tuple

    def __post_init__(self):
        if len(self.edge_ops) != NUM_EDGES:
            raise InvalidSpec(f"expected {NUM_EDGES} edge ops")
        for op in self.edge_ops:
            if op not in OPS:
                raise InvalidSpec(f"unknown op {op}")

    def canonical_id(self):
        return "".join(str(OPS.index(op)) for op in self.edge_ops)

    @classmethod
    def from_id(cls, s):
        if len(s) != NUM_EDGES or any(ch not in "01234" for ch in s):
            raise InvalidSpec(f"bad genotype id {s!r}")
        return cls(tuple(OPS[int(ch)] for ch in s))

    def to_json(self):
        return {"edges": list(self.edge_ops)}

    @classmethod
    def from_json(cls, obj):
        return cls(tuple(obj["edges"]))


@dataclass(frozen=True)
class MacroConfig:
    n_stages: int = 3
    stem_channels: int = 16
    cells_per_stage: int = 1
    stage_channels: tuple = (16, 32, 64)
    input_hw: int = 32
    adapter_hw: int = 8

    def __post_init__(self):
        if self.n_stages < 1 or len(self.stage_channels) != self.n_stages:
            raise InvalidSpec("stage_channels length must equal n_stages")

    def tap_hw(self, stage):
        return self.input_hw // (2**stage)  # stage is 0-based


def sample_genotype(rng):
    return CnnGenotype(tuple(OPS[i] for i in rng.integers(0, len(OPS), size=NUM_EDGES)))


def mutate_genotype(g, rng):
    ops = list(g.edge_ops)
    for e in range(NUM_EDGES):
        if rng.random() < 1.0 / NUM_EDGES:
            ops[e] = OPS[rng.integers(0, len(OPS))]
    return CnnGenotype(tuple(ops))


def _reachable(edge_ops):
    """Cell nodes reachable from node 0 through non-none edges."""
    live = {0}
    for (i, j), op in zip(EDGE_ORDER, edge_ops):
        if op != "none" and i in live:
            live.add(j)
    return live


def validate_genotype(g):
    if 3 not in _reachable(g.edge_ops):
        raise DegenerateError(f"no path through cell for {g.canonical_id()}")


def is_degenerate(g):
    return 3 not in _reachable(g.edge_ops)


class _Builder:
    """Accumulates Graph nodes with sequential weight-init draws."""

    def __init__(self, rng, dtype):
        self.nodes = []
        self.rng = rng
        self.dtype = dtype

    def add(self, op, *inputs):
        self.nodes.append(nn.Node(op, inputs))
        return len(self.nodes) - 1

    def conv_bn_relu(self, x, cin, cout, k, stride=1, pad=0):
        x = self.add(nn.Conv2d(cin, cout, k, stride, pad, rng=self.rng, dtype=self.dtype), x)
        x = self.add(nn.BatchNorm2d(cout), x)
        return self.add(nn.ReLU(), x)

    def cell(self, x, channels, edge_ops):
        # node value = sum of op(edge) over incoming edges; a node with no
        # materialized input stays undefined and its outgoing edges are dropped
        values = {0: x}
        for j in (1, 2, 3):
            terms = []
            for (a, b), opname in zip(EDGE_ORDER, edge_ops):
                if b != j or opname == "none" or a not in values:
                    continue
                src = values[a]
                if opname == "skip":
                    terms.append(self.add(nn.Identity(), src))
                elif opname == "conv1x1":
                    terms.append(self.conv_bn_relu(src, channels, channels, 1))
                elif opname == "conv3x3":
                    terms.append(self.conv_bn_relu(src, channels, channels, 3, pad=1))
                elif opname == "avgpool3x3":
                    terms.append(self.add(nn.AvgPool2d(3, stride=1, pad=1), src))
            if terms:
                values[j] = self.add(nn.Add(), *terms) if len(terms) > 1 else terms[0]
        if 3 not in values:
            raise DegenerateError("cell output unreachable")
        return values[3]


@dataclass
class BackboneNet:
    graph: nn.Graph
    tap_ids: list
    adapter_out_ids: list
    macro: MacroConfig = field(default=None)

    def forward(self, x):
        return self.graph.forward(x)


def _trunk(builder, g, macro):
    validate_genotype(g)
    x = builder.add(nn.Input())
    x = builder.conv_bn_relu(x, 3, macro.stem_channels, 3, pad=1)
    taps = []
    cin = macro.stem_channels
    for s in range(macro.n_stages):
        c = macro.stage_channels[s]
        if s > 0:
            # reduction: halve spatial, then 1x1 conv to the next stage width
            x = builder.add(nn.AvgPool2d(2, stride=2), x)
            x = builder.conv_bn_relu(x, cin, c, 1)
        elif cin != c:
            x = builder.conv_bn_relu(x, cin, c, 1)
        for _ in range(macro.cells_per_stage):
            x = builder.cell(x, c, g.edge_ops)
        taps.append(x)
        cin = c
    return x, taps


def build_backbone(g, macro, task_channels, init_rng, dtype=np.float32):
    """task_channels[i] is the adapter output width for stage i, or None to
    skip that stage's adapter (no target attached there)."""
    if len(task_channels) != macro.n_stages:
        raise InvalidSpec("task_channels length must equal n_stages")
    b = _Builder(init_rng, dtype)
    _, taps = _trunk(b, g, macro)
    adapters = []
    for s, cprime in enumerate(task_channels):
        if cprime is None:
            adapters.append(None)
            continue
        x = taps[s]
        factor = macro.tap_hw(s) // macro.adapter_hw
        if factor > 1:
            x = b.add(nn.AvgPool2d(factor, stride=factor), x)
        x = b.add(nn.Conv2d(macro.stage_channels[s], cprime, 1, rng=b.rng, dtype=dtype), x)
        adapters.append(x)
    outputs = [a for a in adapters if a is not None]
    return BackboneNet(nn.Graph(b.nodes, outputs), taps, adapters, macro)


def build_classifier(g, macro, n_classes, init_rng, dtype=np.float32):
    """Trunk + global average pool + linear head, for groundtruth training."""
    b = _Builder(init_rng, dtype)
    x, _ = _trunk(b, g, macro)
    x = b.add(nn.GlobalAvgPool(), x)
    x = b.add(nn.Linear(macro.stage_channels[-1], n_classes, rng=b.rng, dtype=dtype), x)
    return nn.Graph(b.nodes, [x])
