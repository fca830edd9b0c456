"""Tiny recurrent-cell genotypes and the unrolled many-to-many builder.

A cell has two sources (id 0 = x_t, id 1 = previous hidden state) and K=4
internal nodes (ids 2..5).  Node ops: linear_x / linear_h read their fixed
source through a learned d-by-d linear map; add/mul combine two prior nodes;
tanh/sigmoid/identity are unary.  One internal node is designated the new
hidden state, which is also the per-step regression output.
"""

from dataclasses import dataclass

import numpy as np

from . import nn
from .errors import DegenerateError, InvalidSpec, SamplingExhausted

K_NODES = 4
NODE_OPS = ("linear_x", "linear_h", "add", "mul", "tanh", "sigmoid", "identity")
_BINARY = ("add", "mul")
_MAX_RETRIES = 100


@dataclass(frozen=True)
class RnnGenotype:
    node_ops: tuple  # K entries of (op_name, (input ids...))
    output_node: int  # 2..2+K-1

    def __post_init__(self):
        if len(self.node_ops) != K_NODES:
            raise InvalidSpec(f"expected {K_NODES} node specs")
        for j, (op, inputs) in enumerate(self.node_ops):
            if op not in NODE_OPS:
                raise InvalidSpec(f"unknown op {op}")
            limit = 2 + j
            if any(not (0 <= i < limit) for i in inputs):
                raise InvalidSpec("node input references a later node")
            want = 2 if op in _BINARY else (0 if op in ("linear_x", "linear_h") else 1)
            if len(inputs) != want:
                raise InvalidSpec(f"{op} takes {want} inputs")
        if not (2 <= self.output_node < 2 + K_NODES):
            raise InvalidSpec("output node out of range")

    def canonical_id(self):
        parts = [f"{op}:{','.join(map(str, ins))}" for op, ins in self.node_ops]
        return ";".join(parts) + f">{self.output_node}"

    def to_json(self):
        return {
            "nodes": [{"op": op, "inputs": list(ins)} for op, ins in self.node_ops],
            "output": self.output_node,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(
            tuple((n["op"], tuple(n["inputs"])) for n in obj["nodes"]),
            obj["output"],
        )

    @classmethod
    def from_canonical(cls, text):
        try:
            body, out = text.rsplit(">", 1)
            nodes = []
            for part in body.split(";"):
                op, ins = part.split(":", 1)
                nodes.append((op, tuple(int(i) for i in ins.split(",")) if ins else ()))
            return cls(tuple(nodes), int(out))
        except (ValueError, InvalidSpec) as exc:
            raise InvalidSpec(f"bad genotype id {text!r}") from exc


def vanilla_rnn_genotype():
    """tanh(W_x x + W_h h): expressible sanity anchor."""
    return RnnGenotype(
        (
            ("linear_x", ()),
            ("linear_h", ()),
            ("add", (2, 3)),
            ("tanh", (4,)),
        ),
        output_node=5,
    )


def _depends(g):
    """For each node id, the set of source ids (0, 1) it depends on."""
    deps = {0: {0}, 1: {1}}
    for j, (op, inputs) in enumerate(g.node_ops):
        nid = 2 + j
        if op == "linear_x":
            deps[nid] = {0}
        elif op == "linear_h":
            deps[nid] = {1}
        else:
            deps[nid] = set().union(*(deps[i] for i in inputs))
    return deps


def is_degenerate(g):
    return _depends(g)[g.output_node] != {0, 1}


def _sample_node(j, rng):
    op = NODE_OPS[rng.integers(len(NODE_OPS))]
    pool = 2 + j
    if op in ("linear_x", "linear_h"):
        inputs = ()
    elif op in _BINARY:
        inputs = tuple(int(i) for i in rng.choice(pool, size=2, replace=False))
    else:
        inputs = (int(rng.integers(pool)),)
    return op, inputs


def sample_rnn_genotype(rng):
    for _ in range(_MAX_RETRIES):
        nodes = tuple(_sample_node(j, rng) for j in range(K_NODES))
        g = RnnGenotype(nodes, output_node=2 + int(rng.integers(K_NODES)))
        if not is_degenerate(g):
            return g
    raise SamplingExhausted("no non-degenerate wiring found")


def mutate_rnn_genotype(g, rng):
    for _ in range(_MAX_RETRIES):
        nodes = list(g.node_ops)
        for j in range(K_NODES):
            if rng.random() < 1.0 / K_NODES:
                nodes[j] = _sample_node(j, rng)
        child = RnnGenotype(tuple(nodes), g.output_node)
        if not is_degenerate(child):
            return child
    raise SamplingExhausted("mutation produced only degenerate offspring")


class RnnNet:
    """Cell unrolled over l steps with shared parameters (BPTT via the graph)."""

    def __init__(self, graph, x_ids, h0_id, out_ids, d):
        self.graph = graph
        self.x_ids = x_ids
        self.h0_id = h0_id
        self.out_ids = out_ids
        self.d = d

    def forward(self, x):
        l, b, d = x.shape
        inputs = {self.h0_id: np.zeros((b, d), dtype=x.dtype)}
        for t, nid in enumerate(self.x_ids):
            inputs[nid] = x[t]
        outs = self.graph.forward(inputs)
        return np.stack(outs)

    def backward(self, gout):
        self.graph.backward({nid: gout[t] for t, nid in enumerate(self.out_ids)})

    def params(self):
        return self.graph.params()


def build_rnn(g, d, l, init_rng, dtype=np.float32):
    if is_degenerate(g):
        raise DegenerateError(f"degenerate rnn wiring {g.canonical_id()}")
    # shared linear layers, one per linear node in the cell
    linears = {
        j: nn.Linear(d, d, rng=init_rng, dtype=dtype)
        for j, (op, _) in enumerate(g.node_ops)
        if op in ("linear_x", "linear_h")
    }
    nodes, x_ids, out_ids = [], [], []

    def add(op, *inputs):
        nodes.append(nn.Node(op, inputs))
        return len(nodes) - 1

    h_prev = add(nn.Input())
    h0_id = h_prev
    for _ in range(l):
        x_t = add(nn.Input())
        x_ids.append(x_t)
        vals = {0: x_t, 1: h_prev}
        for j, (op, inputs) in enumerate(g.node_ops):
            if op == "linear_x":
                vals[2 + j] = add(linears[j], x_t)
            elif op == "linear_h":
                vals[2 + j] = add(linears[j], h_prev)
            elif op == "add":
                vals[2 + j] = add(nn.Add(), vals[inputs[0]], vals[inputs[1]])
            elif op == "mul":
                vals[2 + j] = add(nn.Mul(), vals[inputs[0]], vals[inputs[1]])
            elif op == "tanh":
                vals[2 + j] = add(nn.Tanh(), vals[inputs[0]])
            elif op == "sigmoid":
                vals[2 + j] = add(nn.Sigmoid(), vals[inputs[0]])
            else:
                vals[2 + j] = add(nn.Identity(), vals[inputs[0]])
        h_prev = vals[g.output_node]
        out_ids.append(h_prev)
    return RnnNet(nn.Graph(nodes, out_ids), x_ids, h0_id, out_ids, d)
