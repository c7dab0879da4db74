"""Computation-graph IR for networks mixing identity, ReLU, and square nodes.

Graphs are DAGs over implicit input ids 0..d-1 followed by computation nodes
in topological order.  A node computes activation(bias + sum of w_i * v_i)
with the sum accumulated in incoming-edge order, which pins the floating-point
result bit-for-bit regardless of evaluation backend.
"""

from __future__ import annotations

import json
from array import array
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _forward

__all__ = [
    "ActivationKind",
    "Node",
    "NetGraph",
    "GraphBuilder",
    "ComplexityReport",
    "NetFormatError",
    "parallel",
    "linear_combination",
    "embed_inputs",
]


class NetFormatError(ValueError):
    """Malformed serialized network data."""


class ActivationKind(Enum):
    IDENTITY = 0
    RELU = 1
    SQUARE = 2

    @property
    def tag(self) -> str:
        return self.name.lower()

    @classmethod
    def from_tag(cls, tag: str) -> "ActivationKind":
        try:
            return cls[tag.upper()]
        except KeyError:
            raise NetFormatError(f"unknown activation {tag!r}") from None

    def apply(self, x: float) -> float:
        if self is ActivationKind.RELU:
            return x if x > 0.0 else 0.0
        if self is ActivationKind.SQUARE:
            return x * x
        return x


@dataclass(frozen=True)
class Node:
    """Read-only view of one computation node."""

    id: int
    activation: ActivationKind
    bias: float
    incoming: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class ComplexityReport:
    nonzero_weights: int
    nonzero_biases: int
    num_nodes: int
    depth: int

    @property
    def total_parameters(self) -> int:
        return self.nonzero_weights + self.nonzero_biases


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class NetGraph:
    """Immutable finalized computation graph."""

    __slots__ = ("input_arity", "act", "bias", "indptr", "srcs", "ws", "outputs", "_plan", "_complexity")

    def __init__(self, input_arity, act, bias, indptr, srcs, ws, outputs, _validate=True):
        self.input_arity = int(input_arity)
        self.act = _freeze(np.ascontiguousarray(act, dtype=np.int8))
        self.bias = _freeze(np.ascontiguousarray(bias, dtype=np.float64))
        self.indptr = _freeze(np.ascontiguousarray(indptr, dtype=np.int64))
        self.srcs = _freeze(np.ascontiguousarray(srcs, dtype=np.int64))
        self.ws = _freeze(np.ascontiguousarray(ws, dtype=np.float64))
        self.outputs = tuple(int(o) for o in outputs)
        self._plan = None
        self._complexity = None
        if _validate:
            self._check()

    def _check(self):
        d, n = self.input_arity, self.num_nodes
        if self.indptr.shape[0] != n + 1 or self.bias.shape[0] != n:
            raise NetFormatError("inconsistent node arrays")
        if self.srcs.shape[0] != self.ws.shape[0] or self.indptr[-1] != self.srcs.shape[0]:
            raise NetFormatError("inconsistent edge arrays")
        if n:
            fan = np.diff(self.indptr)
            if (fan < 0).any():
                raise NetFormatError("negative fan-in")
            own = d + np.repeat(np.arange(n, dtype=np.int64), fan)
            if self.srcs.size and ((self.srcs < 0) | (self.srcs >= own)).any():
                raise NetFormatError("acyclicity violated: edge source at or after its node")
        if not self.outputs:
            raise NetFormatError("graph has no output")
        for o in self.outputs:
            if o < 0 or o >= d + n:
                raise NetFormatError(f"output id {o} out of range")

    # -- structure ---------------------------------------------------------

    @property
    def num_nodes(self) -> int:
        """Computation nodes only; inputs are not counted."""
        return int(self.act.shape[0])

    @property
    def output(self) -> int:
        if len(self.outputs) != 1:
            raise ValueError("graph has multiple outputs; use .outputs")
        return self.outputs[0]

    def node(self, node_id: int) -> Node:
        d = self.input_arity
        i = node_id - d
        if i < 0 or i >= self.num_nodes:
            raise IndexError(f"no node with id {node_id}")
        lo, hi = int(self.indptr[i]), int(self.indptr[i + 1])
        inc = tuple((int(self.srcs[e]), float(self.ws[e])) for e in range(lo, hi))
        return Node(node_id, ActivationKind(int(self.act[i])), float(self.bias[i]), inc)

    def iter_nodes(self) -> Iterator[Node]:
        for i in range(self.num_nodes):
            yield self.node(self.input_arity + i)

    # -- evaluation --------------------------------------------------------

    def _get_plan(self):
        if self._plan is None:
            self._plan = _forward.build_plan(
                self.input_arity, self.act, self.bias, self.indptr, self.srcs, self.ws, self.outputs
            )
        return self._plan

    def eval_outputs(self, x) -> np.ndarray:
        """All output values at a single point, as a 1-D array."""
        xa = np.asarray(x, dtype=np.float64).reshape(1, -1)
        if xa.shape[1] != self.input_arity:
            raise ValueError(f"expected {self.input_arity} inputs, got {xa.shape[1]}")
        return _forward.run_plan(self._get_plan(), xa)[:, 0]

    def eval(self, x) -> float:
        """Scalar output at a single point (single-output graphs)."""
        if len(self.outputs) != 1:
            raise ValueError("eval() needs a single-output graph; use eval_outputs()")
        return float(self.eval_outputs(x)[0])

    def eval_many(self, X, chunk: int | None = None) -> np.ndarray:
        """Scalar outputs over a batch X of shape (P, d)."""
        if len(self.outputs) != 1:
            raise ValueError("eval_many() needs a single-output graph")
        Xa = np.asarray(X, dtype=np.float64)
        if Xa.ndim != 2 or Xa.shape[1] != self.input_arity:
            raise ValueError(f"expected shape (P, {self.input_arity}), got {Xa.shape}")
        return _forward.run_plan(self._get_plan(), Xa, chunk=chunk)[0]

    # -- accounting --------------------------------------------------------

    def complexity(self) -> ComplexityReport:
        if self._complexity is None:
            depths = _forward._longest_path(self.input_arity, self.indptr, self.srcs)
            depth = int(max(depths[o] for o in self.outputs)) if self.outputs else 0
            self._complexity = ComplexityReport(
                nonzero_weights=int(np.count_nonzero(self.ws)),
                nonzero_biases=int(np.count_nonzero(self.bias)),
                num_nodes=self.num_nodes,
                depth=depth,
            )
        return self._complexity

    # -- serialization -----------------------------------------------------

    def serialize(self) -> bytes:
        """JSON byte encoding; weights round-trip bit-exactly."""
        if len(self.outputs) != 1:
            raise ValueError("only single-output graphs serialize to the JSON format")
        d = self.input_arity
        nodes = []
        for i in range(self.num_nodes):
            lo, hi = int(self.indptr[i]), int(self.indptr[i + 1])
            nodes.append(
                {
                    "id": d + i,
                    "activation": ActivationKind(int(self.act[i])).tag,
                    "bias": float(self.bias[i]),
                    "incoming": [
                        [int(self.srcs[e]), float(self.ws[e])] for e in range(lo, hi)
                    ],
                }
            )
        doc = {"input_arity": d, "nodes": nodes, "output": self.outputs[0]}
        return json.dumps(doc).encode("utf-8")

    @classmethod
    def deserialize(cls, data: bytes | str) -> "NetGraph":
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise NetFormatError(f"invalid JSON at position {exc.pos}: {exc.msg}") from None
        return _graph_from_doc(doc)

    def __repr__(self) -> str:
        return (
            f"NetGraph(d={self.input_arity}, nodes={self.num_nodes}, "
            f"edges={int(self.indptr[-1])}, outputs={self.outputs})"
        )


def _parse_number(value, where: str) -> float:
    if isinstance(value, str):
        try:
            return float.fromhex(value)
        except ValueError:
            raise NetFormatError(f"bad hex float {value!r} at {where}") from None
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise NetFormatError(f"expected number at {where}, got {type(value).__name__}")


def _graph_from_doc(doc) -> NetGraph:
    if not isinstance(doc, dict):
        raise NetFormatError("top-level JSON value must be an object")
    try:
        d = doc["input_arity"]
        raw_nodes = doc["nodes"]
        output = doc["output"]
    except KeyError as exc:
        raise NetFormatError(f"missing required key {exc.args[0]!r}") from None
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise NetFormatError("input_arity must be a positive integer")
    if not isinstance(raw_nodes, list):
        raise NetFormatError("nodes must be a list")

    act = array("b")
    bias = array("d")
    indptr = array("q", [0])
    srcs = array("q")
    ws = array("d")
    for i, raw in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        if not isinstance(raw, dict):
            raise NetFormatError(f"expected object at {where}")
        node_id = raw.get("id")
        if node_id != d + i:
            raise NetFormatError(
                f"node ids must be contiguous from input_arity; expected {d + i} at {where}, got {node_id!r}"
            )
        kind = raw.get("activation")
        if not isinstance(kind, str):
            raise NetFormatError(f"missing activation at {where}")
        act.append(ActivationKind.from_tag(kind).value)
        bias.append(_parse_number(raw.get("bias", 0.0), f"{where}.bias"))
        incoming = raw.get("incoming", [])
        if not isinstance(incoming, list):
            raise NetFormatError(f"incoming must be a list at {where}")
        for j, pair in enumerate(incoming):
            pwhere = f"{where}.incoming[{j}]"
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise NetFormatError(f"expected [src, weight] at {pwhere}")
            src = pair[0]
            if not isinstance(src, int) or isinstance(src, bool) or src < 0:
                raise NetFormatError(f"bad source id at {pwhere}")
            if src >= d + i:
                raise NetFormatError(f"acyclicity violated at {pwhere}: source {src} not before node {d + i}")
            srcs.append(src)
            ws.append(_parse_number(pair[1], pwhere))
        indptr.append(len(srcs))
    if not isinstance(output, int) or isinstance(output, bool):
        raise NetFormatError("output must be an integer node id")
    if output < 0 or output >= d + len(raw_nodes):
        raise NetFormatError(f"output id {output} out of range")
    return NetGraph(
        d,
        np.frombuffer(act, dtype=np.int8) if len(act) else np.zeros(0, np.int8),
        np.frombuffer(bias, dtype=np.float64) if len(bias) else np.zeros(0, np.float64),
        np.asarray(indptr, dtype=np.int64),
        np.frombuffer(srcs, dtype=np.int64) if len(srcs) else np.zeros(0, np.int64),
        np.frombuffer(ws, dtype=np.float64) if len(ws) else np.zeros(0, np.float64),
        (output,),
    )


class GraphBuilder:
    """Append-only constructor; ids are assigned in insertion order."""

    def __init__(self, input_arity: int):
        if input_arity < 1:
            raise ValueError("input_arity must be >= 1")
        self.input_arity = int(input_arity)
        self._act = array("b")
        self._bias = array("d")
        self._indptr = array("q", [0])
        self._srcs = array("q")
        self._ws = array("d")

    @property
    def next_id(self) -> int:
        return self.input_arity + len(self._act)

    def add_node(self, activation: ActivationKind, incoming: Iterable[tuple[int, float]], bias: float = 0.0) -> int:
        nid = self.next_id
        srcs = self._srcs
        ws = self._ws
        for src, w in incoming:
            if src < 0 or src >= nid:
                raise ValueError(f"edge source {src} must precede node {nid}")
            srcs.append(src)
            ws.append(w)
        self._act.append(activation.value)
        self._bias.append(bias)
        self._indptr.append(len(srcs))
        return nid

    def finalize(self, outputs, prune: bool = True) -> NetGraph:
        """Freeze into a NetGraph; by default drops nodes not feeding an output."""
        if isinstance(outputs, (int, np.integer)):
            outputs = (int(outputs),)
        outputs = tuple(int(o) for o in outputs)
        d = self.input_arity
        n = len(self._act)
        act = np.frombuffer(self._act, dtype=np.int8).copy() if n else np.zeros(0, np.int8)
        bias = np.frombuffer(self._bias, dtype=np.float64).copy() if n else np.zeros(0, np.float64)
        indptr = np.asarray(self._indptr, dtype=np.int64)
        srcs = np.frombuffer(self._srcs, dtype=np.int64).copy() if len(self._srcs) else np.zeros(0, np.int64)
        ws = np.frombuffer(self._ws, dtype=np.float64).copy() if len(self._ws) else np.zeros(0, np.float64)

        if prune and n:
            keep = _forward._mark_ancestors(d, indptr, srcs, np.asarray(outputs, dtype=np.int64))
            keep_nodes = keep[d:].astype(bool)
            if not keep_nodes.all():
                remap = np.empty(d + n, dtype=np.int64)
                remap[:d] = np.arange(d)
                remap[d:] = d + np.cumsum(keep_nodes) - 1
                fan = np.diff(indptr)
                edge_keep = np.repeat(keep_nodes, fan)
                srcs = remap[srcs[edge_keep]]
                ws = ws[edge_keep]
                new_fan = fan[keep_nodes]
                indptr = np.concatenate(([0], np.cumsum(new_fan))).astype(np.int64)
                act = act[keep_nodes]
                bias = bias[keep_nodes]
                outputs = tuple(int(remap[o]) for o in outputs)
        return NetGraph(d, act, bias, indptr, srcs, ws, outputs)


def _merge(nets: Sequence[NetGraph]) -> tuple[GraphBuilder, list[list[int]]]:
    """Disjoint union over shared inputs; returns builder plus per-net output ids."""
    if not nets:
        raise ValueError("need at least one graph")
    d = nets[0].input_arity
    for g in nets[1:]:
        if g.input_arity != d:
            raise ValueError(f"mixed input arities: {g.input_arity} vs {d}")
    b = GraphBuilder(d)
    out_ids: list[list[int]] = []
    for g in nets:
        offset = len(b._act)
        n = g.num_nodes
        # Bulk-append arrays, remapping node sources past the shared inputs.
        shifted = np.where(g.srcs < d, g.srcs, g.srcs + offset)
        b._act.extend(g.act.tolist())
        b._bias.extend(g.bias.tolist())
        base = b._indptr[-1]
        b._indptr.extend((g.indptr[1:] + base).tolist())
        b._srcs.extend(shifted.tolist())
        b._ws.extend(g.ws.tolist())
        out_ids.append([o if o < d else o + offset for o in g.outputs])
    return b, out_ids


def parallel(nets: Sequence[NetGraph]) -> NetGraph:
    """One graph over shared inputs exposing every sub-network output."""
    b, out_ids = _merge(nets)
    flat = [o for outs in out_ids for o in outs]
    return b.finalize(flat, prune=False)


def linear_combination(nets: Sequence[NetGraph], coeffs: Sequence[float]) -> NetGraph:
    """Weighted sum of single-output graphs via one identity output node.

    Zero coefficients contribute no edge (and therefore no nonzero weight);
    their sub-graphs are pruned away entirely.
    """
    if len(nets) != len(coeffs):
        raise ValueError(f"{len(nets)} graphs but {len(coeffs)} coefficients")
    b, out_ids = _merge(nets)
    edges = []
    for outs, c in zip(out_ids, coeffs):
        if len(outs) != 1:
            raise ValueError("linear_combination needs single-output graphs")
        if c != 0.0:
            edges.append((outs[0], float(c)))
    out = b.add_node(ActivationKind.IDENTITY, edges, 0.0)
    return b.finalize(out, prune=True)


def embed_inputs(net: NetGraph, ambient_arity: int, positions: Sequence[int]) -> NetGraph:
    """Re-home a d_eff-input graph onto selected coordinates of a wider input.

    positions[k] gives the ambient coordinate feeding former input k.  The
    node structure (and hence every parameter count) is unchanged.
    """
    d_old = net.input_arity
    pos = [int(p) for p in positions]
    if len(pos) != d_old:
        raise ValueError(f"need {d_old} positions, got {len(pos)}")
    if len(set(pos)) != len(pos) or any(p < 0 or p >= ambient_arity for p in pos):
        raise ValueError(f"positions {pos} invalid for arity {ambient_arity}")
    shift = ambient_arity - d_old
    lut = np.asarray(pos, dtype=np.int64)
    srcs = np.where(net.srcs < d_old, lut[np.minimum(net.srcs, d_old - 1)], net.srcs + shift)
    outputs = tuple(pos[o] if o < d_old else o + shift for o in net.outputs)
    return NetGraph(ambient_arity, net.act, net.bias, net.indptr, srcs, net.ws, outputs)
