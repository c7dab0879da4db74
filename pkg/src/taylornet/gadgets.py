"""Exact multiplication from the square activation, and product trees.

A single product xy is recovered from three squares via the polarization
identity xy = ((x+y)^2 - x^2 - y^2) / 2, which binary64 arithmetic evaluates
with only rounding-level error.  k-fold products pair factors tournament
style so the multiplication depth grows as ceil(log2 k) while using exactly
k-1 gadgets; odd factors skip ahead to a later round over a plain DAG edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log2
from typing import Sequence

from .indexing import GridIndex, MultiIndex, _as_exponents
from .netgraph import ActivationKind, GraphBuilder, NetGraph, _merge
from .partition import append_factor_group

__all__ = ["ProductPlan", "product_plan", "mult_gadget", "tournament_product", "term_network"]


@dataclass(frozen=True)
class ProductPlan:
    """Pairing schedule for a k-leaf product tree.

    Labels 0..k-1 are the leaves; each pairing produces the next unused
    label.  `byes` records labels that pass through a round unpaired.
    """

    leaf_count: int
    rounds: tuple[tuple[tuple[int, int], ...], ...]
    byes: tuple[tuple[int, int], ...]

    @property
    def num_gadgets(self) -> int:
        return sum(len(r) for r in self.rounds)

    @property
    def num_rounds(self) -> int:
        return len(self.rounds)


def product_plan(k: int) -> ProductPlan:
    """Left-to-right pairing over ceil(log2 k) rounds; odd item byes to the next round."""
    if k < 1:
        raise ValueError("empty factor list")
    current = list(range(k))
    next_label = k
    rounds = []
    byes = []
    while len(current) > 1:
        pairs = []
        nxt = []
        for i in range(0, len(current) - 1, 2):
            pairs.append((current[i], current[i + 1]))
            nxt.append(next_label)
            next_label += 1
        if len(current) % 2:
            byes.append((len(rounds), current[-1]))
            nxt.append(current[-1])
        rounds.append(tuple(pairs))
        current = nxt
    return ProductPlan(k, tuple(rounds), tuple(byes))


def append_mult(b: GraphBuilder, x_id: int, y_id: int) -> int:
    """Emit one multiplication gadget computing x*y; returns the output node id."""
    sq_y = b.add_node(ActivationKind.SQUARE, [(y_id, 1.0)])
    sq_x = b.add_node(ActivationKind.SQUARE, [(x_id, 1.0)])
    sq_sum = b.add_node(ActivationKind.SQUARE, [(x_id, 1.0), (y_id, 1.0)])
    return b.add_node(
        ActivationKind.IDENTITY, [(sq_y, -0.5), (sq_x, -0.5), (sq_sum, 0.5)]
    )


def fold_product(b: GraphBuilder, leaf_ids: Sequence[int], cache: dict | None = None) -> int:
    """Tournament-combine value nodes into their product inside a builder.

    With a cache, a gadget for an already-seen operand pair is reused
    (operand order is canonicalized; the polarization identity is symmetric
    down to the bit level).
    """
    plan = product_plan(len(leaf_ids))
    ids = list(leaf_ids)
    for round_pairs in plan.rounds:
        for a_label, b_label in round_pairs:
            a_id, b_id = ids[a_label], ids[b_label]
            if cache is None:
                ids.append(append_mult(b, a_id, b_id))
            else:
                key = (a_id, b_id) if a_id <= b_id else (b_id, a_id)
                node = cache.get(key)
                if node is None:
                    node = append_mult(b, key[0], key[1])
                    cache[key] = node
                ids.append(node)
    return ids[-1]


def mult_gadget() -> NetGraph:
    """Two-input graph computing the exact product of its inputs."""
    b = GraphBuilder(2)
    out = append_mult(b, 0, 1)
    return b.finalize(out)


def tournament_product(factors: Sequence[NetGraph]) -> NetGraph:
    """Product of single-output graphs over shared inputs, k-1 gadgets total."""
    if len(factors) == 0:
        raise ValueError("empty factor list")
    if len(factors) == 1:
        return factors[0]
    b, out_ids = _merge(factors)
    leaves = []
    for outs in out_ids:
        if len(outs) != 1:
            raise ValueError("tournament_product needs single-output graphs")
        leaves.append(outs[0])
    root = fold_product(b, leaves)
    return b.finalize(root, prune=False)


def term_network(m: GridIndex, n: MultiIndex | Sequence[int]) -> NetGraph:
    """Graph computing phi_m(x) * (x - m/N)^n exactly.

    Leaves enter the product tree with the d bump factors first, then the
    linear factors x_k - m_k/N, each repeated to its exponent.
    """
    exps = _as_exponents(n)
    d = len(m)
    if len(exps) != d:
        raise ValueError(f"multi-index length {len(exps)} != dimension {d}")
    N = m.resolution
    b = GraphBuilder(d)
    leaves = []
    for k, m_k in enumerate(m.coords):
        _, combine = append_factor_group(b, k, N, m_k)
        leaves.append(combine)
    for k, (m_k, n_k) in enumerate(zip(m.coords, exps)):
        if n_k > 0:
            lin = b.add_node(ActivationKind.IDENTITY, [(k, 1.0)], bias=-(m_k / N))
            leaves.extend([lin] * n_k)
    root = fold_product(b, leaves)
    return b.finalize(root)


def expected_rounds(k: int) -> int:
    """ceil(log2 k) for k >= 2, zero for the single-factor case."""
    return 0 if k <= 1 else ceil(log2(k))
