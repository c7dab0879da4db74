"""Network synthesis from localized Taylor data, in three regimes.

The core pipeline tiles [0,1]^d with the grid partition of unity, attaches
to every grid point its degree-(n-1) Taylor data, and emits one product
subnetwork per (grid point, multi-index) term, summed by a single output
node.  The resulting graph computes the piecewise Taylor approximant

    f~(x) = sum_m sum_{|a| < n} c_{m,a} * phi_m(x) * (x - m/N)^a

exactly (to binary64 rounding), so approximation error comes only from the
mathematics of f~ and never from training.  On top of the fixed-order
pipeline sit an analytic regime that also optimizes the expansion order, and
subspace regimes that exploit low effective dimension.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterator, Sequence

import numpy as np

from .gadgets import fold_product
from .indexing import (
    GridIndex,
    InfeasibleError,
    MultiIndex,
    _as_exponents,
    check_feasible,
    enumerate_multi_indices,
    grid_centers,
    grid_size,
    multi_factorial,
    multi_index_count,
    safety_cap,
)
from .netgraph import ActivationKind, ComplexityReport, GraphBuilder, NetGraph, embed_inputs
from .oracles import FunctionOracle
from .partition import active_window, append_factor_group

logger = logging.getLogger(__name__)

REGIMES = ("sobolev", "analytic", "single_subspace", "union_subspaces")

COEFF_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SynthesisConfig:
    """Target accuracy and regime parameters for one synthesis run."""

    d: int
    n: int
    epsilon: float
    regime: str = "sobolev"
    d_eff: int | None = None
    e: tuple[int, ...] | None = None
    C_f: float | None = None

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}; expected one of {REGIMES}")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0,1), got {self.epsilon}")
        if self.d_eff is not None and not 1 <= self.d_eff < self.d:
            raise ValueError(f"need 1 <= d_eff < d, got d_eff={self.d_eff}, d={self.d}")
        if self.e is not None:
            e = tuple(int(v) for v in self.e)
            if len(set(e)) != len(e) or any(v < 0 or v >= self.d for v in e):
                raise ValueError(f"coordinate subset {e} invalid for d={self.d}")
            if self.d_eff is not None and len(e) != self.d_eff:
                raise ValueError(f"subset {e} has size {len(e)}, expected d_eff={self.d_eff}")
            object.__setattr__(self, "e", e)
        if self.C_f is not None and self.C_f <= 0:
            raise ValueError("C_f must be positive")


class CoefficientTable:
    """Taylor coefficients c_{m,a} = D^a f(m/N) / a! for a full grid.

    Stored densely as an array of shape ((N+1)^d, #multi-indices), with
    rows in grid enumeration order and columns in multi-index enumeration
    order.  Coefficients exceeding 1 in magnitude (beyond tolerance) are
    collected as diagnostics, since the error guarantee presumes a
    unit-norm function.
    """

    def __init__(self, N: int, d: int, n: int, values: np.ndarray):
        self.N = int(N)
        self.d = int(d)
        self.n = int(n)
        self.indices: tuple[MultiIndex, ...] = tuple(enumerate_multi_indices(d, n))
        values = np.ascontiguousarray(values, dtype=np.float64)
        if values.shape != (grid_size(N, d), len(self.indices)):
            raise ValueError(
                f"coefficient array shape {values.shape} != "
                f"({grid_size(N, d)}, {len(self.indices)})"
            )
        values.flags.writeable = False
        self.values = values
        self._strides = tuple((N + 1) ** (d - 1 - k) for k in range(d))
        self._exps = np.asarray([tuple(ix) for ix in self.indices], dtype=np.int64)
        self._col = {tuple(ix): j for j, ix in enumerate(self.indices)}
        bad = np.argwhere(np.abs(values) > 1.0 + COEFF_TOLERANCE)
        self.norm_violations = tuple(
            (self.grid_index(int(g)), self.indices[int(j)], float(values[g, j])) for g, j in bad
        )
        if self.norm_violations:
            logger.warning(
                "%d coefficients exceed the unit bound (max |c| = %.6g); "
                "the epsilon guarantee scales with the declared norm",
                len(self.norm_violations),
                float(np.abs(values).max()),
            )

    @property
    def num_entries(self) -> int:
        return int(self.values.size)

    def grid_index(self, flat: int) -> GridIndex:
        coords = []
        for s in self._strides:
            coords.append(flat // s)
            flat %= s
        return GridIndex(tuple(coords), self.N)

    def _flat(self, m) -> int:
        coords = tuple(int(v) for v in m)
        return sum(c * s for c, s in zip(coords, self._strides))

    def get(self, m, a) -> float:
        """Coefficient for grid point m and multi-index a."""
        return float(self.values[self._flat(m), self._col[_as_exponents(a)]])

    def items(self) -> Iterator[tuple[GridIndex, MultiIndex, float]]:
        for g in range(self.values.shape[0]):
            gi = self.grid_index(g)
            for j, ix in enumerate(self.indices):
                yield gi, ix, float(self.values[g, j])

    def max_abs(self) -> float:
        return float(np.abs(self.values).max()) if self.values.size else 0.0

    def closed_form(self, X) -> np.ndarray:
        """Evaluate f~ directly from the scalar pieces (no network involved).

        Only the (at most 2^d) bumps whose support contains each point are
        visited, so this stays cheap even for large grids.
        """
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.d:
            raise ValueError(f"points have dimension {X.shape[1]}, expected {self.d}")
        N, d = self.N, self.d
        Mc, W = active_window(N, X)  # (P, d, 2) each
        strides = np.asarray(self._strides, dtype=np.int64)
        total = np.zeros(X.shape[0], dtype=np.float64)
        for delta in product((0, 1), repeat=d):
            sel = np.arange(d), np.asarray(delta)
            Msel = Mc[:, sel[0], sel[1]]          # (P, d)
            w = np.prod(W[:, sel[0], sel[1]], axis=1)
            live = w != 0.0
            if not live.any():
                continue
            flat = (Msel[live] * strides).sum(axis=1)
            coeff = self.values[flat]             # (P_live, J)
            diff = X[live] - Msel[live] / float(N)
            mono = np.ones_like(coeff)
            for k in range(d):
                ek = self._exps[:, k]
                used = ek > 0
                if used.any():
                    mono[:, used] *= diff[:, k][:, None] ** ek[used]
            total[live] += w[live] * (coeff * mono).sum(axis=1)
        return total


def taylor_coefficients(oracle: FunctionOracle, N: int, d: int, n: int) -> CoefficientTable:
    """Tabulate D^a f(m/N) / a! over the whole grid from oracle derivatives."""
    if oracle.d != d:
        raise ValueError(f"oracle dimension {oracle.d} != requested d={d}")
    indices = enumerate_multi_indices(d, n)
    check_feasible(grid_size(N, d) * len(indices), what="coefficient table")
    centers = grid_centers(N, d)
    values = np.empty((centers.shape[0], len(indices)), dtype=np.float64)
    for j, ix in enumerate(indices):
        fact = multi_factorial(ix)
        col = np.asarray(oracle.derivative(ix, centers), dtype=np.float64)
        values[:, j] = col / fact
    return CoefficientTable(N, d, n, values)


# -- resolution selection and bounds --------------------------------------


def choose_N_sobolev(epsilon: float, d: int, n: int) -> int:
    """Smallest grid resolution with guaranteed error <= epsilon at unit norm."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0,1), got {epsilon}")
    base = math.factorial(n) * epsilon / (2.0**d * float(d) ** n)
    N = max(1, math.ceil(base ** (-1.0 / n)))
    while error_bound_sobolev(N, d, n, 1.0) > epsilon:
        N += 1  # guards the ceiling against float rounding on the boundary
    check_feasible(grid_size(N, d), what=f"grid for N={N}, d={d}")
    return N


def error_bound_sobolev(N: int, d: int, n: int, deriv_sup: float) -> float:
    """Worst-case |f - f~| bound: (2^d d^n / n!) N^{-n} * deriv_sup."""
    if deriv_sup < 0:
        raise ValueError("deriv_sup must be non-negative")
    return (2.0**d * float(d) ** n / math.factorial(n)) * float(N) ** (-n) * deriv_sup


def choose_n_analytic(d: int, epsilon: float) -> int:
    """Continuous-relaxation expansion order for analytic targets (d >= 2)."""
    if d < 2:
        raise ValueError("the closed-form order rule divides by log d and needs d >= 2")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0,1), got {epsilon}")
    val = math.sqrt(d * (d * math.log(2.0) + math.log(1.0 / epsilon)) / math.log(d))
    return max(1, round(val))


def choose_N_analytic(C_f: float, epsilon: float, d: int, n: int) -> int:
    """Smallest N with 2^d d^n (C_f/N)^{n+1} <= epsilon."""
    if C_f <= 0:
        raise ValueError("C_f must be positive")
    base = (2.0**d * float(d) ** n / epsilon) ** (1.0 / (n + 1))
    N = max(1, math.ceil(C_f * base))
    while 2.0**d * float(d) ** n * (C_f / N) ** (n + 1) > epsilon:
        N += 1
    return N


def predicted_param_count(d: int, n: int, N: int) -> int:
    """Parameter-count model used to pick the expansion order.

    Counts 12 parameters per shared bump factor plus, per term of degree g,
    the 7 weights of each of its d+g-1 product gadgets and one summation
    weight.  This tracks the real accounting closely enough to rank orders.
    """
    total = 12 * d * (N + 1)
    cells = grid_size(N, d)
    for g in range(n):
        count_g = math.comb(g + d - 1, d - 1)
        gadgets = max(d + g - 1, 0)
        total += count_g * cells * (7 * gadgets + 1)
    return total


def choose_N_union(epsilon: float, d: int, d_eff: int, n: int) -> int:
    """Grid resolution for the subspace-union regime.

    Chosen so that the per-subspace bound times the number of subspaces,
    binomial(d, d_eff) * (2^d_eff d_eff^n / n!) N^{-n}, stays below epsilon.
    """
    if not 1 <= d_eff < d:
        raise ValueError(f"need 1 <= d_eff < d, got d_eff={d_eff}, d={d}")
    binom = math.comb(d, d_eff)
    base = math.factorial(n) * epsilon / (2.0**d_eff * float(d_eff) ** n * binom)
    N = max(1, math.ceil(base ** (-1.0 / n)))
    while binom * error_bound_sobolev(N, d_eff, n, 1.0) > epsilon:
        N += 1
    check_feasible(grid_size(N, d_eff) * binom, what=f"union grids for N={N}")
    return N


# -- graph assembly --------------------------------------------------------


class _Assembler:
    """Builds the full term sum with shared factor and product subgraphs."""

    def __init__(self, d: int, N: int, share: bool = True):
        self.d = d
        self.N = N
        self.builder = GraphBuilder(d)
        self._factors: dict[tuple[int, int], int] | None = {} if share else None
        self._linears: dict[tuple[int, int], int] | None = {} if share else None
        self._products: dict[tuple[int, int], int] | None = {} if share else None

    def factor(self, k: int, m_k: int) -> int:
        if self._factors is None:
            _, node = append_factor_group(self.builder, k, self.N, m_k)
            return node
        node = self._factors.get((k, m_k))
        if node is None:
            _, node = append_factor_group(self.builder, k, self.N, m_k)
            self._factors[(k, m_k)] = node
        return node

    def linear(self, k: int, m_k: int) -> int:
        key = (k, m_k)
        if self._linears is not None and key in self._linears:
            return self._linears[key]
        node = self.builder.add_node(
            ActivationKind.IDENTITY, [(k, 1.0)], bias=-(m_k / self.N)
        )
        if self._linears is not None:
            self._linears[key] = node
        return node

    def term_root(self, coords: tuple[int, ...], exps: tuple[int, ...]) -> int:
        leaves = [self.factor(k, m_k) for k, m_k in enumerate(coords)]
        for k, n_k in enumerate(exps):
            if n_k > 0:
                leaves.extend([self.linear(k, coords[k])] * n_k)
        return fold_product(self.builder, leaves, self._products)


def assemble_network(table: CoefficientTable, share: bool = True) -> NetGraph:
    """One graph computing f~ for the given coefficient table.

    Equivalent to a linear combination of per-term product networks; with
    sharing enabled, bump factors, linear factors, and repeated partial
    products are emitted once and referenced by every term that uses them.
    """
    asm = _Assembler(table.d, table.N, share=share)
    exps_list = [tuple(ix) for ix in table.indices]
    out_edges: list[tuple[int, float]] = []
    values = table.values
    for g, coords in enumerate(product(range(table.N + 1), repeat=table.d)):
        row = values[g]
        for j, exps in enumerate(exps_list):
            a = row[j]
            if a != 0.0:
                out_edges.append((asm.term_root(coords, exps), float(a)))
    out = asm.builder.add_node(ActivationKind.IDENTITY, out_edges)
    return asm.builder.finalize(out, prune=True)


# -- reports ---------------------------------------------------------------


@dataclass
class SynthesisReport:
    """Everything produced by one synthesis run."""

    regime: str
    d: int
    n: int
    epsilon: float
    N: int
    theoretical_bound: float
    net: NetGraph
    coefficients: CoefficientTable
    oracle_name: str = ""
    d_eff: int | None = None
    subsets: tuple[tuple[int, ...], ...] | None = None
    predicted_growth: float | None = None
    notes: tuple[str, ...] = ()

    def complexity(self) -> ComplexityReport:
        return self.net.complexity()

    def to_json_dict(self) -> dict:
        c = self.complexity()
        doc = {
            "regime": self.regime,
            "d": self.d,
            "n": self.n,
            "epsilon": self.epsilon,
            "N": self.N,
            "d_eff": self.d_eff,
            "subsets": [list(e) for e in self.subsets] if self.subsets is not None else None,
            "theoretical_bound": self.theoretical_bound,
            "complexity": {
                "nonzero_weights": c.nonzero_weights,
                "nonzero_biases": c.nonzero_biases,
                "num_nodes": c.num_nodes,
                "depth": c.depth,
                "total_parameters": c.total_parameters,
            },
        }
        if self.oracle_name:
            doc["oracle"] = self.oracle_name
        if self.predicted_growth is not None:
            doc["predicted_growth"] = self.predicted_growth
        if self.notes:
            doc["notes"] = list(self.notes)
        return doc


@dataclass(frozen=True)
class SubspaceSet:
    """All coordinate subsets of size d_eff inside dimension d (0-based)."""

    d: int
    d_eff: int
    subsets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        expected = math.comb(self.d, self.d_eff)
        if len(self.subsets) != expected:
            raise ValueError(f"expected {expected} subsets, got {len(self.subsets)}")
        for e in self.subsets:
            if len(e) != self.d_eff or len(set(e)) != len(e):
                raise ValueError(f"bad subset {e}")
            if any(v < 0 or v >= self.d for v in e):
                raise ValueError(f"subset {e} out of range for d={self.d}")

    @classmethod
    def full(cls, d: int, d_eff: int) -> "SubspaceSet":
        if not 1 <= d_eff < d:
            raise ValueError(f"need 1 <= d_eff < d, got d_eff={d_eff}, d={d}")
        return cls(d, d_eff, tuple(combinations(range(d), d_eff)))


@dataclass
class UnionReport:
    """Per-subspace networks plus the support router that dispatches points."""

    d: int
    d_eff: int
    n: int
    epsilon: float
    N: int
    subspaces: SubspaceSet
    members: tuple[SynthesisReport, ...]
    theoretical_bound: float
    oracle_name: str = ""
    regime: str = "union_subspaces"

    def route(self, x) -> int:
        """Index of the lexicographically smallest subset containing supp(x)."""
        xa = np.asarray(x, dtype=np.float64)
        supp = set(np.flatnonzero(xa != 0.0).tolist())
        for i, e in enumerate(self.subspaces.subsets):
            if supp <= set(e):
                return i
        raise ValueError(
            f"point support {sorted(supp)} exceeds every size-{self.d_eff} coordinate subset"
        )

    def evaluate(self, x) -> float:
        return float(self.members[self.route(x)].net.eval(x))

    def eval_many(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.empty(X.shape[0], dtype=np.float64)
        claimed = np.zeros(X.shape[0], dtype=bool)
        nonzero = X != 0.0
        for i, e in enumerate(self.subspaces.subsets):
            outside = np.ones(self.d, dtype=bool)
            outside[list(e)] = False
            mask = ~claimed & ~nonzero[:, outside].any(axis=1)
            if mask.any():
                out[mask] = self.members[i].net.eval_many(X[mask])
                claimed |= mask
        if not claimed.all():
            bad = int(np.flatnonzero(~claimed)[0])
            raise ValueError(
                f"point {X[bad].tolist()} is supported outside every coordinate subset"
            )
        return out

    def complexity(self) -> ComplexityReport:
        parts = [m.net.complexity() for m in self.members]
        return ComplexityReport(
            nonzero_weights=sum(p.nonzero_weights for p in parts),
            nonzero_biases=sum(p.nonzero_biases for p in parts),
            num_nodes=sum(p.num_nodes for p in parts),
            depth=max(p.depth for p in parts),
        )

    def to_json_dict(self) -> dict:
        c = self.complexity()
        return {
            "regime": self.regime,
            "d": self.d,
            "n": self.n,
            "epsilon": self.epsilon,
            "N": self.N,
            "d_eff": self.d_eff,
            "subsets": [list(e) for e in self.subspaces.subsets],
            "theoretical_bound": self.theoretical_bound,
            "oracle": self.oracle_name or None,
            "complexity": {
                "nonzero_weights": c.nonzero_weights,
                "nonzero_biases": c.nonzero_biases,
                "num_nodes": c.num_nodes,
                "depth": c.depth,
                "total_parameters": c.total_parameters,
            },
        }


# -- pipelines -------------------------------------------------------------


def synthesize_sobolev(oracle: FunctionOracle, config: SynthesisConfig) -> SynthesisReport:
    """Fixed-order pipeline: pick N from epsilon, tabulate, assemble."""
    if config.regime != "sobolev":
        raise ValueError(f"config regime is {config.regime!r}, expected 'sobolev'")
    if oracle.d != config.d:
        raise ValueError(f"oracle dimension {oracle.d} != config d={config.d}")
    N = choose_N_sobolev(config.epsilon, config.d, config.n)
    return _synthesize_at(oracle, config.d, config.n, N, config.epsilon, "sobolev")


def _synthesize_at(
    oracle: FunctionOracle,
    d: int,
    n: int,
    N: int,
    epsilon: float,
    regime: str,
    deriv_sup: float | None = None,
) -> SynthesisReport:
    check_feasible(grid_size(N, d) * multi_index_count(d, n), what="synthesis terms")
    table = taylor_coefficients(oracle, N, d, n)
    net = assemble_network(table)
    if deriv_sup is None:
        deriv_sup = oracle.deriv_sup(n)
    return SynthesisReport(
        regime=regime,
        d=d,
        n=n,
        epsilon=epsilon,
        N=N,
        theoretical_bound=error_bound_sobolev(N, d, n, deriv_sup),
        net=net,
        coefficients=table,
        oracle_name=oracle.name,
    )


def predicted_growth_term(d: int, epsilon: float) -> float:
    """Sub-polynomial growth law for the analytic parameter count."""
    return (2.0 * epsilon) ** (1.0 / math.sqrt(math.log(2.0**d / epsilon))) * math.log(
        1.0 / epsilon
    ) ** (d / 2.0)


def synthesize_analytic(oracle: FunctionOracle, config: SynthesisConfig) -> SynthesisReport:
    """Order-optimizing pipeline for targets with factorially bounded derivatives."""
    if config.regime != "analytic":
        raise ValueError(f"config regime is {config.regime!r}, expected 'analytic'")
    if oracle.d != config.d:
        raise ValueError(f"oracle dimension {oracle.d} != config d={config.d}")
    C_f = config.C_f if config.C_f is not None else oracle.analytic_constant
    if C_f is None:
        raise ValueError(f"oracle {oracle.name!r} declares no analyticity constant")
    d, epsilon = config.d, config.epsilon
    notes: list[str] = []
    if d == 1:
        candidates = range(1, 31)
        notes.append("expansion order chosen by direct search (closed-form rule needs d >= 2)")
    else:
        n0 = choose_n_analytic(d, epsilon)
        candidates = range(max(1, n0 - 3), min(30, n0 + 3) + 1)

    cap = safety_cap()
    best_n = None
    best_cost = None
    for nc in candidates:
        Nc = choose_N_analytic(C_f, epsilon, d, nc)
        if grid_size(Nc, d) * multi_index_count(d, nc) > cap:
            continue
        cost = predicted_param_count(d, nc, Nc)
        if best_cost is None or cost < best_cost:
            best_n, best_cost = nc, cost
    if best_n is None:
        raise InfeasibleError(
            grid_size(choose_N_analytic(C_f, epsilon, d, candidates[0]), d)
            * multi_index_count(d, candidates[0]),
            cap,
            what="analytic synthesis",
        )

    N1 = choose_N_analytic(C_f, epsilon, d, best_n)
    # Derivative sup from the analyticity bound at top order: C_f^{n+1} n!.
    deriv_sup = C_f ** (best_n + 1) * math.factorial(best_n)
    report = _synthesize_at(oracle, d, best_n, N1, epsilon, "analytic", deriv_sup=deriv_sup)
    report.predicted_growth = predicted_growth_term(d, epsilon)
    report.notes = tuple(notes)
    return report


def restriction_matrix(e: Sequence[int], d: int) -> np.ndarray:
    """(d, d_eff) embedding placing input j at ambient coordinate e[j] (0-based)."""
    e = tuple(int(v) for v in e)
    if not 1 <= len(e) < d:
        raise ValueError(f"subset size must be in [1, {d - 1}], got {len(e)}")
    if len(set(e)) != len(e) or any(v < 0 or v >= d for v in e):
        raise ValueError(f"subset {e} has duplicate or out-of-range coordinates for d={d}")
    A = np.zeros((d, len(e)), dtype=np.float64)
    for j, coord in enumerate(e):
        A[coord, j] = 1.0
    return A


def restrict_oracle(oracle: FunctionOracle, e: Sequence[int]) -> FunctionOracle:
    """The pullback f(A x) on [0,1]^{d_eff}, with chain-rule derivatives.

    A is the 0/1 embedding of `restriction_matrix`, so each restricted
    partial derivative is the matching ambient partial evaluated at A x.
    """
    e = tuple(int(v) for v in e)
    d, d_eff = oracle.d, len(e)

    def embed_points(X_eff: np.ndarray) -> np.ndarray:
        X = np.zeros(X_eff.shape[:-1] + (d,), dtype=np.float64)
        X[..., list(e)] = X_eff
        return X

    def embed_index(nvec: tuple[int, ...]) -> tuple[int, ...]:
        full = [0] * d
        for j, coord in enumerate(e):
            full[coord] = nvec[j]
        return tuple(full)

    return FunctionOracle(
        name=f"{oracle.name}@{e}",
        d=d_eff,
        value_fn=lambda X: np.asarray(oracle.value(embed_points(X))),
        derivative_fn=lambda nvec, X: np.asarray(
            oracle.derivative(embed_index(nvec), embed_points(X))
        ),
        sobolev_bound_fn=oracle.sobolev_bound,
        deriv_sup_fn=oracle.deriv_sup,
        analytic_constant=oracle.analytic_constant,
    )


def synthesize_single_subspace(
    oracle: FunctionOracle, e: Sequence[int], config: SynthesisConfig
) -> SynthesisReport:
    """Synthesize f restricted to one coordinate subspace, at ambient arity."""
    if config.regime != "single_subspace":
        raise ValueError(f"config regime is {config.regime!r}, expected 'single_subspace'")
    if oracle.d != config.d:
        raise ValueError(f"oracle dimension {oracle.d} != config d={config.d}")
    e = tuple(int(v) for v in e)
    restriction_matrix(e, config.d)  # validates the subset
    d_eff = len(e)
    if config.d_eff is not None and config.d_eff != d_eff:
        raise ValueError(f"config d_eff={config.d_eff} but subset size is {d_eff}")
    restricted = restrict_oracle(oracle, e)
    N = choose_N_sobolev(config.epsilon, d_eff, config.n)
    inner = _synthesize_at(restricted, d_eff, config.n, N, config.epsilon, "single_subspace")
    net = embed_inputs(inner.net, config.d, e)
    return SynthesisReport(
        regime="single_subspace",
        d=config.d,
        n=config.n,
        epsilon=config.epsilon,
        N=N,
        theoretical_bound=inner.theoretical_bound,
        net=net,
        coefficients=inner.coefficients,
        oracle_name=oracle.name,
        d_eff=d_eff,
        subsets=(e,),
    )


def synthesize_union(
    oracle: FunctionOracle, d: int, d_eff: int, n: int, epsilon: float
) -> UnionReport:
    """One network per coordinate subset, all sharing one resolution N.

    N is chosen so the per-subspace guarantee times the number of subsets
    stays below epsilon, giving a bound valid wherever the router accepts.
    """
    if oracle.d != d:
        raise ValueError(f"oracle dimension {oracle.d} != d={d}")
    subspaces = SubspaceSet.full(d, d_eff)
    N = choose_N_union(epsilon, d, d_eff, n)
    check_feasible(
        grid_size(N, d_eff) * multi_index_count(d_eff, n) * len(subspaces.subsets),
        what="union synthesis terms",
    )
    members = []
    for e in subspaces.subsets:
        restricted = restrict_oracle(oracle, e)
        inner = _synthesize_at(restricted, d_eff, n, N, epsilon, "single_subspace")
        members.append(
            SynthesisReport(
                regime="single_subspace",
                d=d,
                n=n,
                epsilon=epsilon,
                N=N,
                theoretical_bound=inner.theoretical_bound,
                net=embed_inputs(inner.net, d, e),
                coefficients=inner.coefficients,
                oracle_name=oracle.name,
                d_eff=d_eff,
                subsets=(e,),
            )
        )
    bound = math.comb(d, d_eff) * error_bound_sobolev(N, d_eff, n, oracle.deriv_sup(n))
    return UnionReport(
        d=d,
        d_eff=d_eff,
        n=n,
        epsilon=epsilon,
        N=N,
        subspaces=subspaces,
        members=tuple(members),
        theoretical_bound=bound,
        oracle_name=oracle.name,
    )


def synthesize(oracle: FunctionOracle, config: SynthesisConfig):
    """Dispatch to the pipeline named by config.regime."""
    if config.regime == "sobolev":
        return synthesize_sobolev(oracle, config)
    if config.regime == "analytic":
        return synthesize_analytic(oracle, config)
    if config.regime == "single_subspace":
        if config.e is None:
            raise ValueError("single_subspace regime needs a coordinate subset e")
        return synthesize_single_subspace(oracle, config.e, config)
    if config.d_eff is None:
        raise ValueError("union_subspaces regime needs d_eff")
    return synthesize_union(oracle, config.d, config.d_eff, config.n, config.epsilon)
