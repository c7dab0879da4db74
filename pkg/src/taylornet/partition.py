"""Grid partition of unity built from trapezoid bumps, and its exact ReLU form.

The univariate bump is psi(t) = 1 for |t| < 1, 0 for |t| > 2, and 2 - |t| in
between.  Scaling its argument by 3N and shifting to a grid point m/N gives
one factor of the bump phi_m; the product over coordinates tiles [0,1]^d so
that the family {phi_m} sums identically to one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .indexing import GridIndex
from .netgraph import ActivationKind, GraphBuilder, NetGraph

# psi as a combination of four shifted ReLU ramps; the slopes +1,-1,-1,+1
# cancel outside [-2,2] and stack to the plateau value 1 on [-1,1].
_PSI_SHIFTS = (2.0, 1.0, -1.0, -2.0)
_PSI_SIGNS = (1.0, -1.0, -1.0, 1.0)


def psi_scalar(x):
    """Trapezoid bump: 1 on |x|<1, 0 on |x|>2, linear ramp between."""
    return np.clip(2.0 - np.abs(x), 0.0, 1.0)


def psi_network() -> NetGraph:
    """Univariate graph computing psi exactly with four ReLU units."""
    b = GraphBuilder(1)
    ramps = [
        b.add_node(ActivationKind.RELU, [(0, 1.0)], bias=shift) for shift in _PSI_SHIFTS
    ]
    out = b.add_node(ActivationKind.IDENTITY, list(zip(ramps, _PSI_SIGNS)))
    return b.finalize(out)


@dataclass(frozen=True)
class HatSpec:
    """One univariate factor psi(3N(x_k - m_k/N)) of a bump phi_m."""

    N: int
    m_k: int
    k: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not 0 <= self.m_k <= self.N:
            raise ValueError(f"m_k={self.m_k} outside grid 0..{self.N}")
        if self.k < 0:
            raise ValueError("coordinate index must be non-negative")

    def argument(self, x_k):
        """The scaled offset 3N*x_k - 3*m_k fed to psi (integer shift kept exact)."""
        return 3.0 * self.N * np.asarray(x_k, dtype=np.float64) - 3.0 * self.m_k

    def value(self, x_k):
        return psi_scalar(self.argument(x_k))

    def network(self) -> NetGraph:
        """Univariate graph for this factor: psi pre-composed with its affine argument."""
        b = GraphBuilder(1)
        _, out = append_factor_group(b, 0, self.N, self.m_k)
        return b.finalize(out)


def append_factor_group(b: GraphBuilder, input_id: int, N: int, m_k: int) -> tuple[list[int], int]:
    """Emit the 4-ReLU psi group for one factor into an existing builder.

    Returns (ramp ids, combining identity id).  The combiner computes
    psi(3N*x - 3m_k) of whatever value node `input_id` carries.
    """
    scale = 3.0 * N
    shift = -3.0 * m_k
    ramps = [
        b.add_node(ActivationKind.RELU, [(input_id, scale)], bias=shift + s) for s in _PSI_SHIFTS
    ]
    combine = b.add_node(ActivationKind.IDENTITY, list(zip(ramps, _PSI_SIGNS)))
    return ramps, combine


def phi_scalar(m: GridIndex, x):
    """The bump phi_m(x) = prod_k psi(3N(x_k - m_k/N)); point or batch input."""
    N = m.resolution
    xa = np.asarray(x, dtype=np.float64)
    if xa.shape[-1] != len(m):
        raise ValueError(f"point has dimension {xa.shape[-1]}, grid index has {len(m)}")
    coords = np.asarray(m.coords, dtype=np.float64)
    factors = psi_scalar(3.0 * N * xa - 3.0 * coords)
    out = np.prod(factors, axis=-1)
    if out.ndim == 0:
        return float(out)
    return out


def phi_factor_networks(m: GridIndex) -> list[NetGraph]:
    """The d univariate factor graphs of phi_m, one per coordinate."""
    return [HatSpec(m.resolution, m_k, k).network() for k, m_k in enumerate(m.coords)]


def partition_sum_residual(N: int, d: int, samples) -> float:
    """max over samples of |sum_m phi_m(x) - 1|.

    The sum factorizes across coordinates: sum_m prod_k psi_k = prod_k
    (sum_{m_k} psi(3N x_k - 3 m_k)), so the full (N+1)^d family is covered
    without enumerating it.
    """
    X = np.asarray(samples, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[1] != d:
        raise ValueError(f"samples have dimension {X.shape[1]}, expected {d}")
    shifts = 3.0 * np.arange(N + 1, dtype=np.float64)
    # per-coordinate sums over all grid offsets: shape (P, d)
    per_coord = psi_scalar(3.0 * N * X[:, :, None] - shifts[None, None, :]).sum(axis=2)
    totals = np.prod(per_coord, axis=1)
    return float(np.max(np.abs(totals - 1.0)))


def active_window(N: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-coordinate grid offsets whose bumps can be nonzero at points x.

    For points of shape (P, d) returns (M, W): integer candidates of shape
    (P, d, 2) and the matching psi factor values, zero where a candidate
    falls outside the grid.  At most two offsets per coordinate can be
    active because psi(3N t) vanishes for |t| >= 2/(3N).
    """
    x = np.asarray(x, dtype=np.float64)
    lo = np.ceil(N * x - 2.0 / 3.0).astype(np.int64)
    M = np.stack([lo, lo + 1], axis=-1)
    valid = (M >= 0) & (M <= N)
    Mc = np.clip(M, 0, N)
    W = psi_scalar(3.0 * N * x[..., None] - 3.0 * Mc)
    W = np.where(valid, W, 0.0)
    return Mc, W
