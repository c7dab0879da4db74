"""Multi-index arithmetic, grid enumeration, and multivariate monomial evaluation."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

import numpy as np

DEFAULT_SAFETY_CAP = 10_000_000
SAFETY_CAP_ENV = "TAYLORNET_SAFETY_CAP"


class InfeasibleError(Exception):
    """A requested construction would exceed the configured size cap.

    Carries the offending size estimate so callers (and the CLI) can report
    what tripped the cap instead of a bare failure.
    """

    def __init__(self, estimate: int, cap: int, what: str = "grid"):
        self.estimate = int(estimate)
        self.cap = int(cap)
        self.what = what
        super().__init__(
            f"infeasible {what}: estimated size {self.estimate} exceeds safety cap {self.cap}"
        )


def safety_cap() -> int:
    """Active size cap; override via the TAYLORNET_SAFETY_CAP environment variable."""
    raw = os.environ.get(SAFETY_CAP_ENV)
    if raw is None:
        return DEFAULT_SAFETY_CAP
    cap = int(raw)
    if cap <= 0:
        raise ValueError(f"{SAFETY_CAP_ENV} must be positive, got {raw!r}")
    return cap


def check_feasible(estimate: int, what: str = "grid") -> int:
    """Return `estimate` unchanged, or raise InfeasibleError if it exceeds the cap."""
    cap = safety_cap()
    if estimate > cap:
        raise InfeasibleError(estimate, cap, what)
    return estimate


def _as_exponents(n) -> tuple[int, ...]:
    if isinstance(n, MultiIndex):
        return n.exponents
    return tuple(int(v) for v in n)


@dataclass(frozen=True)
class MultiIndex:
    """Vector of non-negative integer exponents."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        exps = tuple(int(v) for v in self.exponents)
        if len(exps) == 0:
            raise ValueError("MultiIndex needs at least one component")
        if any(v < 0 for v in exps):
            raise ValueError(f"negative exponent in {exps}")
        object.__setattr__(self, "exponents", exps)

    def order(self) -> int:
        """Total degree: the sum of the exponents."""
        return sum(self.exponents)

    def __len__(self) -> int:
        return len(self.exponents)

    def __iter__(self) -> Iterator[int]:
        return iter(self.exponents)

    def __getitem__(self, k: int) -> int:
        return self.exponents[k]


@dataclass(frozen=True)
class GridIndex:
    """A lattice point m of the grid {0, ..., N}^d at resolution N."""

    coords: tuple[int, ...]
    resolution: int

    def __post_init__(self):
        coords = tuple(int(v) for v in self.coords)
        N = int(self.resolution)
        if N < 1:
            raise ValueError(f"resolution must be >= 1, got {N}")
        if any(c < 0 or c > N for c in coords):
            raise ValueError(f"grid coords {coords} outside [0, {N}]")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "resolution", N)

    def center(self) -> tuple[float, ...]:
        """The anchored point m/N in [0,1]^d."""
        return tuple(c / self.resolution for c in self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[int]:
        return iter(self.coords)

    def __getitem__(self, k: int) -> int:
        return self.coords[k]


def enumerate_multi_indices(d: int, n: int) -> list[MultiIndex]:
    """All multi-indices of length d with total degree < n, graded order.

    Within each degree the first coordinate carries the largest exponent
    first, so (d=2, n=2) enumerates as (0,0), (1,0), (0,1).  The count is
    binomial(n-1+d, d).
    """
    if d < 1 or n < 1:
        raise ValueError(f"need d >= 1 and n >= 1, got d={d}, n={n}")

    def _grade(dim: int, total: int) -> Iterator[tuple[int, ...]]:
        if dim == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in _grade(dim - 1, total - first):
                yield (first,) + rest

    out: list[MultiIndex] = []
    for degree in range(n):
        for exps in _grade(d, degree):
            out.append(MultiIndex(exps))
    return out


def multi_index_count(d: int, n: int) -> int:
    """Number of multi-indices of length d with total degree < n."""
    return math.comb(n - 1 + d, d)


def multi_factorial(n) -> int:
    """Product of component factorials (exact integer arithmetic)."""
    exps = _as_exponents(n)
    out = 1
    for v in exps:
        if v > 512:
            # Orders this large never arise here; refuse rather than stall.
            raise OverflowError(f"exponent {v} too large for factorial accounting")
        out *= math.factorial(v)
    return out


def monomial_eval(x, center, n):
    """Evaluate prod_k (x_k - center_k)^{n_k}; accepts a point or a batch.

    `x` may have shape (d,) or (P, d); the result is a scalar or a (P,)
    array accordingly.  A zero multi-index gives 1.
    """
    exps = np.asarray(_as_exponents(n), dtype=np.int64)
    xa = np.asarray(x, dtype=np.float64)
    ca = np.asarray(center, dtype=np.float64)
    if xa.shape[-1] != exps.shape[0] or ca.shape[-1] != exps.shape[0]:
        raise ValueError(
            f"dimension mismatch: x has {xa.shape[-1]}, center has {ca.shape[-1]}, "
            f"multi-index has {exps.shape[0]}"
        )
    diff = xa - ca
    out = np.prod(diff**exps, axis=-1)
    if out.ndim == 0:
        return float(out)
    return out


def grid_size(N: int, d: int) -> int:
    """(N+1)^d as an exact integer."""
    return (int(N) + 1) ** int(d)


def enumerate_grid(N: int, d: int) -> list[GridIndex]:
    """All (N+1)^d grid indices in lexicographic order (last coordinate fastest)."""
    if N < 1 or d < 1:
        raise ValueError(f"need N >= 1 and d >= 1, got N={N}, d={d}")
    check_feasible(grid_size(N, d), what="grid enumeration")
    return [GridIndex(coords, N) for coords in product(range(N + 1), repeat=d)]


def grid_centers(N: int, d: int) -> np.ndarray:
    """Array of shape ((N+1)^d, d) with the centers m/N in enumerate_grid order."""
    check_feasible(grid_size(N, d), what="grid enumeration")
    axes = np.meshgrid(*[np.arange(N + 1)] * d, indexing="ij")
    coords = np.stack([a.reshape(-1) for a in axes], axis=1).astype(np.float64)
    return coords / float(N)
