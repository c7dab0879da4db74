"""Sup-norm error estimation and derivative cross-validation.

The sup-error sampler mixes a lattice aligned to the partition kinks (the
approximation error is piecewise smooth with creases on multiples of
1/(3N), refined fourfold), uniform random points, and local refinement
around the running argmax.  All randomness is seeded, so estimates are
reproducible artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .indexing import enumerate_multi_indices
from .netgraph import NetGraph
from .oracles import FunctionOracle

__all__ = ["ErrorEstimate", "sup_error", "FiniteDiffReport", "finite_diff_validate"]


@dataclass(frozen=True)
class ErrorEstimate:
    sup_error: float
    argmax_point: tuple[float, ...]
    num_samples: int
    sampler: str
    seed: int


def _as_eval_fn(net) -> tuple[Callable[[np.ndarray], np.ndarray], int]:
    """Accept a NetGraph, a union report, or any vectorized callable."""
    if isinstance(net, NetGraph):
        return net.eval_many, net.input_arity
    if hasattr(net, "eval_many") and hasattr(net, "d"):
        return net.eval_many, net.d
    raise TypeError(f"cannot evaluate object of type {type(net).__name__}")


def _lattice(d: int, N: int, budget: int, rng: np.random.Generator) -> np.ndarray:
    """Points on the kink-aligned lattice (multiples of 1/(12N)), capped at budget."""
    steps = 12 * N + 1
    if steps**d <= budget:
        axes = np.meshgrid(*[np.linspace(0.0, 1.0, steps)] * d, indexing="ij")
        return np.stack([a.reshape(-1) for a in axes], axis=1)
    # Too many lattice sites: sample them without materializing the grid.
    picks = rng.integers(0, steps, size=(budget, d))
    return picks / float(steps - 1)


def sup_error(
    net,
    oracle: FunctionOracle,
    domain: str | Sequence[Sequence[int]] = "cube",
    budget: int = 10_000,
    seed: int = 0,
    grid_resolution: int | None = None,
) -> ErrorEstimate:
    """Estimate max |oracle - net| over [0,1]^d or over coordinate subspaces.

    domain: "cube", or a list of coordinate subsets; in the latter case the
    sample budget is split across subsets and each point is zero off its
    subset.  Deterministic for a given seed.
    """
    if budget < 1000:
        raise ValueError("budget must be at least 1000")
    eval_fn, d = _as_eval_fn(net)
    rng = np.random.default_rng(seed)

    batches = []
    if domain == "cube":
        if grid_resolution is not None:
            lat = _lattice(d, grid_resolution, budget // 2, rng)
            batches.append(lat)
        n_random = max(budget - sum(len(b) for b in batches) - budget // 4, budget // 4)
        batches.append(rng.random((n_random, d)))
        refine_budget = budget // 4
    else:
        subsets = [tuple(int(v) for v in e) for e in domain]
        per = max(budget // max(len(subsets), 1), 100)
        for e in subsets:
            pts = np.zeros((per, d))
            pts[:, list(e)] = rng.random((per, len(e)))
            batches.append(pts)
        refine_budget = budget // 4

    X = np.concatenate(batches, axis=0)
    err = np.abs(np.asarray(oracle.value(X)) - eval_fn(X))
    best = int(np.argmax(err))
    best_err = float(err[best])
    best_x = X[best].copy()
    total = len(X)

    # Local refinement: shrink a perturbation ball around the argmax.
    radius = 1.0 / (3.0 * grid_resolution) if grid_resolution else 0.05
    for _ in range(2):
        P = max(refine_budget // 2, 1)
        cand = best_x[None, :] + rng.uniform(-radius, radius, size=(P, d))
        if domain != "cube":
            keep = np.zeros(d, dtype=bool)
            keep[list(best_supp(best_x))] = True
            cand[:, ~keep] = 0.0
        np.clip(cand, 0.0, 1.0, out=cand)
        cerr = np.abs(np.asarray(oracle.value(cand)) - eval_fn(cand))
        total += len(cand)
        i = int(np.argmax(cerr))
        if float(cerr[i]) > best_err:
            best_err = float(cerr[i])
            best_x = cand[i].copy()
        radius /= 8.0

    return ErrorEstimate(
        sup_error=best_err,
        argmax_point=tuple(float(v) for v in best_x),
        num_samples=total,
        sampler="hybrid" if domain == "cube" else "subspaces",
        seed=seed,
    )


def best_supp(x: np.ndarray) -> list[int]:
    return np.flatnonzero(np.asarray(x) != 0.0).tolist()


@dataclass(frozen=True)
class FiniteDiffFailure:
    index: tuple[int, ...]
    point: tuple[float, ...]
    finite_diff: float
    reported: float
    discrepancy: float


@dataclass(frozen=True)
class FiniteDiffReport:
    ok: bool
    checked: int
    max_discrepancy: float
    failures: tuple[FiniteDiffFailure, ...]

    def __str__(self) -> str:
        if self.ok:
            return f"finite-diff validation ok ({self.checked} checks, max discrepancy {self.max_discrepancy:.3g})"
        f = self.failures[0]
        return (
            f"finite-diff validation FAILED for D^{f.index} at {f.point}: "
            f"reported {f.reported:.9g} vs finite-diff {f.finite_diff:.9g} "
            f"({len(self.failures)} failures total)"
        )


def finite_diff_validate(
    oracle: FunctionOracle,
    n: int,
    tolerance: float = 1e-6,
    num_points: int = 100,
    seed: int = 0,
    h: float = 1e-4,
) -> FiniteDiffReport:
    """Check each reported derivative against differencing the order below it.

    For every multi-index with 1 <= |a| <= n, central differences of the
    oracle's own order-(|a|-1) derivative are Richardson-refined and
    compared with the reported order-|a| derivative, so a corrupted order
    is caught without compounding difference error across orders.
    """
    d = oracle.d
    rng = np.random.default_rng(seed)
    # Interior points: keep a margin so +/- h stencils stay inside the domain.
    X = 0.05 + 0.9 * rng.random((num_points, d))

    failures = []
    checked = 0
    max_disc = 0.0
    for ix in enumerate_multi_indices(d, n + 1):
        exps = tuple(ix)
        order = sum(exps)
        if order == 0:
            continue
        k = next(i for i, v in enumerate(exps) if v > 0)
        lower = tuple(v - 1 if i == k else v for i, v in enumerate(exps))

        def central(step: float) -> np.ndarray:
            Xp = X.copy()
            Xp[:, k] += step
            Xm = X.copy()
            Xm[:, k] -= step
            up = np.asarray(oracle.derivative(lower, Xp))
            dn = np.asarray(oracle.derivative(lower, Xm))
            return (up - dn) / (2.0 * step)

        a_h = central(h)
        a_h2 = central(h / 2.0)
        richardson = (4.0 * a_h2 - a_h) / 3.0
        reported = np.asarray(oracle.derivative(exps, X))
        disc = np.abs(richardson - reported)
        # Truncation proxy: the Richardson correction itself.
        tol_eff = np.maximum(tolerance, np.abs(a_h2 - a_h) / 3.0)
        checked += len(X)
        max_disc = max(max_disc, float(disc.max()))
        bad = np.flatnonzero(disc > tol_eff)
        for b in bad[:3]:
            failures.append(
                FiniteDiffFailure(
                    index=exps,
                    point=tuple(float(v) for v in X[b]),
                    finite_diff=float(richardson[b]),
                    reported=float(reported[b]),
                    discrepancy=float(disc[b]),
                )
            )
    return FiniteDiffReport(
        ok=not failures,
        checked=checked,
        max_discrepancy=max_disc,
        failures=tuple(failures),
    )
