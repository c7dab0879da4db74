"""Parameter-count scaling experiments and their CSV artifact format."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .indexing import InfeasibleError
from .measure import sup_error
from .oracles import FunctionOracle
from .synthesis import SynthesisConfig, UnionReport, synthesize

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "epsilon",
    "regime",
    "d",
    "n",
    "d_eff",
    "N",
    "total_parameters",
    "num_nodes",
    "depth",
    "measured_sup_error",
    "theoretical_bound",
    "seed",
    "wall_time_ms",
]


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit of log(parameters) against log(1/epsilon)."""

    epsilons: tuple[float, ...]
    param_counts: tuple[int, ...]
    slope: float
    intercept: float
    r_squared: float
    rows: tuple[dict, ...] = ()


def fit_rate(epsilons: Sequence[float], param_counts: Sequence[int]) -> RateFit:
    eps = np.asarray(epsilons, dtype=np.float64)
    params = np.asarray(param_counts, dtype=np.float64)
    if eps.size < 2:
        raise ValueError("need at least two points to fit a slope")
    x = np.log(1.0 / eps)
    y = np.log(params)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return RateFit(
        epsilons=tuple(float(v) for v in eps),
        param_counts=tuple(int(v) for v in param_counts),
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r2,
    )


def rate_experiment(
    oracle: FunctionOracle,
    config: SynthesisConfig,
    epsilons: Sequence[float],
    out_csv: str | Path | None = None,
    budget: int = 4000,
    seed: int = 0,
) -> RateFit:
    """Synthesize across an epsilon sweep and fit the parameter-count slope.

    Writes one CSV row per epsilon (columns fixed by CSV_COLUMNS); rows that
    trip the size cap are logged and skipped so the sweep continues.
    """
    eps_list = [float(v) for v in epsilons]
    if len(eps_list) < 4:
        raise ValueError("need at least 4 epsilon values")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("epsilon values must be strictly decreasing")

    rows: list[dict] = []
    kept_eps: list[float] = []
    kept_params: list[int] = []
    for eps in eps_list:
        cfg = replace(config, epsilon=eps)
        t0 = time.perf_counter()
        try:
            report = synthesize(oracle, cfg)
        except InfeasibleError as exc:
            logger.warning("skipping epsilon=%g: %s", eps, exc)
            continue
        wall_ms = (time.perf_counter() - t0) * 1000.0
        if isinstance(report, UnionReport):
            domain = report.subspaces.subsets
            est = sup_error(report, oracle, domain=domain, budget=budget, seed=seed)
        else:
            est = sup_error(
                report.net,
                oracle,
                budget=budget,
                seed=seed,
                grid_resolution=report.N,
            )
        c = report.complexity()
        row = {
            "epsilon": eps,
            "regime": report.regime,
            "d": report.d,
            "n": report.n,
            "d_eff": getattr(report, "d_eff", None),
            "N": report.N,
            "total_parameters": c.total_parameters,
            "num_nodes": c.num_nodes,
            "depth": c.depth,
            "measured_sup_error": est.sup_error,
            "theoretical_bound": report.theoretical_bound,
            "seed": seed,
            "wall_time_ms": wall_ms,
        }
        # Kept on the in-memory rows for inspection; not part of the CSV schema.
        growth = getattr(report, "predicted_growth", None)
        if growth is not None:
            row["predicted_growth"] = growth
        rows.append(row)
        kept_eps.append(eps)
        kept_params.append(c.total_parameters)

    if out_csv is not None:
        write_rate_csv(out_csv, rows)
    fit = fit_rate(kept_eps, kept_params)
    return replace(fit, rows=tuple(rows))


def write_rate_csv(path: str | Path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(["" if row[c] is None else row[c] for c in CSV_COLUMNS])
