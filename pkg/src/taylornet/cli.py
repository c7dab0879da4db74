"""Command-line entry point: synthesize, evaluate, verify, rates, selftest."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .gadgets import expected_rounds, mult_gadget, product_plan, term_network
from .indexing import GridIndex, InfeasibleError
from .measure import finite_diff_validate, sup_error
from .netgraph import NetFormatError, NetGraph, _graph_from_doc
from .oracles import builtin_oracles
from .partition import active_window, partition_sum_residual, psi_network, psi_scalar
from .rates import rate_experiment
from .synthesis import (
    SynthesisConfig,
    UnionReport,
    choose_N_sobolev,
    error_bound_sobolev,
    synthesize,
)

BOUND_SLACK = 1e-9
UNION_FORMAT = "taylornet-union"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; usage problems here exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class _UnionNet:
    """Support-routing evaluator reloaded from a union JSON file."""

    def __init__(self, d: int, subsets, nets):
        self.d = d
        self.subsets = [tuple(e) for e in subsets]
        self.nets = nets

    def evaluate(self, x) -> float:
        xa = np.asarray(x, dtype=np.float64)
        supp = set(np.flatnonzero(xa != 0.0).tolist())
        for e, net in zip(self.subsets, self.nets):
            if supp <= set(e):
                return float(net.eval(xa))
        raise UsageError(f"point support {sorted(supp)} lies outside every stored subspace")

    def eval_many(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.asarray([self.evaluate(x) for x in X])


def _lookup_oracle(name: str):
    catalog = builtin_oracles()
    if name not in catalog:
        known = ", ".join(sorted(catalog))
        raise UsageError(f"unknown oracle {name!r}; available: {known}")
    return catalog[name]


def _parse_point(text: str, d: int | None = None) -> np.ndarray:
    try:
        x = np.asarray([float(v) for v in text.split(",")], dtype=np.float64)
    except ValueError:
        raise UsageError(f"could not parse point {text!r}") from None
    if d is not None and x.size != d:
        raise UsageError(f"point {text!r} has {x.size} coordinates, expected {d}")
    return x


def _load_network(path: str):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(data.decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise NetFormatError(f"{path} is not valid JSON: {exc}") from None
    if isinstance(doc, dict) and doc.get("format") == UNION_FORMAT:
        nets = [_graph_from_doc(nd) for nd in doc["networks"]]
        return _UnionNet(int(doc["d"]), doc["subsets"], nets)
    return _graph_from_doc(doc)


def _union_doc(report: UnionReport) -> dict:
    return {
        "format": UNION_FORMAT,
        "d": report.d,
        "d_eff": report.d_eff,
        "n": report.n,
        "N": report.N,
        "subsets": [list(e) for e in report.subspaces.subsets],
        "networks": [json.loads(m.net.serialize()) for m in report.members],
    }


def _cmd_synthesize(args) -> int:
    oracle = _lookup_oracle(args.oracle)
    d = args.d if args.d is not None else oracle.d
    if d != oracle.d:
        raise UsageError(f"--d {d} does not match oracle {oracle.name!r} (d={oracle.d})")
    n = args.n if args.n is not None else 1
    if args.n is None and args.regime in ("sobolev", "single_subspace", "union_subspaces"):
        raise UsageError(f"--n is required for regime {args.regime!r}")
    subset = None
    if args.subset is not None:
        subset = tuple(int(v) for v in args.subset.split(","))
    config = SynthesisConfig(
        d=d,
        n=n,
        epsilon=args.epsilon,
        regime=args.regime,
        d_eff=args.d_eff,
        e=subset,
    )
    report = synthesize(oracle, config)
    c = report.complexity()
    print(f"regime={report.regime} oracle={oracle.name} d={report.d} n={report.n} N={report.N}")
    print(
        f"nodes={c.num_nodes} depth={c.depth} parameters={c.total_parameters} "
        f"bound={report.theoretical_bound:.6g}"
    )
    if args.out:
        if isinstance(report, UnionReport):
            with open(args.out, "w") as fh:
                json.dump(_union_doc(report), fh)
        else:
            with open(args.out, "wb") as fh:
                fh.write(report.net.serialize())
        print(f"network written to {args.out}")
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report.to_json_dict(), fh, indent=2)
        print(f"report written to {args.report}")
    return 0


def _cmd_evaluate(args) -> int:
    net = _load_network(args.net)
    d = net.d if isinstance(net, _UnionNet) else net.input_arity
    if args.point is not None:
        points = [_parse_point(args.point, d)]
    else:
        points = []
        try:
            with open(args.points_file) as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        points.append(_parse_point(line, d))
        except OSError as exc:
            raise UsageError(f"cannot read {args.points_file}: {exc}") from None
    for x in points:
        value = net.evaluate(x) if isinstance(net, _UnionNet) else float(net.eval(x))
        print(value)
    return 0


def _cmd_verify(args) -> int:
    oracle = _lookup_oracle(args.oracle)
    net = _load_network(args.net)
    try:
        with open(args.report) as fh:
            report_doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read report {args.report}: {exc}") from None
    try:
        bound = float(report_doc["theoretical_bound"])
    except (KeyError, TypeError, ValueError):
        raise UsageError(f"report {args.report} has no usable theoretical_bound") from None
    subsets = report_doc.get("subsets")
    domain = [tuple(e) for e in subsets] if subsets else "cube"
    grid_resolution = report_doc.get("N") if domain == "cube" else None
    est = sup_error(
        net,
        oracle,
        domain=domain,
        budget=args.budget,
        seed=args.seed,
        grid_resolution=grid_resolution,
    )
    print(f"measured_sup_error={est.sup_error:.6e} theoretical_bound={bound:.6e}")
    if est.sup_error <= bound + BOUND_SLACK:
        print("OK: measured error within the stated bound")
        return 0
    print("VIOLATION: measured error exceeds the stated bound")
    return 2


def _cmd_rates(args) -> int:
    oracle = _lookup_oracle(args.oracle)
    try:
        epsilons = [float(v) for v in args.eps_list.split(",")]
    except ValueError:
        raise UsageError(f"could not parse --eps-list {args.eps_list!r}") from None
    d = args.d if args.d is not None else oracle.d
    n = args.n if args.n is not None else 1
    config = SynthesisConfig(
        d=d, n=n, epsilon=epsilons[0], regime=args.regime, d_eff=args.d_eff
    )
    fit = rate_experiment(
        oracle, config, epsilons, out_csv=args.out, budget=args.budget, seed=args.seed
    )
    print(f"rows={len(fit.rows)} slope={fit.slope:.4f} r_squared={fit.r_squared:.5f}")
    if args.out:
        print(f"csv written to {args.out}")
    return 0


def _cmd_selftest(args) -> int:
    rng = np.random.default_rng(0)
    failures = 0

    def check(label: str, ok: bool, detail: str = ""):
        nonlocal failures
        tail = f" ({detail})" if detail else ""
        if ok:
            print(f"ok   {label}{tail}")
        else:
            failures += 1
            print(f"FAIL {label}{tail}")

    residual = partition_sum_residual(5, 2, rng.random((200, 2)))
    check("bump functions sum to one", residual <= 1e-12, f"residual={residual:.2e}")

    _, W = active_window(7, rng.random((200, 3)))
    per_point = np.prod((W > 0.0).sum(axis=-1), axis=-1)
    check("at most 2^d bumps active", int(per_point.max()) <= 2**3)

    ts = np.linspace(-4.0, 4.0, 2001)[:, None]
    psi_gap = float(np.max(np.abs(psi_network().eval_many(ts) - psi_scalar(ts[:, 0]))))
    check("four-ramp psi graph equals the trapezoid", psi_gap == 0.0)

    gadget = mult_gadget()
    pairs = rng.uniform(-1.0, 1.0, size=(10_000, 2))
    got = gadget.eval_many(pairs)
    scale = np.maximum.reduce(
        [pairs[:, 0] ** 2, pairs[:, 1] ** 2, (pairs[:, 0] + pairs[:, 1]) ** 2]
    )
    err = np.abs(got - pairs[:, 0] * pairs[:, 1])
    check(
        "multiplication gadget within 4 ulps",
        bool(np.all(err <= 4.0 * 2.0**-52 * scale)),
        f"max={err.max():.3e}",
    )

    plans_ok = all(
        product_plan(k).num_gadgets == k - 1
        and product_plan(k).num_rounds == expected_rounds(k)
        for k in range(1, 17)
    )
    check("tournament gadget and round counts", plans_ok)

    net = term_network(GridIndex((2, 1), 3), (1, 1))
    clone = NetGraph.deserialize(net.serialize())
    P = rng.random((100, 2))
    check(
        "serialization round-trips bit-exactly",
        bool(np.all(net.eval_many(P) == clone.eval_many(P))),
    )

    N = choose_N_sobolev(0.02, 2, 2)
    check(
        "resolution choice meets its guarantee",
        error_bound_sobolev(N, 2, 2, 1.0) <= 0.02,
        f"N={N}",
    )

    oracle = builtin_oracles()["sin1d"]
    report = synthesize(oracle, SynthesisConfig(d=1, n=2, epsilon=0.1))
    check(
        "coefficients stay in the unit ball",
        report.coefficients.max_abs() <= 1.0 + 1e-9,
        f"max|a|={report.coefficients.max_abs():.6f}",
    )
    X1 = rng.random((2000, 1))
    rep_gap = float(
        np.max(np.abs(report.net.eval_many(X1) - report.coefficients.closed_form(X1)))
    )
    check("network reproduces its closed form", rep_gap <= 1e-10, f"gap={rep_gap:.2e}")

    fd = finite_diff_validate(oracle, 2, num_points=20)
    check("closed-form derivatives pass finite differences", fd.ok, f"checked n<=2")

    print("selftest:", "all checks passed" if failures == 0 else f"{failures} check(s) failed")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="taylornet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="build a network for a named oracle")
    p.add_argument("--oracle", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--regime", default="sobolev",
                   choices=["sobolev", "analytic", "single_subspace", "union_subspaces"])
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d-eff", dest="d_eff", type=int, default=None)
    p.add_argument("--subset", default=None,
                   help="comma-separated 0-based coordinates, e.g. 0,2")
    p.add_argument("--out", default=None, help="write the network JSON here")
    p.add_argument("--report", default=None, help="write the synthesis report JSON here")
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("evaluate", help="evaluate a stored network at points")
    p.add_argument("--net", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--point", default=None, help="comma-separated coordinates")
    group.add_argument("--points-file", default=None, help="one point per line")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("verify", help="measure a stored network against its stated bound")
    p.add_argument("--net", required=True)
    p.add_argument("--report", required=True, help="report JSON from synthesize")
    p.add_argument("--oracle", required=True)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("rates", help="epsilon sweep with a parameter-count slope fit")
    p.add_argument("--oracle", required=True)
    p.add_argument("--regime", default="sobolev",
                   choices=["sobolev", "analytic", "union_subspaces"])
    p.add_argument("--eps-list", dest="eps_list", required=True,
                   help="comma-separated decreasing epsilon values")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d-eff", dest="d_eff", type=int, default=None)
    p.add_argument("--out", default=None, help="write the sweep CSV here")
    p.add_argument("--budget", type=int, default=4000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser("selftest", help="run the built-in invariant checks")
    p.set_defaults(func=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"taylornet: error: {exc}", file=sys.stderr)
        return 1
    except InfeasibleError as exc:
        print(f"taylornet: infeasible: {exc}", file=sys.stderr)
        return 1
    except NetFormatError as exc:
        print(f"taylornet: bad network file: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"taylornet: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
