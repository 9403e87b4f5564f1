"""Command-line front end: JSON in, JSON out, deterministic given --seed.

Exit codes: 0 success, 1 input/usage error, 2 certificate validation
violations.  All floats round-trip (json uses repr, which is shortest
round-trip exact); keys are sorted so identical runs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import bounds, children, measure, oracle, peano, refine2d
from .realset import Interval, RealSet

COMMANDS = (
    "kernel",
    "lnorm",
    "ell",
    "keps",
    "children",
    "interval",
    "certify",
    "validate",
    "search-counterexample",
    "refine2d",
)


@dataclass
class RunConfig:
    command: str
    input_path: str | None = None
    output_path: str | None = None
    n: int = 1
    eps: float = 0.25
    seed: int = 0
    budget: int = 2000
    trials: int = 1000
    samples: int = 200_000
    nodes: str | None = None
    hull: str | None = None
    kind: str = "theorem0"
    family_size: int = 4
    emit_csv: bool = False

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not (0.0 < self.eps < 1.0):
            raise ValueError("eps must be in (0, 1)")
        if not (1 <= self.n <= 12):
            raise ValueError("n must be between 1 and 12")
        if self.budget < 1000:
            raise ValueError("budget must be at least 1000")


def _load_input(config: RunConfig) -> dict:
    if config.input_path:
        with open(config.input_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = sys.stdin.read()
    return json.loads(text)


def _emit(config: RunConfig, obj: dict, csv_rows: list[list] | None = None) -> None:
    text = json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if config.emit_csv and csv_rows is not None:
        if not config.output_path:
            print("--emit-csv needs --output; skipping CSV", file=sys.stderr)
            return
        with open(config.output_path + ".csv", "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(csv_rows)


def _parse_pair(text: str) -> tuple[float, float]:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 2:
        raise ValueError("expected 'lo,hi'")
    return parts[0], parts[1]


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit code."""
    try:
        config.validate()
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        return _dispatch(config)
    except json.JSONDecodeError as exc:
        print(
            f"input error: line {exc.lineno} column {exc.colno}: {exc.msg}",
            file=sys.stderr,
        )
        return 1
    except (ValueError, KeyError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1


def _dispatch(config: RunConfig) -> int:
    cmd = config.command
    if cmd == "kernel":
        if not config.nodes:
            raise ValueError("kernel needs --nodes lo,...,hi")
        nodes = peano.NodeSet(tuple(float(x) for x in config.nodes.split(",")))
        kern = peano.peano_kernel(nodes)
        lo, hi = kern.support
        grid = np.linspace(lo, hi, 401)
        vals = kern(grid)
        samples = [[float(s), float(v)] for s, v in zip(grid, vals)]
        obj = {"nodes": list(nodes.nodes), "samples": samples}
        _emit(config, obj, [["s", "psi"]] + samples)
        return 0
    if cmd == "lnorm":
        mu = measure.measure_from_json(_load_input(config))
        res = measure.length_n_eps(mu, config.n, config.eps)
        _emit(config, res.to_json())
        return 0
    if cmd == "ell":
        mu = measure.measure_from_json(_load_input(config))
        est = children.ell_n(
            mu, config.n, children.MCBudget(config.samples, config.seed)
        )
        _emit(config, est.to_json())
        return 0
    if cmd == "keps":
        k = RealSet.from_json(_load_input(config))
        hull = Interval(*_parse_pair(config.hull)) if config.hull else k.hull
        from .realset import k_epsilon

        _emit(config, k_epsilon(k, hull, config.eps).to_json())
        return 0
    if cmd == "children":
        mu = measure.measure_from_json(_load_input(config))
        tree = children.children_tree(
            mu,
            config.n,
            config.eps,
            children.MCBudget(config.samples, config.seed),
        )
        _emit(config, tree.to_json())
        return 0
    if cmd == "interval":
        payload = _load_input(config)
        mc = children.MCBudget(config.samples, config.seed)
        if config.kind == "theorem0":
            k = RealSet.from_json(payload)
            cert = bounds.theorem0_pipeline(
                k, config.n, config.eps, config.budget, config.seed, mc
            )
        else:
            mu = measure.measure_from_json(payload)
            k = measure.support_set(mu)
            if config.kind == "theorem2":
                cert = bounds.theorem2_set(
                    mu, k, config.n, config.eps, config.budget, config.seed, mc
                )
            elif config.kind == "corollary":
                cert = bounds.corollary_interval(
                    mu, k, config.n, config.eps, config.budget, config.seed, mc
                )
            else:
                raise ValueError(f"unknown --kind {config.kind!r}")
        _emit(config, cert.to_json())
        return 0
    if cmd == "certify":
        prob = oracle.RatioProblem.from_json(_load_input(config))
        res = oracle.certify_ratio(prob, config.budget, config.seed)
        _emit(config, res.to_json())
        return 0
    if cmd == "validate":
        cert = bounds.Certificate.from_json(_load_input(config))
        report = oracle.validate_inequality(cert, config.trials, config.seed)
        _emit(config, report.to_json())
        return 2 if report.violations > 0 else 0
    if cmd == "search-counterexample":
        report = oracle.search_counterexample(
            config.n, config.family_size, config.seed, config.budget, config.eps
        )
        rows = [["m", "best_eps0_constant", "pipeline_constant"]] + [
            [r.m, r.best_eps0_constant, r.pipeline_constant] for r in report.rows
        ]
        _emit(config, report.to_json(), rows)
        return 0
    if cmd == "refine2d":
        omega = refine2d.PlaneRegion.from_json(_load_input(config))
        result = refine2d.refine(
            omega, config.n, config.eps, config.budget, config.seed
        )
        rows = [["x0", "dx", "kept", "fiber_measure"]]
        for cell, kept in zip(omega.cells, result.kept):
            rows.append([cell.x0, cell.dx, int(kept), cell.fiber.measure])
        _emit(config, result.to_json(), rows)
        return 0
    raise ValueError(f"unhandled command {cmd!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polybound",
        description="certified lower bounds for integrals of polynomials on the line",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", dest="input_path")
    parser.add_argument("--output", dest="output_path")
    parser.add_argument("--n", type=int, default=1)
    parser.add_argument("--eps", type=float, default=0.25)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--budget", type=int, default=2000)
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--samples", type=int, default=200_000)
    parser.add_argument("--nodes", help="comma-separated kernel nodes")
    parser.add_argument("--hull", help="lo,hi hull override for keps")
    parser.add_argument(
        "--kind", choices=("theorem0", "theorem2", "corollary"), default="theorem0"
    )
    parser.add_argument("--family-size", dest="family_size", type=int, default=4)
    parser.add_argument("--emit-csv", dest="emit_csv", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    config = RunConfig(
        command=ns.command,
        input_path=ns.input_path,
        output_path=ns.output_path,
        n=ns.n,
        eps=ns.eps,
        seed=ns.seed,
        budget=ns.budget,
        trials=ns.trials,
        samples=ns.samples,
        nodes=ns.nodes,
        hull=ns.hull,
        kind=ns.kind,
        family_size=ns.family_size,
        emit_csv=ns.emit_csv,
    )
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
