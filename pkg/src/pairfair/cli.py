"""Command-line entry points: train, sweep, bounds, simulate, serve, report."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .csc import ExhaustiveTabularOracle, LeastSquaresOracle
from .data import (ConstraintSet, PairSet, SyntheticJudgeSpec,
                   build_constraints, load_dataset, read_judgments,
                   sample_pairs, simulate_judge, stable_seed, write_judgments)
from .lagrangian import FairnessParams, GuaranteeBudgets
from .metrics import (BoundInputs, error_bound, fairness_generalization_bound)
from .solver import (SolveReport, SolverConfig, pareto_sweep, read_curve,
                     solve, write_curve)

DEFAULTS = {
    "gamma": 0.3,
    "eta": 0.0,
    "c_lambda": 10.0,
    "c_tau": 10.0,
    "nu": 0.05,
    "seed": 0,
    "t_override": None,
    "gamma_grid": None,
    "eta_grid": None,
}


def parse_config_file(path: str) -> dict:
    """Flat key = value lines; '#' starts a comment; grids are comma lists."""
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected key = value")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in DEFAULTS:
                raise ValueError(f"{path}:{line_no}: unknown key {key!r}")
            if key in ("gamma_grid", "eta_grid"):
                values[key] = [float(v) for v in value.split(",")]
            elif key == "seed":
                values[key] = int(value)
            elif key == "t_override":
                values[key] = int(value)
            else:
                values[key] = float(value)
    return values


def resolve_settings(args) -> dict:
    """Precedence: command-line flags, then config file, then defaults."""
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        settings.update(parse_config_file(args.config))
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = flag
    return settings


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir: Path, command: str, settings: dict,
                   inputs: dict[str, str], outputs: list[str],
                   extra: dict | None = None) -> str:
    manifest = {
        "command": command,
        "config": {k: v for k, v in settings.items()},
        "inputs": {name: file_digest(p) for name, p in inputs.items()},
        "input_paths": dict(inputs),
        "outputs": outputs,
        "version": __version__,
    }
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return str(path)


def make_oracle(name: str, n: int):
    if name == "linear":
        return LeastSquaresOracle()
    if name == "exact-tabular":
        if n > 20:
            raise ValueError("exact-tabular oracle is limited to n <= 20 rows")
        return ExhaustiveTabularOracle(n)
    raise ValueError(f"unknown oracle {name!r}")


def build_solver_config(settings: dict) -> SolverConfig:
    return SolverConfig(
        params=FairnessParams(settings["gamma"], settings["eta"]),
        budgets=GuaranteeBudgets(settings["c_lambda"], settings["c_tau"],
                                 settings["nu"]),
        t_override=settings["t_override"],
        seed=settings["seed"],
    )


def load_training_inputs(args, settings):
    dataset = load_dataset(args.dataset, args.label_column)
    responses = read_judgments(args.judgments)
    if not responses:
        print("warning: judgments file is empty; training without constraints",
              file=sys.stderr)
        constraints = ConstraintSet(
            n=dataset.n, pairs=np.empty((0, 2), dtype=np.int64),
            counts=np.empty(0, dtype=np.int64), num_judges=1)
        return dataset, constraints
    judges = sorted({r.judge_id for r in responses})
    num_judges = args.num_judges or len(judges)
    pair_rows = sorted({(min(r.i, r.j), max(r.i, r.j)) for r in responses})
    pair_set = PairSet(n=dataset.n,
                       pairs=np.array(pair_rows, dtype=np.int64))
    constraints = build_constraints(responses, pair_set, num_judges)
    return dataset, constraints


def cmd_train(args) -> int:
    settings = resolve_settings(args)
    dataset, constraints = load_training_inputs(args, settings)
    oracle = make_oracle(args.oracle, dataset.n)
    config = build_solver_config(settings)
    report = solve(dataset, constraints, config, oracle)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    report.save(str(report_path))
    write_manifest(out_dir, "train", settings,
                   {"dataset": args.dataset, "judgments": args.judgments},
                   [str(report_path)],
                   {"oracle": args.oracle,
                    "constraints_hash": constraints.content_hash(),
                    "iterations": report.iterations})
    print(f"trained on {dataset.n} rows, {constraints.num_ordered} ordered "
          f"constrained pairs, {report.iterations} iterations")
    print(f"error {report.train_error:.4f}  max_violation "
          f"{report.max_violation:.4f}  weighted_slack "
          f"{report.weighted_slack:.4f}")
    print(f"report written to {report_path}")
    return 0


def cmd_sweep(args) -> int:
    settings = resolve_settings(args)
    dataset, constraints = load_training_inputs(args, settings)
    oracle = make_oracle(args.oracle, dataset.n)
    config = build_solver_config(settings)
    gamma_grid = settings["gamma_grid"] or [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    eta_grid = settings["eta_grid"] or [settings["eta"]]
    points = pareto_sweep(dataset, constraints, config, gamma_grid, eta_grid,
                          oracle, workers=args.workers)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    curve_path = out_dir / "curve.csv"
    write_curve(str(curve_path), points)
    failures = [p for p in points if not p.ok]
    write_manifest(out_dir, "sweep", settings,
                   {"dataset": args.dataset, "judgments": args.judgments},
                   [str(curve_path)],
                   {"oracle": args.oracle,
                    "constraints_hash": constraints.content_hash(),
                    "gamma_grid": gamma_grid, "eta_grid": eta_grid,
                    "failures": [{"gamma": p.gamma, "eta": p.eta,
                                  "message": p.message} for p in failures]})
    if args.session_dir:
        session_dir = Path(args.session_dir)
        write_curve(str(session_dir / "results.csv"), points)
        with open(session_dir / "results_meta.json", "w",
                  encoding="utf-8") as fh:
            json.dump({"constraints_hash": constraints.content_hash(),
                       "gamma_grid": gamma_grid, "eta_grid": eta_grid,
                       "num_judges": constraints.num_judges},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")
    for p in points:
        status = "" if p.ok else f"  FAILED: {p.message}"
        print(f"gamma={p.gamma:g} eta={p.eta:g} error={p.error:.4f} "
              f"max_violation={p.max_violation:.4f}{status}")
    print(f"curve written to {curve_path}")
    return 1 if failures else 0


def cmd_bounds(args) -> int:
    if args.epsilon <= 0:
        print("error: epsilon must be positive", file=sys.stderr)
        return 2
    err = error_bound(args.vc_dim, args.n, args.delta)
    gen = fairness_generalization_bound(
        BoundInputs(n=args.n, m=args.m, vc_dim=args.vc_dim,
                    epsilon=args.epsilon, delta=args.delta))
    print(f"error_bound(vc_dim={args.vc_dim}, n={args.n}, "
          f"delta={args.delta:g}) = {err:.6e}")
    flag = "VACUOUS (>= 1)" if gen.vacuous else "informative (< 1)"
    print(f"fairness_generalization_bound(n={args.n}, m={args.m}, "
          f"d={args.vc_dim}, eps={args.epsilon:g}) = {gen.value:.6e}  [{flag}]")
    print(f"  log_value = {gen.log_value:.6e}")
    print(f"  k = {gen.k:.6g}  k_prime = {gen.k_prime:.6g}  "
          f"sparsify_k = {gen.sparsify_k}")
    return 0


def cmd_simulate(args) -> int:
    dataset = load_dataset(args.dataset, args.label_column)
    with open(args.judges, encoding="utf-8") as fh:
        spec_payload = json.load(fh)
    if isinstance(spec_payload, dict) and "judges" in spec_payload:
        specs = [SyntheticJudgeSpec.from_dict(s) for s in spec_payload["judges"]]
    elif isinstance(spec_payload, list):
        specs = [SyntheticJudgeSpec.from_dict(s) for s in spec_payload]
    else:
        specs = [SyntheticJudgeSpec.from_dict(spec_payload)]
    responses = []
    for spec in specs:
        pair_seed = stable_seed(args.seed, "pairs", spec.judge_id)
        pair_set = sample_pairs(dataset.n, args.pairs, pair_seed)
        responses.extend(simulate_judge(dataset, pair_set, spec))
    write_judgments(args.out, responses)
    print(f"wrote {len(responses)} responses from {len(specs)} judges "
          f"to {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import SessionConfig, SessionStore, create_app

    store = SessionStore(args.root)
    if args.session_config:
        with open(args.session_config, encoding="utf-8") as fh:
            config = SessionConfig.from_dict(json.load(fh))
        store.create(config)
        print(f"session {config.session_id!r} ready")
    app = create_app(store, ui_dir=args.ui_dir)
    print(f"serving on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_report(args) -> int:
    from .figures import render_report_figures

    report = SolveReport.load(args.report) if args.report else None
    points = read_curve(args.curve) if args.curve else None
    if report is None and not points:
        print("error: provide --report and/or --curve", file=sys.stderr)
        return 2
    written = render_report_figures(report, points, args.out)
    if report is not None:
        print(f"run of {report.iterations} iterations: "
              f"error {report.train_error:.4f}, "
              f"max violation {report.max_violation:.4f}, "
              f"weighted slack {report.weighted_slack:.4f}")
        cert = report.certificate
        print(f"  realized dual regrets: pair {cert['regret_lambda']:.4g} "
              f"(bound {cert['regret_bound_lambda']:.4g}), "
              f"slack {cert['regret_tau']:.4g} "
              f"(bound {cert['regret_bound_tau']:.4g})")
    if points:
        ok_points = [p for p in points if p.ok]
        best = min(ok_points, key=lambda p: p.error, default=None)
        if best is not None:
            print(f"sweep of {len(points)} points: minimum error "
                  f"{best.error:.4f} at gamma={best.gamma:g}, "
                  f"eta={best.eta:g}")
    for path in written:
        print(f"figure written to {path}")
    return 0


def _add_common_training_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", required=True, help="CSV with a header row")
    p.add_argument("--judgments", required=True, help="JSONL judgment log")
    p.add_argument("--label-column", default="label")
    p.add_argument("--config", help="flat key = value settings file")
    p.add_argument("--gamma", type=float, default=None,
                   help="allowed per-pair disparity (default 0.3)")
    p.add_argument("--eta", type=float, default=None,
                   help="weighted-slack budget (default 0)")
    p.add_argument("--c-lambda", dest="c_lambda", type=float, default=None,
                   help="pair-price cap (default 10)")
    p.add_argument("--c-tau", dest="c_tau", type=float, default=None,
                   help="slack-price cap (default 10)")
    p.add_argument("--nu", type=float, default=None,
                   help="target approximation slack (default 0.05)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--t-override", dest="t_override", type=int, default=None,
                   help="fixed iteration count instead of the closed form")
    p.add_argument("--num-judges", type=int, default=None,
                   help="judge universe size (default: distinct ids seen)")
    p.add_argument("--oracle", choices=("linear", "exact-tabular"),
                   default="linear")
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairfair",
        description="Train classifiers under pairwise treat-the-same "
                    "constraints elicited from judges.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="one constrained training run")
    _add_common_training_args(p_train)
    p_train.set_defaults(func=cmd_train)

    p_sweep = sub.add_parser("sweep", help="solve across a budget grid")
    _add_common_training_args(p_sweep)
    p_sweep.add_argument("--gamma-grid", dest="gamma_grid",
                         type=lambda s: [float(v) for v in s.split(",")],
                         default=None)
    p_sweep.add_argument("--eta-grid", dest="eta_grid",
                         type=lambda s: [float(v) for v in s.split(",")],
                         default=None)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--session-dir", default=None,
                         help="also write results into this service session")
    p_sweep.set_defaults(func=cmd_sweep)

    p_bounds = sub.add_parser("bounds", help="evaluate generalization bounds")
    p_bounds.add_argument("--n", type=int, required=True)
    p_bounds.add_argument("--m", type=int, required=True)
    p_bounds.add_argument("--vc-dim", dest="vc_dim", type=int, required=True)
    p_bounds.add_argument("--epsilon", type=float, required=True)
    p_bounds.add_argument("--delta", type=float, default=0.05)
    p_bounds.set_defaults(func=cmd_bounds)

    p_sim = sub.add_parser("simulate", help="synthetic judges answer pairs")
    p_sim.add_argument("--dataset", required=True)
    p_sim.add_argument("--label-column", default="label")
    p_sim.add_argument("--judges", required=True,
                       help="JSON judge spec, list, or {'judges': [...]}")
    p_sim.add_argument("--pairs", type=int, default=50,
                       help="pairs per judge (default 50)")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True, help="judgments JSONL path")
    p_sim.set_defaults(func=cmd_simulate)

    p_serve = sub.add_parser("serve", help="run the judgment service")
    p_serve.add_argument("--root", required=True, help="session state root")
    p_serve.add_argument("--session-config", default=None,
                         help="JSON session config to create on startup")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--ui-dir", default=None,
                         help="static UI bundle to host at /")
    p_serve.set_defaults(func=cmd_serve)

    p_report = sub.add_parser("report",
                              help="render figures and a text summary")
    p_report.add_argument("--report", default=None, help="report.json path")
    p_report.add_argument("--curve", default=None, help="curve.csv path")
    p_report.add_argument("--out", required=True, help="figure directory")
    p_report.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
