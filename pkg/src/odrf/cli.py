"""Command line: ``odrf fit | predict | benchmark | consistency``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .data import apply_scaler, fit_minmax, load_csv
from .errors import BadSpec, BudgetExceedsData, DataError, OdrfError, SchemaMismatch, WrongTask, ZeroDenominator
from .evaluation import Method, consistency_curve, benchmark, make_target
from .forest import Forest
from .persist import ModelDocument, load_model, save_model
from .split import QRule, SplitConfig
from .tree import InvariantViolation, check_tree_invariants

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _q_rule(text: str) -> QRule:
    try:
        return QRule.parse(text)
    except BadSpec as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model settings")
    g.add_argument("--t-n", type=int, default=None,
                   help="leaf budget per tree; default ceil(n^0.8)")
    g.add_argument("--alpha", type=float, default=None,
                   help="pruning penalty per leaf; default n^-1/2 * Var(y) (regression) or n^-1/2 (classification)")
    g.add_argument("--trees", type=int, default=100, help="number of trees in a forest")
    g.add_argument("--q-rule", type=_q_rule, default=QRule("practical"),
                   help="forest subset-size rule: practical, theory, fixed:<q> or axis")
    g.add_argument("--n-candidates", type=int, default=10, help="candidate directions per node")
    g.add_argument("--ridge-lambda", type=float, default=1e-6, help="ridge penalty in direction fitting")
    g.add_argument("--no-cart-candidate", action="store_true", default=False,
                   help="do not add the exhaustive axis-aligned candidate at each node")
    g.add_argument("--min-gain", type=float, default=0.0, help="smallest gain that still allows a split")
    g.add_argument("--irls-steps", type=int, default=5, help="IRLS steps for classification directions")
    g.add_argument("--bootstrap", action="store_true", default=False,
                   help="train each forest tree on a bootstrap resample")
    g.add_argument("--aggregation", choices=("vote", "mean"), default="vote",
                   help="classification forest aggregation")
    g.add_argument("--seed", type=int, default=0, help="master random seed")
    g.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads for forest fitting (results do not depend on it)")


def _split_config(args) -> SplitConfig:
    return SplitConfig(args.n_candidates, args.q_rule, args.ridge_lambda, not args.no_cart_candidate,
                       args.min_gain, args.irls_steps)


def _method(name: str, args) -> Method:
    m = Method.parse(name, trees=args.trees, t_n=args.t_n, alpha=args.alpha, split=_split_config(args),
                     bootstrap=args.bootstrap, aggregation=args.aggregation)
    if m.kind == "odrf" and m.q_rule is None:
        m = Method(m.name, m.kind, m.pruned, args.q_rule, m.trees, m.t_n, m.alpha, m.split, m.bootstrap,
                   m.aggregation)
    return m


def _params(args, mode: str, task: str) -> dict:
    return {
        "mode": mode, "task": task, "prune": bool(args.prune), "t_n": args.t_n, "alpha": args.alpha,
        "trees": args.trees, "q_rule": str(args.q_rule), "n_candidates": args.n_candidates,
        "ridge_lambda": args.ridge_lambda, "include_cart_candidate": not args.no_cart_candidate,
        "min_gain": args.min_gain, "irls_steps": args.irls_steps, "bootstrap": bool(args.bootstrap),
        "aggregation": args.aggregation, "seed": args.seed,
    }


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Optional[str], header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    if path is None or path == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue(), encoding="utf-8")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_fit(args) -> int:
    raw = load_csv(args.data, args.target, args.task)
    scaler = fit_minmax(raw)
    data = apply_scaler(scaler, raw)
    name = args.mode + ("-pruned" if args.prune else "")
    fitted = _method(name, args).fit(data, args.seed, args.threads)
    model = fitted.model
    trees = model.trees if isinstance(model, Forest) else [model]
    for t in trees:
        check_tree_invariants(t)
    doc = ModelDocument(model, scaler, raw.feature_names, raw.target_name, _params(args, args.mode, args.task))
    save_model(doc, args.out)

    pred = fitted.predict(data.features)
    if args.task == "regression":
        loss = f"training MSE {float(np.mean((pred - data.targets) ** 2)):.6g}"
    else:
        loss = f"training MR {float(np.mean(pred != data.targets)):.6g}"
    leaves = [t.n_leaves for t in trees]
    print(f"{loss}; trees {len(trees)}; leaves min {min(leaves)} mean {np.mean(leaves):.1f} max {max(leaves)}")
    return EXIT_OK


def _read_features(path: str, names: Sequence[str]) -> tuple[list[int], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaMismatch(f"{path}: file is empty") from None
        missing = [n for n in names if n not in header]
        if missing:
            raise SchemaMismatch(f"{path}: missing feature column(s) {', '.join(missing)}")
        cols = [header.index(n) for n in names]
        rows, values = [], []
        for i, record in enumerate(reader):
            try:
                values.append([float(record[c]) for c in cols])
            except (ValueError, IndexError):
                continue
            rows.append(i)
    return rows, np.array(values, dtype=float).reshape(-1, len(names))


def cmd_predict(args) -> int:
    doc = load_model(args.model)
    rows, X = _read_features(args.data, doc.feature_names)
    Z = doc.scaling.transform(X)
    model = doc.model
    if doc.task == "regression":
        pred = model.predict(Z)
        _write_csv(args.out, ("row", "prediction"), zip(rows, pred))
    else:
        if isinstance(model, Forest):
            cls, frac = model.predict(Z), model.vote_fraction(Z)
        else:
            cls = model.classify(Z)
            frac = cls.astype(float)
        _write_csv(args.out, ("row", "class", "vote_fraction"), zip(rows, cls, frac))
    return EXIT_OK


def cmd_benchmark(args) -> int:
    methods = [_method(name, args) for name in args.methods.split(",") if name.strip()]
    if not methods:
        raise BadSpec("no methods given")
    result = benchmark(args.data, methods, args.repetitions, args.seed, args.scaling, args.threads,
                       args.target, args.task)
    _write_csv(args.out, ("method", "partition", "metric", "value"), result.rows())
    for m, v in result.means.items():
        print(f"{m}: mean {result.metric} {v:.6g}", file=sys.stderr)
    return EXIT_OK


def cmd_consistency(args) -> int:
    target = make_target(args.kind, args.p, args.components, args.q, args.base.split(","), args.scale,
                         args.amplitude, args.intercept, args.noise, args.direction, args.target_seed)
    method = _method(args.method, args)
    report = consistency_curve(target, args.n, method, args.reps, args.n_mc, args.seed, args.threads)
    _write_csv(args.out, ("method", "n", "metric", "value"), report.rows())
    if args.details:
        _write_csv(args.details, ("method", "n", "repetition", "metric", "value"), report.detail_rows())
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="odrf", description="Oblique decision trees and oblique random forests.",
                     formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit a tree or forest on a CSV file", formatter_class=fmt)
    p.add_argument("--data", required=True, help="input CSV with a header row")
    p.add_argument("--target", required=True, help="name of the target column")
    p.add_argument("--task", choices=("regression", "classification"), default="regression", help="task kind")
    p.add_argument("--mode", choices=("odt", "cart", "odrf"), default="odrf",
                   help="odt: one tree on all coordinates; cart: axis-aligned tree; odrf: random forest")
    p.add_argument("--prune", action="store_true", default=False, help="prune every tree")
    p.add_argument("--out", required=True, help="model JSON file to write")
    _add_model_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict with a saved model", formatter_class=fmt)
    p.add_argument("--model", required=True, help="model JSON written by fit")
    p.add_argument("--data", required=True, help="CSV containing the model's feature columns")
    p.add_argument("--out", default=None, help="predictions CSV; stdout when omitted")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("benchmark", help="repeated random-partition evaluation", formatter_class=fmt)
    p.add_argument("--data", required=True, help="input CSV with a header row")
    p.add_argument("--target", required=True, help="name of the target column")
    p.add_argument("--task", choices=("regression", "classification"), default="regression", help="task kind")
    p.add_argument("--methods", default="odrf,cart",
                   help="comma-separated: mean-baseline, odt, cart, odrf, odrf-q<k>, odrf-theory, "
                        "each optionally suffixed with -pruned")
    p.add_argument("--repetitions", type=int, default=100, help="number of random partitions")
    p.add_argument("--scaling", choices=("train", "whole"), default="train",
                   help="fit the [0,1] scaling on training rows only, or on the whole file")
    p.add_argument("--out", default=None, help="results CSV; stdout when omitted")
    _add_model_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("consistency", help="L2 risk against a synthetic target for growing n",
                       formatter_class=fmt)
    p.add_argument("--kind", choices=("ridge_sum", "extended_additive"), default="ridge_sum",
                   help="synthetic target family")
    p.add_argument("--p", type=int, default=5, help="dimension")
    p.add_argument("--components", type=int, default=1, help="number of ridge functions / additive terms")
    p.add_argument("--q", type=int, default=2, help="coordinates per additive term (extended_additive)")
    p.add_argument("--base", default="sine", help="comma-separated base functions: sigmoid, sine, quadratic, linear")
    p.add_argument("--scale", type=float, default=4.0, help="inner scale applied to each projection")
    p.add_argument("--amplitude", type=float, default=1.0, help="outer amplitude of each component")
    p.add_argument("--intercept", type=float, default=0.0, help="constant added to the target")
    p.add_argument("--noise", type=float, default=0.1, help="Gaussian noise standard deviation")
    p.add_argument("--direction", choices=("equal", "random"), default="equal",
                   help="component directions: equal weights or random unit vectors")
    p.add_argument("--target-seed", type=int, default=0, help="seed for random target construction")
    p.add_argument("--n", type=_int_list, default=[250, 500, 1000, 2000, 4000], help="sample sizes")
    p.add_argument("--method", default="odt", help="method name as in benchmark --methods")
    p.add_argument("--reps", type=int, default=5, help="repetitions per sample size")
    p.add_argument("--n-mc", type=int, default=20000, help="Monte-Carlo points for the risk integral")
    p.add_argument("--out", default=None, help="median summary CSV; stdout when omitted")
    p.add_argument("--details", default=None, help="optional CSV with every repetition's risk")
    _add_model_flags(p)
    p.set_defaults(func=cmd_consistency)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, BudgetExceedsData, ZeroDenominator, FileNotFoundError) as exc:
        print(f"odrf: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (BadSpec, WrongTask) as exc:
        print(f"odrf: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvariantViolation, OdrfError) as exc:
        print(f"odrf: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
