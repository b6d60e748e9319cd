"""Command-line front end: ``vrda {synth,train,eval,bound,bench}``.

Exit codes: 0 success, 1 usage or configuration error, 2 I/O or parse
error, 3 an enforced bound was violated (``bound`` only).
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import analysis, dataio
from .baselines import train_perceptron, train_truncated_gradient
from .core import Dataset, l2_norm
from .dataio import DataFormatError, GenerationError
from .losses import LossKind
from .predictor import agreement_rate, evaluate
from .regularization import RegKind, RegularizerSpec
from .trainer import TrainConfig, train

log = logging.getLogger("vrda")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VIOLATION = 0, 1, 2, 3

CURVE_HEADER = ("samples_processed", "cumulative_mistakes", "nnz")
BENCH_HEADER = (
    "algo", "loss", "lambda", "eta", "M", "accuracy", "precision",
    "recall", "fscore", "nnz", "update_count",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_text(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    dataio.ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _dump_json(doc, path) -> None:
    _write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", path)


# -- synth -------------------------------------------------------------------


def cmd_synth(args) -> int:
    spec = dataio.SynthSpec(
        kind=args.kind,
        n_examples=args.n,
        dim=args.dim,
        margin=args.margin,
        density=args.density,
        flip_rate=args.flip,
        candidates_per_sentence=args.candidates,
        seed=args.seed,
    )
    data, u = dataio.generate(spec)
    dataio.ensure_parent(args.output)
    dataio.write_svmlight(data, args.output)
    if args.weights_out:
        dataio.ensure_parent(args.weights_out)
        dataio.write_weights(u, args.weights_out)
    log.info("wrote %d examples to %s", len(data), args.output)
    return EXIT_OK


# -- train -------------------------------------------------------------------


def _policy(name: str) -> str:
    return name.replace("-", "_")


def run_algo(data: Dataset, algo: str, loss, reg: RegularizerSpec, eta: float, epochs: int,
             policy: str = "on_error", retention: str = "full", variant: str = "voted",
             truncation_period: int = 1, seed=None):
    if algo == "vrda":
        cfg = TrainConfig(loss, reg, eta, epochs, policy, retention, seed)
        return train(data, cfg)
    if algo == "perceptron":
        return train_perceptron(data, epochs, variant, retention)
    if algo == "tg":
        return train_truncated_gradient(
            data, loss, reg.lam, eta, truncation_period, epochs, retention
        )
    raise ValueError(f"unknown algorithm {algo!r}")


def curve_rows(run) -> list[tuple[int, int, int]]:
    return [
        (t + 1, cm, nz)
        for t, (cm, nz) in enumerate(zip(run.cumulative_mistakes_curve, run.sample_nnz))
    ]


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_train(args) -> int:
    data = dataio.read_svmlight(args.data)
    reg = RegularizerSpec(RegKind(args.reg), args.lam)
    run = run_algo(
        data, args.algo, LossKind.parse(args.loss), reg, args.eta, args.epochs,
        _policy(args.policy), args.retention, args.variant, args.truncation_period,
    )
    doc = dataio.run_to_dict(run)
    _dump_json(doc, args.output)
    if args.curves:
        rows = curve_rows(run)
        _write_text(_csv_text(CURVE_HEADER, rows), args.curves)
        if args.figure:
            from .plotting import plot_curves

            dataio.ensure_parent(args.figure)
            plot_curves(rows, args.figure, title=f"{args.algo} ({args.loss}, lambda={args.lam:g})")
    elif args.figure:
        raise UsageError("--figure needs --curves")
    log.info("M=%d updates=%d nnz=%d", run.mistakes, run.update_count, len(run.final.entries))
    return EXIT_OK


# -- eval --------------------------------------------------------------------


def cmd_eval(args) -> int:
    run = dataio.read_report(args.report)
    test = dataio.read_svmlight(args.data, dim=run.final.dim)
    if len(test) == 0:
        raise UsageError("test set is empty")
    metrics = evaluate(args.mode, run, test)
    doc = {"mode": args.mode, **metrics.to_dict()}
    if run.has_snapshots:
        doc["agreement_vote_average"] = agreement_rate(run, test)
    _dump_json(doc, args.output)
    return EXIT_OK


# -- bound -------------------------------------------------------------------


def cmd_bound(args) -> int:
    run = dataio.read_report(args.report)
    data = dataio.read_svmlight(args.data, dim=run.final.dim)
    if args.weights:
        comparator = dataio.read_weights(args.weights)
    elif args.comparator == "averaged":
        comparator = analysis.Comparator(run.averaged(), "averaged")
    else:
        raise UsageError("need --weights or --comparator averaged")
    if comparator.u.dim != data.dim:
        raise UsageError(f"comparator dim {comparator.u.dim} does not match data dim {data.dim}")
    if l2_norm(comparator.u) == 0.0:
        log.warning("zero comparator: margin is undefined")
    report = analysis.bound_report(run, data, comparator, args.permutations, args.seed)
    for w in report.warnings:
        log.warning(w)
    _dump_json(report.to_dict(), args.output)
    if report.violations:
        log.error("violated bounds: %s", ", ".join(report.violations))
        return EXIT_VIOLATION
    return EXIT_OK


# -- bench -------------------------------------------------------------------


def _bench_eta(matrix: dict, algo: str, loss: str) -> float:
    if algo == "perceptron":
        return 1.0
    eta = matrix.get("tg_eta", matrix.get("eta")) if algo == "tg" else matrix.get("eta")
    if isinstance(eta, dict):
        eta = eta.get(loss, eta.get(LossKind.parse(loss).value))
    if eta is None:
        raise UsageError(f"no eta configured for {algo}/{loss}")
    return float(eta)


def _bench_row(task) -> dict:
    data, test, matrix, algo, loss, lam = task
    eta = _bench_eta(matrix, algo, loss)
    mode = matrix.get("mode", "average")
    reg = RegularizerSpec(RegKind(matrix.get("reg", "l1")), lam)
    run = run_algo(
        data, algo, LossKind.parse(loss), reg, eta, int(matrix.get("epochs", 1)),
        retention="full" if mode == "vote" else "final_and_average",
        variant=matrix.get("variant", "averaged"),
        truncation_period=int(matrix.get("truncation_period", 1)),
    )
    metrics = evaluate(mode, run, test)
    return {
        "algo": algo,
        "loss": LossKind.parse(loss).value,
        "lambda": lam,
        "eta": eta,
        "M": run.mistakes,
        "accuracy": metrics.accuracy,
        "precision": metrics.precision,
        "recall": metrics.recall,
        "fscore": metrics.fscore,
        "nnz": len(run.final.entries),
        "update_count": run.update_count,
    }


def bench_rows(data: Dataset, test: Dataset, matrix: dict, threads: int = 1) -> list[dict]:
    algos = matrix.get("algos", ["vrda", "perceptron", "tg"])
    losses = matrix.get("losses", ["hinge", "logistic"])
    lambdas = [float(v) for v in matrix.get("lambdas", [0.0])]
    for a in algos:
        if a not in ("vrda", "perceptron", "tg"):
            raise UsageError(f"unknown algorithm {a!r} in config matrix")
    for loss in losses:
        LossKind.parse(loss)
    tasks = [(data, test, matrix, a, l, lam) for a, l, lam in itertools.product(algos, losses, lambdas)]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_bench_row, tasks))
    else:
        rows = [_bench_row(t) for t in tasks]
    rows.sort(key=lambda r: (r["algo"], r["loss"], r["lambda"]))
    return rows


def cmd_bench(args) -> int:
    data = dataio.read_svmlight(args.data)
    test = dataio.read_svmlight(args.test, dim=data.dim) if args.test else data
    try:
        with open(args.config, encoding="utf-8") as fh:
            matrix = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"malformed config matrix {args.config}: {exc}") from None
    threads = max(1, int(os.environ.get("VRDA_THREADS", "1") or 1))
    rows = bench_rows(data, test, matrix, threads)
    text = _csv_text(BENCH_HEADER, [[repr(r[h]) if isinstance(r[h], float) else r[h] for h in BENCH_HEADER] for r in rows])
    _write_text(text, args.output)
    if args.figure:
        from .plotting import plot_bench

        dataio.ensure_parent(args.figure)
        plot_bench(rows, args.figure)
    return EXIT_OK


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vrda", description="Voted RDA online classification toolkit.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="generate a synthetic dataset and its comparator")
    s.add_argument("--kind", choices=dataio.SYNTH_KINDS, default="separable")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--dim", type=int, default=100)
    s.add_argument("--margin", type=float, default=0.05)
    s.add_argument("--density", type=float, default=0.1)
    s.add_argument("--flip", type=float, default=0.0)
    s.add_argument("--candidates", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--weights-out")
    s.set_defaults(func=cmd_synth)

    t = sub.add_parser("train", help="train a learner and write a JSON run report")
    t.add_argument("--data", required=True)
    t.add_argument("--algo", choices=("vrda", "perceptron", "tg"), default="vrda")
    t.add_argument("--loss", choices=("hinge", "log", "exp"), default="hinge")
    t.add_argument("--reg", choices=("none", "l1", "l2"), default="none")
    t.add_argument("--lambda", dest="lam", type=float, default=0.0)
    t.add_argument("--eta", type=float, default=1.0)
    t.add_argument("--epochs", type=int, default=1)
    t.add_argument("--policy", choices=("on-error", "every-step"), default="on-error")
    t.add_argument("--retention", choices=("full", "final_and_average"), default="full")
    t.add_argument("--variant", choices=("voted", "averaged"), default="voted")
    t.add_argument("--truncation-period", type=int, default=1)
    t.add_argument("-o", "--output", default="-")
    t.add_argument("--curves", help="CSV of (samples_processed, cumulative_mistakes, nnz)")
    t.add_argument("--figure", help="PNG rendering of the --curves data")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a run report on a test set")
    e.add_argument("--report", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--mode", choices=("vote", "average", "final"), default="vote")
    e.add_argument("-o", "--output", default="-")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bound", help="evaluate mistake, regret and online-to-batch bounds")
    b.add_argument("--report", required=True)
    b.add_argument("--data", required=True)
    b.add_argument("--weights", help="comparator weights JSON")
    b.add_argument("--comparator", choices=("averaged",), help="use the run's averaged predictor")
    b.add_argument("--permutations", type=int, default=0)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("-o", "--output", default="-")
    b.set_defaults(func=cmd_bound)

    m = sub.add_parser("bench", help="run an algorithm x loss x lambda matrix")
    m.add_argument("--data", required=True)
    m.add_argument("--config", required=True, help="JSON config matrix")
    m.add_argument("--test")
    m.add_argument("-o", "--output", default="-")
    m.add_argument("--figure", help="PNG of F-score against NNZ")
    m.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except (OSError, DataFormatError) as exc:
        log.error("%s", exc)
        return EXIT_IO
    except (UsageError, ValueError, GenerationError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
