"""``discomax`` command line: ``embed``, ``check`` and ``eval``.

Exit status is 0 on success, 2 on usage errors and 1 on runtime errors;
failures print a single ``ERROR <CODE>: message`` line on stderr. Output
files are written to a temporary sibling and renamed into place, so a
failed run never leaves partial files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .data import load_csv
from .diagnostics import convergence_report
from .errors import DiscomaxError
from .evaluation import (TRANSDUCTIVE_NOTE, baseline_embeddings, cv_rmse,
                         kfold_plan, select_iterations_by_cv)
from .solver import SolverConfig, resolve_gamma, run

BASELINES = ("identity", "random_projection")


class UsageError(DiscomaxError):
    code = "USAGE"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_w(text: str):
    if text == "dcor":
        return "dcor"
    if text.startswith("fixed:"):
        try:
            return float(text[len("fixed:"):])
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(f"expected 'dcor' or 'fixed:<value>', got {text!r}")


def _parse_gamma(text: str):
    if text in ("auto", "off"):
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected 'auto', 'off' or a number, got {text!r}") from None


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--response", required=True, type=_names,
                   help="response column name(s), comma-separated")
    p.add_argument("--standardize", action="store_true",
                   help="z-score feature columns before fitting")
    p.add_argument("--seed", type=int, default=0)


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, required=True, help="embedding dimension")
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--update", choices=("mm", "cccp"), default="mm")
    p.add_argument("--w", type=_parse_w, default="dcor", help="dcor | fixed:<value>")
    p.add_argument("--gamma", type=_parse_gamma, default="auto", help="auto | off | <value>")
    p.add_argument("--init", choices=("gaussian", "subset"), default="gaussian")
    p.add_argument("--loss-tol", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="discomax",
                     description="Distance-correlation maximizing embeddings.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    embed = sub.add_parser("embed", help="fit an embedding and write CSV/trace/manifest")
    _add_data_args(embed)
    _add_solver_args(embed)
    embed.add_argument("--out", required=True, help="embedding CSV path")
    embed.add_argument("--trace", required=True, help="trace JSON path")
    embed.add_argument("--manifest", help="manifest JSON path (default: <out>.manifest.json)")
    embed.add_argument("--record-time", action="store_true",
                       help="store per-iteration wall time in the trace (breaks byte-determinism)")

    check = sub.add_parser("check", help="report convergence conditions as JSON")
    _add_data_args(check)
    check.add_argument("--gamma", type=_parse_gamma, default="auto", help="auto | <value>")
    check.add_argument("--out", help="write the report here instead of stdout")

    ev = sub.add_parser("eval", help="cross-validated k-NN RMSE of embeddings")
    _add_data_args(ev)
    _add_solver_args(ev)
    ev.add_argument("--folds", type=int, default=5)
    ev.add_argument("--knn-k", type=int, default=5)
    ev.add_argument("--checkpoints", type=_parse_int_list,
                    help="iteration counts to score (default: --iters)")
    ev.add_argument("--baselines", type=_names, default=list(BASELINES))
    ev.add_argument("--out", help="write the report here instead of stdout")
    return parser


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_embedding_csv(embedding: np.ndarray) -> str:
    d = embedding.shape[1]
    lines = [",".join(f"dim_{j + 1}" for j in range(d))]
    lines += [",".join(f"{v:.17g}" for v in row) for row in embedding]
    return "\n".join(lines) + "\n"


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _config_from(args, p: int) -> SolverConfig:
    if args.dim < 1 or args.dim > p:
        raise UsageError(f"--dim must lie in [1, {p}] (feature count), got {args.dim}")
    if args.iters < 1:
        raise UsageError("--iters must be >= 1")
    if args.loss_tol < 0:
        raise UsageError("--loss-tol must be >= 0")
    return SolverConfig(
        target_dim=args.dim,
        update_rule=args.update,
        w_schedule=args.w,
        gamma=args.gamma,
        max_iter=args.iters,
        loss_tol=args.loss_tol,
        seed=args.seed,
        init="feature_subset" if args.init == "subset" else "gaussian",
    )


def cmd_embed(args) -> int:
    data = load_csv(args.input, args.response, args.standardize)
    config = _config_from(args, data.p)
    result = run(data, config)

    trace = []
    for rec in result.trace:
        row = asdict(rec)
        if not args.record_time:
            row["ms"] = None
        trace.append(row)
    manifest = {
        "software": {"name": "discomax", "version": __version__},
        "input": {"path": str(args.input), "sha256": _file_sha256(args.input),
                  "n": data.n, "p": data.p, "q": data.Y.shape[1],
                  "features": list(data.feature_names),
                  "responses": list(data.response_names),
                  "standardized": data.standardized},
        "config": asdict(config),
        "seed": config.seed,
        "gamma_interval": list(result.gamma_interval),
        "gamma_used": result.gamma_used,
        "iterations": result.iterations,
        "stop_reason": result.stop_reason,
        "initial_dcor2": result.initial_dcor2,
    }
    manifest_path = args.manifest or f"{args.out}.manifest.json"
    outputs = [
        (args.out, format_embedding_csv(result.embedding)),
        (args.trace, _dumps(trace)),
        (manifest_path, _dumps(manifest)),
    ]
    for path, text in outputs:
        _atomic_write(path, text)
    return 0


def cmd_check(args) -> int:
    data = load_csv(args.input, args.response, args.standardize)
    gamma, _ = resolve_gamma(data.X, data.Y, args.gamma)
    report = convergence_report(data.X, data.Y, gamma, seed=args.seed)
    text = _dumps(report.to_dict())
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_eval(args) -> int:
    data = load_csv(args.input, args.response, args.standardize)
    config = _config_from(args, data.p)
    unknown = [b for b in args.baselines if b not in BASELINES]
    if unknown:
        raise UsageError(f"unknown baseline(s): {', '.join(unknown)}")
    if not 2 <= args.folds <= data.n:
        raise UsageError(f"--folds must lie in [2, {data.n}]")
    checkpoints = args.checkpoints or [config.max_iter]
    plan = kfold_plan(data.n, args.folds, args.seed)
    best, reports = select_iterations_by_cv(data, config, checkpoints, plan, args.knn_k)

    y = data.Y[:, 0] if data.Y.shape[1] == 1 else data.Y
    methods = {"discomax": reports[best].to_dict()}
    embeds = baseline_embeddings(data.X, config.target_dim, args.seed)
    for name in args.baselines:
        methods[name] = cv_rmse(embeds[name], y, plan, args.knn_k, method=name).to_dict()
    report = {
        "selected_iteration": best,
        "checkpoints": {str(c): r.mean_rmse for c, r in reports.items()},
        "methods": methods,
        "fold_plan": {"k": plan.k, "seed": plan.seed, "sizes": plan.sizes()},
        "note": TRANSDUCTIVE_NOTE,
    }
    text = _dumps(report)
    if args.out:
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {"embed": cmd_embed, "check": cmd_check, "eval": cmd_eval}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 2
    except DiscomaxError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ERROR IO: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
