"""Command-line interface.

Subcommands: train, evaluate, cv, predict, landmarks, synth, gradcheck.
Every command is deterministic given (inputs, flags, seed), never mutates
its input files, and writes outputs atomically into the --out directory.

Exit status: 0 success; 2 argument error; 3 parse error; 4 schema error;
5 validation error; 6 numeric divergence; 7 undefined metric.

A train/cv run persists its resolved configuration as ``config.txt`` in
the output directory; replaying it with ``--config`` reproduces the run
byte-identically given the same input files.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import checkpoint, docfmt, gradcheck, landmarks as landmarks_mod, metrics, trainer
from .backend import BACKEND_NAME
from .data import (
    SynthesisConfig,
    load_dataset,
    serialize_arff,
    serialize_label_header,
    synthesize,
)
from .errors import ArgumentError, SchemaError, ToolError
from .fsio import write_text_atomic
from .objective import Hyperparams

# (flag/config key, type, default) for everything that feeds TrainConfig
_TRAIN_FIELDS = (
    ("variant", str, "mlp"),
    ("lambda1", float, 0.1),
    ("lambda2", float, 0.1),
    ("epsilon_row", float, 1e-8),
    ("lr_theta", float, 1e-3),
    ("lr_b", float, 1e-3),
    ("lr_a", float, 1e-3),
    ("batch_size", int, 64),
    ("max_iters", int, 500),
    ("tol", float, 1e-5),
    ("seed", int, trainer.DEFAULT_SEED),
    ("hard_diagonal", "onoff", True),
    ("standardize", "onoff", True),
    ("hidden1", int, 512),
    ("hidden2", int, 64),
    ("leaky_slope", float, 0.01),
)


def _add_train_flags(p):
    p.add_argument("--config", help="flat key=value file with defaults for the flags below")
    p.add_argument("--variant", choices=("linear", "mlp"))
    p.add_argument("--lambda1", type=float)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--epsilon-row", dest="epsilon_row", type=float)
    p.add_argument("--lr-theta", dest="lr_theta", type=float)
    p.add_argument("--lr-b", dest="lr_b", type=float)
    p.add_argument("--lr-a", dest="lr_a", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--hard-diagonal", dest="hard_diagonal", choices=("on", "off"))
    p.add_argument("--standardize", choices=("on", "off"))
    p.add_argument("--hidden1", type=int)
    p.add_argument("--hidden2", type=int)
    p.add_argument("--leaky-slope", dest="leaky_slope", type=float)


def _coerce(kind, raw):
    if kind == "onoff":
        if isinstance(raw, bool):
            return raw
        return docfmt.parse_bool(str(raw).lower())
    return kind(raw)


def _resolve_train_config(args):
    """Merge CLI flags over --config file values over built-in defaults."""
    from_file = {}
    if getattr(args, "config", None):
        try:
            text = open(args.config, "r", encoding="utf-8").read()
        except OSError as exc:
            raise ArgumentError(f"cannot read config {args.config}: {exc}") from exc
        from_file = docfmt.loads(text)

    resolved = {}
    for name, kind, default in _TRAIN_FIELDS:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            resolved[name] = _coerce(kind, flag_value)
        elif name in from_file:
            resolved[name] = _coerce(kind, from_file[name])
        else:
            resolved[name] = default

    cfg = trainer.TrainConfig(
        hp=Hyperparams(resolved["lambda1"], resolved["lambda2"], resolved["epsilon_row"]),
        lr_theta=resolved["lr_theta"],
        lr_B=resolved["lr_b"],
        lr_A=resolved["lr_a"],
        batch_size=resolved["batch_size"],
        max_outer_iters=resolved["max_iters"],
        rel_tol=resolved["tol"],
        seed=resolved["seed"],
        variant=resolved["variant"],
        hard_diagonal=resolved["hard_diagonal"],
        hidden=(resolved["hidden1"], resolved["hidden2"]),
        leaky_slope=resolved["leaky_slope"],
        standardize=resolved["standardize"],
    )
    return cfg, resolved


def _config_doc(resolved):
    pairs = []
    for name, kind, _ in _TRAIN_FIELDS:
        value = resolved[name]
        if kind == "onoff":
            value = "on" if value else "off"
        pairs.append((name, value))
    return docfmt.dumps(pairs)


def _out_dir(args):
    out = args.out or "out"
    os.makedirs(out, exist_ok=True)
    return out


def _require_dataset(args):
    if not args.data or not args.labels_xml:
        raise ArgumentError("--data and --labels-xml are required")
    return load_dataset(args.data, args.labels_xml)


def _check_dims(state, ds):
    d_in = state.theta.d_in
    c = state.B.shape[0]
    if ds.n_features != d_in:
        raise SchemaError(
            f"checkpoint expects {d_in} features, dataset has {ds.n_features}"
        )
    if ds.n_labels != c:
        raise SchemaError(
            f"checkpoint expects {c} labels, dataset has {ds.n_labels}"
        )


def cmd_train(args):
    cfg, resolved = _resolve_train_config(args)
    ds = _require_dataset(args)
    out = _out_dir(args)
    ckpt_path = args.checkpoint or os.path.join(out, "checkpoint.txt")

    state, report, scaler = trainer.fit(ds, cfg)

    write_text_atomic(ckpt_path, checkpoint.dumps(state, scaler))
    write_text_atomic(os.path.join(out, "training_log.csv"), report.to_log_csv())
    write_text_atomic(os.path.join(out, "config.txt"), _config_doc(resolved))

    lm = landmarks_mod.select_landmarks(state.B, label_names=ds.label_names)
    summary = docfmt.dumps(
        [
            ("final_loss", report.loss_per_outer_iter[-1]),
            ("iters_run", report.iters_run),
            ("converged", report.converged),
            ("wall_time_seconds", report.wall_time),
            ("backend", BACKEND_NAME),
            ("selected_landmark_indices", " ".join(str(i) for i in lm.selected)),
            ("selected_landmark_labels", " ".join(ds.label_names[i] for i in lm.selected)),
        ]
    )
    write_text_atomic(os.path.join(out, "summary.txt"), summary)
    sys.stdout.write(summary)
    return 0


def cmd_evaluate(args):
    state, scaler = checkpoint.load(args.checkpoint)
    ds = _require_dataset(args)
    _check_dims(state, ds)
    X = scaler.transform(ds.features) if scaler is not None else ds.features
    scores = trainer.predict_scores(state, X)
    report = metrics.evaluate(scores, ds.labels, args.threshold)
    doc = report.to_doc()
    out = _out_dir(args)
    write_text_atomic(os.path.join(out, "metrics.txt"), doc)
    sys.stdout.write(doc)
    return 0


def cmd_cv(args):
    cfg, resolved = _resolve_train_config(args)
    ds = _require_dataset(args)
    if args.folds < 2:
        raise ArgumentError(f"--folds must be >= 2, got {args.folds}")
    result = trainer.cross_validate(ds, cfg, args.folds, threshold=args.threshold)
    table = result.to_csv()
    out = _out_dir(args)
    write_text_atomic(os.path.join(out, "cv_metrics.csv"), table)
    write_text_atomic(os.path.join(out, "config.txt"), _config_doc(resolved))
    sys.stdout.write(table)
    return 0


def cmd_predict(args):
    state, scaler = checkpoint.load(args.checkpoint)
    ds = _require_dataset(args)
    _check_dims(state, ds)
    X = scaler.transform(ds.features) if scaler is not None else ds.features
    scores = trainer.predict_scores(state, X)
    if args.threshold is not None:
        values = metrics.threshold_scores(scores, args.threshold)
        rows = [",".join(str(int(v)) for v in row) for row in values]
    else:
        rows = [",".join(repr(float(v)) for v in row) for row in scores]
    table = ",".join(ds.label_names) + "\n" + "\n".join(rows) + "\n"
    out = _out_dir(args)
    write_text_atomic(os.path.join(out, "predictions.csv"), table)
    sys.stdout.write(f"wrote {len(rows)} prediction rows to {out}/predictions.csv\n")
    return 0


def cmd_landmarks(args):
    state, _ = checkpoint.load(args.checkpoint)
    label_names = None
    ds = None
    if args.data or args.labels_xml:
        ds = _require_dataset(args)
        _check_dims(state, ds)
        label_names = ds.label_names
    rule = {"top_k": args.top_k} if args.top_k is not None else None
    report = landmarks_mod.select_landmarks(state.B, rule, label_names)
    out = _out_dir(args)
    names = label_names or [f"label{j:02d}" for j in range(state.B.shape[0])]
    write_text_atomic(os.path.join(out, "landmarks.txt"), report.to_doc())
    write_text_atomic(
        os.path.join(out, "selection_diagonal.csv"),
        landmarks_mod.diagonal_csv(state.B, names),
    )
    write_text_atomic(
        os.path.join(out, "recovery_weights.csv"),
        landmarks_mod.matrix_csv(
            landmarks_mod.recovery_weights(state.B, state.A), names
        ),
    )
    if ds is not None:
        write_text_atomic(
            os.path.join(out, "cooccurrence.csv"),
            landmarks_mod.cooccurrence_csv(ds.labels, names),
        )
    sys.stdout.write(report.to_doc())
    return 0


def cmd_synth(args):
    cfg = SynthesisConfig(
        n_instances=args.n_instances,
        n_features=args.n_features,
        n_labels=args.n_labels,
        n_landmarks=args.n_landmarks,
        noise_rate=args.noise_rate,
        seed=args.seed if args.seed is not None else trainer.DEFAULT_SEED,
    )
    ds, planted = synthesize(cfg)
    out = _out_dir(args)
    write_text_atomic(os.path.join(out, "data.arff"), serialize_arff(ds, relation="synthetic"))
    write_text_atomic(os.path.join(out, "labels.xml"), serialize_label_header(ds.label_names))
    planted_csv = "landmark_index\n" + "".join(f"{i}\n" for i in planted)
    write_text_atomic(os.path.join(out, "planted_landmarks.csv"), planted_csv)
    sys.stdout.write(
        f"wrote {ds.n_instances}x{ds.n_features} dataset with {ds.n_labels} labels "
        f"(planted landmarks: {' '.join(str(i) for i in planted)}) to {out}\n"
    )
    return 0


def cmd_gradcheck(args):
    result = gradcheck.run_gradcheck(
        seed=args.seed if args.seed is not None else trainer.DEFAULT_SEED,
        trials=args.trials,
        corrupt=args.corrupt,
    )
    text = gradcheck.format_report(result)
    if args.out:
        write_text_atomic(os.path.join(_out_dir(args), "gradcheck.txt"), text)
    sys.stdout.write(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="landmarkml",
        description="Landmark-based multi-label learning: train, evaluate and inspect models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, data=True, ckpt=False, ckpt_required=False):
        if data:
            p.add_argument("--data", help="ARFF instance file")
            p.add_argument("--labels-xml", dest="labels_xml", help="XML label header")
        if ckpt:
            p.add_argument("--checkpoint", required=ckpt_required, help="checkpoint path")
        p.add_argument("--out", help="output directory (default: out)")

    p = sub.add_parser("train", help="fit a model and write a checkpoint")
    add_io(p, ckpt=True)
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a checkpoint on a dataset")
    add_io(p, ckpt=True, ckpt_required=True)
    p.add_argument("--threshold", type=float, default=metrics.DEFAULT_THRESHOLD)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("cv", help="k-fold cross-validation")
    add_io(p)
    _add_train_flags(p)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--threshold", type=float, default=metrics.DEFAULT_THRESHOLD)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("predict", help="write recovery scores for a dataset")
    add_io(p, ckpt=True, ckpt_required=True)
    p.add_argument("--threshold", type=float, default=None,
                   help="binarize scores at this threshold instead of writing raw values")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("landmarks", help="inspect the selection matrix of a checkpoint")
    add_io(p, ckpt=True, ckpt_required=True)
    p.add_argument("--top-k", dest="top_k", type=int, default=None,
                   help="select the k largest diagonal magnitudes instead of thresholding")
    p.set_defaults(func=cmd_landmarks)

    p = sub.add_parser("synth", help="generate a dataset with planted landmarks")
    p.add_argument("--n-instances", type=int, default=200)
    p.add_argument("--n-features", type=int, default=10)
    p.add_argument("--n-labels", type=int, default=6)
    p.add_argument("--n-landmarks", type=int, default=2)
    p.add_argument("--noise-rate", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="output directory (default: out)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("gradcheck", help="verify analytic gradients against finite differences")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--corrupt", choices=gradcheck.CHECK_NAMES, default=None,
                   help=argparse.SUPPRESS)  # test hook: force a failing report
    p.add_argument("--out", help="also write the report into this directory")
    p.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return 6


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
