"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import counterexamples
from .data import DatasetFormatError, gen_dataset, load_dataset, make_rng, make_teacher, save_dataset
from .modelio import ModelFormatError, load_model, save_model
from .network import ActivationKind, Network, gradient_check
from .training import TrainConfig, TrainingDiverged, check_compatible, metrics_csv, train

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

GRAD_CHECK_TOLERANCE = 1e-5


class UsageError(Exception):
    pass


def _shape(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"shape must be comma-separated integers, got {text!r}")
    if len(dims) < 2 or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"shape needs at least two positive widths, got {text!r}")
    return dims


def _activation(text: str) -> ActivationKind:
    try:
        return ActivationKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _add_config_flags(p: argparse.ArgumentParser, training: bool) -> None:
    defaults = TrainConfig()
    p.add_argument("--shape", type=_shape, default=defaults.shape,
                   help="layer widths, input first (default 3,3,2,2)")
    p.add_argument("--activation", type=_activation, default=defaults.activation,
                   help="hidden activation: tanhshrink or identity")
    p.add_argument("--seed-teacher", type=int, default=defaults.seed_teacher)
    p.add_argument("--seed-data", type=int, default=defaults.seed_data,
                   help="training-set seed; the validation set uses seed+1")
    p.add_argument("--train-size", type=int, default=defaults.train_size)
    p.add_argument("--val-size", type=int, default=defaults.val_size)
    p.add_argument("--out", default=defaults.out, help="output directory (default ./run)")
    p.add_argument("--json", action="store_true", help="print a JSON summary")
    if training:
        p.add_argument("--epochs", type=int, default=defaults.epochs)
        p.add_argument("--lr", type=float, default=defaults.lr)
        p.add_argument("--batch-size", type=int, default=defaults.batch_size)
        p.add_argument("--seed-student", type=int, default=defaults.seed_student)
        p.add_argument("--seed-shuffle", type=int, default=defaults.seed_shuffle)


def _config(args: argparse.Namespace) -> TrainConfig:
    fields = {k: getattr(args, k) for k in (
        "shape", "activation", "seed_teacher", "seed_data", "train_size", "val_size", "out",
        "epochs", "lr", "batch_size", "seed_student", "seed_shuffle") if hasattr(args, k)}
    try:
        return TrainConfig(**fields)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbackprop",
                                     description="Quaternion networks trained with GHR backpropagation.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write teacher model and train/validation datasets")
    _add_config_flags(p, training=False)

    p = sub.add_parser("train", help="train a student against generated data")
    _add_config_flags(p, training=True)
    p.add_argument("--train-data", help="training set (default OUT/train.qds)")
    p.add_argument("--val-data", help="validation set (default OUT/val.qds)")
    p.add_argument("--teacher", help="teacher model for weight differences (default OUT/teacher.qnn if present)")
    p.add_argument("--init", help="start from this model instead of a seeded random student")

    p = sub.add_parser("verify-calculus", help="show which derivative rules hold")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=1000, help="points for the involution identities")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("grad-check", help="compare backprop with finite differences")
    defaults = TrainConfig()
    p.add_argument("--shape", type=_shape, default=defaults.shape)
    p.add_argument("--activation", type=_activation, default=defaults.activation)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--h", type=float, default=1e-5, help="central-difference step")
    p.add_argument("--json", action="store_true")
    return parser


# --- commands ---------------------------------------------------------------


def cmd_gen_data(args: argparse.Namespace) -> int:
    config = _config(args)
    out = Path(config.out)
    teacher = make_teacher(config.shape, config.activation, config.seed_teacher)
    train_ds = gen_dataset(teacher, config.train_size, config.seed_data)
    val_ds = gen_dataset(teacher, config.val_size, config.seed_data + 1)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"train": out / "train.qds", "val": out / "val.qds", "teacher": out / "teacher.qnn"}
    save_dataset(train_ds, paths["train"])
    save_dataset(val_ds, paths["val"])
    save_model(teacher, paths["teacher"])
    summary = {"train": str(paths["train"]), "train_records": len(train_ds),
               "val": str(paths["val"]), "val_records": len(val_ds),
               "teacher": str(paths["teacher"]), "shape": list(teacher.shape)}
    if args.json:
        print(json.dumps(summary))
    else:
        print(f"wrote {paths['train']} ({len(train_ds)} records), {paths['val']} "
              f"({len(val_ds)} records), {paths['teacher']}")
    return EXIT_OK


def _load_student(config: TrainConfig, init: Optional[str]) -> Optional[Network]:
    if init is None:
        return None
    net = load_model(init)
    if net.shape != config.shape:
        raise UsageError(f"--init model has shape {net.shape}, config shape is {config.shape}")
    return net


def cmd_train(args: argparse.Namespace) -> int:
    config = _config(args)
    out = Path(config.out)
    train_path = Path(args.train_data or out / "train.qds")
    val_path = Path(args.val_data or out / "val.qds")
    for path in (train_path, val_path):
        if not path.exists():
            raise UsageError(f"{path} not found; run gen-data first or pass --train-data/--val-data")
    teacher_path = args.teacher or (out / "teacher.qnn" if (out / "teacher.qnn").exists() else None)

    train_ds = load_dataset(train_path)
    val_ds = load_dataset(val_path)
    teacher = load_model(teacher_path) if teacher_path else None
    student = _load_student(config, args.init)

    # all dimension checks happen before the first step
    probe = student or make_teacher(config.shape, config.activation, config.seed_student)
    try:
        check_compatible(probe, train_ds, "training")
        check_compatible(probe, val_ds, "validation")
        if teacher is not None and teacher.shape != probe.shape:
            raise ValueError(f"teacher shape {teacher.shape} differs from config shape {probe.shape}")
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    result = train(config, train_ds, val_ds, teacher=teacher, student=student)
    out.mkdir(parents=True, exist_ok=True)
    metrics_path = out / "metrics.csv"
    with open(metrics_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(metrics_csv(result.history))
    model_path = out / "student.qnn"
    save_model(result.student, model_path)

    if args.json:
        print(json.dumps({"final_val_loss": result.final_val_loss,
                          "final_train_loss": result.history[-1].train_loss,
                          "epochs": len(result.history), "metrics": str(metrics_path),
                          "model": str(model_path)}))
    else:
        print(f"final validation loss {result.final_val_loss:.6e}")
    return EXIT_OK


def cmd_verify_calculus(args: argparse.Namespace) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    report = counterexamples.demonstrate_rule_failures(args.seed)
    identities = counterexamples.check_involution_identities(args.samples, args.seed)
    ok = report.ok and identities.ok
    if args.json:
        print(json.dumps({"ok": ok, "rules": report.to_dict(), "identities": identities.to_dict()}))
    else:
        print(report.to_text())
        for name, residual in identities.max_residual.items():
            status = "PASSED" if residual <= identities.tolerance else "FAILED"
            print(f"identity {name}: max residual {residual:.3e} over {identities.samples} points {status}")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_grad_check(args: argparse.Namespace) -> int:
    if not args.h > 0:
        raise UsageError(f"--h must be positive, got {args.h}")
    rng = make_rng(args.seed)
    net = make_teacher(args.shape, args.activation, args.seed)
    # nonzero biases so every bias path carries signal
    net = Network(tuple(layer.replace(bias=0.5 * rng.standard_normal(layer.bias.shape))
                        for layer in net.layers))
    x = rng.uniform(-1.0, 1.0, size=(1, net.n_in, 4))
    d = rng.uniform(-1.0, 1.0, size=(1, net.n_out, 4))
    report = gradient_check(net, x, d, args.h)
    ok = report.passed(GRAD_CHECK_TOLERANCE)
    if args.json:
        print(json.dumps({"ok": ok, "tolerance": GRAD_CHECK_TOLERANCE, **report.to_dict()}))
    else:
        print(f"{report.n_parameters} parameters, max abs error {report.max_abs_error:.3e}, "
              f"max rel error {report.max_rel_error:.3e} at {report.worst}: "
              f"{'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "verify-calculus": cmd_verify_calculus,
    "grad-check": cmd_grad_check,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"qbackprop {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingDiverged as exc:
        print(f"qbackprop train: diverged: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (DatasetFormatError, ModelFormatError, OSError) as exc:
        print(f"qbackprop {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
