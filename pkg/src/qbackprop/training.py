"""Mini-batch SGD for the teacher-student experiment."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .data import Dataset, make_rng, make_teacher
from .network import (
    ActivationKind,
    Network,
    backward,
    forward,
    loss,
    mean_loss,
    sgd_step,
    weight_differences,
)

log = logging.getLogger(__name__)

CSV_COLUMNS = ("epoch", "train_loss", "val_loss", "wdiff_mean", "wdiff_min", "wdiff_max")


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, batch: int, value: float, what: str = "loss"):
        where = f"epoch {epoch}" + (f", batch {batch}" if batch >= 0 else "")
        super().__init__(f"non-finite {what} at {where} (loss {value})")
        self.epoch = epoch
        self.batch = batch
        self.value = value


@dataclass
class TrainConfig:
    epochs: int = 250
    lr: float = 0.1
    batch_size: int = 32
    shape: Sequence[int] = (3, 3, 2, 2)
    activation: ActivationKind = ActivationKind.TANHSHRINK
    seed_teacher: int = 1
    seed_student: int = 2
    seed_data: int = 3
    seed_shuffle: int = 4
    train_size: int = 40000
    val_size: int = 10000
    out: str = "run"

    def __post_init__(self) -> None:
        self.shape = tuple(int(s) for s in self.shape)
        self.activation = ActivationKind.parse(self.activation)
        if self.epochs < 1:
            raise ValueError(f"epochs must be at least 1, got {self.epochs}")
        if not self.lr > 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be at least 1, got {self.batch_size}")
        if len(self.shape) < 2 or min(self.shape) < 1:
            raise ValueError(f"invalid shape {self.shape}")
        if self.train_size < 1 or self.val_size < 1:
            raise ValueError("dataset sizes must be positive")


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_loss: float
    val_loss: float
    wdiff_mean: float = math.nan
    wdiff_min: float = math.nan
    wdiff_max: float = math.nan

    def row(self) -> list[str]:
        return [str(self.epoch)] + [repr(float(v)) for v in (
            self.train_loss, self.val_loss, self.wdiff_mean, self.wdiff_min, self.wdiff_max)]


@dataclass
class TrainResult:
    student: Network
    history: list[EpochMetrics] = field(default_factory=list)

    @property
    def final_val_loss(self) -> float:
        return self.history[-1].val_loss


def epoch_order(n: int, seed_shuffle: int, epoch: int) -> np.ndarray:
    # Generator.permutation is a Fisher-Yates shuffle
    return make_rng(seed_shuffle + epoch).permutation(n)


def make_student(config: TrainConfig) -> Network:
    return make_teacher(config.shape, config.activation, config.seed_student)


def check_compatible(net: Network, ds: Dataset, name: str) -> None:
    if ds.n_in != net.n_in or ds.n_out != net.n_out:
        raise ValueError(
            f"{name} dataset has {ds.n_in} inputs / {ds.n_out} outputs but the network "
            f"shape is {net.shape}")


def train(config: TrainConfig, train_ds: Dataset, val_ds: Dataset,
          teacher: Optional[Network] = None, student: Optional[Network] = None,
          on_epoch: Optional[Callable[[EpochMetrics], None]] = None) -> TrainResult:
    """Plain SGD with per-epoch shuffling; the last partial batch is kept.

    Losses are mean per-sample values. Gradients are averaged over each batch.
    """
    student = make_student(config) if student is None else student
    check_compatible(student, train_ds, "training")
    check_compatible(student, val_ds, "validation")
    if teacher is not None and teacher.shape != student.shape:
        raise ValueError(f"teacher shape {teacher.shape} differs from student shape {student.shape}")

    n = len(train_ds)
    bs = config.batch_size
    result = TrainResult(student)
    for epoch in range(1, config.epochs + 1):
        order = epoch_order(n, config.seed_shuffle, epoch)
        loss_sum = 0.0
        for batch, start in enumerate(range(0, n, bs)):
            idx = order[start:start + bs]
            x = train_ds.inputs[idx]
            d = train_ds.targets[idx]
            with np.errstate(over="ignore", invalid="ignore"):
                trace = forward(student, x)
                batch_sum = float(np.sum(loss(trace.output, d)))
                if not math.isfinite(batch_sum):
                    raise TrainingDiverged(epoch, batch, batch_sum)
                grads = backward(student, trace, d)
                try:
                    student = sgd_step(student, grads, config.lr)
                except ValueError:
                    # an overflowing update leaves non-finite parameters
                    raise TrainingDiverged(epoch, batch, batch_sum, "parameters after update") from None
            loss_sum += batch_sum

        val = mean_loss(student, val_ds.inputs, val_ds.targets)
        if not math.isfinite(val):
            raise TrainingDiverged(epoch, -1, val, "validation loss")
        if teacher is not None:
            diffs = weight_differences(student, teacher)
            metrics = EpochMetrics(epoch, loss_sum / n, val,
                                   float(diffs.mean()), float(diffs.min()), float(diffs.max()))
        else:
            metrics = EpochMetrics(epoch, loss_sum / n, val)
        result.history.append(metrics)
        result.student = student
        log.info("epoch %d train %.3e val %.3e wdiff %.3e", epoch, metrics.train_loss,
                 metrics.val_loss, metrics.wdiff_mean)
        if on_epoch is not None:
            on_epoch(metrics)
    return result


def metrics_csv(history: Sequence[EpochMetrics]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for m in history:
        writer.writerow(m.row())
    return buf.getvalue()


def read_metrics_csv(text: str) -> list[EpochMetrics]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected metrics columns {reader.fieldnames}")
    return [EpochMetrics(int(r["epoch"]), *(float(r[c]) for c in CSV_COLUMNS[1:])) for r in reader]
