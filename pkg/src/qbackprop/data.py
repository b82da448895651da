"""Teacher networks and synthetic teacher-student datasets.

Randomness comes from numpy's PCG64 bit generator seeded with the given
integer. Teacher weights are unit quaternions: four standard normals,
normalized, which is uniform on the 3-sphere. Teacher biases are zero. Inputs
are i.i.d. uniform on [-1, 1] per component. Targets are the teacher's
outputs, so the input-output relationship is exact.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .network import ActivationKind, DenseLayer, Network, predict


class DatasetFormatError(ValueError):
    pass


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_unit_quaternions(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    raw = rng.standard_normal(size=shape + (4,))
    return raw / np.sqrt(np.sum(raw * raw, axis=-1, keepdims=True))


def make_teacher(shape: Sequence[int], activation: ActivationKind | str = ActivationKind.TANHSHRINK,
                 seed: int = 0) -> Network:
    """Random network with unit-norm weights and zero biases.

    ``shape`` lists the input width followed by each layer's output width.
    Hidden layers use ``activation``; the last layer is linear.
    """
    shape = [int(s) for s in shape]
    if len(shape) < 2:
        raise ValueError(f"shape needs at least an input and an output width, got {shape}")
    if any(s < 1 for s in shape):
        raise ValueError(f"layer widths must be positive, got {shape}")
    activation = ActivationKind.parse(activation)
    rng = make_rng(seed)
    layers = []
    for index, (n_in, n_out) in enumerate(zip(shape, shape[1:])):
        last = index == len(shape) - 2
        layers.append(DenseLayer(
            random_unit_quaternions(rng, (n_out, n_in)),
            np.zeros((n_out, 4)),
            ActivationKind.IDENTITY if last else activation,
        ))
    return Network(tuple(layers))


@dataclass(frozen=True, eq=False)
class Dataset:
    inputs: np.ndarray  # (n, n_in, 4)
    targets: np.ndarray  # (n, n_out, 4)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.inputs.ndim != 3 or self.targets.ndim != 3:
            raise ValueError("inputs and targets must have shape (count, width, 4)")
        if self.inputs.shape[-1] != 4 or self.targets.shape[-1] != 4:
            raise ValueError("trailing axis must hold four quaternion components")
        if len(self.inputs) != len(self.targets):
            raise ValueError(f"{len(self.inputs)} inputs but {len(self.targets)} targets")

    def __len__(self) -> int:
        return len(self.inputs)

    @property
    def n_in(self) -> int:
        return self.inputs.shape[1]

    @property
    def n_out(self) -> int:
        return self.targets.shape[1]


def gen_dataset(teacher: Network, n: int, seed: int) -> Dataset:
    if n < 1:
        raise ValueError(f"dataset size must be positive, got {n}")
    rng = make_rng(seed)
    inputs = rng.uniform(-1.0, 1.0, size=(n, teacher.n_in, 4))
    return Dataset(inputs, predict(teacher, inputs), seed)


# --- text format --------------------------------------------------------------
#
#   qds v1 n=<count> in=<n_in> out=<n_out> seed=<seed>
#   <4*n_in input components> <4*n_out target components>     (one line per record)

_HEADER = re.compile(r"^qds v1 n=(\d+) in=(\d+) out=(\d+) seed=(-?\d+)$")


def format_float(x: float) -> str:
    return "%.17g" % x


def save_dataset(ds: Dataset, path: str | os.PathLike) -> None:
    n = len(ds)
    rows = np.concatenate([ds.inputs.reshape(n, -1), ds.targets.reshape(n, -1)], axis=1)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"qds v1 n={n} in={ds.n_in} out={ds.n_out} seed={ds.seed}\n")
        for row in rows.tolist():
            fh.write(" ".join(format_float(v) for v in row))
            fh.write("\n")


def load_dataset(path: str | os.PathLike) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        m = _HEADER.match(header)
        if m is None:
            raise DatasetFormatError(f"{path}: line 1: bad header {header!r}")
        n, n_in, n_out, seed = (int(g) for g in m.groups())
        width = 4 * (n_in + n_out)
        values = np.empty((n, width), dtype=np.float64)
        count = 0
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            if count >= n:
                raise DatasetFormatError(
                    f"{path}: header declares {n} records but the body has more (line {lineno})")
            tokens = line.split()
            if len(tokens) != width:
                raise DatasetFormatError(
                    f"{path}: line {lineno} (record {count}): expected {width} values, got {len(tokens)}")
            try:
                values[count] = [float(t) for t in tokens]
            except ValueError as exc:
                raise DatasetFormatError(f"{path}: line {lineno} (record {count}): {exc}") from None
            count += 1
    if count != n:
        raise DatasetFormatError(f"{path}: header declares {n} records but the body has {count}")
    if not np.all(np.isfinite(values)):
        raise DatasetFormatError(f"{path}: non-finite values in records")
    split = 4 * n_in
    return Dataset(values[:, :split].reshape(n, n_in, 4), values[:, split:].reshape(n, n_out, 4), seed)

