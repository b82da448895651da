"""Plain-text model files.

Grammar (one item per line, fields separated by single spaces)::

    qnn v1 layers=<L>
    layer <l> in=<n> out=<m> activation=<identity|tanhshrink>
    w <i> <j> <c0> <c1> <c2> <c3>        m*n lines, row-major (i outer, j inner)
    b <i> <c0> <c1> <c2> <c3>            m lines
    ... repeated for each of the L layers, in order

Components are written with 17 significant digits, which round-trips float64
exactly, so ``load_model(save_model(net))`` is bit-identical.
"""

from __future__ import annotations

import os
import re

import numpy as np

from .data import format_float
from .network import ActivationKind, DenseLayer, Network


class ModelFormatError(ValueError):
    pass


def dumps_model(net: Network) -> str:
    lines = [f"qnn v1 layers={len(net.layers)}"]
    for index, layer in enumerate(net.layers):
        lines.append(f"layer {index} in={layer.n_in} out={layer.n_out} "
                     f"activation={layer.activation.value}")
        for i in range(layer.n_out):
            for j in range(layer.n_in):
                comps = " ".join(format_float(c) for c in layer.weights[i, j].tolist())
                lines.append(f"w {i} {j} {comps}")
        for i in range(layer.n_out):
            lines.append(f"b {i} " + " ".join(format_float(c) for c in layer.bias[i].tolist()))
    return "\n".join(lines) + "\n"


def save_model(net: Network, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_model(net))


_MODEL_HEADER = re.compile(r"^qnn v1 layers=(\d+)$")
_LAYER_HEADER = re.compile(r"^layer (\d+) in=(\d+) out=(\d+) activation=(\w+)$")


def loads_model(text: str, source: str = "<string>") -> Network:
    lines = text.splitlines()
    pos = 0

    def fail(msg: str):
        raise ModelFormatError(f"{source}: line {pos + 1}: {msg}")

    def take() -> str:
        nonlocal pos
        if pos >= len(lines):
            raise ModelFormatError(f"{source}: unexpected end of file after line {pos}")
        line = lines[pos]
        pos += 1
        return line

    def numbers(tokens: list[str]) -> list[float]:
        try:
            return [float(t) for t in tokens]
        except ValueError as exc:
            raise ModelFormatError(f"{source}: line {pos}: bad number ({exc})") from None

    m = _MODEL_HEADER.match(take())
    if m is None:
        pos -= 1
        fail("expected 'qnn v1 layers=<L>'")
    n_layers = int(m.group(1))
    layers = []
    for index in range(n_layers):
        m = _LAYER_HEADER.match(take())
        if m is None or int(m.group(1)) != index:
            pos -= 1
            fail(f"expected header for layer {index}")
        n_in, n_out = int(m.group(2)), int(m.group(3))
        try:
            activation = ActivationKind.parse(m.group(4))
        except ValueError as exc:
            pos -= 1
            fail(str(exc))
        weights = np.empty((n_out, n_in, 4))
        bias = np.empty((n_out, 4))
        for i in range(n_out):
            for j in range(n_in):
                tokens = take().split()
                if len(tokens) != 7 or tokens[0] != "w" or tokens[1:3] != [str(i), str(j)]:
                    pos -= 1
                    fail(f"expected 'w {i} {j} <4 components>'")
                weights[i, j] = numbers(tokens[3:])
        for i in range(n_out):
            tokens = take().split()
            if len(tokens) != 6 or tokens[0] != "b" or tokens[1] != str(i):
                pos -= 1
                fail(f"expected 'b {i} <4 components>'")
            bias[i] = numbers(tokens[2:])
        try:
            layers.append(DenseLayer(weights, bias, activation))
        except ValueError as exc:
            raise ModelFormatError(f"{source}: layer {index}: {exc}") from None
    if any(ln.strip() for ln in lines[pos:]):
        fail("trailing content after the last layer")
    try:
        return Network(tuple(layers))
    except ValueError as exc:
        raise ModelFormatError(f"{source}: {exc}") from None


def load_model(path: str | os.PathLike) -> Network:
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read(), source=str(path))
