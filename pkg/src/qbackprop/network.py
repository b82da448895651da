"""Feed-forward quaternion networks with GHR backpropagation.

Layers compute ``z = W a + b`` (weights multiply from the left) followed by a
split activation. The loss is ``sum_i |d_i - y_i|^2``.

Gradients are conjugate derivatives ``dL/dw*`` and ``dL/db*``. For a real
loss this is the steepest-descent direction, so every update is
``param <- param - lr * dL/dparam*``. For the output layer that gives
``w + lr/2 * e a*``.

The backward signal ``p`` entering a layer from above is ``dL/da`` for that
layer's output ``a``. In the hidden-layer formulas ``q = p o sigma'(z)`` is
``dL/dz``.

Arrays may carry leading batch axes. Per-sample gradients are averaged over
them, so the learning rate does not depend on the batch size.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import ghr
from .quaternion import (
    ONE,
    UNITS,
    ZERO,
    Quaternion,
    conj,
    mul,
    qconj,
    qmatvec,
    qmul,
)


class ActivationKind(enum.Enum):
    IDENTITY = "identity"
    TANHSHRINK = "tanhshrink"

    @classmethod
    def parse(cls, value: "ActivationKind | str") -> "ActivationKind":
        if isinstance(value, ActivationKind):
            return value
        try:
            return cls(value.lower())
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown activation {value!r}; expected one of {choices}") from None

    def apply(self, z: np.ndarray) -> np.ndarray:
        if self is ActivationKind.IDENTITY:
            return z
        return z - np.tanh(z)

    def derivative(self, z: np.ndarray) -> np.ndarray:
        if self is ActivationKind.IDENTITY:
            return np.ones_like(z)
        t = np.tanh(z)
        return t * t


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class DenseLayer:
    weights: np.ndarray  # (m, n, 4)
    bias: np.ndarray  # (m, 4)
    activation: ActivationKind = ActivationKind.IDENTITY

    def __post_init__(self) -> None:
        w = _frozen(self.weights)
        b = _frozen(self.bias)
        if w.ndim != 3 or w.shape[-1] != 4:
            raise ValueError(f"weights must have shape (m, n, 4), got {w.shape}")
        if b.shape != (w.shape[0], 4):
            raise ValueError(f"bias must have shape ({w.shape[0]}, 4), got {b.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("layer parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)
        object.__setattr__(self, "activation", ActivationKind.parse(self.activation))

    @property
    def n_in(self) -> int:
        return self.weights.shape[1]

    @property
    def n_out(self) -> int:
        return self.weights.shape[0]

    def replace(self, weights=None, bias=None) -> "DenseLayer":
        return DenseLayer(self.weights if weights is None else weights,
                          self.bias if bias is None else bias, self.activation)


@dataclass(frozen=True, eq=False)
class Network:
    layers: tuple[DenseLayer, ...]

    def __post_init__(self) -> None:
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("a network needs at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if prev.n_out != nxt.n_in:
                raise ValueError(f"layer output {prev.n_out} does not feed layer input {nxt.n_in}")
        if layers[-1].activation is not ActivationKind.IDENTITY:
            raise ValueError("the output layer must use the identity activation")
        object.__setattr__(self, "layers", layers)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.layers[0].n_in,) + tuple(layer.n_out for layer in self.layers)

    @property
    def n_in(self) -> int:
        return self.layers[0].n_in

    @property
    def n_out(self) -> int:
        return self.layers[-1].n_out

    def parameters(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out.extend((layer.weights, layer.bias))
        return out

    def equals(self, other: "Network") -> bool:
        """Bitwise equality of structure and parameters."""
        if len(self.layers) != len(other.layers):
            return False
        return all(
            a.activation is b.activation
            and a.weights.shape == b.weights.shape
            and np.array_equal(a.weights, b.weights)
            and np.array_equal(a.bias, b.bias)
            for a, b in zip(self.layers, other.layers)
        )


@dataclass(frozen=True, eq=False)
class ForwardTrace:
    """``a[0]`` is the input; layer ``l`` (0-based) maps ``a[l]`` to ``z[l]`` and ``a[l+1]``."""

    z: tuple[np.ndarray, ...]
    a: tuple[np.ndarray, ...]

    @property
    def output(self) -> np.ndarray:
        return self.a[-1]


@dataclass(frozen=True, eq=False)
class LayerGradients:
    dW: np.ndarray  # dL/dw*, (m, n, 4)
    db: np.ndarray  # dL/db*, (m, 4)


class BackpropSignal(NamedTuple):
    p: np.ndarray  # dL/da for the layer's input activations, (..., n, 4)


def forward(net: Network, x: np.ndarray) -> ForwardTrace:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-2:] != (net.n_in, 4):
        raise ValueError(f"input must have shape (..., {net.n_in}, 4), got {x.shape}")
    zs, activations = [], [x]
    a = x
    for layer in net.layers:
        z = qmatvec(layer.weights, a) + layer.bias
        a = layer.activation.apply(z)
        zs.append(z)
        activations.append(a)
    return ForwardTrace(tuple(zs), tuple(activations))


def predict(net: Network, x: np.ndarray) -> np.ndarray:
    return forward(net, x).output


def loss(output: np.ndarray, target: np.ndarray) -> np.ndarray | float:
    """``e*^T e`` with ``e = target - output``; per sample when batched."""
    output = np.asarray(output, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if output.shape != target.shape:
        raise ValueError(f"output shape {output.shape} does not match target shape {target.shape}")
    e = target - output
    ee = qmul(qconj(e), e).sum(axis=-2)
    total = ee[..., 0]
    # e* e is real; the imaginary parts cancel up to rounding in the product
    with np.errstate(invalid="ignore"):
        bad = np.abs(ee[..., 1:]) > 1e-14 * (1.0 + total[..., None])
    assert not np.any(bad & np.isfinite(total)[..., None]), "loss has a nonzero imaginary part"
    return float(total) if total.ndim == 0 else total


def _batch_mean(x: np.ndarray, core_ndim: int) -> np.ndarray:
    extra = x.ndim - core_ndim
    if extra == 0:
        return x
    return x.reshape((-1,) + x.shape[extra:]).mean(axis=0)


def backward_output_layer(trace: ForwardTrace, target: np.ndarray,
                          layer: DenseLayer) -> tuple[LayerGradients, BackpropSignal]:
    if layer.activation is not ActivationKind.IDENTITY:
        raise ValueError("the output layer must use the identity activation")
    a_prev = trace.a[-2]
    e = np.asarray(target, dtype=np.float64) - trace.output
    if e.shape[-2:] != (layer.n_out, 4):
        raise ValueError(f"target must have shape (..., {layer.n_out}, 4), got {e.shape}")
    # dL/dw*_ij = -1/2 e_i a_j*
    dW = -0.5 * qmul(e[..., :, None, :], qconj(a_prev)[..., None, :, :])
    db = -0.5 * e
    # p_j = sum_i -1/2 e_i* w_ij
    p = (-0.5 * qmul(qconj(e)[..., :, None, :], layer.weights)).sum(axis=-3)
    grads = LayerGradients(_batch_mean(dW, 3), _batch_mean(db, 2))
    return grads, BackpropSignal(p)


def backward_hidden_layer(trace: ForwardTrace, index: int, p_in: BackpropSignal | np.ndarray,
                          layer: DenseLayer) -> tuple[LayerGradients, BackpropSignal]:
    """Gradients of layer ``index`` given ``p_in = dL/da`` for its output."""
    p = p_in.p if isinstance(p_in, BackpropSignal) else np.asarray(p_in, dtype=np.float64)
    z = trace.z[index]
    a_prev = trace.a[index]
    if p.shape != z.shape:
        raise ValueError(f"signal shape {p.shape} does not match layer output {z.shape}")
    q = p * layer.activation.derivative(z)  # quaternion Hadamard product
    q_conj = qconj(q)
    dW = qmul(q_conj[..., :, None, :], qconj(a_prev)[..., None, :, :])
    p_out = qmul(q[..., :, None, :], layer.weights).sum(axis=-3)
    grads = LayerGradients(_batch_mean(dW, 3), _batch_mean(q_conj, 2))
    return grads, BackpropSignal(p_out)


def backward(net: Network, trace: ForwardTrace, target: np.ndarray) -> list[LayerGradients]:
    grads, signal = backward_output_layer(trace, target, net.layers[-1])
    out = [grads]
    for index in range(len(net.layers) - 2, -1, -1):
        grads, signal = backward_hidden_layer(trace, index, signal, net.layers[index])
        out.append(grads)
    out.reverse()
    return out


def sgd_step(net: Network, grads: Sequence[LayerGradients], lr: float) -> Network:
    if len(grads) != len(net.layers):
        raise ValueError(f"expected {len(net.layers)} layer gradients, got {len(grads)}")
    layers = []
    for layer, g in zip(net.layers, grads):
        if g.dW.shape != layer.weights.shape or g.db.shape != layer.bias.shape:
            raise ValueError("gradient shapes do not match the layer")
        layers.append(layer.replace(layer.weights - lr * g.dW, layer.bias - lr * g.db))
    return Network(tuple(layers))


def mean_loss(net: Network, x: np.ndarray, d: np.ndarray) -> float:
    return float(np.mean(loss(predict(net, x), d)))


# --- finite-difference check ------------------------------------------------


@dataclass
class CheckReport:
    max_abs_error: float
    max_rel_error: float
    n_parameters: int
    worst: str
    h: float
    details: list[dict] = field(default_factory=list, repr=False)

    def passed(self, rel_tol: float) -> bool:
        return self.max_rel_error < rel_tol

    def to_dict(self) -> dict:
        return {
            "max_abs_error": self.max_abs_error,
            "max_rel_error": self.max_rel_error,
            "n_parameters": self.n_parameters,
            "worst": self.worst,
            "h": self.h,
        }


# relative errors are taken against max(|analytic|, |numeric|, REL_FLOOR)
REL_FLOOR = 1e-6


def _perturbed(net: Network, layer_index: int, kind: str, index: tuple, comp: int,
               delta: float) -> Network:
    layers = list(net.layers)
    layer = layers[layer_index]
    arr = np.array(layer.weights if kind == "w" else layer.bias)
    arr[index + (comp,)] += delta
    layers[layer_index] = layer.replace(**{"weights" if kind == "w" else "bias": arr})
    return Network(tuple(layers))


def numeric_conjugate_gradient(net: Network, x: np.ndarray, d: np.ndarray,
                               layer_index: int, kind: str, index: tuple,
                               h: float = ghr.FD_STEP) -> Quaternion:
    """``dL/dparam*`` from central differences, recombined with the HR conjugate formula."""
    partials = []
    for comp in range(4):
        lp = mean_loss(_perturbed(net, layer_index, kind, index, comp, h), x, d)
        lm = mean_loss(_perturbed(net, layer_index, kind, index, comp, -h), x, d)
        if not (math.isfinite(lp) and math.isfinite(lm)):
            raise ValueError("non-finite loss during gradient check")
        partials.append(Quaternion.real((lp - lm) / (2.0 * h)))
    return ghr.hr_conjugate_derivative(ghr.ComponentGradient(*partials))


def gradient_check(net: Network, x: np.ndarray, d: np.ndarray, h: float = ghr.FD_STEP) -> CheckReport:
    if not h > 0:
        raise ValueError(f"finite-difference step must be positive, got {h}")
    x = np.asarray(x, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    analytic = backward(net, forward(net, x), d)
    max_abs = max_rel = 0.0
    worst = ""
    details = []
    for li, (layer, g) in enumerate(zip(net.layers, analytic)):
        for kind, grad in (("w", g.dW), ("b", g.db)):
            for index in np.ndindex(grad.shape[:-1]):
                num = numeric_conjugate_gradient(net, x, d, li, kind, index, h).as_array()
                ana = grad[index]
                err = float(np.linalg.norm(ana - num))
                scale = max(float(np.linalg.norm(ana)), float(np.linalg.norm(num)), REL_FLOOR)
                rel = err / scale
                name = f"layer{li}.{kind}{list(index)}"
                details.append({"param": name, "analytic": ana.tolist(), "numeric": num.tolist(),
                                "abs_error": err, "rel_error": rel})
                max_abs = max(max_abs, err)
                if rel >= max_rel:
                    max_rel, worst = rel, name
    return CheckReport(max_abs, max_rel, len(details), worst, h, details)


# --- product-rule route for a single output term ------------------------------


class ProductRuleGradients(NamedTuple):
    dw: Quaternion
    db: Quaternion
    degenerate: bool


def appendix_product_rule_gradient(w: Quaternion, a: Quaternion, d: Quaternion,
                                   b: Quaternion = ZERO) -> ProductRuleGradients:
    """``dL/dw*`` and ``dL/db*`` for ``L = e* e``, ``e = d - (w a + b)``, via the GHR product rule.

    ``dL/dp* = e* de/dp* + (de*/dp^{(e)*}) e``: the left factor ``e*`` is
    differentiated along the direction rotated by ``e``. For ``e = 0`` that
    direction is singular. The gradients vanish in that limit, and they are
    returned as zeros with ``degenerate`` set.
    """
    e = d - (mul(w, a) + b)
    if e == ZERO:
        return ProductRuleGradients(ZERO, ZERO, True)
    e_star = conj(e)
    plain = ghr.GhrDirection(ONE, conjugated=True)
    rotated = ghr.GhrDirection(e, conjugated=True)

    # e = d - w a - b:  de/dw_c = -u_c a,  de*/dw_c = -(u_c a)*
    de_dw = ghr.ComponentGradient(*(-mul(u, a) for u in UNITS))
    de_star_dw = ghr.ComponentGradient(*(-conj(mul(u, a)) for u in UNITS))
    dw = mul(e_star, ghr.ghr_derivative(de_dw, plain)) + mul(ghr.ghr_derivative(de_star_dw, rotated), e)

    de_db = ghr.ComponentGradient(*(-u for u in UNITS))
    de_star_db = ghr.ComponentGradient(*(-conj(u) for u in UNITS))
    db = mul(e_star, ghr.ghr_derivative(de_db, plain)) + mul(ghr.ghr_derivative(de_star_db, rotated), e)
    return ProductRuleGradients(dw, db, False)


def chain_rule_single_term(w: Quaternion, a: Quaternion, d: Quaternion,
                           b: Quaternion = ZERO) -> tuple[Quaternion, Quaternion]:
    """Same quantities as :func:`appendix_product_rule_gradient` via ``backward_output_layer``."""
    layer = DenseLayer(np.array([[w.as_tuple()]]), np.array([b.as_tuple()]))
    net = Network((layer,))
    trace = forward(net, np.array([a.as_tuple()]))
    grads, _ = backward_output_layer(trace, np.array([d.as_tuple()]), layer)
    return Quaternion.from_array(grads.dW[0, 0]), Quaternion.from_array(grads.db[0])


def weight_differences(student: Network, teacher: Network) -> np.ndarray:
    """``|p_student - p_teacher|`` for every weight and bias quaternion, positionally."""
    if student.shape != teacher.shape:
        raise ValueError(f"shape mismatch: {student.shape} vs {teacher.shape}")
    diffs = [np.sqrt(np.sum((ps - pt) ** 2, axis=-1)).ravel()
             for ps, pt in zip(student.parameters(), teacher.parameters())]
    return np.concatenate(diffs)


# Left multiplication by these eight units permutes components with signs, so it
# commutes with any odd split activation.
_GAUGE_UNITS = tuple(sign * u.as_array() for u in UNITS for sign in (1.0, -1.0))


def aligned_weight_differences(student: Network, teacher: Network) -> np.ndarray:
    """Like :func:`weight_differences`, after undoing hidden-unit symmetries.

    A hidden unit can be permuted, or have its incoming weights and bias
    left-multiplied by a unit ``u`` in {+-1, +-i, +-j, +-k} while its outgoing
    weights are right-multiplied by ``u*``, without changing the network
    function (for odd split activations such as Tanhshrink). Each hidden layer
    is matched to the teacher by exhaustive search over permutations, choosing
    the best gauge unit per row. Intended for the tiny networks of the
    teacher-student experiment; cost is factorial in the layer width.
    """
    if student.shape != teacher.shape:
        raise ValueError(f"shape mismatch: {student.shape} vs {teacher.shape}")
    weights = [np.array(layer.weights) for layer in student.layers]
    biases = [np.array(layer.bias) for layer in student.layers]
    for index in range(len(weights) - 1):
        target = teacher.layers[index].weights
        m = target.shape[0]
        # cost[s, t, g]: mismatch of student row s mapped to teacher row t by unit g
        cost = np.array([[[np.sum((qmul(u, weights[index][s]) - target[t]) ** 2)
                           for u in _GAUGE_UNITS] for t in range(m)] for s in range(m)])
        best = min(itertools.permutations(range(m)),
                   key=lambda perm: sum(cost[s, t].min() for t, s in enumerate(perm)))
        gauge = [_GAUGE_UNITS[int(np.argmin(cost[s, t]))] for t, s in enumerate(best)]
        weights[index] = np.stack([qmul(g, weights[index][s]) for g, s in zip(gauge, best)])
        biases[index] = np.stack([qmul(g, biases[index][s]) for g, s in zip(gauge, best)])
        outgoing = weights[index + 1][:, list(best)]
        weights[index + 1] = np.stack([qmul(outgoing[:, t], qconj(g)) for t, g in enumerate(gauge)],
                                      axis=1)
    aligned = Network(tuple(layer.replace(weights=w, bias=b)
                            for layer, w, b in zip(student.layers, weights, biases)))
    return weight_differences(aligned, teacher)


__all__ = [
    "ActivationKind", "DenseLayer", "Network", "ForwardTrace", "LayerGradients", "BackpropSignal",
    "forward", "predict", "loss", "backward_output_layer", "backward_hidden_layer", "backward",
    "sgd_step", "mean_loss", "gradient_check", "CheckReport", "numeric_conjugate_gradient",
    "appendix_product_rule_gradient", "ProductRuleGradients", "chain_rule_single_term",
    "weight_differences", "aligned_weight_differences",
]
