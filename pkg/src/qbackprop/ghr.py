"""HR and GHR derivatives of functions of one quaternion variable.

Everything is built from a :class:`ComponentGradient`, the four partial
derivatives ``df/dq0 .. df/dq3`` of ``f`` at a point. Each partial is itself a
quaternion because ``f`` is quaternion valued. The derivative formulas then
combine the partials with (possibly rotated) imaginary units, always with the
partial on the left and the unit on the right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .quaternion import (
    ONE,
    UNITS,
    ZERO,
    Quaternion,
    SingularQuaternionError,
    conj,
    mul,
    rotate_unit,
)

FD_STEP = 1e-5

# variant name -> sign on the i, j, k terms
_HR_SIGNS = {
    "1": (-1.0, -1.0, -1.0),
    "i": (-1.0, 1.0, 1.0),
    "j": (1.0, -1.0, 1.0),
    "k": (1.0, 1.0, -1.0),
}
_HR_CONJ_SIGNS = {
    "1": (1.0, 1.0, 1.0),
    "i": (1.0, -1.0, -1.0),
    "j": (-1.0, 1.0, -1.0),
    "k": (-1.0, -1.0, 1.0),
}
VARIANTS = ("1", "i", "j", "k")


@dataclass(frozen=True)
class ComponentGradient:
    d0: Quaternion
    d1: Quaternion
    d2: Quaternion
    d3: Quaternion

    def __iter__(self):
        return iter((self.d0, self.d1, self.d2, self.d3))

    def is_real_valued(self, atol: float = 0.0) -> bool:
        return all(d.imag_norm() <= atol for d in self)


@dataclass(frozen=True)
class GhrDirection:
    """Rotation parameter ``mu`` and whether the conjugate derivative is meant."""

    mu: Quaternion = ONE
    conjugated: bool = False

    def __post_init__(self) -> None:
        if self.mu == ZERO:
            raise SingularQuaternionError("GHR direction mu must be nonzero")


@dataclass(frozen=True)
class QuatFunction:
    """A function H -> H, optionally with its exact component partials."""

    evaluate: Callable[[Quaternion], Quaternion]
    partials: Optional[Callable[[Quaternion], ComponentGradient]] = None
    name: str = field(default="f", compare=False)

    def __call__(self, q: Quaternion) -> Quaternion:
        return self.evaluate(q)

    def gradient(self, at: Quaternion, h: float = FD_STEP) -> ComponentGradient:
        if self.partials is not None:
            return self.partials(at)
        return finite_difference_gradient(self, at, h)


def _variant(variant) -> str:
    key = str(variant).lower()
    if key not in _HR_SIGNS:
        raise ValueError(f"unknown HR variant {variant!r}; expected one of 1, i, j, k")
    return key


def _combine(g: ComponentGradient, signs, units) -> Quaternion:
    s1, s2, s3 = signs
    u1, u2, u3 = units
    total = g.d0 + mul(g.d1, u1).scale(s1) + mul(g.d2, u2).scale(s2) + mul(g.d3, u3).scale(s3)
    return total.scale(0.25)


def hr_derivative(g: ComponentGradient, variant="1") -> Quaternion:
    """``df/dq``, ``df/dq^i``, ``df/dq^j`` or ``df/dq^k`` from component partials."""
    return _combine(g, _HR_SIGNS[_variant(variant)], UNITS[1:])


def hr_conjugate_derivative(g: ComponentGradient, variant="1") -> Quaternion:
    """``df/dq*`` and the conjugate-involution variants ``df/dq^{i*}`` etc."""
    return _combine(g, _HR_CONJ_SIGNS[_variant(variant)], UNITS[1:])


def ghr_derivative(g: ComponentGradient, direction: GhrDirection = GhrDirection()) -> Quaternion:
    """GHR derivative along ``mu``, using the rotated units ``a^mu = mu a mu^-1``.

    With ``mu`` in ``{1, i, j, k}`` this is the corresponding HR derivative.
    """
    rotated = tuple(rotate_unit(u, direction.mu) for u in UNITS[1:])
    sign = 1.0 if direction.conjugated else -1.0
    return _combine(g, (sign, sign, sign), rotated)


def naive_derivative(g: ComponentGradient) -> Quaternion:
    """Component-wise derivative without the 1/4 weight; breaks product and chain rules."""
    return g.d0 + mul(g.d1, UNITS[1]) + mul(g.d2, UNITS[2]) + mul(g.d3, UNITS[3])


def finite_difference_gradient(f: Callable[[Quaternion], Quaternion], at: Quaternion,
                               h: float = FD_STEP) -> ComponentGradient:
    if not h > 0:
        raise ValueError(f"finite-difference step must be positive, got {h}")
    base = at.as_tuple()
    partials = []
    for axis in range(4):
        plus = list(base)
        minus = list(base)
        plus[axis] += h
        minus[axis] -= h
        fp = f(Quaternion(*plus))
        fm = f(Quaternion(*minus))
        diff = (fp - fm).scale(1.0 / (2.0 * h))
        if not all(math.isfinite(c) for c in diff):
            raise ValueError(f"non-finite evaluation while differencing along component {axis}")
        partials.append(diff)
    return ComponentGradient(*partials)


def ghr_product_rule(f: QuatFunction, g: QuatFunction, at: Quaternion,
                     direction: GhrDirection = GhrDirection()) -> Quaternion:
    """Derivative of ``q -> f(q) g(q)`` as ``f dg/dq^mu + (df/dq^{g mu}) g``.

    The left factor is differentiated along the rotated direction ``g(at) mu``.
    """
    g_at = g(at)
    rotated_mu = mul(g_at, direction.mu)
    if rotated_mu == ZERO:
        raise SingularQuaternionError("rotated direction g(q) mu is zero")
    left = mul(f(at), ghr_derivative(g.gradient(at), direction))
    df = ghr_derivative(f.gradient(at), GhrDirection(rotated_mu, direction.conjugated))
    return left + mul(df, g_at)


def ghr_chain_rule(outer: ComponentGradient, inner_traces: Sequence[Quaternion],
                   outer_conjugated: bool = False) -> Quaternion:
    """Chain rule with ``nu = 1``: ``sum_eta df/dg^eta * dg^eta/dq^mu``.

    ``outer`` holds the partials of ``f`` with respect to the components of
    ``g``. ``inner_traces`` holds ``dg^eta/dq^mu`` for ``eta = 1, i, j, k``.
    With ``outer_conjugated`` the sum runs over ``g^{eta*}`` instead, and the
    traces must be taken of the conjugate involutions of ``g``.
    """
    if len(inner_traces) != 4:
        raise ValueError("need four inner traces, one per involution 1, i, j, k")
    derive = hr_conjugate_derivative if outer_conjugated else hr_derivative
    total = ZERO
    for variant, trace in zip(VARIANTS, inner_traces):
        total = total + mul(derive(outer, variant), trace)
    return total


# --- closed-form functions used by the worked examples ----------------------


def _const_gradient(d: Sequence[Quaternion]) -> Callable[[Quaternion], ComponentGradient]:
    grad = ComponentGradient(*d)
    return lambda q: grad


def identity() -> QuatFunction:
    return QuatFunction(lambda q: q, _const_gradient(UNITS), name="q")


def conjugate() -> QuatFunction:
    return QuatFunction(conj, _const_gradient([ONE] + [-u for u in UNITS[1:]]), name="q*")


def norm_squared() -> QuatFunction:
    """``q q*`` as a real-valued quaternion function."""
    return QuatFunction(
        lambda q: mul(q, conj(q)),
        lambda q: ComponentGradient(*(Quaternion.real(2.0 * c) for c in q)),
        name="q q*",
    )


def left_multiply(w: Quaternion) -> QuatFunction:
    return QuatFunction(
        lambda q: mul(w, q),
        _const_gradient([mul(w, u) for u in UNITS]),
        name="w q",
    )


def square() -> QuatFunction:
    # d(q q)/dq_a = u_a q + q u_a
    return QuatFunction(
        lambda q: mul(q, q),
        lambda q: ComponentGradient(*(mul(u, q) + mul(q, u) for u in UNITS)),
        name="q q",
    )


def constant(c: Quaternion) -> QuatFunction:
    return QuatFunction(lambda q: c, _const_gradient([ZERO] * 4), name="c")
