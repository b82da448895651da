"""Quaternion arithmetic.

Two layers live here. :class:`Quaternion` is an immutable scalar used by the
calculus code, where readability matters more than speed. The ``q*`` array
functions operate on float64 arrays whose last axis holds the four components
``(q0, q1, q2, q3) = (real, i, j, k)``; the network code uses those so a whole
batch goes through one call.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np


class SingularQuaternionError(ArithmeticError):
    """Raised when inverting the zero quaternion."""


class Axis(enum.Enum):
    I = 1
    J = 2
    K = 3

    @classmethod
    def parse(cls, value: "Axis | str") -> "Axis":
        if isinstance(value, Axis):
            return value
        try:
            return cls[value.upper()]
        except KeyError:
            raise ValueError(f"unknown involution axis {value!r}; expected i, j or k") from None


# sign masks applied to (q0, q1, q2, q3)
_INVOLUTION_SIGNS = {
    Axis.I: (1.0, 1.0, -1.0, -1.0),
    Axis.J: (1.0, -1.0, 1.0, -1.0),
    Axis.K: (1.0, -1.0, -1.0, 1.0),
}


@dataclass(frozen=True, slots=True)
class Quaternion:
    q0: float = 0.0
    q1: float = 0.0
    q2: float = 0.0
    q3: float = 0.0

    def __post_init__(self) -> None:
        for name in ("q0", "q1", "q2", "q3"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"quaternion component {name} is not finite: {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, values: Iterable[float]) -> "Quaternion":
        q0, q1, q2, q3 = (float(v) for v in values)
        return cls(q0, q1, q2, q3)

    @classmethod
    def real(cls, value: float) -> "Quaternion":
        return cls(value, 0.0, 0.0, 0.0)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.q0, self.q1, self.q2, self.q3)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=np.float64)

    def __iter__(self):
        return iter(self.as_tuple())

    def __getitem__(self, index: int) -> float:
        return self.as_tuple()[index]

    def __repr__(self) -> str:
        return f"Quaternion({self.q0!r}, {self.q1!r}, {self.q2!r}, {self.q3!r})"

    def __add__(self, other: "Quaternion") -> "Quaternion":
        if not isinstance(other, Quaternion):
            return NotImplemented
        return add(self, other)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        if not isinstance(other, Quaternion):
            return NotImplemented
        return Quaternion(self.q0 - other.q0, self.q1 - other.q1,
                          self.q2 - other.q2, self.q3 - other.q3)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.q0, -self.q1, -self.q2, -self.q3)

    def __mul__(self, other: "Quaternion | float") -> "Quaternion":
        if isinstance(other, Quaternion):
            return mul(self, other)
        if isinstance(other, (int, float)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other: float) -> "Quaternion":
        if isinstance(other, (int, float)):
            return self.scale(other)
        return NotImplemented

    def scale(self, s: float) -> "Quaternion":
        return Quaternion(s * self.q0, s * self.q1, s * self.q2, s * self.q3)

    def conj(self) -> "Quaternion":
        return conj(self)

    def norm(self) -> float:
        return norm(self)

    def inverse(self) -> "Quaternion":
        return inverse(self)

    def involution(self, axis: Axis | str) -> "Quaternion":
        return involution(self, axis)

    def conj_involution(self, axis: Axis | str) -> "Quaternion":
        return conj_involution(self, axis)

    def hadamard(self, other: "Quaternion") -> "Quaternion":
        return hadamard(self, other)

    def imag_norm(self) -> float:
        return math.sqrt(self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3)

    def isclose(self, other: "Quaternion", atol: float = 1e-12) -> bool:
        return norm(self - other) <= atol


ZERO = Quaternion(0.0, 0.0, 0.0, 0.0)
ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)
UNITS = (ONE, I, J, K)
AXIS_UNITS = {Axis.I: I, Axis.J: J, Axis.K: K}


def add(x: Quaternion, y: Quaternion) -> Quaternion:
    return Quaternion(x.q0 + y.q0, x.q1 + y.q1, x.q2 + y.q2, x.q3 + y.q3)


def mul(x: Quaternion, y: Quaternion) -> Quaternion:
    """Hamilton product ``x y``; note ``mul(x, y) != mul(y, x)`` in general."""
    x0, x1, x2, x3 = x.q0, x.q1, x.q2, x.q3
    y0, y1, y2, y3 = y.q0, y.q1, y.q2, y.q3
    return Quaternion(
        x0 * y0 - x1 * y1 - x2 * y2 - x3 * y3,
        x0 * y1 + x1 * y0 + x2 * y3 - x3 * y2,
        x0 * y2 - x1 * y3 + x2 * y0 + x3 * y1,
        x0 * y3 + x1 * y2 - x2 * y1 + x3 * y0,
    )


def conj(q: Quaternion) -> Quaternion:
    return Quaternion(q.q0, -q.q1, -q.q2, -q.q3)


def hadamard(x: Quaternion, y: Quaternion) -> Quaternion:
    return Quaternion(x.q0 * y.q0, x.q1 * y.q1, x.q2 * y.q2, x.q3 * y.q3)


def involution(q: Quaternion, axis: Axis | str) -> Quaternion:
    """``q^eta = -eta q eta`` for ``eta`` one of the imaginary units.

    Keeps the real part and the component along ``axis``; flips the other two.
    """
    s0, s1, s2, s3 = _INVOLUTION_SIGNS[Axis.parse(axis)]
    return Quaternion(s0 * q.q0, s1 * q.q1, s2 * q.q2, s3 * q.q3)


def conj_involution(q: Quaternion, axis: Axis | str) -> Quaternion:
    return conj(involution(q, axis))


def norm(q: Quaternion) -> float:
    return math.sqrt(q.q0 * q.q0 + q.q1 * q.q1 + q.q2 * q.q2 + q.q3 * q.q3)


def inverse(q: Quaternion) -> Quaternion:
    n2 = q.q0 * q.q0 + q.q1 * q.q1 + q.q2 * q.q2 + q.q3 * q.q3
    if n2 == 0.0:
        raise SingularQuaternionError("the zero quaternion has no inverse")
    return Quaternion(q.q0 / n2, -q.q1 / n2, -q.q2 / n2, -q.q3 / n2)


def rotate_unit(unit: Quaternion, mu: Quaternion) -> Quaternion:
    """``unit^mu = mu unit mu^-1``, the rotated imaginary unit used by GHR derivatives."""
    return mul(mul(mu, unit), inverse(mu))


# --- array forms -----------------------------------------------------------
#
# Shapes: a quaternion is (..., 4). A QVector of length n is (n, 4); a QMatrix
# m x n is (m, n, 4). Leading batch axes broadcast.


def as_qarray(values, *, ndim: int | None = None) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape[-1:] != (4,):
        raise ValueError(f"expected trailing quaternion axis of length 4, got shape {arr.shape}")
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected {ndim}-d quaternion array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("quaternion array contains non-finite values")
    return arr


def qvector(quats: Iterable[Quaternion]) -> np.ndarray:
    return np.array([q.as_tuple() for q in quats], dtype=np.float64).reshape(-1, 4)


def qmatrix(rows: Iterable[Iterable[Quaternion]]) -> np.ndarray:
    data = [[q.as_tuple() for q in row] for row in rows]
    arr = np.array(data, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError("QMatrix rows must all have the same length")
    return arr


def to_quaternions(arr: np.ndarray) -> list[Quaternion]:
    return [Quaternion.from_array(row) for row in np.asarray(arr).reshape(-1, 4)]


def qmul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Elementwise Hamilton product of broadcastable quaternion arrays."""
    x0, x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2], x[..., 3]
    y0, y1, y2, y3 = y[..., 0], y[..., 1], y[..., 2], y[..., 3]
    return np.stack(
        (
            x0 * y0 - x1 * y1 - x2 * y2 - x3 * y3,
            x0 * y1 + x1 * y0 + x2 * y3 - x3 * y2,
            x0 * y2 - x1 * y3 + x2 * y0 + x3 * y1,
            x0 * y3 + x1 * y2 - x2 * y1 + x3 * y0,
        ),
        axis=-1,
    )


_CONJ_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])


def qconj(x: np.ndarray) -> np.ndarray:
    return x * _CONJ_SIGNS


def qnorm(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(x * x, axis=-1))


def qmatvec(W: np.ndarray, a: np.ndarray) -> np.ndarray:
    """``z_i = sum_j W[i, j] a[j]`` with the weight on the left of each product.

    ``W`` is (m, n, 4); ``a`` is (n, 4) or batched (..., n, 4).
    """
    if W.ndim != 3 or W.shape[-1] != 4:
        raise ValueError(f"QMatrix must have shape (m, n, 4), got {W.shape}")
    if a.shape[-2:] != (W.shape[1], 4):
        raise ValueError(
            f"dimension mismatch: matrix has {W.shape[1]} columns, vector has shape {a.shape}"
        )
    return qmul(W, a[..., None, :, :]).sum(axis=-2)
