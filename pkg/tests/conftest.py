import numpy as np
import pytest
from hypothesis import strategies as st

from qbackprop.network import ActivationKind, DenseLayer, Network
from qbackprop.quaternion import Quaternion

# Basis products u_a u_b = sign * u_c, written out from i^2 = j^2 = k^2 = ijk = -1.
BASIS_TABLE = {
    (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
    (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
    (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
    (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
}


def left_matrix(x) -> np.ndarray:
    """4x4 real matrix of q -> x q, column b being x times basis unit b."""
    m = np.zeros((4, 4))
    for a in range(4):
        for b in range(4):
            sign, c = BASIS_TABLE[(a, b)]
            m[c, b] += sign * x[a]
    return m


def oracle_mul(x, y) -> np.ndarray:
    return left_matrix(np.asarray(list(x), dtype=float)) @ np.asarray(list(y), dtype=float)


finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
quaternions = st.builds(Quaternion, finite, finite, finite, finite)


def random_quaternion(rng, scale=1.0) -> Quaternion:
    return Quaternion.from_array(rng.uniform(-scale, scale, size=4))


def random_network(rng, shape, activation, weight_scale=0.7, bias_scale=0.3) -> Network:
    activation = ActivationKind.parse(activation)
    layers = []
    for index, (n_in, n_out) in enumerate(zip(shape, shape[1:])):
        last = index == len(shape) - 2
        layers.append(DenseLayer(
            rng.normal(size=(n_out, n_in, 4)) * weight_scale,
            rng.normal(size=(n_out, 4)) * bias_scale,
            ActivationKind.IDENTITY if last else activation,
        ))
    return Network(tuple(layers))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
