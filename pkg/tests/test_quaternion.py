import math

import numpy as np
import pytest
from hypothesis import given

from qbackprop.quaternion import (
    AXIS_UNITS,
    ONE,
    ZERO,
    Axis,
    I,
    J,
    K,
    Quaternion,
    SingularQuaternionError,
    add,
    conj,
    conj_involution,
    hadamard,
    inverse,
    involution,
    mul,
    norm,
    qconj,
    qmatvec,
    qmul,
    qvector,
    qmatrix,
)

from conftest import left_matrix, oracle_mul, quaternions

Q = Quaternion(1, 2, 3, 4)


def close(a: Quaternion, b, atol=1e-12):
    return np.allclose(np.array(list(a)), np.array(list(b)), atol=atol, rtol=0)


class TestAdd:
    def test_identity(self):
        assert add(Q, ZERO) == Q

    def test_inverse(self):
        assert add(Q, Quaternion(-1, -2, -3, -4)) == ZERO

    def test_componentwise(self):
        assert add(Quaternion(1, 0, 1, 0), Quaternion(0, 1, 0, 1)) == Quaternion(1, 1, 1, 1)


class TestMul:
    def test_ij_is_k(self):
        assert mul(I, J) == K

    def test_unit_table(self):
        assert mul(J, I) == -K
        assert mul(J, K) == I and mul(K, J) == -I
        assert mul(K, I) == J and mul(I, K) == -J
        for u in (I, J, K):
            assert mul(u, u) == Quaternion(-1, 0, 0, 0)

    def test_identity(self):
        assert mul(ONE, Q) == Q and mul(Q, ONE) == Q

    def test_known_product(self):
        expected = oracle_mul([1, 2, 3, 4], [5, 6, 7, 8])
        assert expected.tolist() == [-60, 12, 30, 24]
        assert mul(Q, Quaternion(5, 6, 7, 8)) == Quaternion(-60, 12, 30, 24)

    def test_matches_matrix_representation(self):
        rng = np.random.default_rng(0)
        xs = rng.uniform(-1, 1, size=(1000, 4))
        ys = rng.uniform(-1, 1, size=(1000, 4))
        worst = 0.0
        for x, y in zip(xs, ys):
            got = mul(Quaternion.from_array(x), Quaternion.from_array(y)).as_array()
            worst = max(worst, np.max(np.abs(got - left_matrix(x) @ y)))
        assert worst <= 1e-12

    def test_not_commutative(self):
        assert norm(mul(I, J) - mul(J, I)) > 0.1

    @given(quaternions, quaternions, quaternions)
    def test_associative_and_distributive(self, x, y, z):
        scale = 1.0 + norm(x) * norm(y) * norm(z)
        assert norm(mul(mul(x, y), z) - mul(x, mul(y, z))) <= 1e-12 * scale
        scale = 1.0 + norm(x) * (norm(y) + norm(z))
        assert norm(mul(x, y + z) - (mul(x, y) + mul(x, z))) <= 1e-12 * scale

    @given(quaternions, quaternions)
    def test_conj_reverses_products(self, x, y):
        assert norm(conj(mul(x, y)) - mul(conj(y), conj(x))) <= 1e-12 * (1 + norm(x) * norm(y))

    @given(quaternions, quaternions)
    def test_norm_multiplicative(self, x, y):
        assert math.isclose(norm(mul(x, y)), norm(x) * norm(y), rel_tol=1e-12, abs_tol=1e-12)


class TestConj:
    def test_sign_flip(self):
        assert conj(Q) == Quaternion(1, -2, -3, -4)

    def test_real_fixed(self):
        assert conj(ONE) == ONE

    def test_product_with_conj_is_squared_norm(self):
        assert mul(Q, conj(Q)) == Quaternion(30, 0, 0, 0)

    @given(quaternions)
    def test_involutive(self, q):
        assert conj(conj(q)) == q


class TestHadamard:
    def test_ones_identity(self):
        assert hadamard(Quaternion(1, 1, 1, 1), Q) == Q

    def test_componentwise(self):
        assert hadamard(Q, Quaternion(4, 3, 2, 1)) == Quaternion(4, 6, 6, 4)

    def test_annihilator(self):
        assert hadamard(ZERO, Q) == ZERO


class TestInvolution:
    def test_axis_i(self):
        assert involution(Q, "i") == Quaternion(1, 2, -3, -4)

    def test_all_axes(self):
        assert involution(Q, Axis.J) == Quaternion(1, -2, 3, -4)
        assert involution(Q, Axis.K) == Quaternion(1, -2, -3, 4)

    def test_real_fixed(self):
        r = Quaternion(5, 0, 0, 0)
        for axis in Axis:
            assert involution(r, axis) == r

    @given(quaternions)
    def test_self_inverse(self, q):
        for axis in Axis:
            assert involution(involution(q, axis), axis) == q

    @given(quaternions)
    def test_equals_minus_eta_q_eta(self, q):
        for axis, eta in AXIS_UNITS.items():
            assert close(involution(q, axis), mul(mul(-eta, q), eta), atol=1e-12 * (1 + norm(q)))

    def test_conj_involution_values(self):
        assert conj_involution(Q, "i") == Quaternion(1, -2, 3, 4)
        assert conj_involution(Q, "k") == Quaternion(1, 2, 3, -4)

    @given(quaternions)
    def test_conj_commutes_with_involution(self, q):
        for axis in Axis:
            assert conj_involution(q, axis) == involution(conj(q), axis)

    def test_bad_axis(self):
        with pytest.raises(ValueError):
            involution(Q, "x")


class TestNormInverse:
    def test_norms(self):
        assert norm(ZERO) == 0
        assert norm(ONE) == 1
        assert math.isclose(norm(Q), math.sqrt(30), rel_tol=1e-15)

    def test_inverse_values(self):
        assert inverse(ONE) == ONE
        assert inverse(I) == Quaternion(0, -1, 0, 0)

    def test_inverse_of_zero(self):
        with pytest.raises(SingularQuaternionError):
            inverse(ZERO)

    def test_inverse_property(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            q = Quaternion.from_array(rng.uniform(-1, 1, size=4))
            assert close(mul(q, inverse(q)), ONE)
            assert close(mul(inverse(q), q), ONE)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Quaternion(math.nan, 0, 0, 0)


class TestArrayForms:
    def test_qmul_matches_scalar(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(7, 4))
        y = rng.normal(size=(7, 4))
        got = qmul(x, y)
        for row_x, row_y, row in zip(x, y, got):
            expected = mul(Quaternion.from_array(row_x), Quaternion.from_array(row_y))
            assert np.array_equal(row, expected.as_array())

    def test_qconj(self):
        assert qconj(np.array([1.0, 2, 3, 4])).tolist() == [1, -2, -3, -4]

    def test_qmatvec_identity(self):
        q = Quaternion(0.3, -1, 2, 0.5)
        out = qmatvec(qmatrix([[ONE]]), qvector([q]))
        assert out.tolist() == [list(q)]

    def test_qmatvec_zero(self):
        out = qmatvec(np.zeros((2, 3, 4)), np.ones((3, 4)))
        assert not out.any()

    def test_qmatvec_by_hand(self):
        rng = np.random.default_rng(3)
        w1, w2, a1, a2 = (Quaternion.from_array(rng.normal(size=4)) for _ in range(4))
        out = qmatvec(qmatrix([[w1, w2]]), qvector([a1, a2]))
        assert close(Quaternion.from_array(out[0]), mul(w1, a1) + mul(w2, a2))

    def test_qmatvec_left_multiplies(self):
        out = qmatvec(qmatrix([[I]]), qvector([J]))
        assert out[0].tolist() == list(K)

    def test_qmatvec_dimension_mismatch(self):
        with pytest.raises(ValueError):
            qmatvec(np.zeros((2, 3, 4)), np.zeros((2, 4)))
