import math

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from rbnmf.algebra import E1, E2, RBScalar

I = RBScalar(0, 1, 0, 0)
J = RBScalar(0, 0, 1, 0)
K = RBScalar(0, 0, 0, 1)
ONE = RBScalar(1, 0, 0, 0)
ZERO = RBScalar(0, 0, 0, 0)

component = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)
scalars = st.builds(RBScalar, component, component, component, component)


def modulus_of_diff(a: RBScalar, b: RBScalar) -> float:
    return (a - b).modulus()


class TestMultiplicationTable:
    def test_unit_products(self):
        assert I * J == K
        assert J * I == K
        assert J * K == I
        assert K * J == I
        assert K * I == RBScalar(0, 0, -1, 0)
        assert I * K == RBScalar(0, 0, -1, 0)

    def test_unit_squares(self):
        assert I * I == RBScalar(-1, 0, 0, 0)
        assert K * K == RBScalar(-1, 0, 0, 0)
        assert J * J == ONE

    def test_mixed_product_by_hand(self):
        # (1 + i)(1 + j) expands to 1 + i + j + ij = 1 + i + j + k
        a = RBScalar(1, 1, 0, 0)
        b = RBScalar(1, 0, 1, 0)
        assert a * b == RBScalar(1, 1, 1, 1)

    def test_idempotents(self):
        assert E1 * E2 == ZERO
        assert E1 * E1 == E1
        assert E2 * E2 == E2


class TestAddition:
    def test_identity(self):
        assert RBScalar(1, 2, 3, 4) + ZERO == RBScalar(1, 2, 3, 4)

    def test_basis_sum(self):
        assert ONE + I == RBScalar(1, 1, 0, 0)

    def test_additive_inverse(self):
        a = RBScalar(1, -1, 2, -2)
        assert a + (-a) == ZERO


class TestConjugateAndModulus:
    def test_conjugate(self):
        assert RBScalar(1, 2, 3, 4).conj() == RBScalar(1, -2, 3, -4)

    def test_conjugate_fixed_point(self):
        a = RBScalar(5, 0, 7, 0)
        assert a.conj() == a

    def test_involution(self):
        a = RBScalar(1, 2, 3, 4)
        assert a.conj().conj() == a

    def test_modulus_values(self):
        assert ZERO.modulus() == 0.0
        assert ONE.modulus() == 1.0
        assert RBScalar(1, 2, 3, 4).modulus() == pytest.approx(math.sqrt(30), rel=1e-15)


class TestE1E2Form:
    def test_components_by_hand(self):
        s = RBScalar(1, 2, 3, 4).to_e1e2()
        assert s.c_plus == complex(4, 6)
        assert s.c_minus == complex(-2, -2)

    def test_real_scalar_maps_to_equal_pair(self):
        s = ONE.to_e1e2()
        assert s.c_plus == s.c_minus == complex(1, 0)

    def test_round_trip_exact(self):
        a = RBScalar(0.5, -1, 2, 7)
        assert a.to_e1e2().to_rb() == a


class TestValidation:
    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_rejects_non_finite(self, bad):
        with pytest.raises(ValueError):
            RBScalar(bad, 0, 0, 0)
        with pytest.raises(ValueError):
            RBScalar(0, 0, bad, 0)


@given(a=scalars, b=scalars)
def test_multiplication_commutes_exactly(a, b):
    assert a * b == b * a


@given(a=scalars, b=scalars, c=scalars)
@settings(max_examples=300)
def test_associativity(a, b, c):
    lhs = (a * b) * c
    rhs = a * (b * c)
    scale = max(1.0, lhs.modulus(), rhs.modulus())
    assert modulus_of_diff(lhs, rhs) <= 1e-12 * scale


@given(a=scalars, b=scalars, c=scalars)
@settings(max_examples=300)
def test_distributivity(a, b, c):
    lhs = a * (b + c)
    rhs = a * b + a * c
    scale = max(1.0, lhs.modulus(), rhs.modulus())
    assert modulus_of_diff(lhs, rhs) <= 1e-12 * scale


@given(a=scalars, b=scalars)
def test_product_homomorphism_to_e1e2(a, b):
    direct = (a * b).to_e1e2()
    ea, eb = a.to_e1e2(), b.to_e1e2()
    for got, expect in ((direct.c_plus, ea.c_plus * eb.c_plus),
                        (direct.c_minus, ea.c_minus * eb.c_minus)):
        assert abs(got - expect) <= 1e-12 * max(1.0, abs(expect))


@given(a=scalars)
def test_conjugation_commutes_with_e1e2(a):
    lhs = a.conj().to_e1e2()
    rhs = a.to_e1e2()
    assert lhs.c_plus == rhs.c_plus.conjugate()
    assert lhs.c_minus == rhs.c_minus.conjugate()


@given(a=scalars)
def test_conjugate_product_recovers_squared_modulus(a):
    expected = a.modulus() ** 2
    got = (a.conj() * a).q0
    assert abs(got - expected) <= 1e-12 * max(1.0, expected)


@given(a=scalars)
def test_e1e2_round_trip(a):
    back = a.to_e1e2().to_rb()
    assert modulus_of_diff(a, back) <= 1e-12 * max(1.0, a.modulus())
