from fractions import Fraction

import numpy as np
import pytest

from toda_ward_lab.symbolic import algebra
from toda_ward_lab.symbolic.algebra import (
    CARTAN, E1, E2, ScalarField, Weight, bform, cform, contract, delta_alpha, fundamental_weight,
    h, hat, inner, omega, q_constant, w_alpha, weyl_vector,
)
from toda_ward_lab.utils.errors import AlgebraError

G = Fraction(1, 2)


def test_cartan_pairing():
    assert inner(E1, E1) == 2
    assert inner(E2, E2) == 2
    assert inner(E1, E2) == -1
    u = Weight(Fraction(3, 7), Fraction(-2, 5))
    v = Weight(Fraction(1, 3), 4)
    expected = np.array(u.coords, dtype=float) @ CARTAN @ np.array(v.coords, dtype=float)
    assert float(inner(u, v)) == pytest.approx(expected)


@pytest.mark.parametrize("i", [1, 2])
@pytest.mark.parametrize("j", [1, 2])
def test_fundamental_weights_are_dual(i, j):
    root = algebra.simple_root(j)
    assert inner(fundamental_weight(i), root) == (1 if i == j else 0)


def test_weyl_vector_pairs_to_one():
    assert inner(weyl_vector(), E1) == 1
    assert inner(weyl_vector(), E2) == 1


def test_h_forms_sum_to_zero():
    u = Weight(Fraction(3, 7), Fraction(-2, 5))
    assert h(1, u) + h(2, u) + h(3, u) == 0
    assert h(1, u) == inner(fundamental_weight(1), u)
    assert h(3, u) == -inner(fundamental_weight(2), u)


def test_index_errors():
    with pytest.raises(AlgebraError):
        h(4, E1)
    with pytest.raises(AlgebraError):
        omega(3, E1)
    with pytest.raises(AlgebraError):
        hat(0)
    with pytest.raises(AlgebraError):
        fundamental_weight(3)
    assert hat(1) == 2 and hat(2) == 1


def test_cform_is_cyclic():
    u, v, w = Weight(1, 2), Weight(-3, 1), Weight(2, 5)
    assert cform(u, v, w) == cform(v, w, u) == cform(w, u, v)


def test_cform_on_roots():
    g = G
    assert cform(g * E1, g * E2, g * E2) == -g ** 3


def test_bform_is_bilinear_not_symmetric():
    u, v, w = Weight(1, 2), Weight(-3, 1), Weight(2, 5)
    assert bform(2 * u + v, w) == 2 * bform(u, w) + bform(v, w)
    assert bform(u, v) != bform(v, u)


def test_background_charge_and_weights():
    q = q_constant(G)
    assert q == Fraction(9, 2)
    assert delta_alpha(algebra.ZERO, G) == 0
    assert delta_alpha(G * E1, G) == 1
    Q = algebra.background_charge(G)
    assert delta_alpha(Q, G) == inner(Q, Q) / 4
    assert w_alpha(G * E1, G) == 2 * q


def test_conformal_weight_reflection_symmetry():
    # Delta is invariant under alpha -> 2Q - alpha
    alpha = Weight(Fraction(2, 3), Fraction(5, 4))
    Q = algebra.background_charge(G)
    assert delta_alpha(alpha, G) == delta_alpha(2 * Q - alpha, G)


def test_contract_inner_gives_rank():
    assert contract(inner) == 2


def test_exact_field_keeps_gamma_formal():
    field = ScalarField(params=("a",))
    g = field.gamma
    alpha = field.weight("a", 1)
    value = delta_alpha(alpha)
    expected = inner(alpha, algebra.background_charge(g)) / 2 - inner(alpha, alpha) / 4
    assert value == expected
    assert field.convert(Fraction(1, 3)) * 3 == field.convert(1)


def test_scalar_field_rejects_duplicates():
    with pytest.raises(AlgebraError):
        ScalarField(params=("gamma",))


def test_float_arrays_pass_through():
    u = Weight(np.array([1.0, 2.0]), np.array([0.5, 0.0]))
    assert np.allclose(h(2, u), [-0.5, -2.0])
    assert algebra.weights_close(Weight(1.0, 2.0), Weight(1.0, 2.0 + 1e-14))
