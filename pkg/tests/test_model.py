import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from riccati_dyn.errors import SingularDenominator
from riccati_dyn.model import (
    CubicRiccati,
    GeneralU,
    NonlinearOscillator,
    Product2D,
    QuadraticU,
    State,
    alternative_lagrangian,
    axis_force,
    b0_discrepancy,
    euler_lagrange_residual,
    force,
    lagrangian,
    lagrangian_value,
    rhs,
    riccati_coefficients,
    riccati_force,
)

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
coef = st.floats(-2, 2, allow_nan=False, allow_infinity=False)
nonzero_k = st.floats(0.1, 3).flatmap(lambda m: st.sampled_from([m, -m]))


# --- symbolic oracle: Euler-Lagrange equation of L = 1/D solved for x'' ----------

_x, _v, _a, _k, _w = sp.symbols("x v a k w")
_c0, _c1, _c2 = sp.symbols("c0 c1 c2")


def _el_accel(L):
    el = sp.diff(sp.diff(L, _v), _x) * _v + sp.diff(L, _v, 2) * _a - sp.diff(L, _x)
    return sp.simplify(sp.solve(sp.Eq(el, 0), _a)[0])


_ACC_U = sp.lambdify((_x, _v, _k, _c0, _c1, _c2),
                     _el_accel(1 / (_v + _k * (_c0 + _c1 * _x + _c2 * _x ** 2))))
_ACC_OSC = sp.lambdify((_x, _v, _k, _w), _el_accel(1 / (_k * _v + _k ** 2 * _x ** 2 + _w ** 2)))


# --- lagrangian_value ------------------------------------------------------------


def test_lagrangian_value_examples():
    assert lagrangian_value(CubicRiccati(1.0), State.one(0.0, 1.0)) == 1.0
    assert lagrangian_value(CubicRiccati(1.0), State.one(1.0, 0.0)) == 1.0
    assert lagrangian_value(NonlinearOscillator(1.0, 1.0), State.one(0.0, 1.0)) == 0.5


def test_lagrangian_value_singular():
    with pytest.raises(SingularDenominator):
        lagrangian_value(CubicRiccati(1.0), State.one(1.0, -1.0))


def test_quadratic_u_evaluates_exactly():
    U = QuadraticU(1.0, 2.0, 3.0)
    assert U(2.0) == 1.0 + 2.0 * 2.0 + 3.0 * 4.0
    assert not U.time_dependent
    assert QuadraticU(0, 0, 1, dc0=0.5).time_dependent


def test_oscillator_rejects_negative_w():
    with pytest.raises(ValueError):
        NonlinearOscillator(1.0, -1.0)


# --- force / rhs --------------------------------------------------------------------


def test_force_examples():
    assert force(CubicRiccati(1.0), State.one(0.0, 5.0))[0] == 0.0
    assert force(CubicRiccati(1.0), State.one(1.0, 0.0))[0] == -1.0
    assert force(NonlinearOscillator(1.0, 2.0), State.one(1.0, 1.0))[0] == -8.0


def test_rhs_examples():
    np.testing.assert_array_equal(rhs(CubicRiccati(1.0), State.one(0.0, 5.0)), [5.0, 0.0])
    np.testing.assert_array_equal(rhs(CubicRiccati(1.0), State.one(1.0, 0.0)), [0.0, -1.0])
    spec = Product2D(CubicRiccati(1.0), CubicRiccati(1.0))
    np.testing.assert_array_equal(rhs(spec, State.two(1.0, 0.0, 0.0, 1.0)), [0.0, -1.0, 1.0, 0.0])


def test_state_arity_mismatch():
    with pytest.raises(ValueError):
        rhs(Product2D(CubicRiccati(1.0), CubicRiccati(1.0)), State.one(0.0, 1.0))


@given(x=finite, v=finite, k=nonzero_k)
def test_cubic_matches_general_u_exactly(x, v, k):
    assert axis_force(CubicRiccati(k), x, v) == axis_force(GeneralU(QuadraticU(0, 0, 1), k), x, v)


@given(x=finite, v=finite, k=nonzero_k)
def test_zero_frequency_oscillator_is_cubic(x, v, k):
    assert axis_force(NonlinearOscillator(k, 0.0), x, v) == axis_force(CubicRiccati(k), x, v)


@given(x=finite, v=finite, y=finite, vy=finite)
def test_product_has_no_cross_terms(x, v, y, vy):
    a, b = CubicRiccati(1.5), NonlinearOscillator(0.7, 2.0)
    out = force(Product2D(a, b), State.two(x, v, y, vy))
    assert out[0] == axis_force(a, x, v)
    assert out[1] == axis_force(b, y, vy)


@given(x=finite, v=finite, k=nonzero_k, c0=coef, c1=coef, c2=coef)
def test_general_force_matches_symbolic_euler_lagrange(x, v, k, c0, c1, c2):
    spec = GeneralU(QuadraticU(c0, c1, c2), k)
    D = v + k * spec.U(x)
    if abs(D) < 1e-3:
        return
    expected = _ACC_U(x, v, k, c0, c1, c2)
    assert axis_force(spec, x, v) == pytest.approx(expected, rel=1e-10, abs=1e-10)


@given(x=finite, v=finite, k=nonzero_k, w=st.floats(0, 3))
def test_oscillator_force_matches_symbolic_euler_lagrange(x, v, k, w):
    if abs(k * v + k * k * x * x + w * w) < 1e-3:
        return
    assert axis_force(NonlinearOscillator(k, w), x, v) == pytest.approx(_ACC_OSC(x, v, k, w), rel=1e-10, abs=1e-10)


def test_time_dependent_force_term():
    U = QuadraticU(0.0, 0.0, 1.0, dc0=2.0)
    # extra -k U_t on top of the static force
    assert axis_force(GeneralU(U, 1.5), 0.3, 0.2) == pytest.approx(
        axis_force(GeneralU(QuadraticU(0, 0, 1), 1.5), 0.3, 0.2) - 1.5 * 2.0, abs=1e-15)


# --- coefficient map -------------------------------------------------------------------


def test_riccati_coefficient_examples():
    c = riccati_coefficients(QuadraticU(0, 0, 1))
    assert (c.a0, c.a1, c.a2, c.a3, c.b0, c.b1) == (0, 0, 0, 1, 0, 3)
    c = riccati_coefficients(QuadraticU(0, 0, 0))
    assert (c.a0, c.a1, c.a2, c.a3, c.b0, c.b1) == (0, 0, 0, 0, 0, 0)
    c = riccati_coefficients(QuadraticU(1, 2, 3))
    assert (c.a0, c.a1, c.a2, c.a3, c.b0, c.b1) == (1, 5, 9, 9, 3, 9)


@given(c0=coef, c1=coef, c2=coef)
def test_coefficient_invariants(c0, c1, c2):
    c = riccati_coefficients(QuadraticU(c0, c1, c2))
    assert c.a3 == c2 * c2 >= 0
    assert c.b1 == 3 * c2
    assert c.b0 == 1.5 * c1


def test_coefficient_polynomial_matches_force():
    rng = np.random.default_rng(1)
    for _ in range(20):
        U = QuadraticU(*rng.uniform(-2, 2, 3))
        co = riccati_coefficients(U)
        spec = GeneralU(U, 1.0)
        for x, v in rng.uniform(-2, 2, (100, 2)):
            a, b = axis_force(spec, x, v), riccati_force(co, x, v)
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def test_coefficient_map_time_dependent_derivatives():
    c = riccati_coefficients(QuadraticU(1, 2, 3, dc0=0.5, dc1=0.25, dc2=0.125))
    assert c.a0 == pytest.approx(0.5 * 1 * 2 + 0.5)
    assert c.a1 == pytest.approx(1 * 3 + 0.5 * 4 + 0.25)
    assert c.a2 == pytest.approx(1.5 * 2 * 3 + 0.125)


def test_b0_discrepancy():
    # a2/sqrt(a3) - a3'/(2 a3) = (3/2) c1 + c2'/c2 - c2'/c2 when c2 > 0
    assert b0_discrepancy(QuadraticU(1, 2, 3)) == pytest.approx(0.0, abs=1e-14)
    assert b0_discrepancy(QuadraticU(1, 2, 3, dc2=0.6)) == pytest.approx(0.0, abs=1e-14)
    # c2 < 0 flips the sign of sqrt(a3): discrepancy -3 c1 - 2 c2'/c2
    assert b0_discrepancy(QuadraticU(1, 2, -3, dc2=0.6)) == pytest.approx(-6.0 + 0.4, abs=1e-12)
    assert math.isnan(b0_discrepancy(QuadraticU(1, 2, 0)))


# --- Euler-Lagrange residual -------------------------------------------------------------


def test_euler_lagrange_examples():
    spec = CubicRiccati(1.0)
    st_ = State.one(1.0, 0.0)
    assert abs(euler_lagrange_residual(lagrangian(spec), st_, -1.0, fd_step=1e-5)) <= 1e-6
    assert abs(euler_lagrange_residual(alternative_lagrangian(spec), st_, -1.0, fd_step=1e-5)) <= 1e-6
    assert abs(euler_lagrange_residual(lagrangian(spec), st_, 0.0, fd_step=1e-5)) >= 1e-2


def test_euler_lagrange_singular_stencil():
    with pytest.raises(SingularDenominator):
        euler_lagrange_residual(lagrangian(CubicRiccati(1.0)), State.one(1.0, -1.0), 0.0)


def test_alternative_lagrangian_domain():
    L2 = alternative_lagrangian(CubicRiccati(1.0))
    assert L2(1.0, 1.0) == pytest.approx(math.sqrt(3.0))
    with pytest.raises(SingularDenominator):
        L2(0.0, -1.0)
    with pytest.raises(TypeError):
        alternative_lagrangian(NonlinearOscillator(1.0, 1.0))


@settings(max_examples=40)
@given(x=st.floats(-1, 1), D=st.floats(0.5, 2.0),
       k=st.floats(0.1, 1.5).flatmap(lambda m: st.sampled_from([m, -m])),
       c0=st.floats(-1, 1), c1=st.floats(-1, 1), c2=st.floats(-1, 1))
def test_both_lagrangians_give_the_same_dynamics(x, D, k, c0, c1, c2):
    spec = GeneralU(QuadraticU(c0, c1, c2), k)
    v = D - k * spec.U(x)
    if 2 * v + k * spec.U(x) < 0.5:
        return
    st_ = State.one(x, v)
    a = axis_force(spec, x, v)
    assert abs(euler_lagrange_residual(lagrangian(spec), st_, a)) <= 1e-6
    assert abs(euler_lagrange_residual(alternative_lagrangian(spec), st_, a)) <= 1e-6
