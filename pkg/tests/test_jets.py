import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biham.algebra import MPoly, RatFn
from biham.exprs import parse_expression
from biham.jets import (
    DiffPoly,
    JetOrderError,
    NonPolynomialError,
    NotADivergenceError,
    NotVariationalError,
    euler,
    evolutionary_derivative,
    formal_x_integral,
    is_total_divergence,
    sigma_grade,
    total_x,
    volterra_homotopy,
)

V = ("u1", "u2", "u3")


def e(text):
    return parse_expression(text, V)


# -- total derivative -----------------------------------------------------------


def test_total_x_constant():
    assert total_x(DiffPoly.constant(V, 7)).is_zero


def test_total_x_base():
    assert total_x(e("u1")) == e("u1_x")


def test_total_x_leibniz_example():
    assert total_x(e("u1*u2_x")) == e("u1_x*u2_x+u1*u2_xx")


def test_total_x_respects_bound():
    with pytest.raises(JetOrderError):
        total_x(DiffPoly.jet(V, 0, 6))
    assert total_x(DiffPoly.jet(V, 0, 6), max_order=7) == DiffPoly.jet(V, 0, 7)


# -- euler operator ----------------------------------------------------------------


def test_euler_annihilates_divergence():
    f = total_x(e("u1*u2"))
    assert all(c.is_zero for c in euler(f))


def test_euler_integration_by_parts():
    comps = euler(e("1/2*u1_x^2"))
    assert comps[0] == e("-u1_xx")
    assert comps[1].is_zero and comps[2].is_zero


def test_euler_base_only():
    comps = euler(e("u1*u2*u3"))
    assert [str(c) for c in comps] == ["u2*u3", "u1*u3", "u1*u2"]


def test_divergence_examples():
    assert is_total_divergence(e("u1_x"))
    assert is_total_divergence(e("u1*u1_x"))
    assert not is_total_divergence(e("u1_x^2"))


# -- formal integration --------------------------------------------------------------


def test_integral_examples():
    assert formal_x_integral(e("u1_x")) == e("u1")
    assert formal_x_integral(e("u1_x*u2_x+u1*u2_xx")) == e("u1*u2_x")
    assert formal_x_integral(DiffPoly.zero(V)).is_zero


def test_integral_rejects_non_divergence():
    with pytest.raises(NotADivergenceError) as err:
        formal_x_integral(e("u1_x^2"))
    assert err.value.fingerprint  # carries the nonzero Euler components


def test_integral_rejects_constants():
    with pytest.raises(NotADivergenceError):
        formal_x_integral(DiffPoly.constant(V, 5))


def test_integral_of_rational_divergence():
    g = e("u1_xx/(u1-u2)")
    f = total_x(g)
    assert formal_x_integral(f) == g


# -- homotopy ---------------------------------------------------------------------------


def test_homotopy_inverts_euler_for_cubic():
    psi = euler(e("u1*u2*u3"))
    assert volterra_homotopy(psi) == e("u1*u2*u3")


def test_homotopy_zero():
    z = DiffPoly.zero(V)
    assert volterra_homotopy((z, z, z)).is_zero


def test_homotopy_second_order():
    psi = (e("-u1_xx"), DiffPoly.zero(V), DiffPoly.zero(V))
    L = volterra_homotopy(psi)
    assert euler(L) == psi  # equals u1_x^2/2 up to a total derivative


def test_homotopy_rejects_rational():
    psi = (e("1/(u1-u2)"), DiffPoly.zero(V), DiffPoly.zero(V))
    with pytest.raises(NonPolynomialError):
        volterra_homotopy(psi)


def test_homotopy_rejects_non_variational():
    psi = (e("u2_x"), DiffPoly.zero(V), DiffPoly.zero(V))
    with pytest.raises(NotVariationalError):
        volterra_homotopy(psi)


# -- grading -------------------------------------------------------------------------------


def test_grade_examples():
    assert sigma_grade(e("u1_xx")) == 2
    assert sigma_grade(e("u1_x*u2_x")) == 2
    assert sigma_grade(e("u1+u1_x")) is None
    assert sigma_grade(DiffPoly.zero(V)) == 0
    assert sigma_grade(e("u1*u2")) == 0


# -- evolutionary derivative ------------------------------------------------------------------


def test_evolutionary_derivative_is_chain_rule():
    flow = (e("u1_x"), e("u2_x"), e("u3_x"))  # D_t = D_x along translations
    f = e("u1*u2_x+u3^2")
    assert evolutionary_derivative(f, flow) == total_x(f)


# -- randomized properties ----------------------------------------------------------------------

coeff = st.fractions(min_value=-3, max_value=3, max_denominator=4).filter(lambda f: f != 0)


@st.composite
def small_diffpolys(draw, max_order=2, polynomial=False):
    n_terms = draw(st.integers(1, 2))
    total = DiffPoly.zero(V)
    for _ in range(n_terms):
        exps = draw(st.tuples(st.integers(0, 1), st.integers(0, 1), st.integers(0, 1)))
        c = RatFn(MPoly.monomial(V, exps, draw(coeff)))
        if not polynomial and draw(st.integers(0, 3)) == 0:
            c = c / RatFn(MPoly.variable(V, "u1") - MPoly.variable(V, "u2") + 3)
        piece = DiffPoly.from_ratfn(c)
        for _ in range(draw(st.integers(0, 2))):
            piece = piece * DiffPoly.jet(V, draw(st.integers(0, 2)), draw(st.integers(1, max_order)))
        total = total + piece
    return total


@settings(max_examples=30)
@given(small_diffpolys())
def test_euler_after_total_x_vanishes(f):
    assert all(c.is_zero for c in euler(total_x(f, max_order=8)))


@settings(max_examples=30)
@given(small_diffpolys(max_order=2))
def test_integral_round_trip(f):
    g = total_x(f, max_order=8)
    assert total_x(formal_x_integral(g), max_order=8) == g


@settings(max_examples=30)
@given(small_diffpolys(), small_diffpolys())
def test_total_x_is_derivation(f, g):
    lhs = total_x(f * g, max_order=10)
    rhs = total_x(f, max_order=10) * g + f * total_x(g, max_order=10)
    assert lhs == rhs


@given(small_diffpolys())
def test_grade_shifts_under_total_x(f):
    grade = sigma_grade(f)
    if grade is None or f.is_zero:
        return
    df = total_x(f, max_order=8)
    if not df.is_zero:
        assert sigma_grade(df) == grade + 1


@given(small_diffpolys(max_order=2, polynomial=True))
def test_homotopy_round_trip(f):
    psi = euler(f)
    rebuilt = volterra_homotopy(psi)
    assert euler(rebuilt) == psi
