from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biham.algebra import RatFn
from biham.exprs import parse_expression
from biham.jets import DiffPoly, euler
from biham.linalg import mat_inverse
from biham.operators import (
    DiffOp,
    OperatorMatrix,
    ShapeError,
    is_homogeneous,
    leading_and_lower,
    operator_from_json,
    operator_to_json,
)

V = ("u1", "u2", "u3")
W = ("u1",)


def e(text, coords=V):
    return parse_expression(text, coords)


def dx(coords=V, k=1):
    return DiffOp.dx(coords, k)


# -- scalar composition and adjoint ------------------------------------------------


def test_leibniz_compose():
    got = dx(W).compose(DiffOp.mult(e("u1", W)))
    assert got == DiffOp(W, {1: e("u1", W), 0: e("u1_x", W)})


def test_compose_identity():
    p = DiffOp(W, {2: e("u1", W), 0: e("u1_x^2", W)})
    assert p.compose(DiffOp.identity(W)) == p
    assert DiffOp.identity(W).compose(p) == p


def test_adjoint_of_dx():
    assert dx(W).adjoint() == DiffOp(W, {1: DiffPoly.constant(W, -1)})


def test_adjoint_integration_by_parts():
    f_dx = DiffOp.mult(e("u1", W)).compose(dx(W))
    assert f_dx.adjoint() == DiffOp(W, {1: e("-u1", W), 0: e("-u1_x", W)})


def test_k_dx_compose_inverse():
    K = [[Fraction(1, 2), Fraction(-1, 2), Fraction(-1, 2)],
         [Fraction(-1, 2), Fraction(1, 2), Fraction(-1, 2)],
         [Fraction(-1, 2), Fraction(-1, 2), Fraction(1, 2)]]
    M = mat_inverse(K, Fraction(1))
    kdx = OperatorMatrix.from_constant_matrix(V, K, 1)
    mdx = OperatorMatrix.from_constant_matrix(V, M, 1)
    identity2 = OperatorMatrix.from_constant_matrix(
        V, [[1 if i == j else 0 for j in range(3)] for i in range(3)], 2)
    assert kdx.compose(mdx) == identity2


def test_apply_examples():
    K = [[Fraction(1, 2), Fraction(-1, 2), Fraction(-1, 2)],
         [Fraction(-1, 2), Fraction(1, 2), Fraction(-1, 2)],
         [Fraction(-1, 2), Fraction(-1, 2), Fraction(1, 2)]]
    kdx = OperatorMatrix.from_constant_matrix(V, K, 1)
    flow = kdx.apply(euler(e("u1*u2*u3")))
    # first component of the flow: (u2 u3 - u1 u2 - u1 u3)_x / 2, expanded
    from biham.jets import total_x

    assert flow[0] == total_x(e("1/2*(u2*u3-u1*u2-u1*u3)"))
    psi = (e("u1"), e("u2_x"), e("u3"))
    assert OperatorMatrix.identity(V, 3).apply(psi) == psi
    box = OperatorMatrix(W, [[dx(W, 3)]])
    assert box.apply((e("u1", W),)) == (e("u1_xxx", W),)


# -- randomized operator algebra -----------------------------------------------------

coeff = st.fractions(min_value=-3, max_value=3, max_denominator=4).filter(lambda f: f != 0)


@st.composite
def diff_ops(draw, coords=("u1", "u2")):
    out = DiffOp.zero(coords)
    for _ in range(draw(st.integers(1, 2))):
        power = draw(st.integers(0, 2))
        base = DiffPoly.constant(coords, draw(coeff))
        if draw(st.booleans()):
            base = base * DiffPoly.base(coords, draw(st.integers(0, 1)))
        if draw(st.booleans()):
            base = base * DiffPoly.jet(coords, draw(st.integers(0, 1)), 1)
        out = out + DiffOp(coords, {power: base})
    return out


@st.composite
def operator_matrices(draw):
    coords = ("u1", "u2")
    return OperatorMatrix(coords, [[draw(diff_ops()) for _ in range(2)] for _ in range(2)])


@settings(max_examples=30)
@given(operator_matrices())
def test_adjoint_involution(p):
    assert p.adjoint(max_order=8).adjoint(max_order=8) == p


@settings(max_examples=25)
@given(operator_matrices(), operator_matrices())
def test_adjoint_antihomomorphism(p, q):
    lhs = p.compose(q, max_order=10).adjoint(max_order=10)
    rhs = q.adjoint(max_order=10).compose(p.adjoint(max_order=10), max_order=10)
    assert lhs == rhs


@settings(max_examples=15)
@given(operator_matrices(), operator_matrices(), operator_matrices())
def test_compose_associative(p, q, r):
    assert p.compose(q, 12).compose(r, 12) == p.compose(q.compose(r, 12), 12)


@settings(max_examples=20)
@given(operator_matrices(), operator_matrices())
def test_apply_respects_composition(p, q):
    coords = ("u1", "u2")
    psi = (parse_expression("u1*u2_x", coords), parse_expression("u2", coords))
    lhs = p.compose(q, 12).apply(psi, 12)
    rhs = p.apply(q.apply(psi, 12), 12)
    assert lhs == rhs


# -- homogeneity and shapes -------------------------------------------------------------


def test_homogeneity_examples():
    K = [[1, 0], [0, 1]]
    coords = ("u1", "u2")
    assert is_homogeneous(OperatorMatrix.from_constant_matrix(coords, K, 1), 1)
    assert is_homogeneous(OperatorMatrix.from_constant_matrix(coords, K, 3), 3)
    mixed = OperatorMatrix(coords, [[DiffOp(coords, {1: DiffPoly.one(coords),
                                                     0: DiffPoly.one(coords)}),
                                     DiffOp.zero(coords)],
                                    [DiffOp.zero(coords), DiffOp.zero(coords)]])
    assert not is_homogeneous(mixed, 1)


def test_third_order_constant_shape():
    K = [[2, 1], [1, 3]]
    coords = ("u1", "u2")
    p = OperatorMatrix.from_constant_matrix(coords, K, 3)
    shape = leading_and_lower(p, 3)
    assert shape.g[0][0].constant_value() == 2
    assert all(shape.d1[i][j][k].is_zero for i in range(2) for j in range(2) for k in range(2))
    assert all(shape.c1[i][j][k].is_zero for i in range(2) for j in range(2) for k in range(2))


def test_first_order_shape_of_wdvv_a1():
    from biham import wdvv

    shape = leading_and_lower(wdvv.first_structure_source(), 1)
    A = ("a", "b", "c")
    assert shape.g[0][1] == parse_expression("1/2*a", A).as_ratfn()
    assert shape.b[0][1][0] == RatFn.constant(A, Fraction(1, 2))
    assert shape.g[0][0] == RatFn.constant(A, Fraction(-3, 2))


def test_shape_error_on_inhomogeneous():
    coords = ("u1", "u2")
    bad = OperatorMatrix(coords, [[DiffOp(coords, {3: DiffPoly.one(coords),
                                                   0: DiffPoly.one(coords)}),
                                   DiffOp.zero(coords)],
                                  [DiffOp.zero(coords), dx(coords, 3)]])
    with pytest.raises(ShapeError):
        leading_and_lower(bad, 3)


def test_order_mismatch_is_shape_error():
    coords = ("u1", "u2")
    with pytest.raises(ShapeError):
        leading_and_lower(OperatorMatrix.from_constant_matrix(coords, [[1, 0], [0, 1]], 1), 3)


# -- serialization ------------------------------------------------------------------------


@settings(max_examples=25)
@given(operator_matrices())
def test_json_round_trip(p):
    assert operator_from_json(operator_to_json(p)) == p


def test_dimension_mismatch():
    a = OperatorMatrix.identity(("u1", "u2"), 2)
    b = OperatorMatrix.identity(("u1", "u2", "u3"), 3)
    with pytest.raises(Exception):
        a.compose(b)
