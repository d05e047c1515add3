import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biham.exprs import parse_expression
from biham.jets import DiffPoly
from biham.operators import DiffOp, OperatorMatrix, is_homogeneous, leading_and_lower
from biham.transform import PointTransform, TransformError, change_coordinates, rewrite
from biham.variational import skew_adjoint_check


def test_identity_transform_preserves_operator():
    coords = ("u1", "u2")
    t = PointTransform.identity(coords)
    p = OperatorMatrix(coords, [
        [DiffOp(coords, {1: DiffPoly.base(coords, 0)}), DiffOp.zero(coords)],
        [DiffOp.zero(coords), DiffOp.dx(coords, 2)],
    ])
    assert change_coordinates(p, t) == p


def test_singular_jacobian_rejected():
    with pytest.raises(TransformError):
        PointTransform.from_expressions(("a", "b"), ("u1", "u2"), ("u1+u2", "2*u1+2*u2"))


def test_forward_inverse_consistency_checked():
    PointTransform.from_expressions(("a",), ("u1",), ("2*u1",), ("a/2",))  # fine
    with pytest.raises(TransformError):
        PointTransform.from_expressions(("a",), ("u1",), ("2*u1",), ("a",))


def test_rewrite_through_jets():
    t = PointTransform.from_expressions(("a",), ("u1",), ("u1^2",))
    f = parse_expression("a_x", ("a",))
    assert rewrite(f, t) == parse_expression("2*u1*u1_x", ("u1",))
    g = parse_expression("a*a_xx", ("a",))
    assert rewrite(g, t) == parse_expression("u1^2*(2*u1_x^2+2*u1*u1_xx)", ("u1",))


def test_wdvv_first_structure_becomes_flat(wdvv_bundle):
    flat = change_coordinates(wdvv_bundle.a1_source, wdvv_bundle.transform)
    expected = OperatorMatrix.from_constant_matrix(
        wdvv_bundle.flat_coords, wdvv_bundle.K, 1)
    assert flat == expected


def test_wdvv_second_structure_leading_metric(wdvv_bundle, wdvv_a2_flat):
    from biham import wdvv

    shape = leading_and_lower(wdvv_a2_flat, 3)
    assert shape.g == wdvv.expected_second_leading_metric()


def test_transform_preserves_skew_and_homogeneity(wdvv_a2_flat):
    assert skew_adjoint_check(wdvv_a2_flat)
    assert is_homogeneous(wdvv_a2_flat, 3)


# -- functoriality -----------------------------------------------------------------------


def _linear_transform(source, target, a, b):
    """Unimodular map with matrix [[1, a], [b, 1 + a b]]: always invertible."""
    s1, s2 = source
    t1, t2 = target
    e1 = f"{t1}+{a}*{t2}" if a >= 0 else f"{t1}-{-a}*{t2}"
    c = 1 + a * b
    e2 = f"{b}*{t1}+{c}*{t2}"
    return PointTransform.from_expressions(source, target, (e1, e2))


def _shear_transform(source, target, k):
    """Triangular polynomial map a1 = t1 + k t2^2, a2 = t2."""
    t1, t2 = target
    e1 = f"{t1}+{k}*{t2}^2" if k >= 0 else f"{t1}-{-k}*{t2}^2"
    return PointTransform.from_expressions(source, target, (e1, t2))


small = st.integers(min_value=-2, max_value=2)


@settings(max_examples=25)
@given(small, small, small, st.fractions(min_value=-2, max_value=2, max_denominator=3))
def test_change_of_coordinates_functorial(a, b, k, c):
    A, B, C = ("a1", "a2"), ("b1", "b2"), ("c1", "c2")
    t_ab = _linear_transform(A, B, a, b)
    t_bc = _shear_transform(B, C, k)
    p = OperatorMatrix(A, [
        [DiffOp(A, {1: DiffPoly.constant(A, 2)}),
         DiffOp(A, {0: DiffPoly.base(A, 0) * (c if c else 1)})],
        [DiffOp(A, {0: -(DiffPoly.base(A, 0) * (c if c else 1))}),
         DiffOp.dx(A, 2)],
    ])
    step = change_coordinates(change_coordinates(p, t_ab), t_bc)
    direct = change_coordinates(p, t_ab.compose(t_bc))
    assert step == direct


def test_compose_requires_chained_charts():
    t1 = PointTransform.identity(("u1", "u2"))
    t2 = PointTransform.identity(("v1", "v2"))
    with pytest.raises(TransformError):
        t1.compose(t2)
