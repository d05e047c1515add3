from fractions import Fraction

import pytest

from biham.algebra import RatFn
from biham.exprs import parse_ratfn
from biham.geometry import (
    MetricField,
    MetricError,
    bianchi_first_identity_holds,
    christoffel,
    constant_curvature_test,
    invert_metric,
    riemann,
    riemann_symmetries_hold,
    signature,
)
from biham.linalg import mat_det, mat_mul

V = ("u1", "u2", "u3")


def diag_metric(coords, entries):
    n = len(coords)
    zero = RatFn.zero(coords)
    rows = [[zero] * n for _ in range(n)]
    for i, e in enumerate(entries):
        rows[i][i] = e
    return MetricField(coords, tuple(tuple(r) for r in rows))


def space_form(coords, kappa):
    """Rational constant-curvature metric: delta_ij / (1 + kappa r^2 / 4)^2."""
    r2 = RatFn.zero(coords)
    for name in coords:
        r2 = r2 + RatFn.variable(coords, name) ** 2
    conf = RatFn.one(coords) / (RatFn.one(coords) + r2 * (Fraction(kappa) / 4)) ** 2
    return diag_metric(coords, [conf] * len(coords))


def test_flat_metric_curvature_zero():
    flat = diag_metric(V, [RatFn.one(V)] * 3)
    assert constant_curvature_test(flat) == 0
    assert all(r.is_zero for a in riemann(flat) for b in a for c in b for r in c)


@pytest.mark.parametrize("kappa", [1, -1, Fraction(2, 3)])
def test_space_forms(kappa):
    g = space_form(("x", "y"), kappa)
    assert constant_curvature_test(g) == Fraction(kappa)


def test_warped_plane_sanity():
    """g = dr^2 + r^4 dt^2 has Gaussian curvature -f''/f with f = r^2,
    so R_1212 = -2 r^2; hand oracle."""
    W = ("r", "t")
    g = diag_metric(W, [RatFn.one(W), RatFn.variable(W, "r") ** 4])
    riem = riemann(g)
    assert riem[0][1][0][1] == parse_ratfn("-2*r^2", W)
    assert constant_curvature_test(g) is None
    assert bianchi_first_identity_holds(riem)
    assert riemann_symmetries_hold(riem)


def test_generic_metric_not_constant():
    W = ("r", "t")
    g = diag_metric(W, [RatFn.one(W), RatFn.variable(W, "r") ** 4 + 1])
    assert constant_curvature_test(g) is None


def test_degenerate_metric_rejected():
    zero = RatFn.zero(V)
    one = RatFn.one(V)
    with pytest.raises(MetricError):
        MetricField(V, ((one, zero, zero), (zero, one, zero), (zero, zero, zero)))


def test_asymmetric_metric_rejected():
    one = RatFn.one(V)
    zero = RatFn.zero(V)
    u1 = RatFn.variable(V, "u1")
    with pytest.raises(MetricError):
        MetricField(V, ((one, u1, zero), (zero, one, zero), (zero, zero, one)))


def test_inverse_identity_and_det():
    g = space_form(V, 1)
    inv = invert_metric(g)
    prod = mat_mul(g.g, inv)
    assert all((prod[i][j].is_one if i == j else prod[i][j].is_zero)
               for i in range(3) for j in range(3))
    assert g.det() * mat_det(inv, RatFn.one(V)) == RatFn.one(V)


def test_christoffel_symmetry():
    g = space_form(("x", "y"), -1)
    gamma = christoffel(g)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                assert gamma[i][j][k] == gamma[i][k][j]


def test_signature_of_indefinite_metric():
    W = ("x", "y")
    one = RatFn.one(W)
    g = diag_metric(W, [one, -one])
    assert signature(g) == (1, 1)


# -- WDVV metric ------------------------------------------------------------------------


def test_wdvv_metric_properties(wdvv_derivation, wdvv_system):
    from biham import wdvv

    metric = MetricField(wdvv_system.coords, wdvv_derivation.tensors.G)
    assert metric.det() == wdvv.expected_metric_determinant()
    assert invert_metric(metric) == wdvv.expected_contravariant_symplectic_metric()
    assert constant_curvature_test(metric) == Fraction(-1, 16)
    assert signature(metric) == (2, 1)
    riem = riemann(metric)
    assert bianchi_first_identity_holds(riem)
    assert riemann_symmetries_hold(riem)
