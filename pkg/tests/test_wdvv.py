from fractions import Fraction

import pytest

from biham import wdvv
from biham.jets import is_total_divergence, total_x
from biham.linalg import mat_mul
from biham.operators import is_homogeneous, leading_and_lower
from biham.variational import skew_adjoint_check


def test_checked_in_json_matches_builders(wdvv_bundle):
    loaded = wdvv.load_fixture("wdvv3")
    assert loaded.a1_source == wdvv_bundle.a1_source
    assert loaded.a2_source == wdvv_bundle.a2_source
    assert loaded.transform.source_in_target == wdvv_bundle.transform.source_in_target
    assert loaded.K == wdvv_bundle.K
    assert loaded.hamiltonian == wdvv_bundle.hamiltonian


def test_unknown_fixture():
    with pytest.raises(KeyError):
        wdvv.load_fixture("wdvv6")


def test_source_structures_are_skew_and_homogeneous(wdvv_bundle):
    assert skew_adjoint_check(wdvv_bundle.a1_source)
    assert is_homogeneous(wdvv_bundle.a1_source, 1)
    assert skew_adjoint_check(wdvv_bundle.a2_source)
    assert is_homogeneous(wdvv_bundle.a2_source, 3)


def test_monge_metric_inverts_leading(wdvv_bundle):
    shape = leading_and_lower(wdvv_bundle.a2_source, 3)
    prod = mat_mul(shape.g, wdvv.monge_metric())
    assert all((prod[i][j].is_one if i == j else prod[i][j].is_zero)
               for i in range(3) for j in range(3))


def test_casimir_canonical_form():
    assert wdvv.casimir_canonical_form()


def test_lax_eigenvalue_check():
    assert wdvv.characteristic_polynomial_factors()


def test_lax_numeric_points():
    assert wdvv.eigenvalues_at_point([Fraction(1), Fraction(2), Fraction(3)])
    assert wdvv.eigenvalues_at_point([Fraction(0), Fraction(0), Fraction(0)])
    assert wdvv.eigenvalues_at_point([Fraction(-1, 2), Fraction(5, 3), Fraction(7)])


def test_flux_check():
    assert wdvv.flux_check()


def test_source_fluxes_are_conserved_density_derivatives(wdvv_bundle):
    # the coordinates themselves are conserved: the fluxes are explicit
    # x-derivatives by construction
    for f in wdvv.flux_source():
        assert is_total_divergence(f)


def test_flat_flow_matches_stated_form(wdvv_system):
    from biham.exprs import parse_expression

    flow = wdvv_system.flow()
    U = wdvv_system.coords
    # component i: ((u^j u^k - u^i u^j - u^i u^k) / 2)_x with distinct i, j, k
    expected = [
        total_x(parse_expression("1/2*(u2*u3-u1*u2-u1*u3)", U)),
        total_x(parse_expression("1/2*(u1*u3-u1*u2-u2*u3)", U)),
        total_x(parse_expression("1/2*(u1*u2-u1*u3-u2*u3)", U)),
    ]
    assert list(flow) == expected


def test_conserved_densities_of_the_flow(wdvv_system, wdvv_derivation):
    from biham.jets import DiffPoly, evolutionary_derivative

    flow = wdvv_system.flow()
    for ln in wdvv_derivation.rep.Ln:
        assert is_total_divergence(evolutionary_derivative(ln, flow))
    weighted = DiffPoly.zero(wdvv_system.coords)
    for i in range(3):
        weighted = weighted + DiffPoly.base(wdvv_system.coords, i) * wdvv_derivation.rep.Ln[i]
    assert is_total_divergence(weighted)
