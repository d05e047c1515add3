from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from biham.exprs import parse_expression
from biham.jets import DiffPoly, euler
from biham.operators import DiffOp, OperatorMatrix
from biham.variational import (
    compatibility_evidence,
    frechet,
    helmholtz_symmetric,
    jacobi_evidence,
    lie_derivative,
    monomial_covector_basis,
    operator_directional_derivative,
    presentation_check,
    skew_adjoint_check,
)

V = ("u1", "u2", "u3")


def e(text, coords=V):
    return parse_expression(text, coords)


# -- frechet -------------------------------------------------------------------


def test_frechet_of_translation_flow():
    F = tuple(DiffPoly.jet(V, i, 1) for i in range(3))
    assert frechet(F) == OperatorMatrix.from_constant_matrix(
        V, [[1 if i == j else 0 for j in range(3)] for i in range(3)], 1)


def test_frechet_of_cubic_gradient_is_hessian():
    lin = frechet(euler(e("u1*u2*u3")))
    assert lin.order() == 0
    assert lin.entry(0, 1).coefficient(0) == e("u3")
    assert lin.entry(2, 0).coefficient(0) == e("u2")
    assert lin.entry(0, 0).coefficient(0).is_zero


def test_frechet_matches_exact_directional_derivative():
    """Exact first-order oracle: restrict to a line in jet space and
    differentiate the resulting univariate rational function at 0."""
    from biham.algebra import MPoly

    K = [[Fraction(1, 2), Fraction(-1, 2), Fraction(-1, 2)],
         [Fraction(-1, 2), Fraction(1, 2), Fraction(-1, 2)],
         [Fraction(-1, 2), Fraction(-1, 2), Fraction(1, 2)]]
    flow = OperatorMatrix.from_constant_matrix(V, K, 1).apply(euler(e("u1*u2*u3")))
    lin = frechet(flow)

    base_point = [Fraction(1), Fraction(2), Fraction(-1)]
    jet_point = {(i, s): Fraction(2 * i - s, 3) for i in range(3) for s in (1, 2)}
    direction_base = [Fraction(1), Fraction(-2), Fraction(3)]
    direction_jet = {(i, s): Fraction(i + s, 2) for i in range(3) for s in (1, 2)}

    eps_chart = ("eps",)
    eps = MPoly.variable(eps_chart, "eps")
    for k in range(3):
        # build F^k(point + eps * direction) as a univariate polynomial in eps
        restricted = MPoly.zero(eps_chart)
        for mono, coeff in flow[k].terms.items():
            num = coeff.num
            den = coeff.den
            subs_num = _restrict(num, base_point, direction_base, eps)
            subs_den = _restrict(den, base_point, direction_base, eps)
            assert subs_den.is_constant  # coefficients here are polynomial
            piece = subs_num * (1 / subs_den.constant_value())
            for (comp, order), power in mono:
                jet_val = MPoly.constant(eps_chart, jet_point[(comp, order)]) + \
                    eps * direction_jet[(comp, order)]
                for _ in range(power):
                    piece = piece * jet_val
            restricted = restricted + piece
        oracle = restricted.diff(0).evaluate([Fraction(0)])

        applied = DiffPoly.zero(V)
        for i in range(3):
            entry = lin.entry(k, i)
            for order, c in entry.coeffs.items():
                direction_value = direction_base[i] if order == 0 else direction_jet[(i, order)]
                applied = applied + c * direction_value
        got = applied.evaluate(base_point, jet_point)
        assert got == oracle


def _restrict(p, base, direction, eps):
    out = type(eps).zero(eps.variables)
    for exps, c in p.terms.items():
        piece = type(eps).constant(eps.variables, c)
        for i, exp in enumerate(exps):
            line = type(eps).constant(eps.variables, base[i]) + eps * direction[i]
            for _ in range(exp):
                piece = piece * line
        out = out + piece
    return out


# -- helmholtz, presentation, skewness ------------------------------------------------


def test_helmholtz_on_euler_image():
    assert helmholtz_symmetric(euler(e("u1*u2_x^2+u3^3")))


def test_helmholtz_negative():
    assert not helmholtz_symmetric((e("u2_x"), DiffPoly.zero(V), DiffPoly.zero(V)))


def test_presentation_direct_form_zero():
    psi = euler(e("u1^2*u2"))
    assert presentation_check(OperatorMatrix.zero(V, 3), psi, potential_substitution=False)


def test_presentation_order_counting():
    K = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    b = OperatorMatrix.from_constant_matrix(V, K, 1)
    psi = (e("u1"), e("u2"), e("u3"))
    assert not presentation_check(b, psi, potential_substitution=False)
    # but the potential-variables form of the same covector is 2 Dx
    two_dx = OperatorMatrix.from_constant_matrix(V, [[2, 0, 0], [0, 2, 0], [0, 0, 2]], 1)
    assert presentation_check(two_dx, psi, potential_substitution=True)


def test_skew_checks():
    K = [[Fraction(1, 2), Fraction(-1, 2), Fraction(-1, 2)],
         [Fraction(-1, 2), Fraction(1, 2), Fraction(-1, 2)],
         [Fraction(-1, 2), Fraction(-1, 2), Fraction(1, 2)]]
    assert skew_adjoint_check(OperatorMatrix.from_constant_matrix(V, K, 1))
    assert not skew_adjoint_check(OperatorMatrix.identity(V, 3))


def test_wdvv_source_first_structure_is_skew(wdvv_bundle):
    assert skew_adjoint_check(wdvv_bundle.a1_source)


# -- lie derivative --------------------------------------------------------------------


def test_lie_derivative_zero_field():
    K = [[2, 0], [0, 1]]
    coords = ("u1", "u2")
    kdx = OperatorMatrix.from_constant_matrix(coords, K, 1)
    zero = tuple(DiffPoly.zero(coords) for _ in range(2))
    assert lie_derivative(kdx, zero).is_zero


def test_lie_derivative_constant_field():
    K = [[2, 0], [0, 1]]
    coords = ("u1", "u2")
    kdx = OperatorMatrix.from_constant_matrix(coords, K, 1)
    const = tuple(DiffPoly.constant(coords, 3) for _ in range(2))
    assert lie_derivative(kdx, const).is_zero


def test_lie_derivative_reproduces_toy_second_structure():
    coords = ("u1", "u2")
    K = [[2, 0], [0, 1]]
    kdx = OperatorMatrix.from_constant_matrix(coords, K, 1)
    tau = tuple(DiffPoly.jet(coords, i, 2) * Fraction(-1, 2) for i in range(2))
    assert lie_derivative(kdx, tau) == OperatorMatrix.from_constant_matrix(coords, K, 3)


@settings(max_examples=20)
@given(st.fractions(min_value=-2, max_value=2, max_denominator=3),
       st.fractions(min_value=-2, max_value=2, max_denominator=3))
def test_lie_derivative_additive(c1, c2):
    coords = ("u1", "u2")
    kdx = OperatorMatrix.from_constant_matrix(coords, [[2, 0], [0, 1]], 1)
    tau1 = (parse_expression("u1*u1_x", coords), parse_expression("u2_xx", coords))
    tau2 = (parse_expression("u2^2", coords), parse_expression("u1_x*u2_x", coords))
    mixed = tuple(a * c1 + b * c2 for a, b in zip(tau1, tau2))
    lhs = lie_derivative(kdx, mixed)
    rhs = lie_derivative(kdx, tau1).scale(c1) + lie_derivative(kdx, tau2).scale(c2)
    assert lhs == rhs


def test_lie_derivative_preserves_skewness(wdvv_derivation, wdvv_system):
    out = lie_derivative(wdvv_system.first_structure(), wdvv_derivation.rep.tau)
    assert skew_adjoint_check(out)


def test_directional_derivative_vanishes_for_constant_coefficients():
    coords = ("u1", "u2")
    kdx = OperatorMatrix.from_constant_matrix(coords, [[2, 0], [0, 1]], 1)
    flow = (parse_expression("u1_x*u2", coords), parse_expression("u1", coords))
    assert operator_directional_derivative(kdx, flow).is_zero


# -- evidence ---------------------------------------------------------------------------


def test_basis_size():
    assert len(monomial_covector_basis(V, 2)) == 27
    assert len(monomial_covector_basis(V, 0)) == 9


def test_jacobi_constant_coefficients_pass():
    kdx = OperatorMatrix.from_constant_matrix(("u1", "u2"), [[2, 0], [0, 1]], 1)
    report = jacobi_evidence(kdx, max_sigma=1)
    assert report.passed and report.total > 0


def test_jacobi_detects_broken_operator():
    coords = ("u1",)
    u = DiffPoly.base(coords, 0)
    broken = OperatorMatrix(coords, [[DiffOp(coords, {
        3: u,
        2: DiffPoly.jet(coords, 0, 1) * Fraction(3, 2),
        1: DiffPoly.jet(coords, 0, 2) * Fraction(1, 2),
    })]])
    assert skew_adjoint_check(broken)
    report = jacobi_evidence(broken, max_sigma=2)
    assert not report.passed
    assert report.failures[0].fingerprint


def test_known_hamiltonian_passes():
    coords = ("u1",)
    u = DiffPoly.base(coords, 0)
    ux = DiffPoly.jet(coords, 0, 1)
    kdv2 = OperatorMatrix(coords, [[DiffOp(coords, {
        3: DiffPoly.one(coords), 1: u * Fraction(2, 3), 0: ux * Fraction(1, 3)})]])
    assert jacobi_evidence(kdv2, max_sigma=2).passed


def test_compatibility_constant_pair():
    coords = ("u1", "u2")
    a = OperatorMatrix.from_constant_matrix(coords, [[2, 0], [0, 1]], 1)
    b = OperatorMatrix.from_constant_matrix(coords, [[2, 0], [0, 1]], 3)
    assert compatibility_evidence(a, b, max_sigma=1).passed
