"""Built-in three-component WDVV fixture and its verifications.

The fixture carries the two Hamiltonian structures of the hydrodynamic
system a_t = b_x, b_t = c_x, c_t = (b^2 - a*c)_x in its natural chart
(a, b, c), the point transformation to the eigenvalue coordinates
(u1, u2, u3) of the x-Lax matrix (a = u1+u2+u3, b = -(u1u2+u2u3+u3u1)/2,
c = u1u2u3), the constant flat pairing K of the first structure, the flat
Hamiltonian density u1*u2*u3, and the expected tensors of the Lagrangian
representation in closed form.

The operators are shipped as JSON in the shared wire format and also built
programmatically here; a test pins the two against each other.  All
expected values are compared as normal forms, never as strings.

The closed forms of the characteristic tensor are normalized so that the
assembled covector satisfies the reconstruction and Lie-derivative
identities exactly; see expected_characteristic_tensor for the convention.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Sequence

from .algebra import MPoly, RatFn
from .exprs import parse_expression, parse_ratfn
from .jets import DiffPoly
from .operators import DiffOp, OperatorMatrix, operator_from_json
from .transform import PointTransform

SOURCE_COORDS = ("a", "b", "c")
FLAT_COORDS = ("u1", "u2", "u3")

_HALF = Fraction(1, 2)

K_MATRIX: tuple[tuple[Fraction, ...], ...] = (
    (_HALF, -_HALF, -_HALF),
    (-_HALF, _HALF, -_HALF),
    (-_HALF, -_HALF, _HALF),
)


def point_transform() -> PointTransform:
    """Chart change (a, b, c) -> eigenvalue coordinates (u1, u2, u3)."""
    return PointTransform.from_expressions(
        SOURCE_COORDS,
        FLAT_COORDS,
        ("u1+u2+u3", "-1/2*(u1*u2+u2*u3+u3*u1)", "u1*u2*u3"),
    )


def first_structure_source() -> OperatorMatrix:
    """The first-order homogeneous structure in the (a, b, c) chart."""
    A = SOURCE_COORDS
    dx = lambda k=1: DiffOp.dx(A, k)
    mult = lambda e: DiffOp.mult(parse_expression(e, A))
    rows = [
        [mult("-3/2").compose(dx()),
         dx().compose(mult("a")).scale(_HALF),
         dx().compose(mult("b"))],
        [mult("a").compose(dx()).scale(_HALF),
         (dx().compose(mult("b")) + mult("b").compose(dx())).scale(_HALF),
         mult("c").compose(dx()).scale(Fraction(3, 2)) + mult("c_x")],
        [mult("b").compose(dx()),
         dx().compose(mult("c")).scale(Fraction(3, 2)) - mult("c_x"),
         mult("b^2-a*c").compose(dx()) + dx().compose(mult("b^2-a*c"))],
    ]
    return OperatorMatrix(A, rows)


def second_structure_source() -> OperatorMatrix:
    """The third-order homogeneous structure in its Casimir chart (a, b, c)."""
    A = SOURCE_COORDS
    dx = lambda k=1: DiffOp.dx(A, k)
    mult = lambda e: DiffOp.mult(parse_expression(e, A))
    zero = DiffOp.zero(A)
    e13 = dx(3)
    e23 = (dx(2).compose(mult("a")).compose(dx())).scale(-1)
    e32 = (dx().compose(mult("a")).compose(dx(2))).scale(-1)
    e33 = (dx(2).compose(mult("b")).compose(dx())
           + dx().compose(mult("b")).compose(dx(2))
           + dx().compose(mult("a")).compose(dx()).compose(mult("a")).compose(dx()))
    return OperatorMatrix(A, [[zero, zero, e13], [zero, dx(3), e23], [e13, e32, e33]])


def hamiltonian_density() -> DiffPoly:
    return parse_expression("u1*u2*u3", FLAT_COORDS)


def monge_metric() -> tuple[tuple[RatFn, ...], ...]:
    """Covariant quadratic metric that inverts the leading term of the
    third-order structure in its Casimir chart."""
    p = lambda e: parse_ratfn(e, SOURCE_COORDS)
    return (
        (p("-2*b"), p("a"), p("1")),
        (p("a"), p("1"), p("0")),
        (p("1"), p("0"), p("0")),
    )


def lax_x_matrix() -> tuple[tuple[RatFn, ...], ...]:
    """Coefficient matrix of the x-evolution in the Lax pair (lambda removed)."""
    p = lambda e: parse_ratfn(e, SOURCE_COORDS)
    return (
        (p("0"), p("1"), p("0")),
        (p("b"), p("a"), p("1")),
        (p("c"), p("b"), p("0")),
    )


def flux_source() -> tuple[DiffPoly, ...]:
    """Right-hand sides of the hydrodynamic system in the (a, b, c) chart."""
    from .jets import total_x

    return tuple(
        total_x(parse_expression(e, SOURCE_COORDS)) for e in ("b", "c", "b^2-a*c"))


# ---------------------------------------------------------------------------
# Expected closed forms in the flat chart
# ---------------------------------------------------------------------------


def _others(i: int) -> tuple[int, int]:
    return tuple(x for x in (0, 1, 2) if x != i)  # type: ignore[return-value]


def _u(i: int) -> str:
    return FLAT_COORDS[i]


def expected_second_leading_metric() -> tuple[tuple[RatFn, ...], ...]:
    """Contravariant leading metric of the transformed third-order structure."""
    rows = [[None] * 3 for _ in range(3)]
    for i in range(3):
        j, k = _others(i)
        ui, uj, uk = _u(i), _u(j), _u(k)
        rows[i][i] = parse_ratfn(
            f"(3*{ui}^2+{uj}^2+{uk}^2-3*{ui}*{uj}-3*{ui}*{uk}+{uj}*{uk})"
            f"/(({ui}-{uj})^2*({ui}-{uk})^2)", FLAT_COORDS)
    for i in range(3):
        for j in range(3):
            if i != j:
                rows[i][j] = parse_ratfn(f"-1/(({_u(i)}-{_u(j)})^2)", FLAT_COORDS)
    return tuple(tuple(r) for r in rows)


def expected_symplectic_metric() -> tuple[tuple[RatFn, ...], ...]:
    """The symmetric tensor G of the characteristic ansatz (leading part of
    the symplectic pairing up to the documented sign)."""
    rows = [[None] * 3 for _ in range(3)]
    for i in range(3):
        j, k = _others(i)
        ui, uj, uk = _u(i), _u(j), _u(k)
        rows[i][i] = parse_ratfn(
            f"(({ui}-{uj})^2+({ui}-{uk})^2+({uj}-{uk})^2)"
            f"/(2*({ui}-{uj})^2*({ui}-{uk})^2)", FLAT_COORDS)
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            k = next(x for x in (0, 1, 2) if x not in (i, j))
            ui, uj, uk = _u(i), _u(j), _u(k)
            rows[i][j] = parse_ratfn(
                f"(({ui}-{uj})^2+({ui}-{uk})^2+({uj}-{uk})^2-4*({uk}-{ui})*({uk}-{uj}))"
                f"/(2*({ui}-{uj})^2*({ui}-{uk})*({uj}-{uk}))", FLAT_COORDS)
    return tuple(tuple(r) for r in rows)


def expected_metric_determinant() -> RatFn:
    return parse_ratfn(
        "-16/((u1-u2)^2*(u1-u3)^2*(u2-u3)^2)", FLAT_COORDS)


def expected_contravariant_symplectic_metric() -> tuple[tuple[RatFn, ...], ...]:
    rows = [[None] * 3 for _ in range(3)]
    for i in range(3):
        j, k = _others(i)
        rows[i][i] = parse_ratfn(
            f"-1/4*({_u(i)}-{_u(j)})*({_u(i)}-{_u(k)})", FLAT_COORDS)
    for i in range(3):
        for j in range(3):
            if i != j:
                rows[i][j] = parse_ratfn(f"-1/4*({_u(i)}-{_u(j)})^2", FLAT_COORDS)
    return tuple(tuple(r) for r in rows)


def _window_products_first_component(s: int, m: int) -> str:
    """Closed form of the first-component tensor entry (0-based s, m).

    Each lower index contributes the difference of the two coordinates it
    skips; the mixed entries with a repeated first index carry the cube on
    the factor of the repeated lower index.
    """
    if s == 0 and m == 0:
        # both windows skip index 1 and give (u2 - u3)
        return ("((u1-u2)+(u1-u3))*(u2-u3)^2/(2*(u1-u2)^3*(u1-u3)^3)")
    if s != 0 and m != 0:
        wa = "(u1-u3)" if s == 1 else "(u1-u2)"   # window skipping index s
        wb = "(u1-u3)" if m == 1 else "(u1-u2)"
        return f"((u1-u2)+(u1-u3))*{wa}*{wb}/(2*(u1-u2)^3*(u1-u3)^3)"
    k = s if s != 0 else m
    uk = _u(k)
    uj = _u(next(x for x in (1, 2) if x != k))
    return f"-(((u1-{uk})^2+(u1-{uj})^2))/(2*((u1-{uj})^2)*((u1-{uk})^3))"


def expected_characteristic_tensor() -> tuple:
    """The tensor L[n][s][m] entering the characteristic covector.

    Built from the closed-form first-component expressions and cyclic
    permutation for the other components, scaled by -2 so that the
    assembled characteristic reconstructs the operator and passes the
    Lie-derivative certification exactly (the unscaled window products are
    conserved densities of the same flow, but with the wrong weight in the
    structure formula).
    """
    first = [[parse_ratfn(_window_products_first_component(s, m), FLAT_COORDS) * (-2)
              for m in range(3)] for s in range(3)]
    tensor = [[[None] * 3 for _ in range(3)] for _ in range(3)]
    perms = {0: (0, 1, 2), 1: (1, 2, 0), 2: (2, 0, 1)}
    for n in range(3):
        perm = perms[n]
        values = [RatFn.variable(FLAT_COORDS, _u(perm[t])) for t in range(3)]
        inverse = [0, 0, 0]
        for t in range(3):
            inverse[perm[t]] = t
        for s in range(3):
            for m in range(3):
                tensor[n][s][m] = first[inverse[s]][inverse[m]].substitute(values)
    return tuple(tuple(tuple(r) for r in rows) for rows in tensor)


def expected_distinguished_two_form() -> tuple[tuple[RatFn, ...], ...]:
    """The distinguished skew solution of the potential equation."""
    rows = [[parse_ratfn("0", FLAT_COORDS)] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            k = next(x for x in (0, 1, 2) if x not in (i, j))
            ui, uj, uk = _u(i), _u(j), _u(k)
            rows[i][j] = parse_ratfn(
                f"-1/3*(1/(({ui}-{uj})*({ui}-{uk})) - 1/(({uj}-{ui})*({uj}-{uk})))",
                FLAT_COORDS)
    return tuple(tuple(r) for r in rows)


# ---------------------------------------------------------------------------
# Fixture object and loading
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WdvvFixture:
    source_coords: tuple[str, ...]
    flat_coords: tuple[str, ...]
    a1_source: OperatorMatrix
    a2_source: OperatorMatrix
    transform: PointTransform
    K: tuple[tuple[Fraction, ...], ...]
    hamiltonian: DiffPoly

    def system(self, a2_flat: OperatorMatrix | None = None, validate: bool = True):
        """Assemble the flat-coordinate bi-Hamiltonian system.

        The second structure is transformed on demand (a few seconds); pass
        a precomputed a2_flat to skip that.
        """
        from .pipeline import BiHamiltonianSystem
        from .transform import change_coordinates

        if a2_flat is None:
            a2_flat = change_coordinates(self.a2_source, self.transform)
        return BiHamiltonianSystem(
            coords=self.flat_coords,
            K=self.K,
            A2=a2_flat,
            hamiltonian=self.hamiltonian,
            transform=self.transform,
            validate=validate,
        )


def _data_text(name: str) -> str:
    return (resources.files("biham") / "data" / "wdvv3" / name).read_text()


def load_fixture(name: str = "wdvv3") -> WdvvFixture:
    """Load the checked-in fixture by name (only "wdvv3" ships)."""
    if name != "wdvv3":
        raise KeyError(f"unknown fixture {name!r}")
    a1 = operator_from_json(json.loads(_data_text("a1_source.json")))
    a2 = operator_from_json(json.loads(_data_text("a2_source.json")))
    tr = json.loads(_data_text("transform.json"))
    transform = PointTransform.from_expressions(
        tr["source"], tr["target"], [tr["source_in_target"][c] for c in tr["source"]])
    sysdata = json.loads(_data_text("system.json"))
    K = tuple(tuple(Fraction(x) for x in row) for row in sysdata["K"])
    h = parse_expression(sysdata["hamiltonian"], tuple(tr["target"]))
    return WdvvFixture(
        source_coords=tuple(tr["source"]),
        flat_coords=tuple(tr["target"]),
        a1_source=a1,
        a2_source=a2,
        transform=transform,
        K=K,
        hamiltonian=h,
    )


def builtin_fixture() -> WdvvFixture:
    """Programmatic twin of the checked-in JSON fixture."""
    return WdvvFixture(
        source_coords=SOURCE_COORDS,
        flat_coords=FLAT_COORDS,
        a1_source=first_structure_source(),
        a2_source=second_structure_source(),
        transform=point_transform(),
        K=K_MATRIX,
        hamiltonian=hamiltonian_density(),
    )


# ---------------------------------------------------------------------------
# Fixture-specific verifications
# ---------------------------------------------------------------------------


def characteristic_polynomial_factors() -> bool:
    """The x-Lax matrix has characteristic polynomial prod (lam - u^k).

    Expanded by explicit cofactors over the chart (lam, a, b, c), then the
    chart change is substituted and compared against the product form; both
    comparisons are exact.
    """
    ext = ("lam",) + SOURCE_COORDS
    lam = MPoly.variable(ext, "lam")
    c_entries = [[_embed(x, ext) for x in row] for row in lax_x_matrix()]
    m = [[lam * (1 if i == j else 0) - c_entries[i][j] for j in range(3)] for i in range(3)]
    det = (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )
    # char poly in the source chart: lam^3 - a lam^2 - 2b lam - c
    a = MPoly.variable(ext, "a")
    b = MPoly.variable(ext, "b")
    c = MPoly.variable(ext, "c")
    if det != lam ** 3 - a * lam ** 2 - b * lam * 2 - c:
        return False
    # substitute the chart change and compare with the factored form
    extu = ("lam",) + FLAT_COORDS
    values = [RatFn.variable(extu, "lam")]
    for expr in ("u1+u2+u3", "-1/2*(u1*u2+u2*u3+u3*u1)", "u1*u2*u3"):
        values.append(parse_ratfn(expr, extu))
    substituted = det.substitute(values)
    lam_u = MPoly.variable(extu, "lam")
    product = MPoly.one(extu)
    for name in FLAT_COORDS:
        product = product * (lam_u - MPoly.variable(extu, name))
    return substituted == RatFn(product)


def _embed(x: RatFn, ext: tuple[str, ...]) -> MPoly:
    """Reinterpret a polynomial RatFn of (a, b, c) inside the extended chart."""
    if not x.is_polynomial:
        raise ValueError("Lax entries must be polynomial")
    out = {}
    for exps, coeff in x.num.terms.items():
        out[(0,) + exps] = coeff
    return MPoly(ext, out)


def eigenvalues_at_point(point: Sequence[Fraction]) -> bool:
    """At a rational flat point the char polynomial vanishes on u1, u2, u3."""
    ext = ("lam",) + SOURCE_COORDS
    a_val = sum(point, Fraction(0))
    b_val = -(point[0] * point[1] + point[1] * point[2] + point[2] * point[0]) / 2
    c_val = point[0] * point[1] * point[2]
    lam = MPoly.variable(ext, "lam")
    a = MPoly.variable(ext, "a")
    b = MPoly.variable(ext, "b")
    c = MPoly.variable(ext, "c")
    char = lam ** 3 - a * lam ** 2 - b * lam * 2 - c
    return all(char.evaluate([u, a_val, b_val, c_val]) == 0 for u in point)


def flux_check() -> bool:
    """The flat flow pushes forward to the (a, b, c) fluxes, both routes.

    Route one: apply the first structure to the Casimir covector of the
    density c in the source chart and compare with (b, c, b^2-ac)_x.
    Route two: differentiate the chart functions along the flat flow and
    compare with the rewritten source fluxes.
    """
    from .jets import euler, evolutionary_derivative, unit_covector
    from .operators import OperatorMatrix as _OM
    from .transform import rewrite

    a1 = first_structure_source()
    fluxes = flux_source()
    route_one = a1.apply(unit_covector(SOURCE_COORDS, 2))
    if any(route_one[i] != fluxes[i] for i in range(3)):
        return False

    tr = point_transform()
    h = hamiltonian_density()
    first_flat = _OM.from_constant_matrix(FLAT_COORDS, K_MATRIX, 1)
    flow = first_flat.apply(euler(h))
    for n in range(3):
        chart_fn = DiffPoly.from_ratfn(tr.source_in_target[n])
        lhs = evolutionary_derivative(chart_fn, flow)
        rhs = rewrite(fluxes[n], tr)
        if lhs != rhs:
            return False
    return True


def casimir_canonical_form() -> bool:
    """The source-chart third-order structure factors as Dx (g Dx + c_k a^k_x) Dx."""
    from .jets import total_x
    from .operators import leading_and_lower

    a2 = second_structure_source()
    shape = leading_and_lower(a2, 3)
    coords = SOURCE_COORDS
    n = 3
    dx = DiffOp.dx(coords)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            inner = DiffPoly.from_ratfn(shape.g[i][j])
            middle = DiffOp(coords, {1: inner})
            lower = DiffPoly.zero(coords)
            # candidate c_k from the Dx^2 coefficient minus the g-derivative part
            c2 = a2.entries[i][j].coefficient(2)
            g_deriv = DiffPoly.zero(coords)
            for k in range(n):
                d = shape.g[i][j].diff(k)
                if not d.is_zero:
                    g_deriv = g_deriv + DiffPoly.jet(coords, k, 1) * d
            lower = c2 - g_deriv
            middle = middle + DiffOp(coords, {0: lower})
            row.append(dx.compose(middle).compose(dx))
        rows.append(row)
    return OperatorMatrix(coords, rows) == a2
