"""Scalar and matrix differential operators in the total derivative d/dx.

A ``DiffOp`` is a finite sum sum_k c_k(u, u_x, ...) Dx^k in normal form: all
powers of Dx stand to the right of their DiffPoly coefficients, so equality
is coefficient-wise structural equality.  ``OperatorMatrix`` is a square
matrix of such operators over one chart.

Composition uses the Leibniz expansion Dx o c = c Dx + (D_x c); the formal
adjoint of c Dx^k is (-1)^k Dx^k o c, normal-ordered.  The shape analysis
``leading_and_lower`` recovers the coefficient tensors of homogeneous first-
and third-order operators (metric, b/c/d families) with symmetric index
normalization.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union

from .algebra import AlgebraError, MPoly, RatFn
from .jets import DEFAULT_JET_BOUND, Covector, DiffPoly, JetError, total_x

Scalar = Union[int, Fraction]


class OperatorError(JetError):
    """Structural errors when building or combining operators."""


class ShapeError(OperatorError):
    """An operator fails the homogeneous coefficient shape expected of it."""


class DiffOp:
    """Scalar differential operator sum_k coeff[k] * Dx^k, normal form."""

    __slots__ = ("coords", "coeffs")

    def __init__(self, coords: Sequence[str], coeffs: Mapping[int, DiffPoly] | None = None):
        object.__setattr__(self, "coords", tuple(coords))
        clean: dict[int, DiffPoly] = {}
        if coeffs:
            for k, c in coeffs.items():
                if k < 0:
                    raise OperatorError("negative powers of Dx are not supported")
                if c.coords != self.coords:
                    raise AlgebraError("coefficient chart mismatch")
                if not c.is_zero:
                    clean[k] = c
        object.__setattr__(self, "coeffs", clean)

    def __setattr__(self, name, value):
        raise AttributeError("DiffOp is immutable")

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, coords: Sequence[str]) -> "DiffOp":
        return cls(coords)

    @classmethod
    def identity(cls, coords: Sequence[str]) -> "DiffOp":
        return cls(coords, {0: DiffPoly.one(coords)})

    @classmethod
    def dx(cls, coords: Sequence[str], power: int = 1) -> "DiffOp":
        return cls(coords, {power: DiffPoly.one(coords)})

    @classmethod
    def mult(cls, value: DiffPoly | RatFn | MPoly | Scalar, coords: Sequence[str] | None = None) -> "DiffOp":
        """Multiplication operator by the given expression."""
        if isinstance(value, DiffPoly):
            return cls(value.coords, {0: value})
        if isinstance(value, RatFn):
            return cls(value.variables, {0: DiffPoly.from_ratfn(value)})
        if isinstance(value, MPoly):
            return cls(value.variables, {0: DiffPoly.from_ratfn(RatFn(value))})
        if coords is None:
            raise OperatorError("scalar multiplication operator needs a chart")
        return cls(coords, {0: DiffPoly.constant(coords, value)})

    # -- queries ----------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def order(self) -> int:
        """Largest power of Dx; -1 for the zero operator."""
        return max(self.coeffs, default=-1)

    def coefficient(self, k: int) -> DiffPoly:
        return self.coeffs.get(k, DiffPoly.zero(self.coords))

    # -- algebra -------------------------------------------------------------------

    def __add__(self, other: "DiffOp") -> "DiffOp":
        if not isinstance(other, DiffOp):
            return NotImplemented
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            s = out.get(k)
            s = c if s is None else s + c
            if s.is_zero:
                out.pop(k, None)
            else:
                out[k] = s
        return DiffOp(self.coords, out)

    def __neg__(self) -> "DiffOp":
        return DiffOp(self.coords, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self + (-other)

    def scale(self, factor) -> "DiffOp":
        return DiffOp(self.coords, {k: c * factor for k, c in self.coeffs.items()})

    def compose(self, other: "DiffOp", max_order: int = DEFAULT_JET_BOUND) -> "DiffOp":
        """Normal-ordered product self o other."""
        if other.coords != self.coords:
            raise AlgebraError("chart mismatch in composition")
        out: dict[int, DiffPoly] = {}
        for k, c in self.coeffs.items():
            for l, d in other.coeffs.items():
                derivative = d
                for j in range(k + 1):
                    # c Dx^k o d Dx^l picks up C(k, j) (D_x^j d) Dx^{k-j+l}
                    coeff = c * derivative * math.comb(k, j)
                    power = k - j + l
                    s = out.get(power)
                    s = coeff if s is None else s + coeff
                    if s.is_zero:
                        out.pop(power, None)
                    else:
                        out[power] = s
                    if j < k:
                        derivative = total_x(derivative, max_order)
        return DiffOp(self.coords, out)

    def adjoint(self, max_order: int = DEFAULT_JET_BOUND) -> "DiffOp":
        """Formal adjoint: (c Dx^k)* = (-1)^k Dx^k o c, normal-ordered."""
        out = DiffOp.zero(self.coords)
        for k, c in self.coeffs.items():
            term = DiffOp.dx(self.coords, k).compose(DiffOp.mult(c), max_order)
            if k % 2:
                term = -term
            out = out + term
        return out

    def apply(self, f: DiffPoly, max_order: int = DEFAULT_JET_BOUND) -> DiffPoly:
        if f.coords != self.coords:
            raise AlgebraError("chart mismatch in application")
        total = DiffPoly.zero(self.coords)
        if self.is_zero:
            return total
        derivative = f
        top = self.order()
        for k in range(top + 1):
            c = self.coeffs.get(k)
            if c is not None:
                total = total + c * derivative
            if k < top:
                derivative = total_x(derivative, max_order)
        return total

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.coords == other.coords and self.coeffs == other.coeffs

    __hash__ = None

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in sorted(self.coeffs, reverse=True):
            c = self.coeffs[k]
            c_s = str(c)
            if len(c.terms) > 1:
                c_s = f"({c_s})"
            if k == 0:
                parts.append(c_s)
            else:
                dx = "Dx" if k == 1 else f"Dx^{k}"
                parts.append(dx if c_s == "1" else f"{c_s}*{dx}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"DiffOp({self})"


class OperatorMatrix:
    """Square matrix of differential operators over one chart."""

    __slots__ = ("coords", "entries")

    def __init__(self, coords: Sequence[str], entries: Sequence[Sequence[DiffOp]]):
        object.__setattr__(self, "coords", tuple(coords))
        rows = []
        n = len(entries)
        for row in entries:
            row = tuple(row)
            if len(row) != n:
                raise OperatorError("operator matrix must be square")
            for op in row:
                if op.coords != self.coords:
                    raise AlgebraError("entry chart mismatch")
            rows.append(row)
        object.__setattr__(self, "entries", tuple(rows))

    def __setattr__(self, name, value):
        raise AttributeError("OperatorMatrix is immutable")

    # -- constructors -----------------------------------------------------------

    @classmethod
    def zero(cls, coords: Sequence[str], n: int) -> "OperatorMatrix":
        z = DiffOp.zero(coords)
        return cls(coords, [[z] * n for _ in range(n)])

    @classmethod
    def identity(cls, coords: Sequence[str], n: int) -> "OperatorMatrix":
        e = DiffOp.identity(coords)
        z = DiffOp.zero(coords)
        return cls(coords, [[e if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def from_constant_matrix(
        cls, coords: Sequence[str], matrix: Sequence[Sequence[Scalar]], dx_power: int = 0
    ) -> "OperatorMatrix":
        """Matrix of constants times Dx^dx_power (e.g. the flat pairing K Dx)."""
        rows = []
        for row in matrix:
            ops = []
            for value in row:
                c = Fraction(value)
                if c == 0:
                    ops.append(DiffOp.zero(coords))
                else:
                    ops.append(DiffOp(coords, {dx_power: DiffPoly.constant(coords, c)}))
            rows.append(ops)
        return cls(coords, rows)

    # -- queries ---------------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def is_zero(self) -> bool:
        return all(op.is_zero for row in self.entries for op in row)

    def order(self) -> int:
        return max((op.order() for row in self.entries for op in row), default=-1)

    def entry(self, i: int, j: int) -> DiffOp:
        return self.entries[i][j]

    # -- algebra -----------------------------------------------------------------------

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        self._check(other)
        return OperatorMatrix(
            self.coords,
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)],
        )

    def __neg__(self) -> "OperatorMatrix":
        return OperatorMatrix(self.coords, [[-op for op in row] for row in self.entries])

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        return self + (-other)

    def scale(self, factor) -> "OperatorMatrix":
        return OperatorMatrix(self.coords, [[op.scale(factor) for op in row] for row in self.entries])

    def _check(self, other: "OperatorMatrix") -> None:
        if self.coords != other.coords:
            raise AlgebraError("chart mismatch between operator matrices")
        if self.n != other.n:
            raise OperatorError("dimension mismatch between operator matrices")

    def compose(self, other: "OperatorMatrix", max_order: int = DEFAULT_JET_BOUND) -> "OperatorMatrix":
        self._check(other)
        n = self.n
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = DiffOp.zero(self.coords)
                for k in range(n):
                    left = self.entries[i][k]
                    right = other.entries[k][j]
                    if left.is_zero or right.is_zero:
                        continue
                    acc = acc + left.compose(right, max_order)
                row.append(acc)
            rows.append(row)
        return OperatorMatrix(self.coords, rows)

    def adjoint(self, max_order: int = DEFAULT_JET_BOUND) -> "OperatorMatrix":
        """Formal adjoint: entry (i,j) is the scalar adjoint of entry (j,i)."""
        n = self.n
        return OperatorMatrix(
            self.coords,
            [[self.entries[j][i].adjoint(max_order) for j in range(n)] for i in range(n)],
        )

    def apply(self, psi: Sequence[DiffPoly], max_order: int = DEFAULT_JET_BOUND) -> Covector:
        if len(psi) != self.n:
            raise OperatorError("covector length does not match matrix size")
        out = []
        for i in range(self.n):
            acc = DiffPoly.zero(self.coords)
            for j in range(self.n):
                op = self.entries[i][j]
                if not op.is_zero and not psi[j].is_zero:
                    acc = acc + op.apply(psi[j], max_order)
            out.append(acc)
        return tuple(out)

    def map_coefficients(self, fn) -> "OperatorMatrix":
        """New matrix with fn applied to every DiffPoly coefficient."""
        rows = []
        for row in self.entries:
            new_row = []
            for op in row:
                new_row.append(DiffOp(self.coords, {k: fn(c) for k, c in op.coeffs.items()}))
            rows.append(new_row)
        return OperatorMatrix(self.coords, rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        return self.coords == other.coords and self.entries == other.entries

    __hash__ = None

    def __str__(self) -> str:
        lines = []
        for i, row in enumerate(self.entries):
            for j, op in enumerate(row):
                if not op.is_zero:
                    lines.append(f"[{i}][{j}] {op}")
        return "\n".join(lines) or "0"

    def __repr__(self) -> str:
        return f"OperatorMatrix(n={self.n})"


# ---------------------------------------------------------------------------
# Module-level operation wrappers (the public verbs)
# ---------------------------------------------------------------------------


def compose(p: OperatorMatrix, q: OperatorMatrix, max_order: int = DEFAULT_JET_BOUND) -> OperatorMatrix:
    return p.compose(q, max_order)


def adjoint(p: OperatorMatrix, max_order: int = DEFAULT_JET_BOUND) -> OperatorMatrix:
    return p.adjoint(max_order)


def apply_operator(p: OperatorMatrix, psi: Sequence[DiffPoly], max_order: int = DEFAULT_JET_BOUND) -> Covector:
    return p.apply(psi, max_order)


def is_homogeneous(p: OperatorMatrix, m: int) -> bool:
    """True iff every term of every Dx^k coefficient has sigma-grade m - k."""
    for row in p.entries:
        for op in row:
            for k, c in op.coeffs.items():
                target = m - k
                if target < 0:
                    return False
                for mono in c.terms:
                    if sum(order * p_ for (_, order), p_ in mono) != target:
                        return False
    return True


# ---------------------------------------------------------------------------
# Coefficient tensors of homogeneous operators (first and third order)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FirstOrderShape:
    """Tensors of g^{ij} Dx + b^{ij}_k u^k_x."""

    g: tuple[tuple[RatFn, ...], ...]
    b: tuple[tuple[tuple[RatFn, ...], ...], ...]  # b[i][j][k]


@dataclass(frozen=True)
class ThirdOrderShape:
    """Tensors of the canonical third-order homogeneous expansion.

    g Dx^3 + b_k u^k_x Dx^2 + (c_k u^k_xx + c_{km} u^k_x u^m_x) Dx
          + d_k u^k_xxx + d_{km} u^k_xx u^m_x + d_{kmn} u^k_x u^m_x u^n_x

    with c_{km} and d_{kmn} symmetrized over their lower indices.
    """

    g: tuple[tuple[RatFn, ...], ...]
    b: tuple            # b[i][j][k]
    c1: tuple           # c1[i][j][k]        coefficient of u^k_xx in the Dx part
    c2: tuple           # c2[i][j][k][m]     symmetric
    d1: tuple           # d1[i][j][k]        coefficient of u^k_xxx
    d2: tuple           # d2[i][j][k][m]     u^k_xx u^m_x
    d3: tuple           # d3[i][j][k][m][n]  symmetric


def _jet_free(c: DiffPoly, what: str) -> RatFn:
    if c.jet_order() > 0:
        raise ShapeError(f"{what} must be jet-free, found {c}")
    return c.as_ratfn()


def _linear_in_jets(c: DiffPoly, order: int, n: int, what: str) -> list[RatFn]:
    """Coefficients a_k of c = sum_k a_k(u) u^k_order, or a shape error."""
    out = [RatFn.zero(c.coords)] * n
    for mono, coeff in c.terms.items():
        if len(mono) != 1 or mono[0][1] != 1 or mono[0][0][1] != order:
            raise ShapeError(f"{what}: unexpected term {dict(mono)} in {c}")
        out[mono[0][0][0]] = coeff
    return out


def leading_and_lower(p: OperatorMatrix, m: int) -> FirstOrderShape | ThirdOrderShape:
    """Extract the coefficient tensors of a homogeneous operator of order m.

    Only m = 1 and m = 3 occur in this package.  Raises ShapeError listing
    the offending coefficient when the operator does not have the expected
    homogeneous polynomial shape.
    """
    if p.order() != m:
        raise ShapeError(f"operator has order {p.order()}, expected {m}")
    if not is_homogeneous(p, m):
        raise ShapeError("operator is not homogeneous of order " + str(m))
    n = p.n
    coords = p.coords
    zero = RatFn.zero(coords)

    if m == 1:
        g = []
        b = []
        for i in range(n):
            g_row, b_row = [], []
            for j in range(n):
                op = p.entries[i][j]
                g_row.append(_jet_free(op.coefficient(1), f"entry ({i},{j}) Dx coefficient"))
                b_row.append(tuple(_linear_in_jets(op.coefficient(0), 1, n,
                                                   f"entry ({i},{j}) order-0 part")))
            g.append(tuple(g_row))
            b.append(tuple(b_row))
        return FirstOrderShape(g=tuple(g), b=tuple(b))

    if m != 3:
        raise ShapeError("only first- and third-order shapes are implemented")

    g = [[zero] * n for _ in range(n)]
    b = [[[zero] * n for _ in range(n)] for _ in range(n)]
    c1 = [[[zero] * n for _ in range(n)] for _ in range(n)]
    c2 = [[[[zero] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    d1 = [[[zero] * n for _ in range(n)] for _ in range(n)]
    d2 = [[[[zero] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    d3 = [[[[[zero] * n for _ in range(n)] for _ in range(n)] for _ in range(n)] for _ in range(n)]

    for i in range(n):
        for j in range(n):
            op = p.entries[i][j]
            g[i][j] = _jet_free(op.coefficient(3), f"entry ({i},{j}) Dx^3 coefficient")
            b_list = _linear_in_jets(op.coefficient(2), 1, n, f"entry ({i},{j}) Dx^2 coefficient")
            for k in range(n):
                b[i][j][k] = b_list[k]
            for mono, coeff in op.coefficient(1).terms.items():
                keys = tuple((key, pw) for key, pw in mono)
                if len(keys) == 1 and keys[0][0][1] == 2 and keys[0][1] == 1:
                    c1[i][j][keys[0][0][0]] = coeff
                elif all(order == 1 for (comp, order), _ in keys) and sum(pw for _, pw in keys) == 2:
                    comps = []
                    for (comp, _), pw in keys:
                        comps.extend([comp] * pw)
                    k_, m_ = comps
                    if k_ == m_:
                        c2[i][j][k_][m_] = coeff
                    else:
                        half = coeff * Fraction(1, 2)
                        c2[i][j][k_][m_] = half
                        c2[i][j][m_][k_] = half
                else:
                    raise ShapeError(f"entry ({i},{j}) Dx coefficient has term {coeff}*{dict(mono)}")
            for mono, coeff in op.coefficient(0).terms.items():
                keys = tuple((key, pw) for key, pw in mono)
                orders = sorted((order for (comp, order), pw in keys for _ in range(pw)), reverse=True)
                if orders == [3]:
                    d1[i][j][keys[0][0][0]] = coeff
                elif orders == [2, 1]:
                    k_ = next(comp for (comp, order), _ in keys if order == 2)
                    m_ = next(comp for (comp, order), _ in keys if order == 1)
                    d2[i][j][k_][m_] = coeff
                elif orders == [1, 1, 1]:
                    comps = []
                    for (comp, _), pw in keys:
                        comps.extend([comp] * pw)
                    comps.sort()
                    distinct = set(_permutations3(comps))
                    share = coeff * Fraction(1, len(distinct))
                    for (a_, b_, c_) in distinct:
                        d3[i][j][a_][b_][c_] = share
                else:
                    raise ShapeError(f"entry ({i},{j}) order-0 part has term {coeff}*{dict(mono)}")

    def freeze(x):
        if isinstance(x, list):
            return tuple(freeze(y) for y in x)
        return x

    return ThirdOrderShape(
        g=freeze(g), b=freeze(b), c1=freeze(c1), c2=freeze(c2),
        d1=freeze(d1), d2=freeze(d2), d3=freeze(d3),
    )


def _permutations3(comps: Sequence[int]) -> list[tuple[int, int, int]]:
    a, b, c = comps
    return list({(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)})


# ---------------------------------------------------------------------------
# JSON serialization of operators (the shared wire format)
# ---------------------------------------------------------------------------


def operator_to_json(p: OperatorMatrix) -> dict:
    """Entries as lists of {coeff, dx} terms, canonical order, highest dx first."""
    entries = []
    for row in p.entries:
        json_row = []
        for op in row:
            json_row.append(
                [{"coeff": str(op.coeffs[k]), "dx": k} for k in sorted(op.coeffs, reverse=True)]
            )
        entries.append(json_row)
    return {"coordinates": list(p.coords), "entries": entries}


def operator_from_json(data: Mapping) -> OperatorMatrix:
    from .exprs import parse_expression

    coords = tuple(data["coordinates"])
    rows = []
    for row in data["entries"]:
        ops = []
        for terms in row:
            op = DiffOp.zero(coords)
            for term in terms:
                coeff = parse_expression(term["coeff"], coords)
                op = op + DiffOp(coords, {int(term["dx"]): coeff})
            ops.append(op)
        rows.append(ops)
    return OperatorMatrix(coords, rows)


def operator_dump(p: OperatorMatrix) -> str:
    return json.dumps(operator_to_json(p), indent=2)


def operator_load(text: str) -> OperatorMatrix:
    return operator_from_json(json.loads(text))
