"""Point transformations of charts and of differential operators.

A transformation between a source chart (a^1..a^n) and a target chart
(u^1..u^n) is stored through the source coordinates expressed in the target
ones, a^n = a^n(u); that direction is what rewriting needs, and it covers
the situations where the forward map would require root extraction.  The
Jacobian du/da is obtained by exact inversion of da/du, so its entries are
rational functions of the target coordinates.

Operators transform as contravariant two-tensors: the matrix is conjugated
by multiplication operators built from the Jacobian, while every occurrence
of a source coordinate, including jet variables a^n_sigma, is rewritten
through the map and its total derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .algebra import AlgebraError, RatFn
from .jets import DEFAULT_JET_BOUND, DiffPoly, total_x
from .linalg import SingularMatrixError, mat_det, mat_inverse
from .operators import DiffOp, OperatorMatrix


class TransformError(AlgebraError):
    """Invalid or unusable point transformation."""


@dataclass(frozen=True)
class PointTransform:
    """Invertible point transformation between two charts of equal dimension."""

    source: tuple[str, ...]
    target: tuple[str, ...]
    source_in_target: tuple[RatFn, ...]          # a^n(u)
    forward: tuple[RatFn, ...] | None = None     # u^i(a), optional

    def __post_init__(self):
        n = len(self.source)
        if len(self.target) != n or len(self.source_in_target) != n:
            raise TransformError("transformation parts have inconsistent dimensions")
        for f in self.source_in_target:
            if f.variables != self.target:
                raise TransformError("source_in_target entries must live in the target chart")
        if self.forward is not None:
            if len(self.forward) != n:
                raise TransformError("forward map has wrong length")
            for f in self.forward:
                if f.variables != self.source:
                    raise TransformError("forward entries must live in the source chart")
            # forward o inverse must be the identity, checked symbolically
            for i, f in enumerate(self.forward):
                composed = f.substitute(list(self.source_in_target))
                if composed != RatFn.variable(self.target, self.target[i]):
                    raise TransformError(
                        f"forward and inverse maps do not compose to the identity "
                        f"on {self.target[i]}")
        det = mat_det(self.jacobian_source_by_target(), RatFn.one(self.target))
        if det.is_zero:
            raise TransformError("transformation Jacobian is singular")

    @classmethod
    def from_expressions(
        cls,
        source: Sequence[str],
        target: Sequence[str],
        source_exprs: Sequence[str],
        forward_exprs: Sequence[str] | None = None,
    ) -> "PointTransform":
        from .exprs import parse_ratfn

        inv = tuple(parse_ratfn(e, target) for e in source_exprs)
        fwd = tuple(parse_ratfn(e, source) for e in forward_exprs) if forward_exprs else None
        return cls(tuple(source), tuple(target), inv, fwd)

    @classmethod
    def identity(cls, coords: Sequence[str], source_names: Sequence[str] | None = None) -> "PointTransform":
        coords = tuple(coords)
        src = tuple(source_names) if source_names else coords
        exprs = tuple(RatFn.variable(coords, c) for c in coords)
        fwd = tuple(RatFn.variable(src, s) for s in src)
        return cls(src, coords, exprs, fwd)

    @property
    def n(self) -> int:
        return len(self.source)

    def jacobian_source_by_target(self) -> tuple[tuple[RatFn, ...], ...]:
        """Matrix da^n/du^i, functions of the target coordinates."""
        return tuple(
            tuple(expr.diff(i) for i in range(self.n))
            for expr in self.source_in_target
        )

    def jacobian_target_by_source(self) -> tuple[tuple[RatFn, ...], ...]:
        """Matrix du^i/da^n as functions of the target coordinates.

        Computed by exact inversion of da/du; this is what makes charts with
        non-rational forward maps usable.
        """
        try:
            return mat_inverse(self.jacobian_source_by_target(), RatFn.one(self.target))
        except SingularMatrixError as exc:
            raise TransformError("transformation Jacobian is singular") from exc

    def compose(self, inner: "PointTransform") -> "PointTransform":
        """Composite transformation: self.source -> inner.target.

        self maps source -> mid, inner maps mid -> target, where
        self.target == inner.source.
        """
        if self.target != inner.source:
            raise TransformError("charts do not chain")
        exprs = tuple(e.substitute(list(inner.source_in_target)) for e in self.source_in_target)
        fwd = None
        if self.forward is not None and inner.forward is not None:
            fwd = tuple(e.substitute(list(self.forward)) for e in inner.forward)
        return PointTransform(self.source, inner.target, exprs, fwd)


def _jet_substitutions(
    t: PointTransform, max_sigma: int, max_order: int
) -> dict[tuple[int, int], DiffPoly]:
    """Total-derivative images of the source jets: a^n_sigma as target DiffPoly."""
    table: dict[tuple[int, int], DiffPoly] = {}
    for nidx, expr in enumerate(t.source_in_target):
        current = DiffPoly.from_ratfn(expr)
        for sigma in range(1, max_sigma + 1):
            current = total_x(current, max_order)
            table[(nidx, sigma)] = current
    return table


def rewrite(f: DiffPoly, t: PointTransform, max_order: int = DEFAULT_JET_BOUND) -> DiffPoly:
    """Rewrite a source-chart differential polynomial in the target chart."""
    if f.coords != t.source:
        raise TransformError("expression does not live in the source chart")
    max_sigma = f.jet_order()
    table = _jet_substitutions(t, max_sigma, max_order)
    return f.substitute(list(t.source_in_target), lambda i, s: table[(i, s)])


def change_coordinates(
    p: OperatorMatrix, t: PointTransform, max_order: int = DEFAULT_JET_BOUND
) -> OperatorMatrix:
    """Push a contravariant operator matrix from the source to the target chart.

    result^{ij} = (du^i/da^n) o p^{nm} o (du^j/da^m), with the Jacobian
    factors acting as multiplication operators (order zero, hence self-
    adjoint) and every source coefficient rewritten through the map.
    """
    if p.coords != t.source:
        raise TransformError("operator does not live in the source chart")
    n = p.n
    if n != t.n:
        raise TransformError("operator size does not match the transformation")
    coords = t.target

    max_sigma = max(
        (c.jet_order() for row in p.entries for op in row for c in op.coeffs.values()),
        default=0,
    )
    table = _jet_substitutions(t, max_sigma, max_order)
    subs = list(t.source_in_target)

    def rw(c: DiffPoly) -> DiffPoly:
        return c.substitute(subs, lambda i, s: table[(i, s)])

    rewritten = [[
        DiffOp(coords, {k: rw(c) for k, c in p.entries[i][j].coeffs.items()})
        for j in range(n)] for i in range(n)]

    jac = t.jacobian_target_by_source()  # du^i/da^n in target coordinates
    mult = [[DiffOp.mult(jac[i][m]) for m in range(n)] for i in range(n)]

    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = DiffOp.zero(coords)
            for nn in range(n):
                if jac[i][nn].is_zero:
                    continue
                for mm in range(n):
                    op = rewritten[nn][mm]
                    if op.is_zero or jac[j][mm].is_zero:
                        continue
                    piece = op.compose(mult[j][mm], max_order)
                    piece = DiffOp(coords, {k: c * jac[i][nn] for k, c in piece.coeffs.items()})
                    acc = acc + piece
            row.append(acc)
        rows.append(row)
    return OperatorMatrix(coords, rows)
