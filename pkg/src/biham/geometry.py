"""Exact Riemannian computations for rational metrics.

Covariant metrics with RatFn components: inverse, Christoffel symbols,
lowered Riemann tensor, determinant, constant-sectional-curvature testing
and signature at a rational sample point.  Everything is exact; curvature
identities are decided symbolically, never numerically.

Conventions: Gamma^i_{jk} = 1/2 g^{is} (g_{sj,k} + g_{sk,j} - g_{jk,s}),
R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj} + Gamma^i_{ks} Gamma^s_{lj}
- Gamma^i_{ls} Gamma^s_{kj}, and R_{ijkl} = g_{is} R^s_{jkl}.  With these
choices a metric of constant sectional curvature kappa satisfies
R_{ijkl} = kappa (g_{ik} g_{jl} - g_{il} g_{jk}).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .algebra import AlgebraError, RatFn
from .linalg import SingularMatrixError, mat_det, mat_inverse

Matrix = tuple[tuple[RatFn, ...], ...]


class MetricError(AlgebraError):
    """Degenerate or malformed metric."""


@dataclass(frozen=True)
class MetricField:
    """Symmetric nondegenerate covariant metric with rational components."""

    coords: tuple[str, ...]
    g: Matrix

    def __post_init__(self):
        n = len(self.coords)
        if len(self.g) != n or any(len(row) != n for row in self.g):
            raise MetricError("metric matrix does not match the chart dimension")
        for i in range(n):
            for j in range(i + 1, n):
                if self.g[i][j] != self.g[j][i]:
                    raise MetricError(f"metric is not symmetric at ({i},{j})")
        if self.det().is_zero:
            raise MetricError("metric is degenerate")

    @property
    def n(self) -> int:
        return len(self.coords)

    def det(self) -> RatFn:
        return mat_det(self.g, RatFn.one(self.coords))

    def inverse(self) -> Matrix:
        try:
            return mat_inverse(self.g, RatFn.one(self.coords))
        except SingularMatrixError as exc:
            raise MetricError("metric is degenerate") from exc


def invert_metric(metric: MetricField) -> Matrix:
    """Exact contravariant components; the product with g is the identity."""
    return metric.inverse()


def christoffel(metric: MetricField) -> tuple:
    """Christoffel symbols Gamma[i][j][k] = Gamma^i_{jk} (symmetric in j, k)."""
    n = metric.n
    g = metric.g
    ginv = metric.inverse()
    dg = [[[g[a][b].diff(c) for c in range(n)] for b in range(n)] for a in range(n)]
    half = Fraction(1, 2)
    gamma = []
    for i in range(n):
        gi = []
        for j in range(n):
            gj = []
            for k in range(n):
                acc = RatFn.zero(metric.coords)
                for s in range(n):
                    if ginv[i][s].is_zero:
                        continue
                    acc = acc + ginv[i][s] * (dg[s][j][k] + dg[s][k][j] - dg[j][k][s])
                gj.append(acc * half)
            gi.append(tuple(gj))
        gamma.append(tuple(gi))
    return tuple(gamma)


def riemann(metric: MetricField) -> tuple:
    """Lowered curvature tensor R[i][j][k][l] = R_{ijkl}."""
    n = metric.n
    gamma = christoffel(metric)
    dgamma = [[[[gamma[i][l][j].diff(k) for k in range(n)]
                for j in range(n)] for l in range(n)] for i in range(n)]

    def upper(i, j, k, l):
        acc = dgamma[i][l][j][k] - dgamma[i][k][j][l]
        for s in range(n):
            acc = acc + gamma[i][k][s] * gamma[s][l][j] - gamma[i][l][s] * gamma[s][k][j]
        return acc

    lowered = []
    for i in range(n):
        ri = []
        for j in range(n):
            rj = []
            for k in range(n):
                rk = []
                for l in range(n):
                    acc = RatFn.zero(metric.coords)
                    for s in range(n):
                        if metric.g[i][s].is_zero:
                            continue
                        acc = acc + metric.g[i][s] * upper(s, j, k, l)
                    rk.append(acc)
                rj.append(tuple(rk))
            ri.append(tuple(rj))
        lowered.append(tuple(ri))
    return tuple(lowered)


def constant_curvature_test(metric: MetricField) -> Fraction | None:
    """The constant kappa with R_{ijkl} = kappa (g_ik g_jl - g_il g_jk), or None.

    None means either non-constant sectional curvature or a curvature tensor
    not of the space-form shape.
    """
    n = metric.n
    riem = riemann(metric)
    g = metric.g
    kappa: RatFn | None = None
    for i in range(n):
        for j in range(n):
            denom = g[i][i] * g[j][j] - g[i][j] * g[i][j]
            if denom.is_zero:
                continue
            kappa = riem[i][j][i][j] / denom
            break
        if kappa is not None:
            break
    if kappa is None or not kappa.is_constant:
        return None
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    expected = (g[i][k] * g[j][l] - g[i][l] * g[j][k]) * kappa
                    if riem[i][j][k][l] != expected:
                        return None
    return kappa.constant_value()


def bianchi_first_identity_holds(riem: tuple) -> bool:
    """R_{i[jkl]} = 0: the cyclic sum over the last three slots vanishes."""
    n = len(riem)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    s = riem[i][j][k][l] + riem[i][k][l][j] + riem[i][l][j][k]
                    if not s.is_zero:
                        return False
    return True


def riemann_symmetries_hold(riem: tuple) -> bool:
    """Antisymmetry in both slot pairs and the pair-exchange symmetry."""
    n = len(riem)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    r = riem[i][j][k][l]
                    if r != -riem[j][i][k][l]:
                        return False
                    if r != -riem[i][j][l][k]:
                        return False
                    if r != riem[k][l][i][j]:
                        return False
    return True


def signature(metric: MetricField, point: Sequence[Fraction] | None = None) -> tuple[int, int]:
    """Signature (positive, negative) of g at a rational sample point.

    The default point is (0, 1, 3, 7, ...), chosen off the coordinate
    diagonals where the pipeline metrics are singular; pass another point if
    it happens to meet a denominator.  Sylvester congruence diagonalization
    over Q, no square roots needed.
    """
    n = metric.n
    if point is None:
        vals = [Fraction(0), Fraction(1), Fraction(3)]
        while len(vals) < n:
            vals.append(vals[-1] * 2 + 1)
        point = vals[:n]
    m = [[metric.g[i][j].evaluate(point) for j in range(n)] for i in range(n)]
    pos = neg = 0
    for step in range(n):
        pivot = next((r for r in range(step, n) if m[r][r] != 0), None)
        if pivot is None:
            off = next(((r, c) for r in range(step, n) for c in range(step, n)
                        if r != c and m[r][c] != 0), None)
            if off is None:
                break  # remaining block is zero: degenerate at this point
            r, c = off
            for t in range(n):  # row/col addition brings a nonzero diagonal entry
                m[r][t] += m[c][t]
            for t in range(n):
                m[t][r] += m[t][c]
            pivot = r
        if pivot != step:
            m[step], m[pivot] = m[pivot], m[step]
            for t in range(n):
                m[t][step], m[t][pivot] = m[t][pivot], m[t][step]
        d = m[step][step]
        if d > 0:
            pos += 1
        else:
            neg += 1
        for r in range(step + 1, n):
            if m[r][step] != 0:
                f = m[r][step] / d
                for t in range(n):
                    m[r][t] -= f * m[step][t]
                for t in range(n):
                    m[t][r] -= f * m[t][step]
    return pos, neg
