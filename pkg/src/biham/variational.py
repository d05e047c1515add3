"""Frechet linearizations, Lie derivatives of operators, and evidence checks.

The linearization of a vector function F is the matrix operator with entry
(k, i) = sum_sigma (dF^k/du^i_sigma) Dx^sigma; its formal adjoint integrates
by parts.  On top of these the module provides:

* the Helmholtz self-adjointness test for covectors,
* the presentation check relating a symplectic operator to a potential
  covector, in both the direct form l_psi - l_psi* and the potential-
  substitution form l_psi o Dx + Dx o l_psi* (the operator B of the
  derivation pipeline lives in potential variables, where the second form
  is the correct expression of the same identity),
* the Lie derivative of an operator along an evolutionary field,
* exact per-triple evidence checks for the Jacobi identity and for the
  compatibility of two candidate Hamiltonian operators.

The evidence checks decide "density is a total divergence" through the
Euler fingerprint, which is exact; passing every triple of a basis is
strong evidence, not a proof, and is reported as such.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .jets import (
    DEFAULT_JET_BOUND,
    Covector,
    DiffPoly,
    euler,
    evolutionary_derivative,
)
from .operators import DiffOp, OperatorMatrix


def frechet(f: Sequence[DiffPoly]) -> OperatorMatrix:
    """Linearization of the vector function F: entry (k, i) as above."""
    comps = tuple(f)
    coords = comps[0].coords
    n = len(comps)
    rows = []
    for k in range(n):
        row = []
        top = comps[k].jet_order()
        for i in range(n):
            coeffs = {0: comps[k].diff_base(i)}
            for sigma in range(1, top + 1):
                coeffs[sigma] = comps[k].diff_jet(i, sigma)
            row.append(DiffOp(coords, coeffs))
        rows.append(row)
    return OperatorMatrix(coords, rows)


def helmholtz_symmetric(psi: Sequence[DiffPoly], max_order: int | None = None) -> bool:
    """True iff the linearization of psi is formally self-adjoint."""
    lin = frechet(psi)
    if max_order is None:
        max_order = max(DEFAULT_JET_BOUND, 2 * lin.order() + 2)
    return lin.adjoint(max_order) == lin


def skew_adjoint_check(a: OperatorMatrix, max_order: int | None = None) -> bool:
    if max_order is None:
        max_order = max(DEFAULT_JET_BOUND, 2 * a.order() + 2)
    return a.adjoint(max_order) == a.scale(-1)


def presentation_check(
    b: OperatorMatrix,
    psi: Sequence[DiffPoly],
    potential_substitution: bool = True,
    max_order: int | None = None,
) -> bool:
    """Check that B is presented by the covector psi.

    With ``potential_substitution`` (the default) the identity checked is

        B = l_psi o Dx + Dx o l_psi*

    which is l_psi - l_psi* written out after the substitution u = phi_x:
    this is the form taken by the symplectic operator of the pipeline, whose
    natural variables are the potentials.  With the flag off the direct
    jet-space identity B = l_psi - l_psi* is checked instead (e.g. a
    variational covector presents the zero operator).
    """
    lin = frechet(psi)
    if max_order is None:
        max_order = max(DEFAULT_JET_BOUND, 2 * lin.order() + 4)
    adj = lin.adjoint(max_order)
    if potential_substitution:
        dxm = _dx_matrix(lin.coords, lin.n)
        candidate = lin.compose(dxm, max_order) + dxm.compose(adj, max_order)
    else:
        candidate = lin - adj
    return candidate == b


def _dx_matrix(coords: Sequence[str], n: int) -> OperatorMatrix:
    dx = DiffOp.dx(coords)
    zero = DiffOp.zero(coords)
    return OperatorMatrix(coords, [[dx if i == j else zero for j in range(n)] for i in range(n)])


def operator_directional_derivative(
    a: OperatorMatrix,
    flow: Sequence[DiffPoly],
    max_order: int | None = None,
) -> OperatorMatrix:
    """Coefficient-wise derivative of A along the evolutionary field ``flow``.

    Vanishes identically when A has constant coefficients.  Reorganized as
    an operator this is the two-argument object l_{A, .}(flow)."""
    if max_order is None:
        max_order = _directional_bound(a, flow)
    return a.map_coefficients(
        lambda c: evolutionary_derivative(c, flow, max_order))


def _directional_bound(a: OperatorMatrix, flow: Sequence[DiffPoly]) -> int:
    coeff_order = max(
        (c.jet_order() for row in a.entries for op in row for c in op.coeffs.values()),
        default=0,
    )
    flow_order = max((g.jet_order() for g in flow), default=0)
    return max(DEFAULT_JET_BOUND, coeff_order + flow_order + 1)


def lie_derivative(
    a: OperatorMatrix,
    tau: Sequence[DiffPoly],
    max_order: int | None = None,
) -> OperatorMatrix:
    """Lie derivative of the operator A along the evolutionary field tau.

    As an operator acting on a covector psi,

        (L_tau A)(psi) = l_{A,psi}(tau) - l_tau(A(psi)) - A(l_tau*(psi)),

    assembled here as directional-derivative term minus the two
    compositions l_tau o A and A o l_tau*.
    """
    if max_order is None:
        max_order = max(
            DEFAULT_JET_BOUND,
            2 * (a.order() + max((g.jet_order() for g in tau), default=0)) + 2,
            _directional_bound(a, tau),
        )
    l_tau = frechet(tau)
    term1 = operator_directional_derivative(a, tau, max_order)
    term2 = l_tau.compose(a, max_order)
    term3 = a.compose(l_tau.adjoint(max_order), max_order)
    return term1 - term2 - term3


# ---------------------------------------------------------------------------
# Jacobi and compatibility evidence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TripleResult:
    triple: tuple[str, str, str]
    passed: bool
    fingerprint: tuple[str, ...] | None  # nonzero Euler components on failure


@dataclass(frozen=True)
class EvidenceReport:
    kind: str
    total: int
    failures: tuple[TripleResult, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def monomial_covector_basis(coords: Sequence[str], max_sigma: int) -> list[Covector]:
    """All covectors with a single unit monomial entry u^i_sigma, sigma <= bound.

    Placements run over the component slot j, the coordinate i and the
    derivative order sigma (sigma = 0 is the base coordinate itself).
    """
    coords = tuple(coords)
    n = len(coords)
    zero = DiffPoly.zero(coords)
    basis = []
    for j in range(n):
        for i in range(n):
            for sigma in range(max_sigma + 1):
                mono = DiffPoly.base(coords, i) if sigma == 0 else DiffPoly.jet(coords, i, sigma)
                basis.append(tuple(mono if t == j else zero for t in range(n)))
    return basis


def _pairing(psi: Covector, vec: Sequence[DiffPoly]) -> DiffPoly:
    total = DiffPoly.zero(psi[0].coords)
    for p, v in zip(psi, vec):
        if not p.is_zero and not v.is_zero:
            total = total + p * v
    return total


def _describe(psi: Covector) -> str:
    return "(" + ", ".join(str(c) for c in psi) + ")"


def _evidence_sweep(
    kind: str,
    operators: Sequence[OperatorMatrix],
    triples: Sequence[tuple[Covector, Covector, Covector]],
    max_order: int | None,
) -> EvidenceReport:
    """Shared driver: density sum_cyc <psi1, D_{A psi3}(B)(psi2)> must be exact.

    For the Jacobi check operators = (A, A); for compatibility the polarized
    density adds both (A, B) and (B, A) orderings.
    """
    pairs = [(operators[0], operators[1])]
    if operators[0] is not operators[1]:
        pairs.append((operators[1], operators[0]))

    if max_order is None:
        opord = max(op.order() for op in operators)
        coefford = max(
            (c.jet_order() for op in operators for row in op.entries
             for e in row for c in e.coeffs.values()),
            default=0,
        )
        trord = max(
            (c.jet_order() for t in triples for psi in t for c in psi),
            default=0,
        )
        # depth of the worst chain: apply, differentiate coefficients, apply,
        # then the Euler operator doubles the order
        dens = coefford + trord + opord + max(coefford, 1) + trord + opord
        max_order = max(DEFAULT_JET_BOUND, 2 * dens)

    # cache of the directional-derivative operators, keyed by (pair, psi3 id)
    deriv_cache: dict[tuple[int, int], OperatorMatrix] = {}
    apply_cache: dict[tuple[int, int, int], Covector] = {}

    def directional(pair_idx: int, outer: OperatorMatrix, inner: OperatorMatrix, psi3: Covector) -> OperatorMatrix:
        key = (pair_idx, id(psi3))
        got = deriv_cache.get(key)
        if got is None:
            flow = inner.apply(psi3, max_order)
            got = operator_directional_derivative(outer, flow, max_order)
            deriv_cache[key] = got
        return got

    def applied(pair_idx: int, outer: OperatorMatrix, inner: OperatorMatrix,
                psi3: Covector, psi2: Covector) -> Covector:
        key = (pair_idx, id(psi3), id(psi2))
        got = apply_cache.get(key)
        if got is None:
            got = directional(pair_idx, outer, inner, psi3).apply(psi2, max_order)
            apply_cache[key] = got
        return got

    failures = []
    for (p1, p2, p3) in triples:
        coords = p1[0].coords
        density = DiffPoly.zero(coords)
        for rotation in ((p1, p2, p3), (p2, p3, p1), (p3, p1, p2)):
            a1, a2, a3 = rotation
            for pair_idx, (outer, inner) in enumerate(pairs):
                density = density + _pairing(a1, applied(pair_idx, outer, inner, a3, a2))
        fingerprint = euler(density)
        if any(not c.is_zero for c in fingerprint):
            failures.append(TripleResult(
                triple=(_describe(p1), _describe(p2), _describe(p3)),
                passed=False,
                fingerprint=tuple(str(c) for c in fingerprint),
            ))
    return EvidenceReport(kind=kind, total=len(triples), failures=tuple(failures))


def _cyclic_representatives(basis: Sequence[Covector]) -> list[tuple[Covector, Covector, Covector]]:
    """One representative per cyclic class of index triples over the basis."""
    m = len(basis)
    seen = set()
    triples = []
    for i in range(m):
        for j in range(m):
            for k in range(m):
                cls = min((i, j, k), (j, k, i), (k, i, j))
                if cls in seen:
                    continue
                seen.add(cls)
                triples.append((basis[i], basis[j], basis[k]))
    return triples


def jacobi_evidence(
    a: OperatorMatrix,
    triples: Sequence[tuple[Covector, Covector, Covector]] | None = None,
    max_sigma: int = 2,
    max_order: int | None = None,
) -> EvidenceReport:
    """Per-triple exactness evidence for the Jacobi identity of A.

    The density sum_cyc <psi1, D_{A psi3}(A)(psi2)> must be a total
    divergence for every covector triple; here this is decided exactly via
    the Euler fingerprint.  When no triples are given, one representative
    per cyclic class of the monomial covector basis is used.
    """
    if triples is None:
        triples = _cyclic_representatives(monomial_covector_basis(a.coords, max_sigma))
    return _evidence_sweep("jacobi", (a, a), triples, max_order)


def compatibility_evidence(
    a: OperatorMatrix,
    b: OperatorMatrix,
    triples: Sequence[tuple[Covector, Covector, Covector]] | None = None,
    max_sigma: int = 2,
    max_order: int | None = None,
) -> EvidenceReport:
    """Per-triple evidence that the Schouten bracket [A, B] vanishes.

    Uses the polarized density sum_cyc <psi1, D_{A psi3}(B)(psi2) +
    D_{B psi3}(A)(psi2)>; with A = B this reduces to the Jacobi density
    (up to an overall factor).
    """
    if triples is None:
        triples = _cyclic_representatives(monomial_covector_basis(a.coords, max_sigma))
    return _evidence_sweep("compatibility", (a, b), triples, max_order)
