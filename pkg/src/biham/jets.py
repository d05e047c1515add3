"""Differential polynomials on the jet space of maps x -> (u^1..u^n).

A ``DiffPoly`` is a polynomial in the jet coordinates u^i_sigma (sigma >= 1,
the order of the x-derivative) whose coefficients are exact rational
functions of the base coordinates u^i.  Jet monomials are stored as sorted
tuples of ((component, order), power) pairs, so the term map has a canonical
key form and structural equality is semantic equality.

The module provides the calculus used everywhere downstream: the total
x-derivative, the Euler (variational) operator, total-divergence testing,
formal x-integration and the homotopy reconstruction of a density from a
variational covector, plus the sigma-grading that assigns weight sigma to
u^i_sigma and weight 0 to the base coordinates.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Mapping, Sequence, Union

from .algebra import AlgebraError, MPoly, RatFn

#: Jet orders above this bound abort the computation unless a caller passes
#: an explicit larger bound; this catches runaway operator expansions early.
DEFAULT_JET_BOUND = 6

JetKey = tuple[int, int]          # (component index, derivative order >= 1)
Monomial = tuple[tuple[JetKey, int], ...]

Scalar = Union[int, Fraction]

_EMPTY: Monomial = ()


class JetError(Exception):
    """Base class for jet-calculus errors."""


class JetOrderError(JetError):
    """A total derivative pushed some jet variable past the order bound."""


class NotADivergenceError(JetError):
    """Formal x-integration was asked for a non-divergence.

    The offending Euler fingerprint (one expression string per component)
    is carried in ``fingerprint``.
    """

    def __init__(self, message: str, fingerprint: tuple[str, ...] = ()):
        super().__init__(message)
        self.fingerprint = fingerprint


class NotVariationalError(JetError):
    """A covector failed the Helmholtz (self-adjointness) requirement."""


class NonPolynomialError(JetError):
    """An operation restricted to polynomial data met a true denominator."""


def jet_var_name(base: str, order: int) -> str:
    """Surface syntax of a jet variable: u1_x, u1_xx, u1_xxx, u1_x4, ..."""
    if order < 1:
        raise ValueError("jet order must be >= 1")
    return f"{base}_{'x' * order}" if order <= 3 else f"{base}_x{order}"


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    merged = dict(a)
    for key, p in b:
        merged[key] = merged.get(key, 0) + p
    return tuple(sorted(merged.items()))


def _mono_weight(m: Monomial) -> int:
    return sum(order * p for (_, order), p in m)


def _mono_degree(m: Monomial) -> int:
    return sum(p for _, p in m)


def _mono_order(m: Monomial) -> int:
    return max((order for (_, order), _ in m), default=0)


class DiffPoly:
    """Polynomial in jet variables with RatFn coefficients. Immutable."""

    __slots__ = ("coords", "terms")

    def __init__(self, coords: Sequence[str], terms: Mapping[Monomial, RatFn] | None = None):
        object.__setattr__(self, "coords", tuple(coords))
        clean: dict[Monomial, RatFn] = {}
        if terms:
            for mono, coeff in terms.items():
                if coeff.variables != self.coords:
                    raise AlgebraError("coefficient variables do not match chart")
                if any(order < 1 or p < 1 for (_, order), p in mono):
                    raise JetError(f"malformed jet monomial {mono}")
                if not coeff.is_zero:
                    clean[tuple(sorted(mono))] = coeff
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("DiffPoly is immutable")

    @classmethod
    def _make(cls, coords: tuple[str, ...], terms: dict) -> "DiffPoly":
        """Trusted constructor: keys already sorted, coefficients nonzero."""
        out = cls.__new__(cls)
        object.__setattr__(out, "coords", coords)
        object.__setattr__(out, "terms", terms)
        return out

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, coords: Sequence[str]) -> "DiffPoly":
        return cls(coords)

    @classmethod
    def constant(cls, coords: Sequence[str], value: Scalar) -> "DiffPoly":
        return cls.from_ratfn(RatFn.constant(coords, value))

    @classmethod
    def one(cls, coords: Sequence[str]) -> "DiffPoly":
        return cls.constant(coords, 1)

    @classmethod
    def from_ratfn(cls, f: RatFn) -> "DiffPoly":
        if f.is_zero:
            return cls(f.variables)
        return cls(f.variables, {_EMPTY: f})

    @classmethod
    def base(cls, coords: Sequence[str], index: int) -> "DiffPoly":
        return cls.from_ratfn(RatFn.variable(coords, tuple(coords)[index]))

    @classmethod
    def jet(cls, coords: Sequence[str], component: int, order: int, power: int = 1) -> "DiffPoly":
        coords = tuple(coords)
        if not 0 <= component < len(coords):
            raise JetError(f"component {component} out of range")
        if order < 1:
            raise JetError("jet order must be >= 1; use base() for order 0")
        mono: Monomial = (((component, order), power),)
        return cls(coords, {mono: RatFn.one(coords)})

    # -- queries ---------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def n(self) -> int:
        return len(self.coords)

    def jet_order(self) -> int:
        """Highest derivative order present; 0 for jet-free expressions."""
        return max((_mono_order(m) for m in self.terms), default=0)

    def jet_degree(self) -> int:
        """Highest polynomial degree in the jet variables."""
        return max((_mono_degree(m) for m in self.terms), default=0)

    def coefficient(self, mono: Monomial) -> RatFn:
        return self.terms.get(tuple(sorted(mono)), RatFn.zero(self.coords))

    def as_ratfn(self) -> RatFn:
        """The underlying RatFn when no jet variable occurs."""
        if self.jet_order() > 0:
            raise JetError("expression involves jet variables")
        return self.terms.get(_EMPTY, RatFn.zero(self.coords))

    def is_polynomial(self) -> bool:
        """True when every coefficient is a genuine polynomial in the base coordinates."""
        return all(c.is_polynomial for c in self.terms.values())

    def sorted_terms(self) -> list[tuple[Monomial, RatFn]]:
        return sorted(
            self.terms.items(),
            key=lambda kv: (_mono_weight(kv[0]), _mono_degree(kv[0]), kv[0]),
            reverse=True,
        )

    # -- arithmetic -------------------------------------------------------------

    def _coerce(self, other) -> "DiffPoly | None":
        if isinstance(other, DiffPoly):
            if other.coords != self.coords:
                raise AlgebraError("chart mismatch between differential polynomials")
            return other
        if isinstance(other, RatFn):
            return DiffPoly.from_ratfn(other)
        if isinstance(other, MPoly):
            return DiffPoly.from_ratfn(RatFn(other))
        if isinstance(other, (int, Fraction)):
            return DiffPoly.constant(self.coords, other)
        return None

    def __add__(self, other) -> "DiffPoly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_zero:
            return o
        if o.is_zero:
            return self
        out = dict(self.terms)
        for mono, c in o.terms.items():
            s = out.get(mono)
            s = c if s is None else s + c
            if s.is_zero:
                out.pop(mono, None)
            else:
                out[mono] = s
        result = DiffPoly.__new__(DiffPoly)
        object.__setattr__(result, "coords", self.coords)
        object.__setattr__(result, "terms", out)
        return result

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        result = DiffPoly.__new__(DiffPoly)
        object.__setattr__(result, "coords", self.coords)
        object.__setattr__(result, "terms", {m: -c for m, c in self.terms.items()})
        return result

    def __sub__(self, other) -> "DiffPoly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "DiffPoly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other) -> "DiffPoly":
        if isinstance(other, (int, Fraction, RatFn)):
            scale = other if isinstance(other, RatFn) else RatFn.constant(self.coords, other)
            if scale.is_zero:
                return DiffPoly.zero(self.coords)
            return DiffPoly(self.coords, {m: c * scale for m, c in self.terms.items()})
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out: dict[Monomial, RatFn] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in o.terms.items():
                m = _mono_mul(m1, m2)
                c = c1 * c2
                s = out.get(m)
                s = c if s is None else s + c
                if s.is_zero:
                    out.pop(m, None)
                else:
                    out[m] = s
        result = DiffPoly.__new__(DiffPoly)
        object.__setattr__(result, "coords", self.coords)
        object.__setattr__(result, "terms", out)
        return result

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "DiffPoly":
        if k < 0:
            raise JetError("negative power of a differential polynomial")
        result = DiffPoly.one(self.coords)
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffPoly):
            return NotImplemented
        return self.coords == other.coords and self.terms == other.terms

    __hash__ = None

    # -- derivatives --------------------------------------------------------------

    def diff_jet(self, component: int, order: int) -> "DiffPoly":
        """Partial derivative with respect to the jet variable u^component_order."""
        key = (component, order)
        out: dict[Monomial, RatFn] = {}
        for mono, c in self.terms.items():
            for i, (k, p) in enumerate(mono):
                if k != key:
                    continue
                rest = mono[:i] + ((k, p - 1),) + mono[i + 1:] if p > 1 else mono[:i] + mono[i + 1:]
                s = out.get(rest)
                add = c * p
                s = add if s is None else s + add
                if s.is_zero:
                    out.pop(rest, None)
                else:
                    out[rest] = s
                break
        return DiffPoly._make(self.coords, out)

    def diff_base(self, index: int) -> "DiffPoly":
        """Partial derivative with respect to the base coordinate u^index."""
        out: dict[Monomial, RatFn] = {}
        for mono, c in self.terms.items():
            dc = c.diff(index)
            if not dc.is_zero:
                out[mono] = dc
        return DiffPoly._make(self.coords, out)

    # -- substitution and evaluation ------------------------------------------------

    def substitute(
        self,
        base_values: Sequence[RatFn],
        jet_values: Callable[[int, int], "DiffPoly"],
    ) -> "DiffPoly":
        """Rewrite through u^i -> base_values[i], u^i_sigma -> jet_values(i, sigma).

        The replacement values live in the chart of ``base_values``; this is
        the workhorse of point transformations.
        """
        target = base_values[0].variables
        total = DiffPoly.zero(target)
        cache: dict[JetKey, DiffPoly] = {}
        for mono, c in self.terms.items():
            piece = DiffPoly.from_ratfn(c.substitute(base_values))
            for key, p in mono:
                val = cache.get(key)
                if val is None:
                    val = jet_values(key[0], key[1])
                    cache[key] = val
                for _ in range(p):
                    piece = piece * val
            total = total + piece
        return total

    def evaluate(
        self,
        base_point: Sequence[Scalar],
        jet_point: Mapping[JetKey, Scalar] | None = None,
    ) -> Fraction:
        """Exact evaluation at a rational jet-space point (absent jets read 0)."""
        jp = jet_point or {}
        total = Fraction(0)
        for mono, c in self.terms.items():
            val = c.evaluate(base_point)
            for key, p in mono:
                val *= Fraction(jp.get(key, 0)) ** p
            total += val
        return total

    # -- printing ---------------------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono, coeff in self.sorted_terms():
            factors = []
            for (comp, order), p in mono:
                name = jet_var_name(self.coords[comp], order)
                factors.append(name if p == 1 else f"{name}^{p}")
            if not factors:
                parts.append(str(coeff))
                continue
            body = "*".join(factors)
            if coeff.is_one:
                parts.append(body)
            elif coeff == -1:
                parts.append("-" + body)
            else:
                c_s = str(coeff)
                if len(coeff.num.terms) > 1 and coeff.den.is_one:
                    c_s = f"({c_s})"
                parts.append(f"{c_s}*{body}")
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out

    def __repr__(self) -> str:
        return f"DiffPoly({self})"


Covector = tuple[DiffPoly, ...]


def covector(components: Sequence[DiffPoly]) -> Covector:
    comps = tuple(components)
    if not comps:
        raise JetError("empty covector")
    coords = comps[0].coords
    if any(c.coords != coords for c in comps):
        raise AlgebraError("covector components live in different charts")
    if len(comps) != len(coords):
        raise JetError("covector length must equal the number of coordinates")
    return comps


def zero_covector(coords: Sequence[str]) -> Covector:
    z = DiffPoly.zero(coords)
    return tuple(z for _ in coords)


def unit_covector(coords: Sequence[str], index: int) -> Covector:
    one = DiffPoly.one(coords)
    zero = DiffPoly.zero(coords)
    return tuple(one if i == index else zero for i in range(len(tuple(coords))))


# ---------------------------------------------------------------------------
# Total derivative and the variational operator
# ---------------------------------------------------------------------------


def total_x(f: DiffPoly, max_order: int = DEFAULT_JET_BOUND) -> DiffPoly:
    """Total x-derivative D_x f.

    D_x f = sum_i u^i_x df/du^i + sum_{i,sigma} u^i_{sigma+1} df/du^i_sigma.
    Raises JetOrderError when the result would exceed ``max_order``.
    """
    coords = f.coords
    out: dict[Monomial, RatFn] = {}

    def _accumulate(mono: Monomial, coeff: RatFn) -> None:
        s = out.get(mono)
        s = coeff if s is None else s + coeff
        if s.is_zero:
            out.pop(mono, None)
        else:
            out[mono] = s

    for mono, c in f.terms.items():
        for i in range(len(coords)):
            dc = c.diff(i)
            if not dc.is_zero:
                _accumulate(_mono_mul(mono, (((i, 1), 1),)), dc)
        for idx, (key, p) in enumerate(mono):
            comp, order = key
            if order + 1 > max_order:
                raise JetOrderError(
                    f"total derivative needs order {order + 1} > bound {max_order}")
            reduced = (
                mono[:idx] + ((key, p - 1),) + mono[idx + 1:]
                if p > 1
                else mono[:idx] + mono[idx + 1:]
            )
            bumped = _mono_mul(reduced, (((comp, order + 1), 1),))
            _accumulate(bumped, c * p)
    return DiffPoly._make(coords, out)


def total_x_power(f: DiffPoly, k: int, max_order: int = DEFAULT_JET_BOUND) -> DiffPoly:
    for _ in range(k):
        f = total_x(f, max_order)
    return f


def euler(f: DiffPoly) -> Covector:
    """Variational derivative: component j is sum_s (-1)^s D_x^s (df/du^j_s).

    The internal derivative bound is sized from the input (the result order
    is at most twice the input order), so this never trips the default jet
    bound on legitimate inputs.
    """
    coords = f.coords
    r = f.jet_order()
    bound = max(DEFAULT_JET_BOUND, 2 * r)
    components = []
    for j in range(len(coords)):
        acc = f.diff_base(j)
        for sigma in range(1, r + 1):
            part = f.diff_jet(j, sigma)
            if part.is_zero:
                continue
            part = total_x_power(part, sigma, bound)
            acc = acc + part if sigma % 2 == 0 else acc - part
        components.append(acc)
    return tuple(components)


def is_total_divergence(f: DiffPoly) -> bool:
    """True iff the Euler fingerprint of f vanishes identically."""
    return all(c.is_zero for c in euler(f))


def sigma_grade(f: DiffPoly) -> int | None:
    """Common sigma-weight of all terms, or None when inhomogeneous.

    The grading gives u^i_sigma weight sigma and base coordinates weight 0.
    The zero polynomial reports grade 0.
    """
    grades = {_mono_weight(m) for m in f.terms}
    if not grades:
        return 0
    if len(grades) > 1:
        return None
    return grades.pop()


grade = sigma_grade


def evolutionary_derivative(
    f: DiffPoly,
    flow: Sequence[DiffPoly],
    max_order: int | None = None,
) -> DiffPoly:
    """Derivative of f along the prolonged evolutionary field u^k_t = flow^k.

    Ev(f) = sum_{k, sigma >= 0} D_x^sigma(flow^k) * df/du^k_sigma.  This is
    the D_t substitution used in conservation-law checks: t-derivatives of
    jet variables are eliminated through the flow, never introduced.
    """
    coords = f.coords
    r = f.jet_order()
    if max_order is None:
        max_order = max(DEFAULT_JET_BOUND, r + max(g.jet_order() for g in flow))
    total = DiffPoly.zero(coords)
    current = list(flow)
    for sigma in range(r + 1):
        for k in range(len(coords)):
            part = f.diff_base(k) if sigma == 0 else f.diff_jet(k, sigma)
            if not part.is_zero:
                total = total + part * current[k]
        if sigma < r:
            current = [total_x(g, max_order) for g in current]
    return total


# ---------------------------------------------------------------------------
# Formal integration and homotopy reconstruction
# ---------------------------------------------------------------------------


def _linear_split(f: DiffPoly, order: int) -> tuple[list[DiffPoly], DiffPoly]:
    """Split f = sum_j A_j u^j_order + rest, requiring linearity in order-m jets."""
    coords = f.coords
    n = len(coords)
    parts = [dict() for _ in range(n)]
    rest: dict[Monomial, RatFn] = {}
    for mono, c in f.terms.items():
        top = [(key, p) for key, p in mono if key[1] == order]
        if not top:
            rest[mono] = c
            continue
        if len(top) > 1 or top[0][1] > 1:
            raise NotADivergenceError(
                f"term {mono} is nonlinear in order-{order} jet variables")
        key = top[0][0]
        reduced = tuple(kp for kp in mono if kp[0] != key)
        parts[key[0]][reduced] = c
    return [DiffPoly(coords, p) for p in parts], DiffPoly(coords, rest)


def _block_potential(a_parts: Sequence[DiffPoly], order: int) -> DiffPoly:
    """Potential h with dh/du^j_order = A_j, via the scaling homotopy.

    Valid because the A_j arise as partials of one function and are therefore
    a closed family; the coefficients are polynomial in the scaled variables
    (order >= 1 jets always enter polynomially).
    """
    coords = a_parts[0].coords
    h = DiffPoly.zero(coords)
    for j, a in enumerate(a_parts):
        for mono, c in a.terms.items():
            d = sum(p for (_, o), p in mono if o == order)
            bumped = _mono_mul(mono, (((j, order), 1),))
            h = h + DiffPoly(coords, {bumped: c * Fraction(1, d + 1)})
    return h


def formal_x_integral(f: DiffPoly) -> DiffPoly:
    """A differential polynomial g with D_x g = f and zero constant term.

    Precondition: euler(f) = 0.  The algorithm descends from the highest jet
    order present: at each level the input is necessarily linear in the top
    order variables and the coefficient one-form is integrated exactly over
    the next-lower jet block.  The descent is deterministic, so equal inputs
    give identical outputs.
    """
    fingerprint = euler(f)
    if any(not c.is_zero for c in fingerprint):
        raise NotADivergenceError(
            "Euler fingerprint is nonzero; not a total x-derivative",
            tuple(str(c) for c in fingerprint),
        )
    coords = f.coords
    g = DiffPoly.zero(coords)
    r = f
    bound = max(DEFAULT_JET_BOUND, f.jet_order() + 1)
    while r.jet_order() >= 2:
        m = r.jet_order()
        a_parts, _ = _linear_split(r, m)
        h = _block_potential(a_parts, m - 1)
        g = g + h
        r = r - total_x(h, bound)
        if r.jet_order() >= m:
            raise NotADivergenceError("descent failed to lower the jet order")
    if not r.is_zero:
        a_parts, rest = _linear_split(r, 1)
        if not rest.is_zero:
            raise NotADivergenceError(
                "jet-free remainder cannot be a total x-derivative",
                (str(rest),),
            )
        coeffs = []
        for a in a_parts:
            if a.jet_order() > 0:
                raise NotADivergenceError("remainder is nonlinear in first-order jets")
            coeffs.append(a.as_ratfn())
        if all(c.is_polynomial for c in coeffs):
            h = DiffPoly.zero(coords)
            for j, p in enumerate(coeffs):
                for exps, q in p.num.terms.items():
                    d = sum(exps)
                    bumped = list(exps)
                    bumped[j] += 1
                    h = h + DiffPoly.from_ratfn(
                        RatFn(MPoly.monomial(coords, bumped, q * Fraction(1, d + 1))))
        else:
            potential = _rational_one_form_potential(coeffs, coords)
            if potential is None:
                raise NonPolynomialError(
                    "base-coordinate remainder has no rational x-antiderivative "
                    "(a logarithmic part would be needed)")
            h = DiffPoly.from_ratfn(potential)
        g = g + h
        r = r - total_x(h, bound)
        if not r.is_zero:
            raise NotADivergenceError("base-coordinate one-form failed to integrate")
    return g


def _rational_one_form_potential(coeffs: Sequence[RatFn], coords: tuple[str, ...]) -> RatFn | None:
    """Rational g with dg/du^j = coeffs[j], or None when no rational g exists.

    For a rational potential g = n/d, each irreducible factor of d shows up
    in some partial derivative with its multiplicity raised, so d divides
    the lcm D of the coefficient denominators.  The numerator is found by
    exact undetermined coefficients over Q; an unsolvable system certifies
    that the antiderivative has a logarithmic part.
    """
    from .linalg import solve_fraction_system

    n = len(coords)
    den = MPoly.one(coords)
    for c in coeffs:
        if not c.den.is_one:
            from .algebra import mpoly_gcd, _exact_div

            g = mpoly_gcd(den, c.den)
            den = den * (c.den if g.is_one else _exact_div(c.den, g))
    deg_gain = max(
        (c.num.total_degree() - c.den.total_degree() for c in coeffs if not c.is_zero),
        default=-1,
    )
    num_deg = den.total_degree() + max(deg_gain + 1, 0) + 1

    monos: list[tuple[int, ...]] = []

    def rec(prefix, remaining, slots):
        if slots == 0:
            monos.append(tuple(prefix))
            return
        for d in range(remaining + 1):
            rec(prefix + [d], remaining - d, slots - 1)

    rec([], num_deg, n)

    den_rat = RatFn(den)
    basis = [RatFn(MPoly.monomial(coords, m)) / den_rat for m in monos]
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for j in range(n):
        derivs = [b.diff(j) for b in basis]
        common = RatFn(den * den * coeffs[j].den)
        cleared = [d * common for d in derivs]
        target = coeffs[j] * common
        if not target.is_polynomial or any(not c.is_polynomial for c in cleared):
            return None
        monomials = set(target.num.terms)
        for c in cleared:
            monomials.update(c.num.terms)
        for e in sorted(monomials):
            rows.append([c.num.terms.get(e, Fraction(0)) for c in cleared])
            rhs.append(target.num.terms.get(e, Fraction(0)))
    solution = solve_fraction_system(rows, rhs)
    if solution is None:
        return None
    total = RatFn.zero(coords)
    for x, b in zip(solution, basis):
        if x:
            total = total + b * x
    return total


def volterra_homotopy(psi: Sequence[DiffPoly]) -> DiffPoly:
    """Density L with euler(L) = psi, for polynomial variational covectors.

    Implements L = sum_j int_0^1 psi_j(t u) u^j dt by exact termwise
    integration of the scalar parameter: a term of joint degree d in the
    base and jet variables contributes with factor 1/(d+1).  Inputs with
    genuine denominators are rejected (the scaled integrand would be
    singular at t = 0), and the result is verified against psi through the
    Euler operator before being returned.
    """
    psi = covector(psi)
    coords = psi[0].coords
    for j, comp in enumerate(psi):
        if not comp.is_polynomial():
            raise NonPolynomialError(
                f"component {j} has base-coordinate denominators; homotopy unsupported")
    L = DiffPoly.zero(coords)
    for j, comp in enumerate(psi):
        for mono, c in comp.terms.items():
            jet_deg = _mono_degree(mono)
            for exps, q in c.num.terms.items():
                d = jet_deg + sum(exps)
                bumped = list(exps)
                bumped[j] += 1
                coeff = RatFn(MPoly.monomial(coords, bumped, q * Fraction(1, d + 1)))
                L = L + DiffPoly(coords, {mono: coeff})
    check = euler(L)
    if any(check[j] != psi[j] for j in range(len(psi))):
        raise NotVariationalError(
            "covector is not variational (homotopy round-trip failed)")
    return L
