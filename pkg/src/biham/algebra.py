"""Exact sparse multivariate polynomial and rational function arithmetic over Q.

A polynomial is a mapping from exponent vectors to ``Fraction`` coefficients,
relative to a fixed ordered tuple of variable names.  Zero coefficients are
never stored, so structural equality of the term maps is semantic equality.
The term order used everywhere (leading terms, printing, serialization) is
graded lexicographic: compare total degree first, then the exponent vector.

Rational functions are reduced fractions of polynomials.  The normal form is
unique: numerator and denominator share no polynomial factor and the
denominator is monic with respect to the graded-lex leading term.  Equality
of rational functions is therefore plain structural equality.

No floating point enters anywhere; the coefficient field is Q via
``fractions.Fraction``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Scalar = Union[int, Fraction]

_ZERO = Fraction(0)
_ONE = Fraction(1)


class AlgebraError(Exception):
    """Base class for arithmetic errors in the exact algebra layer."""


class DivisionByZero(AlgebraError):
    """Division by the zero polynomial or zero rational function."""


def grlex_key(exponents: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Sort key realizing the graded lexicographic order."""
    return (sum(exponents), exponents)


class MPoly:
    """Sparse multivariate polynomial with Fraction coefficients.

    Instances are immutable after construction; all operations return new
    objects and may be shared freely between threads.
    """

    __slots__ = ("variables", "terms", "_intform")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple[int, ...], Scalar] | None = None):
        object.__setattr__(self, "variables", tuple(variables))
        clean: dict[tuple[int, ...], Fraction] = {}
        nvars = len(self.variables)
        if terms:
            for exps, coeff in terms.items():
                if len(exps) != nvars:
                    raise AlgebraError(
                        f"exponent vector {exps} does not match {nvars} variables")
                if any(e < 0 for e in exps):
                    raise AlgebraError(f"negative exponent in {exps}")
                c = coeff if type(coeff) is Fraction else Fraction(coeff)
                if c != 0:
                    clean[tuple(exps)] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("MPoly is immutable")

    @classmethod
    def _make(cls, variables: tuple[str, ...], terms: dict) -> "MPoly":
        """Trusted constructor for internal arithmetic; skips validation."""
        out = cls.__new__(cls)
        object.__setattr__(out, "variables", variables)
        object.__setattr__(out, "terms", terms)
        return out

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "MPoly":
        return cls(variables)

    @classmethod
    def constant(cls, variables: Sequence[str], value: Scalar) -> "MPoly":
        zero_exp = (0,) * len(tuple(variables))
        return cls(variables, {zero_exp: Fraction(value)})

    @classmethod
    def one(cls, variables: Sequence[str]) -> "MPoly":
        return cls.constant(variables, 1)

    @classmethod
    def variable(cls, variables: Sequence[str], name: str) -> "MPoly":
        variables = tuple(variables)
        try:
            i = variables.index(name)
        except ValueError:
            raise AlgebraError(f"unknown variable {name!r}") from None
        exps = tuple(1 if j == i else 0 for j in range(len(variables)))
        return cls(variables, {exps: _ONE})

    @classmethod
    def monomial(cls, variables: Sequence[str], exponents: Sequence[int], coeff: Scalar = 1) -> "MPoly":
        return cls(variables, {tuple(exponents): Fraction(coeff)})

    # -- basic queries -----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    @property
    def is_one(self) -> bool:
        return self.is_constant and self.constant_value() == 1

    def constant_value(self) -> Fraction:
        if not self.is_constant:
            raise AlgebraError("polynomial is not constant")
        zero_exp = (0,) * len(self.variables)
        return self.terms.get(zero_exp, _ZERO)

    def total_degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, index: int) -> int:
        if not self.terms:
            return -1
        return max(e[index] for e in self.terms)

    def leading_term(self) -> tuple[tuple[int, ...], Fraction]:
        """Largest term in graded-lex order."""
        if not self.terms:
            raise AlgebraError("zero polynomial has no leading term")
        exps = max(self.terms, key=grlex_key)
        return exps, self.terms[exps]

    def leading_coeff(self) -> Fraction:
        return self.leading_term()[1]

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Terms in descending graded-lex order (the canonical serialization order)."""
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True)

    # -- arithmetic --------------------------------------------------------

    def _check_same(self, other: "MPoly") -> None:
        if self.variables != other.variables:
            raise AlgebraError(
                f"variable mismatch: {self.variables} vs {other.variables}")

    def _coerce(self, other) -> "MPoly | None":
        if isinstance(other, MPoly):
            self._check_same(other)
            return other
        if isinstance(other, (int, Fraction)):
            return MPoly.constant(self.variables, other)
        return None

    def __add__(self, other) -> "MPoly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for exps, c in o.terms.items():
            s = out.get(exps, _ZERO) + c
            if s:
                out[exps] = s
            else:
                out.pop(exps, None)
        return MPoly._make(self.variables, out)

    __radd__ = __add__

    def __neg__(self) -> "MPoly":
        return MPoly._make(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "MPoly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "MPoly":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other) -> "MPoly":
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if c == 0:
                return MPoly.zero(self.variables)
            return MPoly._make(self.variables, {e: k * c for e, k in self.terms.items()})
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, _ZERO) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return MPoly._make(self.variables, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "MPoly":
        if k < 0:
            raise AlgebraError("negative power of a polynomial; use RatFn")
        result = MPoly.one(self.variables)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, MPoly):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    __hash__ = None  # mutable-dict backed; structural equality only

    # -- calculus and evaluation --------------------------------------------

    def diff(self, index: int) -> "MPoly":
        """Partial derivative with respect to the index-th variable."""
        out: dict[tuple[int, ...], Fraction] = {}
        for exps, c in self.terms.items():
            k = exps[index]
            if k == 0:
                continue
            e = list(exps)
            e[index] = k - 1
            e = tuple(e)
            s = out.get(e, _ZERO) + c * k
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return MPoly._make(self.variables, out)

    def evaluate(self, values: Sequence[Scalar]) -> Fraction:
        if len(values) != len(self.variables):
            raise AlgebraError("wrong number of values")
        vals = [Fraction(v) for v in values]
        total = _ZERO
        for exps, c in self.terms.items():
            prod = c
            for v, e in zip(vals, exps):
                if e:
                    prod *= v ** e
            total += prod
        return total

    def substitute(self, values: Sequence["RatFn"]) -> "RatFn":
        """Evaluate at rational-function values (used by coordinate changes)."""
        if len(values) != len(self.variables):
            raise AlgebraError("wrong number of substitution values")
        if not self.terms:
            return RatFn.zero(values[0].variables) if values else RatFn.zero(())
        target_vars = values[0].variables
        # cache powers of each substituted value
        powers: list[dict[int, RatFn]] = [dict() for _ in values]
        total = RatFn.zero(target_vars)
        for exps, c in self.terms.items():
            prod = RatFn.constant(target_vars, c)
            for i, e in enumerate(exps):
                if not e:
                    continue
                p = powers[i].get(e)
                if p is None:
                    p = values[i] ** e
                    powers[i][e] = p
                prod = prod * p
            total = total + prod
        return total

    def rename(self, variables: Sequence[str]) -> "MPoly":
        """Same terms over a different variable tuple of equal length."""
        if len(tuple(variables)) != len(self.variables):
            raise AlgebraError("rename must preserve the number of variables")
        return MPoly(variables, self.terms)

    # -- printing ------------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts: list[str] = []
        for exps, coeff in self.sorted_terms():
            factors = [
                name if e == 1 else f"{name}^{e}"
                for name, e in zip(self.variables, exps)
                if e
            ]
            if not factors:
                body = _fraction_str(coeff)
            elif coeff == 1:
                body = "*".join(factors)
            elif coeff == -1:
                body = "-" + "*".join(factors)
            else:
                body = _fraction_str(coeff) + "*" + "*".join(factors)
            parts.append(body)
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out

    def __repr__(self) -> str:
        return f"MPoly({self})"


def _fraction_str(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


# ---------------------------------------------------------------------------
# Polynomial gcd.
#
# The driver converts both operands to integer-primitive form once and runs a
# content/primitive-part recursion with a subresultant pseudo-remainder
# sequence entirely in machine-integer arithmetic (dicts exps -> int); the
# rational content is a unit and never affects the monic result.  This keeps
# the hot loops free of per-operation Fraction normalization.
# ---------------------------------------------------------------------------

IPoly = dict  # exps tuple -> int, zero coefficients never stored


def _exact_div(f: MPoly, g: MPoly) -> MPoly | None:
    """Quotient f/g when g divides f exactly, else None."""
    if g.is_zero:
        raise DivisionByZero("exact division by zero polynomial")
    if f.is_zero:
        return MPoly.zero(f.variables)
    if g.is_constant:
        inv = 1 / g.constant_value()
        return f * inv
    g_lead_exps = max(g.terms)  # plain lex is a valid monomial order for division
    g_lead_coeff = g.terms[g_lead_exps]
    rem = dict(f.terms)
    quot: dict[tuple[int, ...], Fraction] = {}
    while rem:
        r_exps = max(rem)
        q_exps = tuple(a - b for a, b in zip(r_exps, g_lead_exps))
        if any(e < 0 for e in q_exps):
            return None
        q_coeff = rem[r_exps] / g_lead_coeff
        quot[q_exps] = q_coeff
        for e2, c2 in g.terms.items():
            e = tuple(x + y for x, y in zip(q_exps, e2))
            s = rem.get(e, _ZERO) - q_coeff * c2
            if s:
                rem[e] = s
            else:
                rem.pop(e, None)
    return MPoly._make(f.variables, quot)


def _monic(f: MPoly) -> MPoly:
    if f.is_zero:
        return f
    lc = f.leading_coeff()
    return f if lc == 1 else f * (1 / lc)


# -- integer polynomial helpers (exps tuple -> int dicts) --------------------


def _ideg(f: IPoly, v: int) -> int:
    return max((e[v] for e in f), default=-1)


def _imul(a: IPoly, b: IPoly) -> IPoly:
    out: IPoly = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            s = out.get(e, 0) + c1 * c2
            if s:
                out[e] = s
            else:
                out.pop(e, None)
    return out


def _isub(a: IPoly, b: IPoly) -> IPoly:
    out = dict(a)
    for e, c in b.items():
        s = out.get(e, 0) - c
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return out


def _ipow(a: IPoly, k: int, nvars: int) -> IPoly:
    result: IPoly = {(0,) * nvars: 1}
    for _ in range(k):
        result = _imul(result, a)
    return result


def _ilead(f: IPoly, v: int) -> IPoly:
    d = _ideg(f, v)
    out: IPoly = {}
    for exps, c in f.items():
        if exps[v] == d:
            e = list(exps)
            e[v] = 0
            out[tuple(e)] = c
    return out


def _ishift(f: IPoly, v: int, k: int) -> IPoly:
    if k == 0:
        return f
    out: IPoly = {}
    for exps, c in f.items():
        e = list(exps)
        e[v] += k
        out[tuple(e)] = c
    return out


def _iprem(a: IPoly, b: IPoly, v: int) -> IPoly:
    """Pseudo-remainder lc(b)^(da-db+1) * a mod b with respect to v."""
    da, db = _ideg(a, v), _ideg(b, v)
    lb = _ilead(b, v)
    lb_const = len(lb) == 1 and not any(next(iter(lb)))
    lb_scalar = next(iter(lb.values())) if lb_const else 0
    r = dict(a)
    steps = 0
    while r and _ideg(r, v) >= db:
        dr = _ideg(r, v)
        lr = _ilead(r, v)
        scaled = {e: c * lb_scalar for e, c in r.items()} if lb_const else _imul(lb, r)
        r = _isub(scaled, _ishift(_imul(lr, b), v, dr - db))
        steps += 1
    missing = (da - db + 1) - steps
    if missing > 0 and r:
        factor = _ipow(lb, missing, len(next(iter(a))))
        r = _imul(r, factor)
    return r


def _iexact_div(f: IPoly, g: IPoly) -> IPoly | None:
    """Quotient f/g over Z when g divides f exactly, else None."""
    if not g:
        raise DivisionByZero("exact division by zero polynomial")
    if not f:
        return {}
    if len(g) == 1:
        g_exps, g_lc = next(iter(g.items()))
        quot = {}
        for e, c in f.items():
            q = tuple(a - b for a, b in zip(e, g_exps))
            if any(x < 0 for x in q) or c % g_lc:
                return None
            quot[q] = c // g_lc
        return quot
    g_exps = max(g)  # plain lex is a valid monomial order for division
    g_lc = g[g_exps]
    rem = dict(f)
    quot: IPoly = {}
    while rem:
        r_exps = max(rem)
        r_c = rem[r_exps]
        q_exps = tuple(a - b for a, b in zip(r_exps, g_exps))
        if any(e < 0 for e in q_exps) or r_c % g_lc:
            return None
        q_c = r_c // g_lc
        quot[q_exps] = q_c
        for e2, c2 in g.items():
            e = tuple(x + y for x, y in zip(q_exps, e2))
            s = rem.get(e, 0) - q_c * c2
            if s:
                rem[e] = s
            else:
                rem.pop(e, None)
    return quot


def _int_content(f: IPoly) -> int:
    c = 0
    for v in f.values():
        c = math.gcd(c, v)
        if c == 1:
            break
    return c or 1


def _iprimitive(f: IPoly) -> IPoly:
    """Divide out the integer content and normalize the leading sign."""
    if not f:
        return f
    c = _int_content(f)
    if f[max(f)] < 0:
        c = -c
    if c == 1:
        return f
    return {e: v // c for e, v in f.items()}


def _is_iconstant(f: IPoly) -> bool:
    return len(f) == 1 and not any(next(iter(f)))


def _uni_eval(f: IPoly, v: int, point: list[int]) -> dict[int, int]:
    """Project to a univariate integer polynomial in v at an integer point."""
    out: dict[int, int] = {}
    for exps, c in f.items():
        val = c
        for i, e in enumerate(exps):
            if i != v and e:
                val *= point[i] ** e
        if val:
            k = exps[v]
            s = out.get(k, 0) + val
            if s:
                out[k] = s
            else:
                out.pop(k, None)
    return out


def _uni_gcd_degree(a: dict[int, int], b: dict[int, int]) -> int:
    """Degree of the gcd of two univariate integer polynomials (primitive Euclid)."""

    def norm(p):
        if not p:
            return []
        d = max(p)
        dense = [p.get(i, 0) for i in range(d + 1)]
        g = 0
        for c in dense:
            g = math.gcd(g, c)
        return [c // g for c in dense] if g > 1 else dense

    fa = norm(a)
    fb = norm(b)
    while fb:
        if len(fb) == 1:
            return 0
        while len(fa) >= len(fb):
            shift = len(fa) - len(fb)
            lead_a, lead_b = fa[-1], fb[-1]
            fa = [lead_b * x for x in fa]
            for i, x in enumerate(fb):
                fa[i + shift] -= lead_a * x
            while fa and fa[-1] == 0:
                fa.pop()
            if not fa:
                break
        g = 0
        for c in fa:
            g = math.gcd(g, c)
        if g > 1:
            fa = [c // g for c in fa]
        fa, fb = fb, fa
    return len(fa) - 1


def _certified_coprime(f: IPoly, g: IPoly, nvars: int) -> bool:
    """True when gcd(f, g) is provably constant, via univariate projections.

    For each shared variable v, substitute integers for the others at a
    point where the leading v-coefficient of f does not vanish; the gcd's
    leading coefficient divides that of f, so a constant projected gcd
    certifies that gcd(f, g) has degree zero in v.  False means unknown.
    """
    for v in range(nvars):
        if _ideg(f, v) <= 0 or _ideg(g, v) <= 0:
            continue
        lead = _ilead(f, v)
        certified = False
        for trial in range(6):
            point = [2 + trial + 3 * i for i in range(nvars)]
            lead_val = 0
            for exps, c in lead.items():
                val = c
                for i, e in enumerate(exps):
                    if e:
                        val *= point[i] ** e
                lead_val += val
            if lead_val == 0:
                continue
            fa = _uni_eval(f, v, point)
            fb = _uni_eval(g, v, point)
            if _uni_gcd_degree(fa, fb) == 0:
                certified = True
            break
        if not certified:
            return False
    return True


def _icontent_in(f: IPoly, v: int) -> IPoly:
    """Gcd of the coefficients of f viewed as univariate in v."""
    coeffs: dict[int, IPoly] = {}
    for exps, c in f.items():
        e = list(exps)
        k = e[v]
        e[v] = 0
        coeffs.setdefault(k, {})[tuple(e)] = c
    parts = sorted(coeffs.values(), key=len)
    acc: IPoly = {}
    for part in parts:
        acc = _igcd(acc, part)
        if _is_iconstant(acc):
            break
    return acc


def _igcd(f: IPoly, g: IPoly) -> IPoly:
    """Primitive gcd of integer polynomials, positive leading coefficient."""
    if not f:
        return _iprimitive(g)
    if not g:
        return _iprimitive(f)
    nvars = len(next(iter(f)))
    one: IPoly = {(0,) * nvars: 1}
    f = _iprimitive(f)
    g = _iprimitive(g)
    if _is_iconstant(f) or _is_iconstant(g):
        return one  # a constant operand: contents were already removed
    if f == g:
        return f
    if _certified_coprime(f, g, nvars):
        return one
    # divisibility fast paths: most gcds in this workload are exact divisors
    df = max(sum(e) for e in f)
    dg = max(sum(e) for e in g)
    if df >= dg and _iexact_div(f, g) is not None:
        return g
    if dg >= df and _iexact_div(g, f) is not None:
        return f
    v = next(i for i in range(nvars) if _ideg(f, i) > 0 or _ideg(g, i) > 0)
    if _ideg(f, v) == 0:
        return _igcd(f, _icontent_in(g, v))
    if _ideg(g, v) == 0:
        return _igcd(_icontent_in(f, v), g)

    cf = _icontent_in(f, v)
    cg = _icontent_in(g, v)
    pf = _iexact_div(f, cf)
    pg = _iexact_div(g, cg)
    assert pf is not None and pg is not None
    content = _igcd(cf, cg)

    # Subresultant pseudo-remainder sequence: every division below is exact
    # over Z, so no content extraction is needed along the way.
    a, b = (pf, pg) if _ideg(pf, v) >= _ideg(pg, v) else (pg, pf)
    gg = one
    hh = one
    while True:
        delta = _ideg(a, v) - _ideg(b, v)
        r = _iprem(a, b, v)
        if not r:
            result = b
            break
        if _ideg(r, v) == 0:
            result = one
            break
        reduced = _iexact_div(r, _imul(gg, _ipow(hh, delta, nvars)))
        assert reduced is not None, "subresultant division failed"
        a, b = b, reduced
        gg = _ilead(a, v)
        if delta == 1:
            hh = gg
        elif delta > 1:
            hh = _iexact_div(_ipow(gg, delta, nvars), _ipow(hh, delta - 1, nvars))
            assert hh is not None
    if sum(max(result, key=grlex_key)) > 0:
        c_res = _icontent_in(result, v)
        result = _iexact_div(result, c_res)
        assert result is not None
    return _iprimitive(_imul(content, result))


def _to_int(f: MPoly) -> IPoly:
    """Integer-primitive image of f (rational content dropped; it is a unit).

    Cached on the instance: polynomials are immutable and the image is
    requested repeatedly by the gcd driver.
    """
    try:
        return f._intform
    except AttributeError:
        pass
    if not f.terms:
        out: IPoly = {}
    else:
        lcm = 1
        for c in f.terms.values():
            lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
        out = _iprimitive({e: int(c * lcm) for e, c in f.terms.items()})
    object.__setattr__(f, "_intform", out)
    return out


# Memo for gcd results keyed by the integer images.  Purely an evaluation
# cache of a deterministic function: concurrent recomputation is harmless.
_GCD_MEMO: dict = {}
_GCD_MEMO_LIMIT = 200_000


def mpoly_gcd(f: MPoly, g: MPoly) -> MPoly:
    """Monic greatest common divisor of two polynomials over Q."""
    if f.is_zero:
        return _monic(g)
    if g.is_zero:
        return _monic(f)
    f._check_same(g)
    if f.is_constant or g.is_constant:
        return MPoly.one(f.variables)
    fz = _to_int(f)
    gz = _to_int(g)
    kf = frozenset(fz.items())
    kg = frozenset(gz.items())
    key = (kf, kg) if len(kf) <= len(kg) else (kg, kf)
    result = _GCD_MEMO.get(key)
    if result is None:
        result = _igcd(fz, gz)
        if len(_GCD_MEMO) >= _GCD_MEMO_LIMIT:
            _GCD_MEMO.clear()
        _GCD_MEMO[key] = result
    return _monic(MPoly(f.variables, {e: Fraction(c) for e, c in result.items()}))


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------


class RatFn:
    """Reduced rational function num/den in normal form.

    Normal form: gcd(num, den) = 1 and den is monic in graded-lex order, so
    two equal rational functions are structurally identical.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: MPoly, den: MPoly | None = None):
        if den is None:
            den = MPoly.one(num.variables)
        num._check_same(den)
        if den.is_zero:
            raise DivisionByZero("rational function with zero denominator")
        if num.is_zero:
            den = MPoly.one(num.variables)
        else:
            if not den.is_one:
                g = mpoly_gcd(num, den)
                if not g.is_one:
                    num = _exact_div(num, g)
                    den = _exact_div(den, g)
            lc = den.leading_coeff()
            if lc != 1:
                inv = 1 / lc
                num = num * inv
                den = den * inv
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RatFn is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def _reduced(cls, num: MPoly, den: MPoly) -> "RatFn":
        """Construct from an already coprime pair, applying only the monic scaling."""
        if num.is_zero:
            den = MPoly.one(num.variables)
        else:
            lc = den.leading_coeff()
            if lc != 1:
                inv = 1 / lc
                num = num * inv
                den = den * inv
        out = cls.__new__(cls)
        object.__setattr__(out, "num", num)
        object.__setattr__(out, "den", den)
        return out

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "RatFn":
        return cls(MPoly.zero(variables))

    @classmethod
    def one(cls, variables: Sequence[str]) -> "RatFn":
        return cls(MPoly.one(variables))

    @classmethod
    def constant(cls, variables: Sequence[str], value: Scalar) -> "RatFn":
        return cls(MPoly.constant(variables, value))

    @classmethod
    def variable(cls, variables: Sequence[str], name: str) -> "RatFn":
        return cls(MPoly.variable(variables, name))

    @classmethod
    def from_poly(cls, p: MPoly) -> "RatFn":
        return cls(p)

    # -- queries -------------------------------------------------------------

    @property
    def variables(self) -> tuple[str, ...]:
        return self.num.variables

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_polynomial(self) -> bool:
        return self.den.is_one

    @property
    def is_constant(self) -> bool:
        return self.num.is_constant and self.den.is_one

    @property
    def is_one(self) -> bool:
        return self.num.is_one and self.den.is_one

    def constant_value(self) -> Fraction:
        if not self.is_constant:
            raise AlgebraError("rational function is not constant")
        return self.num.constant_value()

    # -- arithmetic ----------------------------------------------------------

    def _coerce(self, other) -> "RatFn | None":
        if isinstance(other, RatFn):
            if self.variables != other.variables:
                raise AlgebraError("variable mismatch between rational functions")
            return other
        if isinstance(other, MPoly):
            return RatFn(other)
        if isinstance(other, (int, Fraction)):
            return RatFn.constant(self.variables, other)
        return None

    def __add__(self, other) -> "RatFn":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_zero:
            return o
        if o.is_zero:
            return self
        n1, d1, n2, d2 = self.num, self.den, o.num, o.den
        if d1.is_one and d2.is_one:
            return RatFn._reduced(n1 + n2, d1)
        if d1 == d2:
            t = n1 + n2
            if t.is_zero:
                return RatFn.zero(self.variables)
            g = mpoly_gcd(t, d1)
            if g.is_one:
                return RatFn._reduced(t, d1)
            return RatFn._reduced(_exact_div(t, g), _exact_div(d1, g))
        # classical reduced-fraction addition: only small gcds are computed
        g0 = mpoly_gcd(d1, d2)
        if g0.is_one:
            return RatFn._reduced(n1 * d2 + n2 * d1, d1 * d2)
        d1r = _exact_div(d1, g0)
        d2r = _exact_div(d2, g0)
        t = n1 * d2r + n2 * d1r
        if t.is_zero:
            return RatFn.zero(self.variables)
        g1 = mpoly_gcd(t, g0)
        if g1.is_one:
            return RatFn._reduced(t, d1 * d2r)
        return RatFn._reduced(_exact_div(t, g1), _exact_div(d1, g1) * d2r)

    __radd__ = __add__

    def __neg__(self) -> "RatFn":
        if self.is_zero:
            return self
        out = RatFn.__new__(RatFn)
        object.__setattr__(out, "num", -self.num)
        object.__setattr__(out, "den", self.den)
        return out

    def __sub__(self, other) -> "RatFn":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other) -> "RatFn":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other) -> "RatFn":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return RatFn.zero(self.variables)
            return RatFn._reduced(self.num * other, self.den)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_zero or o.is_zero:
            return RatFn.zero(self.variables)
        # cross-cancel; the product of the reduced parts is again reduced
        n1, d1, n2, d2 = self.num, self.den, o.num, o.den
        if not d2.is_one and not n1.is_constant:
            g = mpoly_gcd(n1, d2)
            if not g.is_one:
                n1 = _exact_div(n1, g)
                d2 = _exact_div(d2, g)
        if not d1.is_one and not n2.is_constant:
            g = mpoly_gcd(n2, d1)
            if not g.is_one:
                n2 = _exact_div(n2, g)
                d1 = _exact_div(d1, g)
        return RatFn._reduced(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RatFn":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero:
            raise DivisionByZero("division by zero rational function")
        return self * o.inverse()

    def __rtruediv__(self, other) -> "RatFn":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def inverse(self) -> "RatFn":
        if self.is_zero:
            raise DivisionByZero("inverse of zero rational function")
        return RatFn._reduced(self.den, self.num)

    def __pow__(self, k: int) -> "RatFn":
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return RatFn.one(self.variables)
        return RatFn._reduced(self.num ** k, self.den ** k)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RatFn.constant(self.variables, other)
        if not isinstance(other, RatFn):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    __hash__ = None

    # -- calculus ------------------------------------------------------------

    def diff(self, index: int) -> "RatFn":
        """Partial derivative via the quotient rule.

        Uses (n/d)' = (n' s - n (d'/g)) / (d s) with g = gcd(d, d') and
        s = d/g, which keeps the gcd work on small inputs.
        """
        dn = self.num.diff(index)
        if self.den.is_one:
            return RatFn._reduced(dn, self.den)
        dd = self.den.diff(index)
        if dd.is_zero:
            return RatFn(dn, self.den)
        g = mpoly_gcd(self.den, dd)
        if g.is_one:
            return RatFn(dn * self.den - self.num * dd, self.den * self.den)
        s = _exact_div(self.den, g)
        return RatFn(dn * s - self.num * _exact_div(dd, g), self.den * s)

    def evaluate(self, values: Sequence[Scalar]) -> Fraction:
        d = self.den.evaluate(values)
        if d == 0:
            raise DivisionByZero("denominator vanishes at evaluation point")
        return self.num.evaluate(values) / d

    def substitute(self, values: Sequence["RatFn"]) -> "RatFn":
        den = self.den.substitute(values)
        if den.is_zero:
            raise DivisionByZero("denominator vanishes under substitution")
        return self.num.substitute(values) / den

    # -- printing ------------------------------------------------------------

    def __str__(self) -> str:
        if self.den.is_one:
            return str(self.num)
        num_s = str(self.num)
        if len(self.num.terms) > 1:
            num_s = f"({num_s})"
        den_s = str(self.den)
        if not _is_bare_power(self.den):
            den_s = f"({den_s})"
        return f"{num_s}/{den_s}"

    def __repr__(self) -> str:
        return f"RatFn({self})"


def _is_bare_power(p: MPoly) -> bool:
    """True when printing p needs no parentheses as a denominator: x or x^k."""
    if len(p.terms) != 1:
        return False
    exps, coeff = next(iter(p.terms.items()))
    return coeff == 1 and sum(1 for e in exps if e) == 1


def ratfn_matrix(variables: Sequence[str], rows: Iterable[Iterable]) -> tuple[tuple[RatFn, ...], ...]:
    """Coerce a nested iterable of scalars/polys into a RatFn matrix."""
    out = []
    for row in rows:
        r = []
        for x in row:
            if isinstance(x, RatFn):
                r.append(x)
            elif isinstance(x, MPoly):
                r.append(RatFn(x))
            else:
                r.append(RatFn.constant(variables, x))
        out.append(tuple(r))
    return tuple(out)
