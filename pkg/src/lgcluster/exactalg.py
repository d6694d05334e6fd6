"""Exact sparse Laurent polynomials and rational functions over the integers.

A Laurent polynomial in ``n`` variables is stored as a dict mapping exponent
tuples (one signed int per variable) to nonzero integer coefficients::

    z1 + z2 + z1^-1*z2^-1   ->   {(1, 0): 1, (0, 1): 1, (-1, -1): 1}

Coefficients are Python ints (unbounded).  Exponents are checked against the
signed 64-bit range and raise :class:`ExponentOverflow` instead of growing
silently.

Rational functions are kept as a numerator/denominator pair without gcd
reduction; equality is decided by cross-multiplication, or probabilistically
by evaluation at random points of ``(F_p^*)^n``.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import accumulate
from math import gcd
from typing import Iterable, Iterator, Mapping, Sequence

Exponent = tuple[int, ...]

INT64_MAX = 2**63 - 1
DEFAULT_PRIME = 2**61 - 1
DEFAULT_RETRIES = 64


class ExponentOverflow(OverflowError):
    """An exponent left the signed 64-bit range."""


class NotDivisible(ArithmeticError):
    """Exact division left a nonzero remainder."""

    def __init__(self, msg: str, remainder: "LaurentPoly | None" = None):
        super().__init__(msg)
        self.remainder = remainder


class DegeneratePoint(ArithmeticError):
    """A denominator (or an inverted coordinate) vanished at the sample point."""


class RetryBudgetExhausted(RuntimeError):
    pass


class VariableCountMismatch(ValueError):
    pass


def _check_exponent(e: Exponent) -> Exponent:
    for x in e:
        if x > INT64_MAX or x < -INT64_MAX - 1:
            raise ExponentOverflow(f"exponent {x} out of 64-bit range")
    return e


def _max_abs_exponent(terms: Mapping[Exponent, int]) -> int:
    return max((abs(x) for e in terms for x in e), default=0)


class LaurentPoly:
    """Immutable sparse Laurent polynomial with integer coefficients."""

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exponent, int] | None = None,
                 *, _trusted: bool = False):
        self.nvars = nvars
        self._hash = None
        if _trusted:
            self._terms = terms
            return
        clean: dict[Exponent, int] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != nvars:
                raise VariableCountMismatch(
                    f"exponent {e} has length {len(e)}, expected {nvars}")
            _check_exponent(e)
            c = int(c)
            if c:
                clean[e] = clean.get(e, 0) + c
                if not clean[e]:
                    del clean[e]
        self._terms = clean

    # constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "LaurentPoly":
        return cls(nvars, {}, _trusted=True)

    @classmethod
    def constant(cls, nvars: int, c: int) -> "LaurentPoly":
        return cls(nvars, {(0,) * nvars: c} if c else {}, _trusted=True)

    @classmethod
    def one(cls, nvars: int) -> "LaurentPoly":
        return cls.constant(nvars, 1)

    @classmethod
    def monomial(cls, exponent: Sequence[int], coeff: int = 1) -> "LaurentPoly":
        e = _check_exponent(tuple(int(x) for x in exponent))
        return cls(len(e), {e: coeff} if coeff else {}, _trusted=True)

    @classmethod
    def var(cls, nvars: int, i: int) -> "LaurentPoly":
        e = [0] * nvars
        e[i] = 1
        return cls.monomial(e)

    # basic access ---------------------------------------------------------

    @property
    def terms(self) -> Mapping[Exponent, int]:
        return self._terms

    def items(self) -> Iterator[tuple[Exponent, int]]:
        """Terms in canonical (lex ascending) order."""
        for e in sorted(self._terms):
            yield e, self._terms[e]

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def coeff(self, e: Sequence[int]) -> int:
        return self._terms.get(tuple(e), 0)

    def constant_term(self) -> int:
        return self._terms.get((0,) * self.nvars, 0)

    def leading(self) -> tuple[Exponent, int]:
        e = max(self._terms)
        return e, self._terms[e]

    def min_exponents(self) -> Exponent:
        if not self._terms:
            return (0,) * self.nvars
        return tuple(min(col) for col in zip(*self._terms))

    def max_exponents(self) -> Exponent:
        if not self._terms:
            return (0,) * self.nvars
        return tuple(max(col) for col in zip(*self._terms))

    def total_degree_span(self) -> int:
        """Total degree after shifting to an ordinary polynomial."""
        lo = self.min_exponents()
        return max((sum(x - m for x, m in zip(e, lo)) for e in self._terms), default=0)

    def content(self) -> int:
        g = 0
        for c in self._terms.values():
            g = gcd(g, c)
        return g

    def is_polynomial(self) -> bool:
        return all(x >= 0 for e in self._terms for x in e)

    # arithmetic -----------------------------------------------------------

    def _check_same(self, other: "LaurentPoly") -> None:
        if self.nvars != other.nvars:
            raise VariableCountMismatch(f"{self.nvars} vs {other.nvars} variables")

    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            self._check_same(other)
            return other
        if isinstance(other, int):
            return LaurentPoly.constant(self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return LaurentPoly(self.nvars, out, _trusted=True)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self.nvars, {e: -c for e, c in self._terms.items()}, _trusted=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if isinstance(other, int):
            if not other:
                return LaurentPoly.zero(self.nvars)
            return LaurentPoly(self.nvars, {e: c * other for e, c in self._terms.items()},
                               _trusted=True)
        if isinstance(other, RatFunc):
            return NotImplemented
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self._terms, other._terms
        if not a or not b:
            return LaurentPoly.zero(self.nvars)
        # one bound check instead of per-term checks
        if _max_abs_exponent(a) + _max_abs_exponent(b) > INT64_MAX:
            check = _check_exponent
        else:
            check = None
        if len(a) < len(b):
            a, b = b, a
        out: dict[Exponent, int] = {}
        get = out.get
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = get(e, 0) + ca * cb
        if check:
            for e in out:
                check(e)
        return LaurentPoly(self.nvars, {e: c for e, c in out.items() if c}, _trusted=True)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "LaurentPoly":
        if k < 0:
            if self.is_monomial() and abs(self.leading()[1]) == 1:
                (e, c), = self._terms.items()
                return LaurentPoly.monomial([-x for x in e], c) ** (-k)
            raise ValueError("negative power of a non-unit; use pow_rat")
        result = LaurentPoly.one(self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def shift(self, e: Sequence[int]) -> "LaurentPoly":
        """Multiply by the monomial ``z^e``."""
        if len(e) != self.nvars:
            raise VariableCountMismatch("shift vector length")
        if not any(e):
            return self
        return LaurentPoly(self.nvars,
                           {_check_exponent(tuple(x + y for x, y in zip(k, e))): c
                            for k, c in self._terms.items()}, _trusted=True)

    def map_exponents(self, f) -> "LaurentPoly":
        """Apply a map on exponent vectors (coefficients of colliding terms add)."""
        out: dict[Exponent, int] = {}
        nv = None
        for e, c in self._terms.items():
            e2 = _check_exponent(tuple(f(e)))
            nv = len(e2)
            out[e2] = out.get(e2, 0) + c
        if nv is None:
            nv = len(f((0,) * self.nvars))
        return LaurentPoly(nv, {e: c for e, c in out.items() if c}, _trusted=True)

    # comparison / hashing -------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            return self == LaurentPoly.constant(self.nvars, other)
        if isinstance(other, RatFunc):
            return other == self
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    # text / json ----------------------------------------------------------

    def to_text(self, var: str = "x") -> str:
        if not self._terms:
            return "0"
        out = []
        for e, c in self.items():
            factors = []
            for i, x in enumerate(e):
                if x == 1:
                    factors.append(f"{var}{i + 1}")
                elif x:
                    factors.append(f"{var}{i + 1}^{x}")
            mono = "*".join(factors)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if not out:
                out.append(body if c > 0 else f"-{body}")
            else:
                out.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(out)

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"LaurentPoly({self.nvars}, {self.to_text()!r})"

    def to_json(self) -> list[dict]:
        return [{"exp": list(e), "coeff": c} for e, c in self.items()]

    @classmethod
    def from_json(cls, data: Iterable[Mapping], nvars: int | None = None) -> "LaurentPoly":
        data = list(data)
        if nvars is None:
            if not data:
                raise ValueError("cannot infer variable count of an empty polynomial")
            nvars = len(data[0]["exp"])
        return cls(nvars, _sum_terms((tuple(t["exp"]), t["coeff"]) for t in data))

    @classmethod
    def parse(cls, text: str, nvars: int, var: str = "x") -> "LaurentPoly":
        """Parse the canonical text form, e.g. ``x1^-1*x2^-1 + 2*x2 - x3``."""
        return parse_laurent(text, nvars, var)

    # evaluation / substitution -------------------------------------------

    def eval_mod_p(self, point: "PrimePoint") -> int:
        return eval_mod_p(self, point)


def _sum_terms(pairs: Iterable[tuple[Exponent, int]]) -> dict[Exponent, int]:
    out: dict[Exponent, int] = {}
    for e, c in pairs:
        out[e] = out.get(e, 0) + c
    return out


def _split_terms(text: str) -> list[str]:
    # a '-' directly after '^' belongs to the exponent
    terms, cur = [], ""
    for ch in text:
        if ch in "+-" and cur.strip() and not cur.rstrip().endswith("^"):
            terms.append(cur)
            cur = ch
        else:
            cur += ch
    if cur.strip():
        terms.append(cur)
    return terms


def parse_laurent(text: str, nvars: int, var: str = "x") -> LaurentPoly:
    text = text.strip()
    if text in ("", "0"):
        return LaurentPoly.zero(nvars)
    factor_re = re.compile(rf"^{re.escape(var)}(\d+)(?:\^(-?\d+))?$")
    out: dict[Exponent, int] = {}
    for raw in _split_terms(text.replace(" ", "")):
        sign = 1
        if raw[0] in "+-":
            sign = -1 if raw[0] == "-" else 1
            raw = raw[1:]
        coeff = 1
        e = [0] * nvars
        for factor in raw.split("*"):
            if not factor:
                raise ValueError(f"malformed term in {text!r}")
            if factor.isdigit():
                coeff *= int(factor)
                continue
            m = factor_re.match(factor)
            if not m:
                raise ValueError(f"cannot parse factor {factor!r}")
            idx = int(m.group(1)) - 1
            if not 0 <= idx < nvars:
                raise ValueError(f"variable {factor!r} out of range for {nvars} variables")
            e[idx] += int(m.group(2)) if m.group(2) is not None else 1
        key = tuple(e)
        out[key] = out.get(key, 0) + sign * coeff
    return LaurentPoly(nvars, out)


# ---------------------------------------------------------------------------
# rational functions


class RatFunc:
    """Quotient of two Laurent polynomials, canonicalized but not gcd-reduced.

    Canonical form: the denominator is shifted so that every variable has
    minimal exponent 0, common integer content is removed, and the
    lexicographically leading coefficient of the denominator is positive.
    A monomial denominator is folded into the numerator.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentPoly, den: LaurentPoly | None = None):
        if den is None:
            den = LaurentPoly.one(num.nvars)
        num._check_same(den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        num, den = _canonical_pair(num, den)
        self.num = num
        self.den = den

    @classmethod
    def coerce(cls, f: "RatFunc | LaurentPoly | int", nvars: int | None = None) -> "RatFunc":
        if isinstance(f, RatFunc):
            return f
        if isinstance(f, LaurentPoly):
            return cls(f)
        if isinstance(f, int) and nvars is not None:
            return cls(LaurentPoly.constant(nvars, f))
        raise TypeError(f"cannot coerce {type(f).__name__} to RatFunc")

    @property
    def nvars(self) -> int:
        return self.num.nvars

    def is_laurent(self) -> bool:
        return self.den == 1

    def try_laurent(self) -> LaurentPoly | None:
        """The Laurent polynomial equal to this function, if one exists."""
        if self.is_laurent():
            return self.num
        try:
            return exact_div(self.num, self.den)
        except NotDivisible:
            return None

    def reduced(self) -> "RatFunc":
        q = self.try_laurent()
        return RatFunc(q) if q is not None else self

    def __add__(self, other):
        other = _coerce_rat(other, self.nvars)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        other = _coerce_rat(other, self.nvars)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce_rat(other, self.nvars)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _coerce_rat(other, self.nvars)
        if other is NotImplemented:
            return NotImplemented
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce_rat(other, self.nvars)
        if other is NotImplemented:
            return NotImplemented
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = _coerce_rat(other, self.nvars)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, k: int) -> "RatFunc":
        if k >= 0:
            return RatFunc(self.num ** k, self.den ** k)
        if self.num.is_zero():
            raise ZeroDivisionError("zero to a negative power")
        return RatFunc(self.den ** -k, self.num ** -k)

    def __eq__(self, other) -> bool:
        if isinstance(other, (LaurentPoly, int)):
            other = RatFunc.coerce(other, self.nvars)
        if not isinstance(other, RatFunc):
            return NotImplemented
        return bool(equal(self, other))

    __hash__ = None  # equality is semantic, no canonical hash

    def to_text(self, var: str = "x") -> str:
        if self.is_laurent():
            return self.num.to_text(var)
        return f"({self.num.to_text(var)}) / ({self.den.to_text(var)})"

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"RatFunc({self.to_text()!r})"

    def eval_mod_p(self, point: "PrimePoint") -> int:
        return eval_mod_p(self, point)


def _coerce_rat(other, nvars: int):
    if isinstance(other, RatFunc):
        if other.nvars != nvars:
            raise VariableCountMismatch(f"{nvars} vs {other.nvars} variables")
        return other
    if isinstance(other, LaurentPoly):
        if other.nvars != nvars:
            raise VariableCountMismatch(f"{nvars} vs {other.nvars} variables")
        return RatFunc(other)
    if isinstance(other, int):
        return RatFunc(LaurentPoly.constant(nvars, other))
    return NotImplemented


def _canonical_pair(num: LaurentPoly, den: LaurentPoly) -> tuple[LaurentPoly, LaurentPoly]:
    lo = den.min_exponents()
    if any(lo):
        neg = [-x for x in lo]
        den = den.shift(neg)
        num = num.shift(neg)
    g = gcd(den.content(), num.content()) if num else den.content()
    if den.leading()[1] < 0:
        g = -g
    if g != 1:
        den = LaurentPoly(den.nvars, {e: c // g for e, c in den.terms.items()}, _trusted=True)
        num = LaurentPoly(num.nvars, {e: c // g for e, c in num.terms.items()}, _trusted=True)
    return num, den


# ---------------------------------------------------------------------------
# operations


def add(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    a._check_same(b)
    return a + b


def mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    a._check_same(b)
    return a * b


def exact_div(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    """Return ``q`` with ``q*b == a`` or raise :class:`NotDivisible`.

    Both operands are shifted to ordinary polynomials not divisible by any
    variable; then ``b | a`` in the Laurent ring iff ``b' | a'`` in the
    polynomial ring, which single-divisor lex division decides exactly.
    """
    a._check_same(b)
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if a.is_zero():
        return LaurentPoly.zero(a.nvars)
    if b.is_monomial():
        (eb, cb), = b.terms.items()
        out = {}
        for e, c in a.terms.items():
            q, r = divmod(c, cb)
            if r:
                raise NotDivisible("coefficient not divisible", a)
            out[_check_exponent(tuple(x - y for x, y in zip(e, eb)))] = q
        return LaurentPoly(a.nvars, out, _trusted=True)

    la, lb = a.min_exponents(), b.min_exponents()
    bs = {tuple(x - m for x, m in zip(e, lb)): c for e, c in b.terms.items()}
    rem = {tuple(x - m for x, m in zip(e, la)): c for e, c in a.terms.items()}
    lead_b = max(bs)
    lead_c = bs[lead_b]
    rest_b = [(e, c) for e, c in bs.items() if e != lead_b]
    quot: dict[Exponent, int] = {}
    n = a.nvars
    while rem:
        lt = max(rem)
        c = rem[lt]
        shift = tuple(x - y for x, y in zip(lt, lead_b))
        if any(s < 0 for s in shift) or c % lead_c:
            rem_poly = LaurentPoly(n, rem, _trusted=True).shift(la)
            raise NotDivisible("nonzero remainder", rem_poly)
        qc = c // lead_c
        quot[shift] = qc
        del rem[lt]
        for e, cb in rest_b:
            k = tuple(x + y for x, y in zip(e, shift))
            v = rem.get(k, 0) - qc * cb
            if v:
                rem[k] = v
            else:
                rem.pop(k, None)
    offset = tuple(x - y for x, y in zip(la, lb))
    return LaurentPoly(n, quot, _trusted=True).shift(offset)


def pow_rat(a: LaurentPoly, k: int) -> RatFunc:
    """``a**k`` as a rational function; negative ``k`` inverts."""
    if k >= 0:
        return RatFunc(a ** k)
    if a.is_zero():
        raise ZeroDivisionError("zero base with negative exponent")
    return RatFunc(LaurentPoly.one(a.nvars), a ** (-k))


def _times_binomial(p: list[int], k: int) -> list[int]:
    for _ in range(k):
        p = [a + b for a, b in zip(p + [0], [0] + p)]
    return p


def _over_binomial(p: list[int], k: int) -> list[int] | None:
    """``p / (1+t)^k`` for a dense ascending coefficient list, or None."""
    for _ in range(k):
        if len(p) < 2:
            return None
        # q_i = p_i - q_{i-1}: alternating prefix sums
        q = list(accumulate(c if i % 2 == 0 else -c for i, c in enumerate(p[:-1])))
        q = [c if i % 2 == 0 else -c for i, c in enumerate(q)]
        if q[-1] != p[-1]:
            return None
        p = q
    return p


def _binomial_remainder(p: list[int], k: int) -> list[int]:
    """Remainder of ``p`` modulo ``(1+t)^k`` by descending long division."""
    d = [1]
    for _ in range(k):
        d = [a + b for a, b in zip(d + [0], [0] + d)]
    r = list(p)
    for top in range(len(r) - 1, k - 1, -1):
        c = r[top]
        if c:
            for j, b in enumerate(d):
                r[top - k + j] -= c * b
    return r[:k]


def binomial_twist(f: LaurentPoly, d: Sequence[int], ell: Sequence[int],
                   c: int = 0) -> LaurentPoly:
    """``sum_e f_e x^e (1 + x^d)^(ell.e + c)``, certified Laurent.

    ``ell`` must be orthogonal to ``d``, so the power is constant on every
    coset ``e + Z d``.  Multiplication by ``1 + x^d`` preserves those
    cosets, hence the result is Laurent iff each coset part is divisible by
    its own power of the binomial, which is a one-variable problem in
    ``t = x^d``.  Raises :class:`NotDivisible` with the offending coset's
    remainder otherwise.
    """
    n = f.nvars
    d = tuple(int(x) for x in d)
    ell = tuple(int(x) for x in ell)
    if len(d) != n or len(ell) != n:
        raise VariableCountMismatch("direction and weight must match the variable count")
    if not any(d):
        raise ValueError("binomial direction must be nonzero")
    if sum(a * b for a, b in zip(d, ell)):
        raise ValueError("weight is not constant along the binomial direction")
    piv = min((j for j in range(n) if d[j]), key=lambda j: abs(d[j]))
    dp = d[piv]
    cosets: dict[Exponent, dict[int, int]] = {}
    for e, coef in f.terms.items():
        j = e[piv] // dp if dp > 0 else -(e[piv] // -dp)
        r = tuple(x - j * y for x, y in zip(e, d)) if j else e
        cosets.setdefault(r, {})[j] = coef
    out: dict[Exponent, int] = {}
    for r, series in cosets.items():
        k = sum(a * b for a, b in zip(ell, r)) + c
        lo, hi = min(series), max(series)
        dense = [series.get(j, 0) for j in range(lo, hi + 1)]
        if k >= 0:
            dense = _times_binomial(dense, k)
        else:
            q = _over_binomial(dense, -k)
            if q is None:
                rem = _binomial_remainder(dense, -k)
                terms = {tuple(x + (lo + j) * y for x, y in zip(r, d)): a
                         for j, a in enumerate(rem) if a}
                raise NotDivisible("nonzero remainder", LaurentPoly(n, terms))
            dense = q
        for j, a in enumerate(dense):
            if a:
                out[tuple(x + (lo + j) * y for x, y in zip(r, d))] = a
    if out and _max_abs_exponent(out) > INT64_MAX:
        for e in out:
            _check_exponent(e)
    return LaurentPoly(n, out, _trusted=True)


def _unit_monomial(f: RatFunc) -> tuple[Exponent, int] | None:
    if f.is_laurent() and f.num.is_monomial():
        (e, c), = f.num.terms.items()
        if c in (1, -1):
            return e, c
    return None


def substitute(f: "LaurentPoly | RatFunc", images: Sequence["RatFunc | LaurentPoly"],
               *, reduce: bool = False) -> RatFunc:
    """Ring-homomorphic substitution ``x_j -> images[j]``.

    Images may live in a different number of variables than ``f``.  With
    ``reduce=True`` the result is returned with denominator 1 whenever it
    is a Laurent polynomial.
    """
    if isinstance(f, RatFunc):
        top = substitute(f.num, images)
        bottom = substitute(f.den, images)
        out = top / bottom
        return out.reduced() if reduce else out
    if len(images) != f.nvars:
        raise VariableCountMismatch(f"{len(images)} images for {f.nvars} variables")
    imgs = [RatFunc.coerce(g) for g in images]
    if not imgs:
        raise ValueError("substitution needs at least one variable")
    m = imgs[0].nvars
    for g in imgs:
        if g.nvars != m:
            raise VariableCountMismatch("images must share a ring")
    if f.is_zero():
        return RatFunc(LaurentPoly.zero(m))

    lo, hi = f.min_exponents(), f.max_exponents()
    units: dict[int, tuple[Exponent, int]] = {}
    general: list[int] = []
    for j, g in enumerate(imgs):
        if lo[j] == 0 and hi[j] == 0:
            continue
        u = _unit_monomial(g)
        if u is not None:
            units[j] = u
        else:
            if g.num.is_zero() and lo[j] < 0:
                raise ZeroDivisionError(f"zero image for variable {j + 1} with negative exponent")
            general.append(j)

    # group terms by their exponents on the non-unit variables
    groups: dict[Exponent, dict[Exponent, int]] = {}
    for e, c in f.terms.items():
        mono = [0] * m
        sign = 1
        for j, (ue, uc) in units.items():
            x = e[j]
            if x:
                for t in range(m):
                    mono[t] += ue[t] * x
                if uc < 0 and x % 2:
                    sign = -sign
        key = tuple(e[j] for j in general)
        bucket = groups.setdefault(key, {})
        mono_t = _check_exponent(tuple(mono))
        bucket[mono_t] = bucket.get(mono_t, 0) + sign * c

    pos = {j: max(0, hi[j]) for j in general}
    neg = {j: max(0, -lo[j]) for j in general}
    npow: dict[tuple[int, int], LaurentPoly] = {}
    dpow: dict[tuple[int, int], LaurentPoly] = {}

    def _p(cache, j, k, base):
        key = (j, k)
        if key not in cache:
            cache[key] = base ** k
        return cache[key]

    num = LaurentPoly.zero(m)
    for key, bucket in groups.items():
        part = LaurentPoly(m, {e: c for e, c in bucket.items() if c}, _trusted=True)
        if not part:
            continue
        for j, x in zip(general, key):
            g = imgs[j]
            part = part * _p(npow, j, x + neg[j], g.num) * _p(dpow, j, pos[j] - x, g.den)
        num = num + part
    den = LaurentPoly.one(m)
    for j in general:
        den = den * _p(npow, j, neg[j], imgs[j].num) * _p(dpow, j, pos[j], imgs[j].den)
    out = RatFunc(num, den)
    return out.reduced() if reduce else out


# ---------------------------------------------------------------------------
# prime-field evaluation


@lru_cache(maxsize=64)
def is_probable_prime(n: int) -> bool:
    """Miller-Rabin; deterministic below 3.3e24, probabilistic above."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimePoint:
    prime: int
    coords: tuple[int, ...]

    def __post_init__(self):
        if self.prime <= 2 or not is_probable_prime(self.prime):
            raise ValueError(f"{self.prime} is not an odd prime")
        for c in self.coords:
            if not 1 <= c <= self.prime - 1:
                raise ValueError(f"coordinate {c} not in [1, p-1]")

    @classmethod
    def random(cls, nvars: int, rng: random.Random, prime: int = DEFAULT_PRIME) -> "PrimePoint":
        return cls(prime, tuple(rng.randrange(1, prime) for _ in range(nvars)))

    def to_json(self) -> dict:
        return {"prime": self.prime, "coords": list(self.coords)}


def batch_inverse(values: Sequence[int], p: int) -> list[int]:
    """Inverses mod ``p`` of all ``values`` with a single modular inversion."""
    prefix = []
    acc = 1
    for v in values:
        prefix.append(acc)
        acc = acc * v % p
    if acc == 0:
        raise DegeneratePoint("zero value has no inverse mod p")
    inv = pow(acc, -1, p)
    out = [0] * len(values)
    for k in range(len(values) - 1, -1, -1):
        out[k] = inv * prefix[k] % p
        inv = inv * values[k] % p
    return out


def _eval_laurent(f: LaurentPoly, coords: Sequence[int], p: int,
                  inverses: Sequence[int] | None = None) -> int:
    if len(coords) != f.nvars:
        raise VariableCountMismatch(f"point has {len(coords)} coordinates, need {f.nvars}")
    if inverses is None and any(x < 0 for e in f.terms for x in e):
        inverses = batch_inverse(coords, p)
    total = 0
    cache: dict[tuple[int, int], int] = {}
    for e, c in f.terms.items():
        v = c % p
        for j, x in enumerate(e):
            if x:
                key = (j, x)
                pw = cache.get(key)
                if pw is None:
                    if x == 1:
                        pw = coords[j]
                    elif x == -1:
                        pw = inverses[j]
                    elif x > 0:
                        pw = pow(coords[j], x, p)
                    else:
                        pw = pow(inverses[j], -x, p)
                    cache[key] = pw
                v = v * pw % p
        total += v
    return total % p


def eval_mod_p(f: "LaurentPoly | RatFunc", point: PrimePoint,
               inverses: Sequence[int] | None = None) -> int:
    """Value of ``f`` at ``point``; ``inverses`` may supply the inverted coordinates."""
    p = point.prime
    if isinstance(f, LaurentPoly):
        return _eval_laurent(f, point.coords, p, inverses)
    if inverses is None:
        inverses = batch_inverse(point.coords, p)
    top = _eval_laurent(f.num, point.coords, p, inverses)
    bottom = _eval_laurent(f.den, point.coords, p, inverses)
    if bottom == 0:
        raise DegeneratePoint("denominator vanishes at sample point")
    return top * pow(bottom, -1, p) % p


# ---------------------------------------------------------------------------
# identity testing


@dataclass(frozen=True)
class Mode:
    """How to decide identities: ``exact`` or randomized ``modp``."""

    kind: str = "exact"
    trials: int = 20
    prime: int = DEFAULT_PRIME
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in ("exact", "modp"):
            raise ValueError(f"unknown mode {self.kind!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.prime <= 2:
            raise ValueError("prime must be > 2")

    @classmethod
    def modp(cls, trials: int = 20, rng_seed: int = 0, prime: int = DEFAULT_PRIME) -> "Mode":
        return cls("modp", trials, prime, rng_seed)

    @property
    def exact(self) -> bool:
        return self.kind == "exact"

    def to_json(self):
        if self.exact:
            return "exact"
        return {"modp": {"prime": self.prime, "trials": self.trials, "rng_seed": self.rng_seed}}


EXACT = Mode()


@dataclass(frozen=True)
class Equality:
    """Outcome of an identity test; truthy iff equal."""

    equal: bool
    witness: object = None

    def __bool__(self) -> bool:
        return self.equal


def sample_point(nvars: int, rng: random.Random, prime: int, evaluate,
                 retries: int = DEFAULT_RETRIES):
    """Draw points until ``evaluate(point)`` succeeds; return ``(point, value)``."""
    for _ in range(retries):
        pt = PrimePoint.random(nvars, rng, prime)
        try:
            return pt, evaluate(pt)
        except DegeneratePoint:
            continue
    raise RetryBudgetExhausted(f"{retries} consecutive degenerate sample points")


def equal(a, b, mode: Mode = EXACT) -> Equality:
    """Decide ``a == b`` for Laurent polynomials / rational functions.

    Exact mode compares ``num_a*den_b`` with ``num_b*den_a``; the witness on
    failure is their difference.  Modp mode evaluates both sides at
    ``mode.trials`` random points and returns the first disagreeing point.
    """
    nv = a.nvars if hasattr(a, "nvars") else b.nvars
    a = RatFunc.coerce(a, nv)
    b = RatFunc.coerce(b, nv)
    if a.nvars != b.nvars:
        raise VariableCountMismatch(f"{a.nvars} vs {b.nvars} variables")
    if mode.exact:
        diff = a.num * b.den - b.num * a.den
        return Equality(diff.is_zero(), None if diff.is_zero() else diff)
    rng = random.Random(mode.rng_seed)
    for _ in range(mode.trials):
        pt, (va, vb) = sample_point(
            a.nvars, rng, mode.prime,
            lambda q: (eval_mod_p(a, q), eval_mod_p(b, q)))
        if va != vb:
            return Equality(False, pt)
    return Equality(True)


def false_positive_bound(a, b, mode: Mode) -> float:
    """Schwartz-Zippel bound on modp reporting equal for unequal inputs.

    The difference ``num_a*den_b - num_b*den_a`` is shifted to an ordinary
    polynomial of total degree ``D``; a nonzero such polynomial vanishes on
    at most a ``D/(p-1)`` fraction of ``(F_p^*)^n``, independently per trial.
    """
    nv = a.nvars if hasattr(a, "nvars") else b.nvars
    a = RatFunc.coerce(a, nv)
    b = RatFunc.coerce(b, nv)
    support = list((a.num * b.den).terms) + list((b.num * a.den).terms)
    if not support:
        return 0.0
    lo = [min(col) for col in zip(*support)]
    deg = max(sum(x - m for x, m in zip(e, lo)) for e in support)
    return min(1.0, deg / (mode.prime - 1)) ** mode.trials
