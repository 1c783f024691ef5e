"""Sparse multivariate polynomials with exact rational coefficients.

Variables are identified by an integer key; for randomization weights the
key is the hyperedge order ``k`` of the success probability ``p_k``.
A monomial is a sorted tuple of ``(key, exponent)`` pairs with positive
exponents, the empty tuple being the constant monomial.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from numbers import Rational
from typing import Callable, Iterable, Mapping

Monomial = tuple[tuple[int, int], ...]


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for k, e in b:
        exps[k] = exps.get(k, 0) + e
    return tuple(sorted(exps.items()))


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, float):
        return Fraction(c)
    raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient")


class RationalPolynomial:
    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        clean: dict[Monomial, Fraction] = {}
        for mono, c in (terms or {}).items():
            c = _as_fraction(c)
            if c:
                mono = tuple(sorted((k, e) for k, e in mono if e))
                clean[mono] = clean.get(mono, Fraction(0)) + c
                if not clean[mono]:
                    del clean[mono]
        self._terms = clean
        self._hash = None

    # -- constructors ---------------------------------------------------
    @classmethod
    def constant(cls, c) -> "RationalPolynomial":
        return cls({(): c})

    @classmethod
    def var(cls, key: int) -> "RationalPolynomial":
        return cls({((key, 1),): 1})

    @classmethod
    def from_coefficients(cls, coeffs: Iterable, key: int) -> "RationalPolynomial":
        """Univariate polynomial, ``coeffs[j]`` multiplying ``var**j``."""
        return cls({((key, j),) if j else (): c for j, c in enumerate(coeffs)})

    # -- inspection -----------------------------------------------------
    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def variables(self) -> tuple[int, ...]:
        return tuple(sorted({k for mono in self._terms for k, _ in mono}))

    def degree(self, key: int | None = None) -> int:
        if not self._terms:
            return -1
        if key is None:
            return max(sum(e for _, e in mono) for mono in self._terms)
        return max(dict(mono).get(key, 0) for mono in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficients(self, key: int | None = None) -> list[Fraction]:
        """Dense ascending coefficients of a univariate (or constant) polynomial."""
        vs = self.variables()
        if len(vs) > 1 or (key is not None and vs and vs[0] != key):
            raise ValueError(f"polynomial in {vs} is not univariate in {key}")
        deg = max(self.degree(), 0)
        out = [Fraction(0)] * (deg + 1)
        for mono, c in self._terms.items():
            out[mono[0][1] if mono else 0] = c
        return out

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other) -> "RationalPolynomial":
        if isinstance(other, RationalPolynomial):
            return other
        return RationalPolynomial.constant(other)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self._terms)
        for mono, c in other._terms.items():
            terms[mono] = terms.get(mono, Fraction(0)) + c
        return RationalPolynomial(terms)

    __radd__ = __add__

    def __neg__(self):
        return RationalPolynomial({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        terms: dict[Monomial, Fraction] = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                m = _mono_mul(ma, mb)
                terms[m] = terms.get(m, Fraction(0)) + ca * cb
        return RationalPolynomial(terms)

    __rmul__ = __mul__

    def __truediv__(self, c):
        c = _as_fraction(c)
        return RationalPolynomial({m: v / c for m, v in self._terms.items()})

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = RationalPolynomial.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RationalPolynomial.constant(other)
        if not isinstance(other, RationalPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- evaluation -----------------------------------------------------
    def __call__(self, point: Mapping[int, object]):
        """Evaluate; exact when every value in ``point`` is int/Fraction."""
        exact = all(isinstance(v, (int, Fraction)) for v in point.values())
        total = Fraction(0) if exact else 0.0
        for mono, c in self._terms.items():
            term = c if exact else float(c)
            for k, e in mono:
                if k not in point:
                    raise KeyError(f"no value for variable p{k}")
                term = term * point[k] ** e
            total += term
        return total

    def substitute(self, mapping: Mapping[int, "RationalPolynomial"]) -> "RationalPolynomial":
        """Replace variables by polynomials (unlisted variables are kept)."""
        result = RationalPolynomial()
        for mono, c in self._terms.items():
            term = RationalPolynomial.constant(c)
            for k, e in mono:
                base = mapping.get(k, RationalPolynomial.var(k))
                term = term * base ** e
            result = result + term
        return result

    def bind(self, key: int) -> "RationalPolynomial":
        """Set every variable equal to variable ``key`` (the p = p2 = p3 path)."""
        v = RationalPolynomial.var(key)
        return self.substitute({k: v for k in self.variables()})

    def derivative(self, key: int) -> "RationalPolynomial":
        terms = {}
        for mono, c in self._terms.items():
            exps = dict(mono)
            e = exps.get(key, 0)
            if e:
                exps[key] = e - 1
                terms[tuple(sorted(exps.items()))] = c * e
        return RationalPolynomial(terms)

    def float_function(self, key: int) -> Callable[[float], float]:
        """Horner evaluator for a univariate polynomial in ``key``."""
        coeffs = [float(c) for c in self.coefficients(key)]

        def f(x: float) -> float:
            acc = 0.0
            for c in reversed(coeffs):
                acc = acc * x + c
            return acc
        return f

    # -- text -----------------------------------------------------------
    def to_text(self, names: Mapping[int, str] | None = None) -> str:
        """Canonical ``(c0 + c1*p + ...)/d`` with integer c_i and d.

        Terms ascend in total degree, then by variable key.  Without
        ``names`` a variable ``k`` prints as ``p{k}``.
        """
        if not self._terms:
            return "0"
        d = lcm(*(c.denominator for c in self._terms.values()))

        def mono_text(mono: Monomial) -> str:
            parts = []
            for k, e in mono:
                name = names[k] if names and k in names else f"p{k}"
                parts.append(name if e == 1 else f"{name}^{e}")
            return "*".join(parts)

        def order(mono: Monomial):
            return (sum(e for _, e in mono), [(k, -e) for k, e in mono])

        pieces = []
        for mono in sorted(self._terms, key=order):
            num = self._terms[mono] * d
            assert num.denominator == 1
            c = num.numerator
            body = mono_text(mono)
            if body:
                mag = "" if abs(c) == 1 else f"{abs(c)}*"
                text = mag + body
            else:
                text = str(abs(c))
            if not pieces:
                pieces.append(("-" if c < 0 else "") + text)
            else:
                pieces.append(("- " if c < 0 else "+ ") + text)
        inner = " ".join(pieces)
        return f"({inner})/{d}" if d != 1 else f"({inner})"

    def __repr__(self):
        return f"RationalPolynomial({self.to_text()})"


def parse_polynomial_text(text: str, names: Mapping[str, int] | None = None) -> RationalPolynomial:
    """Inverse of :meth:`RationalPolynomial.to_text` (used for golden files)."""
    import re
    text = text.strip()
    m = re.fullmatch(r"\((.*)\)(?:/(\d+))?", text)
    if not m:
        if text == "0":
            return RationalPolynomial()
        raise ValueError(f"not a polynomial in canonical form: {text!r}")
    inner, den = m.group(1), int(m.group(2) or 1)
    tokens = re.findall(r"([+-]?)\s*([^+\-\s][^+\-]*)", inner.replace(" ", ""))
    result = RationalPolynomial()
    for sign, body in tokens:
        coeff = 1
        mono = []
        for factor in body.split("*"):
            if factor.isdigit():
                coeff *= int(factor)
                continue
            name, _, exp = factor.partition("^")
            if names and name in names:
                key = names[name]
            elif re.fullmatch(r"p\d+", name):
                key = int(name[1:])
            else:
                raise ValueError(f"unknown variable {name!r}")
            mono.append((key, int(exp or 1)))
        c = Fraction(-coeff if sign == "-" else coeff, den)
        result = result + RationalPolynomial({tuple(mono): c})
    return result
