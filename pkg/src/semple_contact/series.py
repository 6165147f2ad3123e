"""Truncated formal Laurent series in one variable ``t`` over Q.

A :class:`Series` stores the coefficients of ``t^e`` for
``start <= e < prec``; everything from ``t^prec`` on is unknown.  The
leading stored coefficient is always nonzero, so ``start`` is the exact
valuation whenever any coefficient is stored.  A series with no stored
coefficients is ``O(t^prec)``: its valuation is only bounded below.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .errors import PrecisionError


class Series:
    __slots__ = ("start", "coeffs", "prec")

    def __init__(self, start: int, coeffs: Iterable, prec: int):
        coeffs = [Fraction(c) for c in coeffs]
        if start + len(coeffs) > prec:
            coeffs = coeffs[: max(prec - start, 0)]
        i = 0
        while i < len(coeffs) and coeffs[i] == 0:
            i += 1
        coeffs = coeffs[i:]
        start += i
        if not coeffs:
            start = prec
        self.start = start
        self.coeffs = tuple(coeffs)
        self.prec = prec

    @classmethod
    def from_terms(cls, terms: Mapping[int, object], prec: int) -> "Series":
        known = {e: Fraction(c) for e, c in terms.items() if e < prec and c != 0}
        if not known:
            return cls(prec, (), prec)
        lo = min(known)
        return cls(lo, [known.get(e, 0) for e in range(lo, prec)], prec)

    @classmethod
    def monomial(cls, coeff, exp: int, prec: int) -> "Series":
        return cls.from_terms({exp: coeff}, prec)

    @classmethod
    def constant(cls, value, prec: int) -> "Series":
        return cls.from_terms({0: value}, prec)

    # -- inspection ---------------------------------------------------------
    @property
    def known_zero(self) -> bool:
        """True when no nonzero coefficient is known (series is O(t^prec))."""
        return not self.coeffs

    @property
    def valuation(self) -> int:
        if not self.coeffs:
            raise PrecisionError(
                f"valuation undetermined: series is O(t^{self.prec})"
            )
        return self.start

    def coefficient(self, e: int) -> Fraction:
        if e >= self.prec:
            raise PrecisionError(
                f"coefficient of t^{e} unknown (known below t^{self.prec})"
            )
        if e < self.start:
            return Fraction(0)
        return self.coeffs[e - self.start]

    def terms(self) -> dict:
        return {self.start + i: c for i, c in enumerate(self.coeffs) if c != 0}

    def centered(self) -> "Series":
        """The series minus its constant term."""
        if self.prec <= 0:
            raise PrecisionError("constant term unknown")
        t = self.terms()
        t.pop(0, None)
        return Series.from_terms(t, self.prec)

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other: "Series") -> "Series":
        if not isinstance(other, Series):
            other = Series.constant(other, self.prec)
        prec = min(self.prec, other.prec)
        acc = dict(self.terms())
        for e, c in other.terms().items():
            acc[e] = acc.get(e, 0) + c
        return Series.from_terms(acc, prec)

    __radd__ = __add__

    def __neg__(self) -> "Series":
        return Series(self.start, [-c for c in self.coeffs], self.prec)

    def __sub__(self, other: "Series") -> "Series":
        if not isinstance(other, Series):
            other = Series.constant(other, self.prec)
        return self + (-other)

    def __mul__(self, other) -> "Series":
        if not isinstance(other, Series):
            c = Fraction(other)
            if c == 0:
                # exact zero scalar kills everything but keeps precision
                return Series(self.prec, (), self.prec)
            return Series(self.start, [c * v for v in self.coeffs], self.prec)
        prec = min(self.start + other.prec, other.start + self.prec)
        acc: dict = {}
        for e1, c1 in self.terms().items():
            for e2, c2 in other.terms().items():
                e = e1 + e2
                if e < prec:
                    acc[e] = acc.get(e, 0) + c1 * c2
        return Series.from_terms(acc, prec)

    __rmul__ = __mul__

    def derivative(self) -> "Series":
        acc = {e - 1: e * c for e, c in self.terms().items() if e != 0}
        return Series.from_terms(acc, self.prec - 1)

    def inverse(self) -> "Series":
        v = self.valuation
        rel = self.prec - v
        a0 = self.coeffs[0]
        unit = list(self.coeffs) + [Fraction(0)] * max(0, rel - len(self.coeffs))
        inv = [Fraction(0)] * rel
        inv[0] = 1 / a0
        for m in range(1, rel):
            s = sum((unit[i] * inv[m - i] for i in range(1, m + 1)), Fraction(0))
            inv[m] = -s / a0
        return Series(-v, inv, -v + rel)

    def __truediv__(self, other) -> "Series":
        if not isinstance(other, Series):
            return self * (1 / Fraction(other))
        return self * other.inverse()

    def __pow__(self, k: int) -> "Series":
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return Series.constant(1, self.prec - self.start)
        result = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def compose(self, u: "Series") -> "Series":
        """Substitute ``t -> u(t)``; ``u`` must have valuation exactly 1.

        ``self`` must be a power series (no negative exponents).
        """
        if u.valuation != 1:
            raise ValueError("substitution needs val(u) == 1")
        if self.start < 0:
            raise ValueError("compose needs a power series")
        rel_u = u.prec - 1
        prec = min(self.prec, self.start + rel_u) if self.coeffs else self.prec
        acc = Series(prec, (), prec)
        power = Series.constant(1, prec)
        e = 0
        terms = self.terms()
        top = max(terms, default=-1)
        while e <= top:
            if e in terms:
                acc = acc + power * terms[e]
            power = power * u
            e += 1
        return Series.from_terms(acc.terms(), prec)

    # -- comparison -----------------------------------------------------------
    def agrees_with(self, other: "Series") -> bool:
        """Coefficientwise equality up to the common known precision."""
        prec = min(self.prec, other.prec)
        a = {e: c for e, c in self.terms().items() if e < prec}
        b = {e: c for e, c in other.terms().items() if e < prec}
        return a == b

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Series)
            and self.prec == other.prec
            and self.terms() == other.terms()
        )

    def __hash__(self):
        return hash((self.prec, tuple(sorted(self.terms().items()))))

    def __repr__(self) -> str:
        parts = [f"{c}*t^{e}" for e, c in sorted(self.terms().items())]
        parts.append(f"O(t^{self.prec})")
        return " + ".join(parts)
