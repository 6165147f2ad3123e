"""Chow ring arithmetic on the Semple tower F(n).

Classes are stored over the generators ``(h, phi_1, ..., phi_n)`` where
``h`` is the hyperplane class pulled back from the plane and ``phi_k`` is
the tautological class of ``F(k) -> F(k-1)``.  Each ``phi_k`` satisfies

    phi_k^2 = -c1(F_{k-1}) phi_k - c2(F_{k-1})

with the focal-bundle Chern classes seeded at ``c1 = 3h``, ``c2 = 3h^2``
and propagated by ``c1(F_k) = c1(F_{k-1}) + phi_k``,
``c2(F_k) = 2 c2(F_{k-1}) + c1(F_{k-1}) phi_k``.  Together with
``h^3 = 0`` this gives a normal form with ``h``-exponent at most 2 and
every ``phi``-exponent at most 1.

The geometric classes are aliases:

    hdual = phi_1 + 2h,        i_k = phi_k - phi_{k-1}  (k >= 2).

The degree map sends a top-degree class to its coefficient on
``h^2 phi_1 ... phi_n`` (fiber integration over each P^1-bundle).
"""
from __future__ import annotations

import ast
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from . import linalg
from .errors import InputError, InvariantError

Exponents = tuple  # (a, e_1, ..., e_n)


def _fmt_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class ChowClass:
    """An element of A*(F(n)) in normal form.  Immutable."""

    __slots__ = ("tower", "terms")

    def __init__(self, tower: "TowerPresentation", terms: Mapping[Exponents, Fraction]):
        self.tower = tower
        self.terms = {e: Fraction(c) for e, c in terms.items() if c != 0}

    @property
    def level(self) -> int:
        return self.tower.level

    # -- grading ------------------------------------------------------------
    @property
    def codim(self):
        """Common total degree of the monomials, or None if inhomogeneous/zero."""
        degrees = {sum(e) for e in self.terms}
        return degrees.pop() if len(degrees) == 1 else None

    def is_zero(self) -> bool:
        return not self.terms

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "ChowClass":
        if isinstance(other, ChowClass):
            if other.tower.level != self.tower.level:
                raise InputError(
                    f"classes live on F({self.level}) and F({other.level})"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return self.tower.scalar(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self.terms)
        for e, c in other.terms.items():
            acc[e] = acc.get(e, 0) + c
        return ChowClass(self.tower, acc)

    __radd__ = __add__

    def __neg__(self):
        return ChowClass(self.tower, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return ChowClass(self.tower, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.tower.multiply(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise InputError("negative power of a Chow class")
        result = self.tower.one()
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.tower.scalar(other)
        if not isinstance(other, ChowClass):
            return NotImplemented
        return self.level == other.level and self.terms == other.terms

    def __hash__(self):
        return hash((self.level, frozenset(self.terms.items())))

    def pullback(self, tower: "TowerPresentation") -> "ChowClass":
        """Pull the class back to a higher level of the tower."""
        if tower.level < self.level:
            raise InputError("can only pull back to a higher level")
        pad = (0,) * (tower.level - self.level)
        return ChowClass(tower, {e + pad: c for e, c in self.terms.items()})

    # -- text form ----------------------------------------------------------
    def to_text(self) -> str:
        if not self.terms:
            return "0"
        names = self.tower.generator_names()
        out = []
        # graded, then lexicographic by generator index (h first)
        for e in sorted(self.terms, key=lambda e: (sum(e), tuple(-x for x in e))):
            c = self.terms[e]
            factors = []
            for name, k in zip(names, e):
                if k == 1:
                    factors.append(name)
                elif k > 1:
                    factors.append(f"{name}^{k}")
            mag = abs(c)
            if not factors:
                body = _fmt_rational(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = _fmt_rational(mag) + "*" + "*".join(factors)
            sign = "-" if c < 0 else "+"
            out.append((sign, body))
        first_sign, first = out[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in out[1:]:
            text += f" {sign} {body}"
        return text

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"ChowClass(F({self.level}): {self.to_text()})"


class TowerPresentation:
    """The presentation of A*(F(n)) with its rewriting data."""

    def __init__(self, level: int):
        if not isinstance(level, int) or level < 0:
            raise InputError(f"tower level must be a nonnegative integer, got {level!r}")
        self.level = level
        self._cache: dict = {}
        n = level
        size = n + 1
        h2 = tuple([2] + [0] * n)
        h1 = tuple([1] + [0] * n)

        def unit(i):
            e = [0] * size
            e[i] = 1
            return tuple(e)

        # raw exponent dictionaries; already in normal form by construction
        c1 = [{h1: Fraction(3)}]
        c2 = [{h2: Fraction(3)}]
        for k in range(1, n):
            nc1 = dict(c1[k - 1])
            nc1[unit(k)] = nc1.get(unit(k), 0) + 1
            nc2 = {e: 2 * c for e, c in c2[k - 1].items()}
            for e, c in c1[k - 1].items():
                e2 = tuple(a + b for a, b in zip(e, unit(k)))
                nc2[e2] = nc2.get(e2, 0) + c
            c1.append(nc1)
            c2.append(nc2)
        self._c1 = c1
        self._c2 = c2
        self._relations = {}
        for k in range(1, n + 1):
            rel = {}
            for e, c in c1[k - 1].items():
                e2 = tuple(a + b for a, b in zip(e, unit(k)))
                rel[e2] = rel.get(e2, 0) - c
            for e, c in c2[k - 1].items():
                rel[e] = rel.get(e, 0) - c
            self._relations[k] = rel

    # -- presentation data --------------------------------------------------
    @property
    def chern1(self) -> list:
        """c1(F_k) for k = 0 .. n-1."""
        return [ChowClass(self, c) for c in self._c1[: self.level]]

    @property
    def chern2(self) -> list:
        """c2(F_k) for k = 0 .. n-1."""
        return [ChowClass(self, c) for c in self._c2[: self.level]]

    @property
    def relation_table(self) -> dict:
        """k -> the normal form that phi_k^2 rewrites to."""
        return {k: ChowClass(self, r) for k, r in self._relations.items()}

    def generator_names(self) -> list:
        return ["h"] + [f"phi{k}" for k in range(1, self.level + 1)]

    def truncate(self, level: int) -> "TowerPresentation":
        if level > self.level:
            raise InputError("cannot truncate upwards")
        return build_tower(level)

    # -- reduction ----------------------------------------------------------
    def _reduce_monomial(self, exps: Exponents) -> dict:
        cached = self._cache.get(exps)
        if cached is not None:
            return cached
        if exps[0] >= 3:
            result = {}
        else:
            k = next((i for i in range(self.level, 0, -1) if exps[i] >= 2), None)
            if k is None:
                result = {exps: Fraction(1)}
            else:
                base = list(exps)
                base[k] -= 2
                result = {}
                for mono, c in self._relations[k].items():
                    new = tuple(a + b for a, b in zip(base, mono))
                    for m2, c2 in self._reduce_monomial(new).items():
                        result[m2] = result.get(m2, 0) + c * c2
                result = {e: c for e, c in result.items() if c != 0}
        self._cache[exps] = result
        return result

    def reduce(self, raw: Mapping[Exponents, object]) -> ChowClass:
        """Normal form of an arbitrary exponent dictionary."""
        acc: dict = {}
        for e, c in raw.items():
            e = tuple(e)
            if len(e) != self.level + 1 or any(x < 0 for x in e):
                raise InputError(f"bad exponent vector {e} for F({self.level})")
            if c == 0:
                continue
            for m, c2 in self._reduce_monomial(e).items():
                acc[m] = acc.get(m, 0) + Fraction(c) * c2
        return ChowClass(self, acc)

    def multiply(self, a: ChowClass, b: ChowClass) -> ChowClass:
        if a.level != self.level or b.level != self.level:
            raise InputError(
                f"cannot multiply classes on F({a.level}) and F({b.level}) "
                f"in the ring of F({self.level})"
            )
        raw: dict = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                raw[e] = raw.get(e, 0) + c1 * c2
        return self.reduce(raw)

    # -- named classes ------------------------------------------------------
    def _unit(self, i: int) -> Exponents:
        e = [0] * (self.level + 1)
        e[i] = 1
        return tuple(e)

    def scalar(self, value) -> ChowClass:
        return ChowClass(self, {(0,) * (self.level + 1): Fraction(value)})

    def one(self) -> ChowClass:
        return self.scalar(1)

    def zero(self) -> ChowClass:
        return ChowClass(self, {})

    def h(self) -> ChowClass:
        return ChowClass(self, {self._unit(0): 1})

    def phi(self, k: int) -> ChowClass:
        if not 1 <= k <= self.level:
            raise InputError(f"phi{k} does not exist on F({self.level})")
        return ChowClass(self, {self._unit(k): 1})

    def hdual(self) -> ChowClass:
        """The dual hyperplane class, phi_1 + 2h."""
        return self.phi(1) + self.h() * 2

    def i(self, k: int) -> ChowClass:
        """Class of the divisor at infinity I_k, phi_k - phi_{k-1}."""
        if not 2 <= k <= self.level:
            raise InputError(f"i{k} does not exist on F({self.level})")
        return self.phi(k) - self.phi(k - 1)

    def generator(self, name: str) -> ChowClass:
        if name == "h":
            return self.h()
        if name == "hdual":
            return self.hdual()
        m = re.fullmatch(r"(phi|i)(\d+)", name)
        if m:
            k = int(m.group(2))
            return self.phi(k) if m.group(1) == "phi" else self.i(k)
        raise InputError(f"unknown generator {name!r}")

    def monomial_basis(self, codim: int) -> list:
        """Normal-form monomials of the given codimension, in text order."""
        out = []
        n = self.level
        for a in range(min(2, codim), -1, -1):
            rest = codim - a
            if rest > n:
                continue
            for mask in range(1 << n):
                if bin(mask).count("1") == rest:
                    e = (a,) + tuple((mask >> (n - 1 - i)) & 1 for i in range(n))
                    out.append(e)
        out.sort(key=lambda e: tuple(-x for x in e))
        return [ChowClass(self, {e: 1}) for e in out]

    def parse(self, text: str) -> ChowClass:
        return parse_class(text, self)

    def __repr__(self):
        return f"TowerPresentation(level={self.level})"


def build_tower(n: int) -> TowerPresentation:
    """Presentation of A*(F(n)); n = 0 gives Z[h]/(h^3)."""
    return TowerPresentation(n)


# -- text parsing ---------------------------------------------------------------

_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Pow, ast.Div)


def parse_class(text: str, tower: TowerPresentation) -> ChowClass:
    """Parse the canonical text form (``^`` for powers, aliases allowed)."""
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise InputError(f"cannot parse class {text!r}: {exc.msg}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return Fraction(node.value)
        if isinstance(node, ast.Name):
            return tower.generator(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                if not isinstance(right, Fraction) or right == 0:
                    raise InputError("division only by nonzero integers")
                return left * (1 / right)
            if not isinstance(right, Fraction) or right.denominator != 1 or right < 0:
                raise InputError("exponents must be nonnegative integers")
            if isinstance(left, Fraction):
                return left ** int(right)
            return left ** int(right)
        raise InputError(f"unsupported syntax in {text!r}")

    value = ev(tree)
    if isinstance(value, Fraction):
        return tower.scalar(value)
    return value


# -- integration and duality ------------------------------------------------------


def integrate(c: ChowClass, tower: TowerPresentation | None = None) -> Fraction:
    """Degree of a top-codimension class on F(n)."""
    if tower is not None and tower.level != c.level:
        raise InputError(f"class on F({c.level}) integrated over F({tower.level})")
    if c.is_zero():
        return Fraction(0)
    if not c.is_homogeneous():
        raise InputError("cannot integrate an inhomogeneous class")
    top = c.level + 2
    if c.codim < top:
        raise InputError(f"codimension {c.codim} is below the top degree {top}")
    if c.codim > top:
        return Fraction(0)
    return c.terms.get((2,) + (1,) * c.level, Fraction(0))


def dual_list(tower: TowerPresentation) -> list:
    """h, hdual, 3hdual+i2, 4hdual+3i2+i3, ...: the printed basis of A^1."""
    n = tower.level
    out = [tower.h(), tower.hdual()]
    for m in range(2, n + 1):
        cls = tower.hdual() * (m + 1)
        for r in range(2, m):
            cls = cls + tower.i(r) * (m + 2 - r)
        cls = cls + tower.i(m)
        out.append(cls)
    return out


def dual_list_labels(n: int) -> list:
    labels = ["h", "hdual"]
    for m in range(2, n + 1):
        parts = [f"{m + 1}*hdual"] + [f"{m + 2 - r}*i{r}" for r in range(2, m)] + [f"i{m}"]
        labels.append(" + ".join(parts))
    return labels


def codim_basis_labels(n: int) -> list:
    """Names of the geometric basis of A^{n+1}(F(n))."""
    tail = lambda lo: "".join(f"*i{r}" for r in range(lo, n + 1))
    labels = [f"hdual^2*z{n}", "h^2" + tail(2)]
    if n >= 2:
        labels.append("h^2*hdual" + tail(3))
    for k in range(3, n + 1):
        labels.append(f"h^2*hdual*z{k - 1}" + tail(k + 1))
    return labels


@dataclass(frozen=True)
class GeometricBasis:
    level: int
    codim_basis: tuple
    dual_list: tuple
    codim_labels: tuple
    dual_labels: tuple


def _tower_for(n: int, tower: TowerPresentation | None) -> TowerPresentation:
    if tower is None:
        return build_tower(n)
    if tower.level != n:
        raise InputError(f"tower has level {tower.level}, expected {n}")
    return tower


def dual_basis(n: int, tower: TowerPresentation | None = None) -> GeometricBasis:
    """Basis of A^{n+1}(F(n)) dual to the printed list in A^1(F(n))."""
    if n < 1:
        raise InputError("dual_basis needs n >= 1")
    tower = _tower_for(n, tower)
    duals = dual_list(tower)
    monos = tower.monomial_basis(n + 1)
    if len(monos) != n + 1:
        raise InvariantError(f"A^{n + 1}(F({n})) has {len(monos)} monomials")
    gram = [[integrate(a * m) for m in monos] for a in duals]
    try:
        inv = linalg.inverse(gram)
    except InvariantError:
        raise InvariantError("pairing of A^1 with A^{n+1} is singular") from None
    basis = []
    for c in range(n + 1):
        cls = tower.zero()
        for b, m in enumerate(monos):
            cls = cls + m * inv[b][c]
        basis.append(cls)
    return GeometricBasis(
        level=n,
        codim_basis=tuple(basis),
        dual_list=tuple(duals),
        codim_labels=tuple(codim_basis_labels(n)),
        dual_labels=tuple(dual_list_labels(n)),
    )


@dataclass(frozen=True)
class PairingMatrix:
    level: int
    entries: tuple
    row_labels: tuple
    column_labels: tuple


def generators(tower: TowerPresentation) -> list:
    """h, hdual, i2, ..., in."""
    return [tower.h(), tower.hdual()] + [tower.i(k) for k in range(2, tower.level + 1)]


def pairing_matrix(n: int, tower: TowerPresentation | None = None,
                   basis: GeometricBasis | None = None) -> PairingMatrix:
    """Intersection pairing of h, hdual, i2..in against the geometric basis."""
    tower = _tower_for(n, tower)
    basis = basis or dual_basis(n, tower)
    rows = []
    for g in generators(tower):
        row = []
        for b in basis.codim_basis:
            v = integrate(g * b)
            if v.denominator != 1:
                raise InvariantError(f"non-integral pairing {v}")
            row.append(int(v))
        rows.append(tuple(row))
    return PairingMatrix(
        level=n,
        entries=tuple(rows),
        row_labels=tuple(["h", "hdual"] + [f"i{k}" for k in range(2, n + 1)]),
        column_labels=basis.codim_labels,
    )


def solve_z2(tower: TowerPresentation) -> ChowClass:
    """The class z2 of the special orbit Z_2 on F(2).

    The conditions int z2 h^2 hdual = int z2 h hdual^2 = 1 only pin down
    one direction, since h^2 hdual and h hdual^2 are both the fiber class
    over a point of F(1).  Together with int z2 h^2 i2 = int z2 h hdual i2 = 0
    (both forced by i2 . z2 = 0) the system is square and invertible.  The
    full relation i2 . z2 = 0 and both normalizations are checked afterwards.
    """
    if tower.level < 2:
        raise InputError("z2 needs a tower of level >= 2")
    t2 = tower if tower.level == 2 else build_tower(2)
    h, hd, i2 = t2.h(), t2.hdual(), t2.i(2)
    unknowns = [h, hd, i2]
    tests = [h * h * hd, h * h * i2, h * hd * i2]
    mat = [[integrate(u * t) for u in unknowns] for t in tests]
    try:
        a, b, c = linalg.solve(mat, [1, 0, 0])
    except InvariantError:
        raise InvariantError("z2 system is singular") from None
    z2 = h * a + hd * b + i2 * c
    if not (i2 * z2).is_zero():
        raise InvariantError(f"i2 . z2 = {(i2 * z2).to_text()} is not zero")
    if integrate(z2 * h * hd * hd) != 1:
        raise InvariantError("int z2 h hdual^2 != 1")
    return z2


def theorem1_coefficients(k: int) -> dict:
    """Coefficients of the bracket in the quadratic relation for i_k."""
    coeffs = {"h": 2 * k - 1, "hdual": -(k + 1)}
    for r in range(2, k):
        coeffs[f"i{r}"] = -(k + 2 - r)
    return coeffs


def theorem1_check(k: int, tower: TowerPresentation,
                   coefficients: Mapping[str, int] | None = None) -> bool:
    """Does i_k^2 = (bracket) i_k reduce to zero?  ``coefficients`` overrides."""
    if not 2 <= k <= tower.level:
        raise InputError(f"k={k} outside 2..{tower.level}")
    coeffs = dict(theorem1_coefficients(k))
    if coefficients:
        coeffs.update(coefficients)
    bracket = tower.zero()
    for name, c in coeffs.items():
        bracket = bracket + tower.generator(name) * c
    ik = tower.i(k)
    return (ik * ik - bracket * ik).is_zero()


def basic_relations_vanish(tower: TowerPresentation) -> bool:
    """h^3, hdual^3 and h^2 - h hdual + hdual^2 all reduce to zero."""
    if tower.level == 0:
        return (tower.h() ** 3).is_zero()
    h, hd = tower.h(), tower.hdual()
    return all(x.is_zero() for x in (h ** 3, hd ** 3, h * h - h * hd + hd * hd))
