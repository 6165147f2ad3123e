"""Contact modules and proto-contact numbers.

A curve with degree ``d``, class ``dv`` and higher cusp counts ``kappa_j``
has an ``n``-th contact module

    m_n = d L_n + dv P_n + sum_{k=2}^{n} c_k G^k_n,
    c_k = (k+1) dv + sum_{r=2}^{k-1} (k+2-r) kappa_r + kappa_k,

in indeterminates ``L_n`` (Lambda), ``P_n`` (Pi) and ``G^k_n`` (Gamma),
each of weight ``n``; ``m_0 = d L_0``.  A product of modules is expanded
and every monomial is replaced by a characteristic number of a family of
curves, supplied by the caller.  ``L_0`` factors are not looked up: each
contributes the member degree of the family.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

from .errors import InputError, InvariantError
from . import tower_ring

_KIND_ORDER = {"L": 0, "P": 1, "G": 2}


# -- data ---------------------------------------------------------------------


@dataclass(frozen=True)
class CurveCharacteristics:
    degree: int
    class_number: int
    kappa: Mapping[int, int] = field(default_factory=dict)
    has_profound_cusp: bool = False
    has_flat_cusp: bool = False

    def __post_init__(self):
        for name, v in (("degree", self.degree), ("class", self.class_number)):
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise InputError(f"{name} must be a nonnegative integer, got {v!r}")
        clean = {}
        for j, v in dict(self.kappa).items():
            j = int(j)
            if j < 2:
                raise InputError(f"kappa index {j} must be at least 2")
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise InputError(f"kappa_{j} must be a nonnegative integer, got {v!r}")
            if v:
                clean[j] = v
        object.__setattr__(self, "kappa", dict(sorted(clean.items())))

    def kappa_at(self, j: int) -> int:
        return self.kappa.get(j, 0)

    @classmethod
    def from_json(cls, obj) -> "CurveCharacteristics":
        if not isinstance(obj, dict):
            raise InputError("curve must be a JSON object")
        if "degree" not in obj:
            raise InputError("curve is missing 'degree'")
        if "class" not in obj:
            raise InputError("curve is missing 'class'")
        kappa = obj.get("kappa", {}) or {}
        if not isinstance(kappa, dict):
            raise InputError("curve 'kappa' must be an object")
        try:
            kappa = {int(j): v for j, v in kappa.items()}
        except ValueError:
            raise InputError("kappa keys must be integers") from None
        flags = obj.get("flags", {}) or {}
        if isinstance(flags, list):
            flags = {f: True for f in flags}
        if not isinstance(flags, dict):
            raise InputError("curve 'flags' must be an object or a list")
        return cls(
            degree=obj["degree"],
            class_number=obj["class"],
            kappa=kappa,
            has_profound_cusp=bool(flags.get("profound", False)),
            has_flat_cusp=bool(flags.get("flat", False)),
        )

    def to_json(self) -> dict:
        return {
            "degree": self.degree,
            "class": self.class_number,
            "kappa": {str(j): v for j, v in self.kappa.items()},
            "flags": {"profound": self.has_profound_cusp, "flat": self.has_flat_cusp},
        }


@dataclass(frozen=True, order=True)
class Tag:
    """One indeterminate: L_n, P_n or G^k_n."""

    weight: int
    kind_rank: int
    k: int = 0

    @property
    def kind(self) -> str:
        return "LPG"[self.kind_rank]

    @classmethod
    def make(cls, kind: str, weight: int, k: int = 0) -> "Tag":
        if kind == "L" and weight < 0:
            raise InputError("L_n needs n >= 0")
        if kind == "P" and weight < 1:
            raise InputError("P_n needs n >= 1")
        if kind == "G" and not 2 <= k <= weight:
            raise InputError(f"G{k}_{weight} needs 2 <= k <= n")
        if kind not in _KIND_ORDER:
            raise InputError(f"unknown indeterminate kind {kind!r}")
        return cls(weight, _KIND_ORDER[kind], k if kind == "G" else 0)

    @classmethod
    def parse(cls, text: str) -> "Tag":
        m = re.fullmatch(r"([LP])(\d+)|G(\d+)_(\d+)", text)
        if not m:
            raise InputError(f"bad indeterminate tag {text!r}")
        if m.group(1):
            return cls.make(m.group(1), int(m.group(2)))
        return cls.make("G", int(m.group(4)), int(m.group(3)))

    def __str__(self):
        if self.kind == "G":
            return f"G{self.k}_{self.weight}"
        return f"{self.kind}{self.weight}"

    def text(self) -> str:
        n = self.weight
        return {"L": f"lambda_{n}", "P": f"pi_{n}"}.get(self.kind, f"gamma{self.k}_{n}")

    def latex(self) -> str:
        n = self.weight
        return {"L": f"\\lambda_{{{n}}}", "P": f"\\pi_{{{n}}}"}.get(
            self.kind, f"\\gamma^{{{self.k}}}_{{{n}}}"
        )


@dataclass(frozen=True)
class ContactModule:
    weight: int
    coeff_lambda: object
    coeff_pi: object = 0
    coeff_gamma: Mapping[int, object] = field(default_factory=dict)

    def terms(self) -> list:
        """(Tag, coefficient) pairs in the order L, P, G^2..G^n."""
        n = self.weight
        out = [(Tag.make("L", n), self.coeff_lambda)]
        if n >= 1:
            out.append((Tag.make("P", n), self.coeff_pi))
        for k in range(2, n + 1):
            out.append((Tag.make("G", n, k), self.coeff_gamma.get(k, 0)))
        return out

    def to_text(self) -> str:
        parts = [f"{c}*{tag}" for tag, c in self.terms()]
        return " + ".join(parts)

    def to_json(self) -> dict:
        return {"weight": self.weight, "terms": {str(t): c for t, c in self.terms()}}


class ContactMonomial:
    """An ordered product of tags, one per curve position."""

    __slots__ = ("factors",)

    def __init__(self, factors: Iterable[Tag]):
        self.factors = tuple(factors)

    @property
    def weight(self) -> int:
        return sum(t.weight for t in self.factors)

    @property
    def canonical_key(self) -> tuple:
        return tuple(sorted(self.factors))

    def family_key(self) -> tuple:
        """Canonical key with the L_0 factors removed."""
        return tuple(t for t in self.canonical_key if t.weight > 0)

    def lambda0_count(self) -> int:
        return sum(1 for t in self.factors if t.weight == 0)

    def __eq__(self, other):
        return isinstance(other, ContactMonomial) and self.factors == other.factors

    def __hash__(self):
        return hash(self.factors)

    def __repr__(self):
        return "ContactMonomial(" + ".".join(map(str, self.factors)) + ")"


def key_string(key: Sequence[Tag]) -> str:
    return ".".join(str(t) for t in key)


def parse_key(text: str) -> tuple:
    if text == "":
        return ()
    return tuple(sorted(Tag.parse(part) for part in text.split(".")))


@dataclass(frozen=True)
class FamilyCharacteristics:
    parameter_count: int
    member_degree: int
    values: Mapping[tuple, int] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.parameter_count, int) or self.parameter_count < 0:
            raise InputError("family parameter count must be a nonnegative integer")
        if not isinstance(self.member_degree, int) or self.member_degree < 1:
            raise InputError("family member degree must be a positive integer")
        clean = {}
        for key, v in dict(self.values).items():
            key = parse_key(key) if isinstance(key, str) else tuple(sorted(key))
            if any(t.weight == 0 for t in key):
                raise InputError(f"key {key_string(key)!r} contains L0; L0 is never stored")
            w = sum(t.weight for t in key)
            if w != self.parameter_count:
                raise InputError(
                    f"key {key_string(key)!r} has weight {w}, family has s={self.parameter_count}"
                )
            if not isinstance(v, int) or isinstance(v, bool):
                raise InputError(f"value for {key_string(key)!r} must be an integer")
            if key in clean and clean[key] != v:
                raise InputError(f"conflicting values for {key_string(key)!r}")
            clean[key] = v
        object.__setattr__(self, "values", clean)

    def lookup(self, key: tuple) -> int:
        if not key and self.parameter_count == 0:
            return self.values.get((), 1)
        try:
            return self.values[key]
        except KeyError:
            raise InputError(
                f"missing characteristic number for key {key_string(key)!r}"
            ) from None

    @classmethod
    def from_json(cls, obj) -> "FamilyCharacteristics":
        if not isinstance(obj, dict):
            raise InputError("family must be a JSON object")
        for name in ("s", "member_degree"):
            if name not in obj:
                raise InputError(f"family is missing {name!r}")
        values = obj.get("values", {}) or {}
        if not isinstance(values, dict):
            raise InputError("family 'values' must be an object")
        return cls(obj["s"], obj["member_degree"], values)


@dataclass
class ProtoContactResult:
    total: int
    expansion: list  # (ContactMonomial, coefficient, value), canonical monomials
    hypothesis_warnings: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "expansion": [
                {"monomial": key_string(m.factors), "coefficient": c, "value": v}
                for m, c, v in self.expansion
            ],
            "warnings": list(self.hypothesis_warnings),
            "notes": list(self.notes),
        }


# -- modules ---------------------------------------------------------------------


def gamma_coefficient(k: int, class_number, kappa_at) -> object:
    """(k+1) dv + k kappa_2 + (k-1) kappa_3 + ... + 3 kappa_{k-1} + kappa_k."""
    c = (k + 1) * class_number
    for r in range(2, k):
        c += (k + 2 - r) * kappa_at(r)
    return c + kappa_at(k)


def curve_module(c: CurveCharacteristics, n: int) -> ContactModule:
    if not isinstance(n, int) or n < 0:
        raise InputError(f"module weight must be a nonnegative integer, got {n!r}")
    if n == 0:
        return ContactModule(0, c.degree)
    gammas = {k: gamma_coefficient(k, c.class_number, c.kappa_at) for k in range(2, n + 1)}
    return ContactModule(n, c.degree, c.class_number, gammas)


def nonsingular_module(d: int, n: int) -> ContactModule:
    """Module of a nonsingular curve of degree d, whose class is d(d-1)."""
    if not isinstance(d, int) or d < 1:
        raise InputError("degree must be a positive integer")
    return curve_module(CurveCharacteristics(d, d * (d - 1)), n)


def multiply_modules(ms: Sequence[ContactModule]) -> list:
    """Full ordered expansion: one entry per choice of a term from each module."""
    if not ms:
        raise InputError("need at least one module")
    out = []
    for choice in product(*(m.terms() for m in ms)):
        coeff = 1
        for _, c in choice:
            coeff = coeff * c
        out.append((ContactMonomial(t for t, _ in choice), coeff))
    return out


def canonicalize(expansion: Iterable) -> list:
    """Merge an expansion by canonical key; drop zero coefficients; sorted."""
    acc: dict = {}
    for mono, c in expansion:
        key = mono.canonical_key
        acc[key] = acc.get(key, 0) + c
    return [(ContactMonomial(k), c) for k, c in sorted(acc.items()) if c != 0]


def evaluate(expansion: Iterable, fam: FamilyCharacteristics) -> ProtoContactResult:
    total = 0
    rows = []
    for mono, c in canonicalize(expansion):
        key = mono.family_key()
        w = sum(t.weight for t in key)
        if w != fam.parameter_count:
            raise InputError(
                f"monomial {key_string(mono.factors)} has weight {w}, "
                f"family has s={fam.parameter_count}"
            )
        value = fam.member_degree ** mono.lambda0_count() * fam.lookup(key)
        rows.append((mono, c, value))
        total += c * value
    if total != sum(c * v for _, c, v in rows):
        raise InvariantError("proto-contact total does not match its expansion")
    return ProtoContactResult(total=total, expansion=rows)


def proto_contact(curves: Sequence[CurveCharacteristics], orders: Sequence[int],
                  fam: FamilyCharacteristics) -> ProtoContactResult:
    """Proto-contact number for contacts of the given orders with the given curves."""
    if not curves:
        raise InputError("need at least one curve")
    if len(curves) != len(orders):
        raise InputError(f"{len(curves)} curves but {len(orders)} orders")
    for o in orders:
        if not isinstance(o, int) or isinstance(o, bool) or o < 1:
            raise InputError(f"contact orders must be positive integers, got {o!r}")
    levels = [o - 1 for o in orders]
    if sum(levels) != fam.parameter_count:
        raise InputError(
            f"sum of (order - 1) is {sum(levels)}, family has s={fam.parameter_count}"
        )
    modules = [curve_module(c, n) for c, n in zip(curves, levels)]
    result = evaluate(multiply_modules(modules), fam)

    warnings = []
    if fam.member_degree + 1 < sum(orders):
        warnings.append(
            f"member degree {fam.member_degree} is below sum of orders minus one "
            f"({sum(orders) - 1}); the count may lack enumerative meaning"
        )
    for idx, c in enumerate(curves):
        if c.has_profound_cusp:
            warnings.append(f"curve {idx} has a profound cusp")
        if c.has_flat_cusp:
            warnings.append(f"curve {idx} has a flat cusp")
    notes = []
    for idx, (c, n) in enumerate(zip(curves, levels)):
        missing = [j for j in range(2, n + 1) if j not in c.kappa]
        if missing:
            names = ", ".join(f"kappa_{j}" for j in missing)
            notes.append(f"curve {idx}: {names} not given, read as 0")
    result.hypothesis_warnings = warnings
    result.notes = notes
    return result


# -- lift classes -------------------------------------------------------------------


def module_coefficients(c: CurveCharacteristics, n: int) -> list:
    """[d, dv, c_2, ..., c_n]: the coordinates of [C(n)] in the geometric basis."""
    m = curve_module(c, n)
    return [m.coeff_lambda, m.coeff_pi] + [m.coeff_gamma[k] for k in range(2, n + 1)]


def lift_class(c: CurveCharacteristics, n: int,
               basis: "tower_ring.GeometricBasis | None" = None) -> "tower_ring.ChowClass":
    if n < 1:
        raise InputError("lift_class needs n >= 1")
    if basis is None:
        basis = tower_ring.dual_basis(n)
    if basis.level != n:
        raise InputError(f"basis has level {basis.level}, expected {n}")
    coeffs = module_coefficients(c, n)
    cls = basis.codim_basis[0] * 0
    for coeff, b in zip(coeffs, basis.codim_basis):
        cls = cls + b * coeff
    return cls


def recover_characteristics(cls: "tower_ring.ChowClass") -> dict:
    """Pair a class in A^{n+1}(F(n)) with h, hdual, i_2..i_n."""
    tower = cls.tower
    out = {}
    for name, g in zip(["degree", "class"] + [f"kappa{j}" for j in range(2, tower.level + 1)],
                       tower_ring.generators(tower)):
        v = tower_ring.integrate(g * cls)
        if v.denominator != 1:
            raise InvariantError(f"non-integral pairing {v} for {name}")
        out[name] = int(v)
    return out


# -- symbolic formulas ------------------------------------------------------------------


def _symbolic_curve(name: str):
    import sympy

    if not re.fullmatch(r"[A-Za-z][A-Za-z0-9]*", name):
        raise InputError(f"curve names must be alphanumeric, got {name!r}")
    d = sympy.Symbol(f"d_{name}", integer=True, nonnegative=True)
    dv = sympy.Symbol(f"dv_{name}", integer=True, nonnegative=True)
    kappas = {}

    def kappa_at(j):
        if j not in kappas:
            kappas[j] = sympy.Symbol(f"kappa{j}_{name}", integer=True, nonnegative=True)
        return kappas[j]

    latex_names = {d: f"d_{{{name}}}", dv: f"\\check d_{{{name}}}"}
    return d, dv, kappa_at, kappas, latex_names


def symbolic_modules(curve_names: Sequence[str], orders: Sequence[int]):
    """Modules with sympy symbols as coefficients, plus LaTeX names for them."""
    if len(curve_names) != len(orders) or not curve_names:
        raise InputError("need one order per curve and at least one curve")
    modules = []
    latex_names = {}
    for name, o in zip(curve_names, orders):
        if not isinstance(o, int) or isinstance(o, bool) or o < 1:
            raise InputError(f"contact orders must be positive integers, got {o!r}")
        n = o - 1
        d, dv, kappa_at, kappas, names = _symbolic_curve(name)
        if n == 0:
            modules.append(ContactModule(0, d))
        else:
            gammas = {k: gamma_coefficient(k, dv, kappa_at) for k in range(2, n + 1)}
            modules.append(ContactModule(n, d, dv, gammas))
        latex_names.update(names)
        for j, sym in kappas.items():
            latex_names[sym] = f"\\kappa_{{{j}{name}}}"
    return modules, latex_names


def symbolic_expansion(curve_names: Sequence[str], orders: Sequence[int]) -> list:
    """Canonical (key, sympy coefficient) pairs of the product of modules.

    L_0 factors are replaced by the symbol ``d`` (the member degree).
    """
    import sympy

    modules, _ = symbolic_modules(curve_names, orders)
    member = sympy.Symbol("d", integer=True, positive=True)
    acc: dict = {}
    for mono, c in multiply_modules(modules):
        key = mono.family_key()
        acc[key] = acc.get(key, 0) + c * member ** mono.lambda0_count()
    return [(k, c) for k, c in sorted(acc.items()) if c != 0]


def _monomial_text(key: tuple, latex: bool) -> str:
    if not key:
        return "1"
    groups = []
    for t in key:
        if groups and groups[-1][0] == t:
            groups[-1][1] += 1
        else:
            groups.append([t, 1])
    parts = []
    for t, e in groups:
        if latex:
            parts.append(t.latex() if e == 1 else f"({t.latex()})^{{{e}}}")
        else:
            parts.append(t.text() if e == 1 else f"{t.text()}^{e}")
    return (" " if latex else "*").join(parts)


def emit_formula(curve_names: Sequence[str], orders: Sequence[int], fmt: str = "text") -> str:
    """Render the expanded, evaluated proto-contact formula as text or LaTeX."""
    import sympy

    _, latex_names = symbolic_modules(curve_names, orders)
    terms = symbolic_expansion(curve_names, orders)
    pieces = []
    for key, c in terms:
        mono = _monomial_text(key, latex=(fmt == "latex"))
        if fmt == "latex":
            coeff = sympy.latex(c, symbol_names=latex_names)
            if isinstance(c, sympy.Add):
                coeff = f"\\left({coeff}\\right)"
            pieces.append(coeff if mono == "1" else f"{coeff} {mono}")
        elif fmt == "text":
            coeff = sympy.sstr(c)
            if isinstance(c, sympy.Add):
                coeff = f"({coeff})"
            pieces.append(coeff if mono == "1" else f"{coeff}*{mono}")
        else:
            raise InputError(f"unknown formula format {fmt!r}")
    if not pieces:
        return "0"
    return " + ".join(pieces)
