"""The operators P and Q on chart coordinates, and the universal-family matrices.

On the ``j``-th secondary chart of F(n) the coordinates are

    x, y, y1, ..., y{j-1}, x1, ..., x{n-j+1}

where ``y_t`` is the t-th derivative of y with respect to x and ``x_t`` the
t-th derivative of x with respect to ``y_{j-1}``.  The derivations are

    P = d/dx + y1 d/dy + ... + y{j-1} d/dy{j-2}
    Q = x1 P + d/dy{j-1} + x2 d/dx1 + ... + x{n-j+1} d/dx{n-j}

so ``Q(x_t) = x_{t+1}`` with the top one sent to 0.  The primary chart
``x, y, y1, ..., yn`` only carries P (the total x-derivative, top y_n
sent to 0).

A curve ``f = sum a_uv x^u y^v`` of degree d imposes linear conditions on
the ``a_uv`` at each chart point: one row per entry of the defining
sequence of the column monomial.  The ranks of these matrices are what
the smoothness arguments rest on; they are computed exactly here.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Mapping, Sequence

from . import linalg
from .errors import InputError

STATEMENTS = ("a", "b", "c", "d", "e", "f", "g")


# -- charts ----------------------------------------------------------------------


@dataclass(frozen=True)
class ChartSpec:
    """Primary chart of F(n) when ``j`` is None, else the j-th secondary chart."""

    n: int
    j: int | None = None

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 0:
            raise InputError("chart level must be a nonnegative integer")
        if self.j is not None and not 2 <= self.j <= self.n:
            raise InputError(f"secondary chart index j={self.j} needs 2 <= j <= n={self.n}")

    @property
    def kind(self) -> str:
        return "primary" if self.j is None else "secondary"

    @property
    def y_top(self) -> int:
        """Highest y-derivative present."""
        return self.n if self.j is None else self.j - 1

    @property
    def depth(self) -> int:
        """Highest x-derivative present (0 on primary charts)."""
        return 0 if self.j is None else self.n - self.j + 1

    @property
    def variables(self) -> tuple:
        ys = [f"y{t}" for t in range(1, self.y_top + 1)]
        xs = [f"x{t}" for t in range(1, self.depth + 1)]
        return tuple(["x", "y"] + ys + xs)

    @property
    def nvars(self) -> int:
        return self.n + 2

    def y_index(self, t: int) -> int:
        if not 0 <= t <= self.y_top:
            raise InputError(f"y{t} is not a coordinate of {self}")
        return 1 + t

    def x_index(self, t: int) -> int:
        if t == 0:
            return 0
        if not 1 <= t <= self.depth:
            raise InputError(f"x{t} is not a coordinate of {self}")
        return 1 + self.y_top + t

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise InputError(f"{name!r} is not a coordinate of {self}") from None

    def x_jet_indices(self) -> tuple:
        return (0,) + tuple(self.x_index(t) for t in range(1, self.depth + 1))

    def y_jet_indices(self) -> tuple:
        return tuple(self.y_index(t) for t in range(0, self.y_top + 1))

    def __str__(self):
        return f"F({self.n}) primary" if self.j is None else f"F({self.n}) secondary j={self.j}"


def _unit(nvars: int, i: int) -> tuple:
    e = [0] * nvars
    e[i] = 1
    return tuple(e)


@lru_cache(maxsize=None)
def _p_images(chart: ChartSpec) -> tuple:
    nv = chart.nvars
    zero = (0,) * nv
    images = [() for _ in range(nv)]
    images[0] = ((zero, 1),)
    for t in range(chart.y_top):
        images[chart.y_index(t)] = ((_unit(nv, chart.y_index(t + 1)), 1),)
    return tuple(images)


@lru_cache(maxsize=None)
def _q_images(chart: ChartSpec) -> tuple:
    if chart.j is None:
        raise InputError("Q acts only on secondary charts")
    nv = chart.nvars
    zero = (0,) * nv
    x1 = _unit(nv, chart.x_index(1))
    images = [() for _ in range(nv)]
    images[0] = ((x1, 1),)
    for t in range(chart.y_top):
        mono = tuple(a + b for a, b in zip(x1, _unit(nv, chart.y_index(t + 1))))
        images[chart.y_index(t)] = ((mono, 1),)
    images[chart.y_index(chart.y_top)] = ((zero, 1),)
    for t in range(1, chart.depth):
        images[chart.x_index(t)] = ((_unit(nv, chart.x_index(t + 1)), 1),)
    return tuple(images)


def _derive(terms: Mapping[tuple, object], images: tuple) -> dict:
    acc: dict = {}
    for mono, c in terms.items():
        for i, e in enumerate(mono):
            if not e or not images[i]:
                continue
            lowered = mono[:i] + (e - 1,) + mono[i + 1:]
            for im, ic in images[i]:
                new = tuple(a + b for a, b in zip(lowered, im))
                acc[new] = acc.get(new, 0) + c * e * ic
    return {m: c for m, c in acc.items() if c != 0}


# -- polynomials -------------------------------------------------------------------------


class JetPolynomial:
    """Sparse polynomial in the coordinates of a chart, rational coefficients."""

    __slots__ = ("chart", "terms")

    def __init__(self, chart: ChartSpec, terms: Mapping[tuple, object] | None = None):
        self.chart = chart
        clean = {}
        for mono, c in (terms or {}).items():
            mono = tuple(mono)
            if len(mono) != chart.nvars or any(e < 0 for e in mono):
                raise InputError(f"exponent vector {mono} does not fit {chart}")
            if c != 0:
                clean[mono] = c
        self.terms = clean

    @classmethod
    def variable(cls, chart: ChartSpec, name: str) -> "JetPolynomial":
        return cls(chart, {_unit(chart.nvars, chart.index(name)): 1})

    @classmethod
    def constant(cls, chart: ChartSpec, value) -> "JetPolynomial":
        return cls(chart, {(0,) * chart.nvars: value})

    @classmethod
    def from_xy(cls, chart: ChartSpec, coeffs: Mapping[tuple, object]) -> "JetPolynomial":
        """Polynomial in x and y only, given as {(u, v): coefficient}."""
        rest = (0,) * (chart.nvars - 2)
        return cls(chart, {(u, v) + rest: c for (u, v), c in coeffs.items()})

    def _check(self, other) -> "JetPolynomial":
        if isinstance(other, JetPolynomial):
            if other.chart != self.chart:
                raise InputError(f"polynomials on {self.chart} and {other.chart}")
            return other
        return JetPolynomial.constant(self.chart, other)

    def __add__(self, other):
        other = self._check(other)
        acc = dict(self.terms)
        for m, c in other.terms.items():
            acc[m] = acc.get(m, 0) + c
        return JetPolynomial(self.chart, acc)

    __radd__ = __add__

    def __neg__(self):
        return JetPolynomial(self.chart, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, JetPolynomial):
            return JetPolynomial(self.chart, {m: c * other for m, c in self.terms.items()})
        other = self._check(other)
        acc: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                acc[m] = acc.get(m, 0) + c1 * c2
        return JetPolynomial(self.chart, acc)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = JetPolynomial.constant(self.chart, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, JetPolynomial):
            other = self._check(other)
        return self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        return hash((self.chart, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def set_zero(self, names: Iterable[str]) -> "JetPolynomial":
        """Substitute 0 for the named variables."""
        idx = [self.chart.index(nm) for nm in names]
        return JetPolynomial(
            self.chart, {m: c for m, c in self.terms.items() if all(m[i] == 0 for i in idx)}
        )

    def mod_x_x1(self) -> "JetPolynomial":
        """Reduction modulo the ideal (x, x1)."""
        return JetPolynomial(self.chart, _mod_ideal(self.terms, _ideal_indices(self.chart)))

    def used_indices(self) -> set:
        return {i for m in self.terms for i, e in enumerate(m) if e}

    def evaluate(self, values: Sequence) -> Fraction:
        if len(values) != self.chart.nvars:
            raise InputError(f"need {self.chart.nvars} coordinates, got {len(values)}")
        vals = [Fraction(v) for v in values]
        total = Fraction(0)
        for m, c in self.terms.items():
            term = Fraction(c)
            for v, e in zip(vals, m):
                if e:
                    term *= v ** e
            total += term
        return total

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        names = self.chart.variables
        parts = []
        for m in sorted(self.terms, key=lambda m: (-sum(m), tuple(-e for e in m))):
            c = self.terms[m]
            factors = [nm if e == 1 else f"{nm}^{e}" for nm, e in zip(names, m) if e]
            body = "*".join(factors)
            mag = abs(c)
            if not body:
                body = str(mag)
            elif mag != 1:
                body = f"{mag}*{body}"
            parts.append(("-" if c < 0 else "+", body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"JetPolynomial({self.chart}: {self.to_text()})"


def _ideal_indices(chart: ChartSpec) -> tuple:
    return (0, chart.x_index(1)) if chart.depth >= 1 else (0,)


def _mod_ideal(terms: Mapping[tuple, object], idx: tuple) -> dict:
    return {m: c for m, c in terms.items() if all(m[i] == 0 for i in idx)}


def apply_P(p: JetPolynomial, chart: ChartSpec | None = None) -> JetPolynomial:
    chart = chart or p.chart
    if p.chart != chart:
        raise InputError(f"polynomial lives on {p.chart}, not {chart}")
    return JetPolynomial(chart, _derive(p.terms, _p_images(chart)))


def apply_Q(p: JetPolynomial, chart: ChartSpec | None = None) -> JetPolynomial:
    chart = chart or p.chart
    if p.chart != chart:
        raise InputError(f"polynomial lives on {p.chart}, not {chart}")
    return JetPolynomial(chart, _derive(p.terms, _q_images(chart)))


def x_jet(chart: ChartSpec, m: int) -> JetPolynomial:
    """Q^m(x): the coordinate x_m, or 0 beyond the chart's depth."""
    if m == 0:
        return JetPolynomial.variable(chart, "x")
    if m <= chart.depth:
        return JetPolynomial.variable(chart, f"x{m}")
    return JetPolynomial(chart, {})


def defining_sequence(f: JetPolynomial, chart: ChartSpec | None = None) -> list:
    """f, Pf, ..., P^{j-1} f, QP^{j-1} f, ..., Q^{n-j+1} P^{j-1} f (primary: P^0..P^n)."""
    chart = chart or f.chart
    xy_only = all(all(e == 0 for e in m[2:]) for m in f.terms)
    if not xy_only:
        raise InputError("defining sequences start from a polynomial in x and y only")
    seq = [f]
    p_steps = chart.n if chart.j is None else chart.j - 1
    for _ in range(p_steps):
        seq.append(apply_P(seq[-1], chart))
    for _ in range(chart.depth):
        seq.append(apply_Q(seq[-1], chart))
    return seq


# -- cached operator sequences -----------------------------------------------------------


def _ideal_degree(mono: tuple, idx: tuple) -> int:
    return sum(mono[i] for i in idx)


@lru_cache(maxsize=None)
def _qp_sequence(chart: ChartSpec, start: tuple, h: int, length: int, reduce: bool) -> tuple:
    """[Q^i P^h (monomial start)] for i < length, as frozen term tuples.

    With ``reduce`` the terms are only correct modulo (x, x1): monomials that
    cannot leave the ideal within the remaining applications are dropped
    (P and Q lower the (x, x1)-degree of a monomial by at most one).
    """
    idx = _ideal_indices(chart)
    total = h + length - 1
    terms = {start: 1}
    done = 0

    def prune(ts, remaining):
        if not reduce:
            return ts
        return {m: c for m, c in ts.items() if _ideal_degree(m, idx) <= remaining}

    terms = prune(terms, total)
    for _ in range(h):
        terms = prune(_derive(terms, _p_images(chart)), total - done - 1)
        done += 1
    out = []
    qimg = _q_images(chart) if length > 1 else None
    for i in range(length):
        out.append(tuple(sorted(
            (_mod_ideal(terms, idx) if reduce else terms).items()
        )))
        if i + 1 < length:
            terms = prune(_derive(terms, qimg), total - done - 1)
            done += 1
    return tuple(out)


def qp_power(chart: ChartSpec, xy_exps: tuple, h: int, i: int, reduce: bool = False) -> JetPolynomial:
    """Q^i P^h (x^u y^v), optionally reduced modulo (x, x1)."""
    start = tuple(xy_exps) + (0,) * (chart.nvars - 2)
    length = i + 1
    # reuse a longer cached run when there is one
    seq = _qp_sequence(chart, start, h, _round_up(length), reduce)
    return JetPolynomial(chart, dict(seq[i]))


def _round_up(length: int) -> int:
    step = 8
    return ((length + step - 1) // step) * step


def qp_apply(chart: ChartSpec, f: JetPolynomial, h: int, i: int, reduce: bool = False) -> JetPolynomial:
    """Q^i P^h applied to a polynomial in x and y, by linearity over monomials."""
    acc = JetPolynomial(chart, {})
    for m, c in f.terms.items():
        if any(m[2:]):
            raise InputError("qp_apply expects a polynomial in x and y")
        acc = acc + qp_power(chart, m[:2], h, i, reduce) * c
    return acc


# -- operator identities (a)-(g) -----------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    statement: str
    chart: ChartSpec
    params: tuple
    passed: bool
    expected: str
    coefficient: object = None
    detail: str = ""

    @property
    def key(self) -> tuple:
        return (self.statement, self.chart.j or 0, self.chart.n, self.params)

    def label(self) -> str:
        names = {
            "a": ("k", "i"), "b": ("i", "m"), "c": ("h", "i"), "d": ("h", "i"),
            "e": ("phi", "h", "i"), "f": ("k", "h", "i"), "g": ("k", "i"),
        }[self.statement]
        ps = " ".join(f"{nm}={v}" for nm, v in zip(names, self.params))
        return f"identity({self.statement}) j={self.chart.j} n={self.chart.n} {ps}"


def _x2_power_check(chart, residue: JetPolynomial, exponent: int):
    """Is ``residue`` a positive multiple of x2^exponent?  Returns (ok, coefficient)."""
    if exponent == 0:
        target = (0,) * chart.nvars
    else:
        target = tuple(exponent if i == chart.x_index(2) else 0 for i in range(chart.nvars))
    if set(residue.terms) != {target}:
        return False, None
    c = residue.terms[target]
    return c > 0, c


def _needs_x2(chart: ChartSpec, exponent: int) -> None:
    if exponent >= 1 and chart.depth < 2:
        raise InputError(
            f"the positive case needs x2 in the chart; {chart} stops at depth {chart.depth}"
        )


def _graded_verdict(statement, chart, params, residue, i, threshold, exponent):
    if i < threshold:
        return Verdict(statement, chart, params, residue.is_zero(), "0 mod (x, x1)",
                       detail=residue.to_text())
    ok, c = _x2_power_check(chart, residue, exponent)
    return Verdict(statement, chart, params, ok, f"positive multiple of x2^{exponent}",
                   coefficient=c, detail=residue.to_text())


def _y_sum(chart, h, i, k, reduce=True):
    """sum_{b=0}^{j-1} (1/b!) y_b Q^i P^h (x^{k+b})."""
    acc = JetPolynomial(chart, {})
    for b in range(chart.j):
        yb = JetPolynomial.variable(chart, "y" if b == 0 else f"y{b}")
        acc = acc + yb * qp_power(chart, (k + b, 0), h, i, reduce) * Fraction(1, factorial(b))
    return acc


def lemma_b_check(statement: str, params: tuple, chart: ChartSpec) -> Verdict:
    """Expand both sides of one operator identity (a)-(g) and compare.

    Parameters per statement: (a) (k, i); (b) (i, m); (c) (h, i); (d) (h, i);
    (e) (phi, h, i) with phi a {(u, v): c} mapping or tuple of items;
    (f) (k, h, i); (g) (k, i).
    """
    if chart.j is None:
        raise InputError("the operator identities live on a secondary chart")
    j = chart.j
    params = tuple(params)

    def need(cond, msg):
        if not cond:
            raise InputError(f"statement ({statement}) {msg}; got {params}")

    if statement == "a":
        need(len(params) == 2, "takes (k, i)")
        k, i = params
        need(k >= j and i >= 0, "needs k >= j and i >= 0")
        thr, e = 2 * (k - j + 1), k - j + 1
        need(i <= thr, f"needs i <= {thr}")
        if i == thr:
            _needs_x2(chart, e)
        residue = qp_power(chart, (k, 0), j - 1, i, reduce=True)
        return _graded_verdict("a", chart, params, residue, i, thr, e)

    if statement == "b":
        need(len(params) == 2, "takes (i, m)")
        i, m = params
        need(i >= 1 and m >= 1, "needs positive i and m")
        lhs = qp_power(chart, (m, 0), 0, i).set_zero(["x"])
        prev = qp_power(chart, (m, 0), 0, i - 1).set_zero(["x"])
        low = qp_power(chart, (m - 1, 0), 0, i - 1).set_zero(["x"])
        rhs = apply_Q(prev, chart) + x_jet(chart, 1) * low * m
        return Verdict("b", chart, params, lhs == rhs, "both sides equal",
                       detail=(lhs - rhs).to_text())

    if statement == "c":
        need(len(params) == 2, "takes (h, i)")
        h, i = params
        need(0 <= h <= j - 1 and i >= 0, "needs 0 <= h <= j-1 and i >= 0")
        start = tuple(1 if idx == chart.y_index(h) else 0 for idx in range(chart.nvars))
        lhs = JetPolynomial(chart, dict(_qp_sequence(chart, start, 0, i + 1, False)[i]))
        acc = JetPolynomial(chart, {})
        for b in range(h, j):
            yb = JetPolynomial.variable(chart, "y" if b == 0 else f"y{b}")
            acc = acc + yb * qp_power(chart, (b - h, 0), 0, i).set_zero(["x"]) * Fraction(
                1, factorial(b - h))
        diff = lhs - acc
        ys = set(chart.y_jet_indices())
        ok = not (diff.used_indices() & ys)
        return Verdict("c", chart, params, ok, "difference involves only x-jet variables",
                       detail=diff.to_text())

    if statement == "d":
        need(len(params) == 2, "takes (h, i)")
        h, i = params
        need(0 <= h <= j - 1 and i >= 0, "needs 0 <= h <= j-1 and i >= 0")
        thr, e = 2 * (j - 1 - h) + 1, j - 1 - h
        need(i <= thr, f"needs i <= {thr}")
        if i == thr:
            _needs_x2(chart, e)
        residue = qp_power(chart, (0, 1), h, i, reduce=True) - _y_sum(chart, h, i, 0)
        return _graded_verdict("d", chart, params, residue.mod_x_x1(), i, thr, e)

    if statement == "e":
        need(len(params) == 3, "takes (phi, h, i)")
        phi, h, i = params
        need(h >= 1 and i >= 2, "needs h >= 1 and i >= 2")
        phi_poly = JetPolynomial.from_xy(chart, dict(phi))
        x = JetPolynomial.variable(chart, "x")
        lhs = qp_apply(chart, x * phi_poly, h, i, reduce=True)
        rhs = qp_apply(chart, phi_poly, h - 1, i, reduce=True) * h
        for a in range(0, i - 1):
            rhs = rhs + qp_apply(chart, phi_poly, h, a, reduce=True) * x_jet(chart, i - a) * comb(i, a)
        diff = (lhs - rhs).mod_x_x1()
        return Verdict("e", chart, (tuple(sorted(dict(phi).items())), h, i), diff.is_zero(),
                       "difference in (x, x1)", detail=diff.to_text())

    if statement in ("f", "g"):
        if statement == "f":
            need(len(params) == 3, "takes (k, h, i)")
            k, h, i = params
            need(k >= 0 and 0 <= h <= j - 1 and i >= 0, "needs k >= 0, 0 <= h <= j-1, i >= 0")
        else:
            need(len(params) == 2, "takes (k, i)")
            k, i = params
            need(k >= 0 and i >= 0, "needs k >= 0 and i >= 0")
            h = j - 1
        thr, e = 2 * (k + j - 1 - h) + 1, k + j - 1 - h
        need(i <= thr, f"needs i <= {thr}")
        if i == thr:
            _needs_x2(chart, e)
        residue = qp_power(chart, (k, 1), h, i, reduce=True) - _y_sum(chart, h, i, k)
        return _graded_verdict(statement, chart, params, residue.mod_x_x1(), i, thr, e)

    raise InputError(f"unknown statement {statement!r}; expected one of a-g")


E_TEST_PHIS = tuple(
    tuple(sorted(p.items()))
    for p in (
        [{(a, s - a): 1} for s in range(0, 4) for a in range(0, s + 1)]
        + [{(0, 0): 1, (1, 0): 2, (0, 2): -1}, {(2, 1): 3, (0, 1): -2, (1, 1): 1}]
    )
)


def lemma_b_parameters(chart: ChartSpec, k_max: int = 6) -> list:
    """Every (statement, params) pair of the sweep that is meaningful on ``chart``.

    Cases whose claimed leading term is a power of x2 are skipped on charts
    too shallow to contain x2; the vanishing cases are checked everywhere.
    """
    j = chart.j
    out = []

    def keep(i, thr, e):
        return i < thr or e == 0 or chart.depth >= 2

    for k in range(j, k_max + 1):
        thr, e = 2 * (k - j + 1), k - j + 1
        out += [("a", (k, i)) for i in range(thr + 1) if keep(i, thr, e)]
    out += [("b", (i, m)) for i in range(1, 7) for m in range(1, 5)]
    out += [("c", (h, i)) for h in range(j) for i in range(7)]
    for h in range(j):
        thr, e = 2 * (j - 1 - h) + 1, j - 1 - h
        out += [("d", (h, i)) for i in range(thr + 1) if keep(i, thr, e)]
    out += [("e", (phi, h, i)) for phi in E_TEST_PHIS for h in range(1, j + 1) for i in range(2, 6)]
    for k in range(0, k_max + 1):
        for h in range(j):
            thr, e = 2 * (k + j - 1 - h) + 1, k + j - 1 - h
            out += [("f", (k, h, i)) for i in range(thr + 1) if keep(i, thr, e)]
        thr, e = 2 * k + 1, k
        out += [("g", (k, i)) for i in range(thr + 1) if keep(i, thr, e)]
    return out


def lemma_b_sweep(j_values=(2, 3, 4), depths=(1, 2, 3, 4), k_max: int = 6,
                  statements: Iterable[str] = STATEMENTS) -> list:
    """All verdicts of the sweep, sorted by (statement, j, n, params)."""
    wanted = set(statements)
    verdicts = []
    for j in j_values:
        for depth in depths:
            chart = ChartSpec(j - 1 + depth, j)
            for st, params in lemma_b_parameters(chart, k_max):
                if st in wanted:
                    verdicts.append(lemma_b_check(st, params, chart))
    verdicts.sort(key=lambda v: repr(v.key))
    return verdicts


# -- gradings ---------------------------------------------------------------------------------


def weight_of(p: JetPolynomial, grading: str = "simple"):
    """Weight (simple: x_t -> 2-t) or bidegree (x_t -> (2-t, 1), y_t -> (2(j-t)-1, j-1-t))."""
    chart = p.chart
    if grading not in ("simple", "bigraded"):
        raise InputError(f"unknown grading {grading!r}")
    if grading == "bigraded" and chart.j is None:
        raise InputError("the bigrading is defined on secondary charts")
    xs = {idx: t for t, idx in enumerate(chart.x_jet_indices())}
    ys = {idx: t for t, idx in enumerate(chart.y_jet_indices())}

    def weight(mono):
        if grading == "simple":
            bad = [i for i, e in enumerate(mono) if e and i not in xs]
            if bad:
                raise InputError("the simple weight is defined on x-jet polynomials only")
            return sum(e * (2 - xs[i]) for i, e in enumerate(mono) if e)
        a = b = 0
        for i, e in enumerate(mono):
            if not e:
                continue
            if i in xs:
                a += e * (2 - xs[i])
                b += e
            else:
                t = ys[i]
                a += e * (2 * (chart.j - t) - 1)
                b += e * (chart.j - 1 - t)
        return (a, b)

    weights = {}
    for m in p.terms:
        weights.setdefault(weight(m), []).append(m)
    if not weights:
        return None
    if len(weights) > 1:
        listing = "; ".join(
            f"{w}: " + ", ".join(JetPolynomial(chart, {m: 1}).to_text() for m in ms)
            for w, ms in sorted(weights.items())
        )
        raise InputError(f"inhomogeneous polynomial: {listing}")
    return next(iter(weights))


# -- universal matrices -----------------------------------------------------------------------


def column_monomials(d: int) -> list:
    """(u, v) with u + v <= d, ordered by degree and then by v."""
    if not isinstance(d, int) or d < 0:
        raise InputError("degree must be a nonnegative integer")
    return [(s - v, v) for s in range(d + 1) for v in range(s + 1)]


@dataclass(frozen=True)
class ChartPoint:
    """A point of a chart of F(n), placed over an affine patch of the plane.

    ``patch='xy'``: the chart's base coordinates are (X, Y) with Z = 1.
    ``patch='y_infinity'``: they are (X/Y, Z/Y), the patch around the
    point at infinity of the y-axis.  ``reversed`` swaps which base
    coordinate plays the role of the chart's x.
    """

    chart: ChartSpec
    coords: tuple
    patch: str = "xy"
    reversed: bool = False

    def __post_init__(self):
        coords = tuple(Fraction(c) for c in self.coords)
        if len(coords) != self.chart.nvars:
            raise InputError(f"{self.chart} needs {self.chart.nvars} coordinates, got {len(coords)}")
        if self.patch not in ("xy", "y_infinity"):
            raise InputError(f"unknown patch {self.patch!r}")
        object.__setattr__(self, "coords", coords)

    @property
    def base_point(self) -> tuple:
        """Image in the plane as a projective triple (X : Y : Z)."""
        a, b = self.coords[0], self.coords[1]
        s1, s2 = (b, a) if self.reversed else (a, b)
        if self.patch == "xy":
            return _normalize_projective((s1, s2, Fraction(1)))
        return _normalize_projective((s1, Fraction(1), s2))

    def local_exponents(self, u: int, v: int, d: int) -> tuple:
        """Exponents (of chart x, chart y) of the column monomial x^u y^v."""
        e1, e2 = (u, v) if self.patch == "xy" else (u, d - u - v)
        return (e2, e1) if self.reversed else (e1, e2)


def _normalize_projective(p: tuple) -> tuple:
    lead = next(c for c in p if c != 0)
    return tuple(c / lead for c in p)


@dataclass
class UniversalMatrix:
    rows: list
    columns: list
    degree: int
    row_labels: list = field(default_factory=list)

    @property
    def shape(self) -> tuple:
        return (len(self.rows), len(self.columns))

    def submatrix(self, columns: Sequence[tuple]) -> list:
        missing = [c for c in columns if c not in self.columns]
        if missing:
            raise InputError(f"columns {missing} are not present at degree {self.degree}")
        idx = [self.columns.index(c) for c in columns]
        return [[row[i] for i in idx] for row in self.rows]

    def to_csv(self) -> str:
        head = ",".join(f"a{u}_{v}" for u, v in self.columns)
        lines = [head]
        for row in self.rows:
            lines.append(",".join(f"{q.numerator}/{q.denominator}" for q in row))
        return "\n".join(lines) + "\n"


@lru_cache(maxsize=None)
def _column_sequence(chart: ChartSpec, ex: int, ey: int) -> tuple:
    f = JetPolynomial(chart, {(ex, ey) + (0,) * (chart.nvars - 2): 1})
    return tuple(defining_sequence(f, chart))


def _point_rows(point: ChartPoint, d: int, columns: list, singular_row: bool) -> tuple:
    chart = point.chart
    per_column = []
    for u, v in columns:
        ex, ey = point.local_exponents(u, v, d)
        col = [p.evaluate(point.coords) for p in _column_sequence(chart, ex, ey)]
        if singular_row:
            # d/dy of the local monomial x^ex y^ey
            col.append(Fraction(ey) * point.coords[0] ** ex * point.coords[1] ** (ey - 1)
                       if ey else Fraction(0))
        per_column.append(col)
    nrows = len(per_column[0])
    rows = [[per_column[c][r] for c in range(len(columns))] for r in range(nrows)]
    labels = [f"D{r}" for r in range(chart.n + 1)] + (["df/dy"] if singular_row else [])
    return rows, labels


def universal_matrix(point: ChartPoint, d: int, variant: str = "plain") -> UniversalMatrix:
    """Matrix of the linear conditions on the a_uv imposed by one chart point."""
    if variant not in ("plain", "singular_row"):
        raise InputError(f"unknown variant {variant!r}")
    if d < point.chart.n:
        raise InputError(f"degree {d} is below the level {point.chart.n}")
    columns = column_monomials(d)
    rows, labels = _point_rows(point, d, columns, variant == "singular_row")
    return UniversalMatrix(rows, columns, d, labels)


def fiber_system(points: Sequence[ChartPoint], d: int, variant: str = "plain") -> UniversalMatrix:
    """Stacked conditions of several chart points on one curve of degree d."""
    if not points:
        raise InputError("need at least one point")
    if variant not in ("plain", "first_singular"):
        raise InputError(f"unknown variant {variant!r}")
    p = len(points)
    bound = p - 1 + sum(pt.chart.n for pt in points)
    if d < bound:
        raise InputError(f"degree {d} is below p - 1 + sum(n_i) = {bound}")
    columns = column_monomials(d)
    rows, labels = [], []
    for idx, pt in enumerate(points):
        r, lab = _point_rows(pt, d, columns, variant == "first_singular" and idx == 0)
        rows += r
        labels += [f"P{idx + 1}.{x}" for x in lab]
    return UniversalMatrix(rows, columns, d, labels)


def exact_rank(m) -> int:
    rows = m.rows if isinstance(m, UniversalMatrix) else m
    for row in rows:
        for v in row:
            if not isinstance(v, (int, Fraction)):
                raise InputError("exact_rank needs numeric entries")
    return linalg.rank(rows)


def distinct_image_count(points: Sequence[ChartPoint]) -> int:
    return len({pt.base_point for pt in points})


# -- sampling --------------------------------------------------------------------------------


def random_rational(rng: random.Random, bound: int = 9) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def random_nonzero(rng: random.Random, bound: int = 9) -> Fraction:
    while True:
        q = random_rational(rng, bound)
        if q:
            return q


def random_primary_point(rng: random.Random, n: int) -> ChartPoint:
    chart = ChartSpec(n)
    return ChartPoint(chart, tuple(random_rational(rng) for _ in range(chart.nvars)))


def random_secondary_point(rng: random.Random, n: int, j: int, normalized: bool = False) -> ChartPoint:
    """A point with x1 = 0 (on the divisor at infinity) and x2 != 0 when present.

    ``normalized`` also puts x = y = y1 = 0.
    """
    chart = ChartSpec(n, j)
    coords = [random_rational(rng) for _ in range(chart.nvars)]
    coords[chart.x_index(1)] = Fraction(0)
    if chart.depth >= 2:
        coords[chart.x_index(2)] = random_nonzero(rng)
    if normalized:
        coords[0] = coords[1] = coords[chart.y_index(1)] = Fraction(0)
    return ChartPoint(chart, tuple(coords))


def sample_fiber_points(rng: random.Random, ns: Sequence[int], coincident: bool = False,
                        secondary_share: float = 0.3) -> list:
    """Chart points of levels ``ns`` with distinct images in the plane.

    With ``coincident`` the first two points share their image but have
    different tangent directions (both in primary charts).  Other points
    go to a secondary chart, on the divisor at infinity and off its locus
    of tangency, with probability ``secondary_share`` when n >= 2.
    """
    if coincident and len(ns) < 2:
        raise InputError("a coincident configuration needs at least two points")
    while True:
        points = []
        for idx, n in enumerate(ns):
            if coincident and idx < 2 or n < 2 or rng.random() >= secondary_share:
                points.append(random_primary_point(rng, n))
            else:
                points.append(random_secondary_point(rng, n, rng.randint(2, n)))
        if coincident:
            first, second = points[0], points[1]
            coords = list(second.coords)
            coords[0], coords[1] = first.coords[0], first.coords[1]
            if first.chart.n >= 1 and second.chart.n >= 1 and coords[2] == first.coords[2]:
                continue
            points[1] = ChartPoint(second.chart, tuple(coords))
        expected = len(ns) - (1 if coincident else 0)
        if distinct_image_count(points) == expected:
            return points


def infinity_pair_points(ns: Sequence[int], rng: random.Random | None = None) -> list:
    """Two points over the point at infinity of the y-axis, plus finite ones.

    The first point sits in the reversed primary chart of the patch
    (X/Y, Z/Y) at the origin, tangent to the Z/Y axis; the second sits in
    the ordinary primary chart of that patch with slope 1.  Any further
    points are placed at distinct finite points of the plane.
    """
    if len(ns) < 2:
        raise InputError("need at least two levels")
    rng = rng or random.Random(0)
    n1, n2 = ns[0], ns[1]
    first = ChartPoint(ChartSpec(n1), (0,) * (n1 + 2), patch="y_infinity", reversed=True)
    second_coords = [Fraction(0), Fraction(0)] + [Fraction(1)] + [
        random_rational(rng) for _ in range(n2 - 1)
    ]
    second = ChartPoint(ChartSpec(n2), tuple(second_coords[: n2 + 2]), patch="y_infinity")
    rest = []
    for n in ns[2:]:
        while True:
            pt = random_primary_point(rng, n)
            if pt.base_point not in {p.base_point for p in [first] + rest}:
                rest.append(pt)
                break
    return [first, second] + rest


def expected_fiber_rank(points: Sequence[ChartPoint], variant: str = "plain") -> int:
    """q + sum(n_i), plus one for the singular-first-factor variant."""
    extra = 1 if variant == "first_singular" else 0
    return distinct_image_count(points) + sum(p.chart.n for p in points) + extra
