"""Lifting parametrized branches through the Semple tower.

A branch is a pair of formal series ``(x(t), y(t))``.  At each level the
chart has an independent coordinate ``A`` and a newest coordinate ``B``;
the next coordinate measures the ratio of differentials ``dB/dA``.  When
``dB`` vanishes to lower order than ``dA`` that ratio has a pole, the lift
leaves the current chart and the inverted ratio ``dA/dB`` is used instead,
with ``B`` becoming the independent coordinate.  The point then lies on a
divisor at infinity, and the order of vanishing of ``dA/dB`` is the local
intersection multiplicity with it, i.e. the contribution to ``kappa``.

Level 0 picks whichever of ``x``, ``y`` vanishes to lower order as the
independent coordinate (the two primary charts differ by swapping roles).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence

from .contact_calculus import CurveCharacteristics
from .errors import InputError, PrecisionError
from .series import Series

_MAX_RETRIES = 8


@dataclass(frozen=True)
class BranchSeries:
    """``x(t), y(t)`` known exactly below ``truncation`` (None: exact polynomials)."""

    x_terms: Mapping[int, Fraction]
    y_terms: Mapping[int, Fraction]
    truncation: int | None = None

    def __post_init__(self):
        cleaned = []
        for name, terms in (("x", self.x_terms), ("y", self.y_terms)):
            out = {}
            for e, c in dict(terms).items():
                if not isinstance(e, int) or isinstance(e, bool) or e < 0:
                    raise InputError(f"{name}: exponents must be nonnegative integers, got {e!r}")
                if self.truncation is not None and e >= self.truncation:
                    raise InputError(
                        f"{name}: exponent {e} is not below the truncation {self.truncation}"
                    )
                c = Fraction(c)
                if c:
                    out[e] = c
            cleaned.append(out)
        if self.truncation is not None and (
            not isinstance(self.truncation, int) or self.truncation < 1
        ):
            raise InputError("truncation must be a positive integer")
        xs = {e: c for e, c in cleaned[0].items() if e > 0}
        ys = {e: c for e, c in cleaned[1].items() if e > 0}
        if not xs and not ys:
            raise InputError("branch is constant: both series are zero after centering")
        g = 0
        for e in list(xs) + list(ys):
            g = gcd(g, e)
        if g != 1:
            raise InputError(
                f"parametrization is not primitive: all exponents divisible by {g}"
            )
        object.__setattr__(self, "x_terms", cleaned[0])
        object.__setattr__(self, "y_terms", cleaned[1])

    @property
    def exact(self) -> bool:
        return self.truncation is None

    def series(self, prec: int | None = None) -> tuple:
        """Centered (x, y) as :class:`Series` at the given working precision."""
        if prec is None:
            if self.truncation is None:
                raise InputError("exact branches need an explicit working precision")
            prec = self.truncation
        if self.truncation is not None:
            prec = min(prec, self.truncation)
        xs = Series.from_terms({e: c for e, c in self.x_terms.items() if e > 0}, prec)
        ys = Series.from_terms({e: c for e, c in self.y_terms.items() if e > 0}, prec)
        return xs, ys

    def base_point(self) -> tuple:
        return self.x_terms.get(0, Fraction(0)), self.y_terms.get(0, Fraction(0))

    def swapped(self) -> "BranchSeries":
        return BranchSeries(self.y_terms, self.x_terms, self.truncation)

    def max_exponent(self) -> int:
        return max(list(self.x_terms) + list(self.y_terms) + [1])

    @classmethod
    def from_series(cls, x: Series, y: Series) -> "BranchSeries":
        prec = min(x.prec, y.prec)
        return cls(
            {e: c for e, c in x.terms().items() if e < prec},
            {e: c for e, c in y.terms().items() if e < prec},
            prec,
        )

    @classmethod
    def from_json(cls, obj) -> "BranchSeries":
        if not isinstance(obj, dict) or "x" not in obj or "y" not in obj:
            raise InputError("branch must be an object with 'x' and 'y' term lists")

        def terms(name):
            raw = obj[name]
            if not isinstance(raw, list):
                raise InputError(f"branch '{name}' must be a list of [exp, num, den]")
            out = {}
            for item in raw:
                if not (isinstance(item, list) and len(item) in (2, 3)
                        and all(isinstance(v, int) and not isinstance(v, bool) for v in item)):
                    raise InputError(f"bad term {item!r} in '{name}'; expected [exp, num, den]")
                e, num = item[0], item[1]
                den = item[2] if len(item) == 3 else 1
                if den == 0:
                    raise InputError(f"zero denominator in term {item!r}")
                if e in out:
                    raise InputError(f"exponent {e} repeated in '{name}'")
                out[e] = Fraction(num, den)
            return out

        trunc = obj.get("truncation")
        if trunc is not None and (not isinstance(trunc, int) or isinstance(trunc, bool)):
            raise InputError("truncation must be an integer")
        return cls(terms("x"), terms("y"), trunc)

    def to_json(self) -> dict:
        def enc(terms):
            return [[e, c.numerator, c.denominator] for e, c in sorted(terms.items())]

        out = {"x": enc(self.x_terms), "y": enc(self.y_terms)}
        if self.truncation is not None:
            out["truncation"] = self.truncation
        return out


@dataclass
class JetState:
    """The lifted branch in a chart of F(level)."""

    level: int
    chart_kind: str  # primary, primary_reversed, secondary, beyond
    coordinates: list  # Series, one per chart coordinate (level + 2 of them)
    names: list
    independent: int  # index into coordinates
    hits: list = field(default_factory=list)  # (level, multiplicity)
    j: int | None = None  # index of the secondary chart, once there

    @property
    def precision(self) -> int:
        return min(s.prec for s in self.coordinates)

    def trace_entry(self) -> dict:
        vals = []
        for s in self.coordinates:
            c = s.centered()
            vals.append(None if c.known_zero else c.start)
        return {
            "level": self.level,
            "chart": self.chart_kind,
            "j": self.j,
            "independent": self.names[self.independent],
            "coordinates": list(self.names),
            "valuations": vals,
        }


def _deficit_error(what: str, need: int, have: int, base_prec: int) -> PrecisionError:
    missing = need - have
    return PrecisionError(
        f"{what}: need terms through t^{need - 1} but only t^{have - 1} are known",
        required=base_prec + max(missing, 1),
    )


def initial_state(x: Series, y: Series) -> JetState:
    base = x.prec
    dx, dy = x.derivative(), y.derivative()
    if dx.known_zero and dy.known_zero:
        raise _deficit_error("both differentials undetermined", 1, min(dx.prec, dy.prec), base)
    if dx.known_zero:
        reverse = True
    elif dy.known_zero:
        reverse = False
    else:
        reverse = dy.valuation < dx.valuation
    if reverse:
        return JetState(0, "primary_reversed", [x, y], ["x", "y"], 1)
    return JetState(0, "primary", [x, y], ["x", "y"], 0)


def lift_step(s: JetState, base_prec: int | None = None) -> JetState:
    """Lift one level: append d(newest)/d(independent), inverting on a pole."""
    base_prec = s.precision if base_prec is None else base_prec
    a_idx = s.independent
    b_idx = len(s.coordinates) - 1
    if b_idx == a_idx:  # level 0 in the reversed chart: newest dependent is x
        b_idx = 0
    A, B = s.coordinates[a_idx], s.coordinates[b_idx]
    dA, dB = A.derivative(), B.derivative()
    if dA.known_zero:
        raise _deficit_error("independent differential undetermined", 1, dA.prec, base_prec)
    vA = dA.valuation
    if dB.known_zero:
        if dB.prec <= vA:
            raise _deficit_error("cannot compare differentials", vA + 1, dB.prec, base_prec)
        invert = False
    else:
        invert = dB.valuation < vA
    new_level = s.level + 1
    names = list(s.names)
    coords = list(s.coordinates)
    hits = list(s.hits)
    j = s.j
    if not invert:
        r = dB / dA
        coords.append(r)
        names.append(_next_name(s, names[b_idx], inverted=False))
        independent = a_idx
        kind = s.chart_kind
    else:
        r = dA / dB
        mult = r.valuation
        coords.append(r)
        names.append(_next_name(s, names[a_idx], inverted=True))
        independent = b_idx
        hits.append((new_level, mult))
        if len(hits) == 1:
            kind, j = "secondary", new_level
        else:
            kind = "beyond"
    return JetState(new_level, kind, coords, names, independent, hits, j)


def _next_name(s: JetState, stem_from: str, inverted: bool) -> str:
    if s.chart_kind == "beyond" or (inverted and s.hits):
        return f"w{s.level + 1}"
    stem = stem_from.rstrip("0123456789")
    digits = stem_from[len(stem):]
    order = int(digits) + 1 if digits and not inverted else 1
    return f"{stem}{order}"


@dataclass
class LiftReport:
    kappa: dict
    infinity_hits: list
    profound: bool
    flat: bool
    smooth: bool
    max_level: int
    desingularization_level: int | None
    trace: list

    def to_json(self) -> dict:
        return {
            "kappa": {str(j): v for j, v in sorted(self.kappa.items())},
            "infinity_hits": list(self.infinity_hits),
            "profound": self.profound,
            "flat": self.flat,
            "smooth": self.smooth,
            "max_level": self.max_level,
            "desingularization_level": self.desingularization_level,
            "trace": self.trace,
        }


def lift_states(b: BranchSeries, levels: int, prec: int) -> list:
    """States at levels 0..levels, computed at the given working precision."""
    x, y = b.series(prec)
    base = min(x.prec, y.prec)
    states = [initial_state(x, y)]
    for _ in range(levels):
        states.append(lift_step(states[-1], base))
    return states


def _working_precision(b: BranchSeries, levels: int) -> int:
    return (b.max_exponent() + 2) * (levels + 3)


def _with_precision(b: BranchSeries, fn, initial: int):
    """Run ``fn(prec)``; exact branches retry at doubled precision."""
    if not b.exact:
        return fn(b.truncation)
    prec = initial
    for _ in range(_MAX_RETRIES - 1):
        try:
            return fn(prec)
        except PrecisionError:
            prec *= 2
    return fn(prec)


def _is_immersed(s: JetState) -> bool:
    return s.coordinates[s.independent].centered().valuation == 1


def analyze_branch(b: BranchSeries, max_level: int) -> LiftReport:
    """Cusp data of one branch through F(max_level)."""
    if not isinstance(max_level, int) or max_level < 1:
        raise InputError("max_level must be a positive integer")

    def run(prec):
        return lift_states(b, max_level + 1, prec)

    states = _with_precision(b, run, _working_precision(b, max_level + 1))
    final = states[-1]
    hits_all = final.hits
    hits = [(lvl, m) for lvl, m in hits_all if lvl <= max_level]
    kappa = {}
    for lvl, m in hits:
        kappa[lvl] = kappa.get(lvl, 0) + m
    hit_levels = {lvl for lvl, _ in hits_all}
    flat = False
    for lvl, _ in hits:
        nxt = lvl + 1
        if nxt in hit_levels:
            continue
        r = states[nxt].coordinates[-1]
        if r.known_zero or r.valuation > 0:
            flat = True
    x0 = states[0].coordinates
    smooth = min(
        (s.centered().valuation for s in x0 if not s.centered().known_zero)
    ) == 1
    desing = next((s.level for s in states[: max_level + 1] if _is_immersed(s)), None)
    return LiftReport(
        kappa=kappa,
        infinity_hits=[lvl for lvl, _ in hits],
        profound=len(hits) >= 2,
        flat=flat,
        smooth=smooth,
        max_level=max_level,
        desingularization_level=desing,
        trace=[s.trace_entry() for s in states[: max_level + 1]],
    )


def desingularization_level(b: BranchSeries, cap: int) -> int:
    """Smallest level where the lift is immersed, hence meets no further divisor at infinity."""
    if not isinstance(cap, int) or cap < 0:
        raise InputError("cap must be a nonnegative integer")

    def run(prec):
        x, y = b.series(prec)
        base = min(x.prec, y.prec)
        s = initial_state(x, y)
        while True:
            if _is_immersed(s):
                return s.level
            if s.level >= cap:
                return None
            s = lift_step(s, base)

    level = _with_precision(b, run, _working_precision(b, cap))
    if level is None:
        raise InputError(f"branch is not immersed by level {cap}; raise the cap")
    return level


def curve_characteristics(branches: Sequence[BranchSeries], degree: int,
                          class_number: int | None = None,
                          max_level: int = 6) -> CurveCharacteristics:
    """Sum branch contributions into (d, dv, kappa).

    ``branches`` must list every singular branch of the curve.  Without a
    class number the curve must be nonsingular, and Pluecker's d(d-1) is used.
    """
    if not isinstance(degree, int) or degree < 1:
        raise InputError("degree must be a positive integer")
    reports = [analyze_branch(b, max_level) for b in branches]
    if class_number is None:
        if any(not r.smooth for r in reports):
            raise InputError("a class number is required for a singular curve")
        class_number = degree * (degree - 1)
    kappa: dict = {}
    for r in reports:
        for j, v in r.kappa.items():
            kappa[j] = kappa.get(j, 0) + v
    return CurveCharacteristics(
        degree=degree,
        class_number=class_number,
        kappa=kappa,
        has_profound_cusp=any(r.profound for r in reports),
        has_flat_cusp=any(r.flat for r in reports),
    )


def valuation_oracle_kappa(x_terms: Mapping[int, Fraction], y_terms: Mapping[int, Fraction],
                           prec: int = 60) -> int:
    """kappa_2 of a branch with val(y) > val(x) > 1, from one closed-form ratio.

    Writes x' = dx/dy' with y' = (dy/dt)/(dx/dt) and returns the order of
    vanishing of x' directly, without the chart machinery.  Used as an
    independent check of the second-level multiplicity.
    """
    x = Series.from_terms(x_terms, prec)
    y = Series.from_terms(y_terms, prec)
    y1 = y.derivative() / x.derivative()
    x1 = x.derivative() / y1.derivative()
    return x1.valuation
