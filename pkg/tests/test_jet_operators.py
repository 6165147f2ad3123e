import random
from fractions import Fraction
from math import factorial, prod

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semple_contact.errors import InputError
from semple_contact.jet_operators import (
    E_TEST_PHIS,
    ChartPoint,
    ChartSpec,
    JetPolynomial,
    apply_P,
    apply_Q,
    column_monomials,
    defining_sequence,
    distinct_image_count,
    exact_rank,
    expected_fiber_rank,
    fiber_system,
    infinity_pair_points,
    lemma_b_check,
    lemma_b_parameters,
    lemma_b_sweep,
    qp_power,
    random_primary_point,
    random_secondary_point,
    sample_fiber_points,
    universal_matrix,
    weight_of,
    x_jet,
)
from semple_contact import linalg


def var(chart, name):
    return JetPolynomial.variable(chart, name)


# -- charts and operators -----------------------------------------------------------


def test_chart_variables():
    assert ChartSpec(3).variables == ("x", "y", "y1", "y2", "y3")
    assert ChartSpec(4, 3).variables == ("x", "y", "y1", "y2", "x1", "x2")
    assert ChartSpec(4, 3).depth == 2


@pytest.mark.parametrize("n,j", [(-1, None), (3, 1), (3, 4)])
def test_chart_errors(n, j):
    with pytest.raises(InputError):
        ChartSpec(n, j)


def test_operator_examples():
    c = ChartSpec(3, 2)
    x, y, y1, x1, x2 = (var(c, v) for v in ("x", "y", "y1", "x1", "x2"))
    assert apply_P(x * x) == x * 2
    assert apply_P(y) == y1
    assert apply_P(y1).is_zero()
    assert apply_Q(x) == x1
    assert apply_Q(y) == x1 * y1
    assert apply_Q(y1) == JetPolynomial.constant(c, 1)
    assert apply_Q(x1) == x2
    assert apply_Q(var(c, "x2")).is_zero()


def test_q_squared_p_of_x_squared():
    c = ChartSpec(3, 2)
    assert qp_power(c, (2, 0), 1, 2, reduce=True) == var(c, "x2") * 2
    assert qp_power(c, (2, 0), 1, 2) == var(c, "x2") * 2


def test_q_needs_secondary_chart():
    with pytest.raises(InputError):
        apply_Q(var(ChartSpec(2), "x"))


@pytest.mark.parametrize("j,n", [(2, 3), (3, 4), (4, 6)])
def test_q_on_y_jets(j, n):
    c = ChartSpec(n, j)
    for t in range(j - 1):
        src = "y" if t == 0 else f"y{t}"
        assert apply_Q(var(c, src)) == var(c, "x1") * var(c, f"y{t + 1}")


def test_x_jet():
    c = ChartSpec(3, 2)
    assert x_jet(c, 0) == var(c, "x")
    assert x_jet(c, 2) == var(c, "x2")
    assert x_jet(c, 3).is_zero()


def test_defining_sequence_of_cusp():
    c = ChartSpec(2, 2)
    x, y, y1, x1 = (var(c, v) for v in ("x", "y", "y1", "x1"))
    f = y * y - x ** 3
    seq = defining_sequence(f)
    assert seq[1] == y * y1 * 2 - x * x * 3
    assert seq[2] == y1 * y1 * x1 * 2 - x * x1 * 6 + y * 2
    # vanishes along the lift t -> (t^2, t^3, 3t/2, 4t/3)
    for t in (Fraction(1, 3), Fraction(2), Fraction(-5, 7)):
        point = (t ** 2, t ** 3, 3 * t / 2, 4 * t / 3)
        assert all(p.evaluate(point) == 0 for p in seq)


def test_defining_sequence_primary():
    c = ChartSpec(2)
    f = JetPolynomial.from_xy(c, {(0, 1): 1, (2, 0): -1})
    seq = defining_sequence(f)
    assert [p.to_text() for p in seq] == ["-x^2 + y", "-2*x + y1", "y2 - 2"]


def test_defining_sequence_rejects_jet_input():
    c = ChartSpec(2, 2)
    with pytest.raises(InputError):
        defining_sequence(var(c, "y1"))


def test_chart_mismatch():
    with pytest.raises(InputError):
        var(ChartSpec(2), "x") + var(ChartSpec(3), "x")


# -- derivation laws -----------------------------------------------------------------


def poly_strategy(chart):
    mono = st.lists(st.integers(0, 2), min_size=chart.nvars, max_size=chart.nvars).map(tuple)
    coeff = st.fractions(min_value=-4, max_value=4, max_denominator=3)
    return st.dictionaries(mono, coeff, max_size=4).map(lambda t: JetPolynomial(chart, t))


LEIBNIZ_CHARTS = [ChartSpec(3, 2), ChartSpec(4, 3), ChartSpec(5, 3)]


@pytest.mark.parametrize("chart", LEIBNIZ_CHARTS, ids=str)
def test_leibniz(chart):
    s = poly_strategy(chart)

    @settings(max_examples=100, deadline=None)
    @given(s, s)
    def check(a, b):
        assert apply_P(a * b) == apply_P(a) * b + a * apply_P(b)
        assert apply_Q(a * b) == apply_Q(a) * b + a * apply_Q(b)

    check()


@pytest.mark.parametrize("chart", LEIBNIZ_CHARTS, ids=str)
def test_pruned_sequences_agree_modulo_the_ideal(chart):
    for u in range(0, 4):
        for v in range(0, 3):
            for h in range(0, chart.j):
                for i in range(0, 7):
                    full = qp_power(chart, (u, v), h, i).mod_x_x1()
                    assert qp_power(chart, (u, v), h, i, reduce=True) == full


# -- gradings ----------------------------------------------------------------------


@pytest.mark.parametrize("m,i", [(m, i) for m in range(1, 4) for i in range(0, 5)])
def test_simple_weight_of_x_powers(m, i):
    c = ChartSpec(5, 2)
    p = qp_power(c, (m, 0), 0, i)
    assert p.is_zero() or weight_of(p) == 2 * m - i


@pytest.mark.parametrize("chart", [ChartSpec(3, 2), ChartSpec(5, 3), ChartSpec(6, 4)], ids=str)
def test_bigrading_shifts(chart):
    j = chart.j
    for u in range(0, 3):
        for v in range(0, 3):
            base = (2 * u + (2 * j - 1) * v, u + (j - 1) * v)
            for h in range(0, j):
                for i in range(0, 5):
                    p = qp_power(chart, (u, v), h, i)
                    if not p.is_zero():
                        assert weight_of(p, "bigraded") == (base[0] - 2 * h - i, base[1] - h)


def test_weight_errors():
    c = ChartSpec(3, 2)
    with pytest.raises(InputError):
        weight_of(var(c, "x") + var(c, "x1"))
    with pytest.raises(InputError):
        weight_of(var(c, "y"))
    with pytest.raises(InputError):
        weight_of(var(ChartSpec(2), "x"), "bigraded")
    assert weight_of(JetPolynomial(c, {})) is None


# -- operator identities on secondary charts ------------------------------------------


def test_operator_identity_sweep_passes():
    verdicts = lemma_b_sweep()
    failures = [v.label() for v in verdicts if not v.passed]
    assert failures == []
    assert {v.statement for v in verdicts} == set("abcdefg")
    positive = [v for v in verdicts if v.coefficient is not None]
    assert positive and all(v.coefficient > 0 for v in positive)


def test_identity_sweep_is_sorted_and_covers_params():
    verdicts = lemma_b_sweep(j_values=(2,), depths=(2,))
    keys = [repr(v.key) for v in verdicts]
    assert keys == sorted(keys)
    assert len(verdicts) == len(lemma_b_parameters(ChartSpec(3, 2)))


def test_identity_examples():
    c = ChartSpec(4, 2)
    top = lemma_b_check("a", (2, 2), c)
    assert top.passed and top.coefficient == 2
    assert lemma_b_check("a", (3, 3), c).passed
    assert lemma_b_check("g", (0, 1), c).passed
    assert lemma_b_check("e", (E_TEST_PHIS[3], 1, 3), c).passed


def test_identity_errors():
    with pytest.raises(InputError):
        lemma_b_check("a", (2, 0), ChartSpec(3))
    with pytest.raises(InputError):
        lemma_b_check("z", (2, 0), ChartSpec(3, 2))
    with pytest.raises(InputError):
        lemma_b_check("a", (1, 0), ChartSpec(3, 2))
    with pytest.raises(InputError):
        lemma_b_check("a", (2, 5), ChartSpec(3, 2))
    with pytest.raises(InputError):
        lemma_b_check("a", (2, 2), ChartSpec(2, 2))


# -- universal matrices ------------------------------------------------------------


def test_column_order():
    assert column_monomials(2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


@pytest.mark.parametrize("n", range(0, 7))
def test_triangular_minor(n):
    rng = random.Random(100 + n)
    m = universal_matrix(random_primary_point(rng, n), n)
    det = linalg.determinant(m.submatrix([(k, 0) for k in range(n + 1)]))
    assert det == prod(factorial(k) for k in range(n + 1))


@pytest.mark.parametrize("n", range(1, 5))
def test_ranks(n):
    rng = random.Random(7 * n)
    for _ in range(5):
        assert exact_rank(universal_matrix(random_primary_point(rng, n), n)) == n + 1
        for j in range(2, n + 1):
            pt = random_secondary_point(rng, n, j)
            assert exact_rank(universal_matrix(pt, n)) == n + 1
    pt = random_primary_point(rng, n)
    assert exact_rank(universal_matrix(pt, n, "singular_row")) == n + 2


@pytest.mark.parametrize("n", range(2, 6))
def test_rank_oracle_agrees(n):
    rng = random.Random(11 * n)
    m = universal_matrix(random_secondary_point(rng, n, n), n + 1)
    assert exact_rank(m) == linalg.rank_by_fractions(m.rows)


@pytest.mark.parametrize("ns,coincident", [
    ((2,), False), ((1, 1), False), ((1, 1), True), ((2, 3), True), ((1, 2, 1), False), ((1, 1, 2), True),
])
def test_fiber_ranks(ns, coincident):
    rng = random.Random(sum(ns) * 13 + coincident)
    d = len(ns) - 1 + sum(ns)
    pts = sample_fiber_points(rng, ns, coincident)
    q = len(ns) - (1 if coincident else 0)
    assert distinct_image_count(pts) == q
    assert exact_rank(fiber_system(pts, d)) == q + sum(ns)
    assert expected_fiber_rank(pts) == q + sum(ns)


@pytest.mark.parametrize("ns", [(1, 1), (2, 1), (1, 2, 2)])
def test_pair_at_infinity(ns):
    pts = infinity_pair_points(ns, random.Random(5))
    assert pts[0].base_point == pts[1].base_point == (0, 1, 0)
    d = len(ns) - 1 + sum(ns)
    assert exact_rank(fiber_system(pts, d)) == len(ns) - 1 + sum(ns)


@pytest.mark.parametrize("ns", [(1, 1), (2, 2, 1)])
def test_singular_first_factor(ns):
    rng = random.Random(3)
    pts = sample_fiber_points(rng, ns, secondary_share=0.0)
    d = len(ns) - 1 + sum(ns)
    assert exact_rank(fiber_system(pts, d, "first_singular")) == 1 + len(ns) + sum(ns)


def test_matrix_errors():
    pt = random_primary_point(random.Random(1), 2)
    with pytest.raises(InputError):
        universal_matrix(pt, 1)
    with pytest.raises(InputError):
        universal_matrix(pt, 2, "odd")
    with pytest.raises(InputError):
        fiber_system([pt, pt], 2)
    with pytest.raises(InputError):
        fiber_system([], 2)
    with pytest.raises(InputError):
        universal_matrix(pt, 2).submatrix([(3, 0)])
    with pytest.raises(InputError):
        ChartPoint(ChartSpec(2), (0, 0))


def test_to_csv():
    pt = ChartPoint(ChartSpec(1), (0, 0, 1))
    csv = universal_matrix(pt, 1).to_csv().splitlines()
    assert csv[0] == "a0_0,a1_0,a0_1"
    assert csv[1:] == ["1/1,0/1,0/1", "0/1,1/1,1/1"]


def test_reversed_point_swaps_roles():
    pt = ChartPoint(ChartSpec(1), (2, 3, 0), reversed=True)
    assert pt.base_point == (1, Fraction(2, 3), Fraction(1, 3))
    assert pt.local_exponents(2, 1, 3) == (1, 2)
