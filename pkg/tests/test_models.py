import math
from fractions import Fraction
from math import comb

import pytest

from qgibbs.errors import DomainError, ResourceLimitError
from qgibbs.gibbs import gibbs_pmf
from qgibbs.models import (
    CATALOG,
    ColouredWalk,
    DyckBridge,
    DyckExcursion,
    MotzkinBridge,
    MotzkinExcursion,
    PermFixedPoints,
    QuarterPlane,
    Surd,
    TwoWatermelon,
    WallWatermelon,
    WeightedMotzkinExcursion,
    coefficient_table,
    compare_to_critical,
    h_eval,
    model_row,
    model_spec,
    parse_model,
    scheme_constants,
    total_count,
    watermelon_partition_formula,
    watermelon_series_partition,
)


def catalan(n):
    return comb(2 * n, n) // (n + 1)


def motzkin(n):
    # closed sum over the number of up steps, independent of the recurrence used in the package
    return sum(comb(n, 2 * k) * catalan(k) for k in range(n // 2 + 1))


def trinomial(n):
    return sum(comb(n, 2 * k) * comb(2 * k, k) for k in range(n // 2 + 1))


def test_spec_rows():
    assert coefficient_table(DyckExcursion(), 3).row(3) == {1: 2, 2: 2, 3: 1}
    assert coefficient_table(PermFixedPoints(321), 3).row(3) == {0: 2, 1: 2, 3: 1}
    assert coefficient_table(DyckBridge(), 2).row(2) == {1: 2, 2: 4}
    assert coefficient_table(ColouredWalk(1), 2).row(2) == {0: 2, 1: 2}
    assert coefficient_table(WallWatermelon(1), 2).row(2) == {2: 1, 3: 1}
    assert coefficient_table(MotzkinExcursion(), 3).row(3) == {1: 1, 2: 2, 3: 1}


def test_empty_objects():
    for model in (DyckExcursion(), MotzkinExcursion(), PermFixedPoints(132), ColouredWalk(2), QuarterPlane("king", "x")):
        assert model_row(model, 0) == {0: 1}
    assert model_row(WallWatermelon(2), 0) == {1: 1}


@pytest.mark.parametrize(
    "model, expected",
    [
        (DyckExcursion(), catalan),
        (DyckBridge(), lambda n: comb(2 * n, n)),
        (MotzkinExcursion(), motzkin),
        (MotzkinBridge(), trinomial),
        (PermFixedPoints(213), catalan),
        (TwoWatermelon(), lambda n: catalan(n + 1)),
        (WeightedMotzkinExcursion(1, 2, 1), lambda n: catalan(n + 1)),
        (WallWatermelon(1), catalan),
        (WallWatermelon(2), lambda n: catalan(n) * catalan(n + 2) - catalan(n + 1) ** 2),
        (ColouredWalk(1), lambda n: 2**n),
        (QuarterPlane("diagonal", "x"), lambda n: catalan(n) ** 2),
        (QuarterPlane("diabolo", "y"), lambda n: catalan(n) * motzkin(2 * n)),
        (QuarterPlane("king", "y"), lambda n: motzkin(n) ** 2),
    ],
)
def test_row_sums(model, expected):
    table = coefficient_table(model, 40)
    assert table.row_sums() == [expected(n) for n in range(41)]


def test_diagonal_sequence_start():
    assert coefficient_table(QuarterPlane("diagonal", "y"), 5).row_sums() == [1, 1, 4, 25, 196, 1764]


@pytest.mark.parametrize("model", CATALOG, ids=lambda m: m.spec)
def test_fast_route_equals_series_route(model):
    n = 30 if not isinstance(model, QuarterPlane) else 16
    assert coefficient_table(model, n) == coefficient_table(model, n, method="series")


def test_weighted_motzkin_rational_weights_both_routes():
    for model in (WeightedMotzkinExcursion(Fraction(1, 2), Fraction(3, 2), 2), WeightedMotzkinExcursion(2, 0, 3)):
        assert coefficient_table(model, 24) == coefficient_table(model, 24, method="series")


def test_weighted_motzkin_without_flat_steps_is_scaled_dyck():
    wm = coefficient_table(WeightedMotzkinExcursion(2, 0, 3), 20)
    dyck = coefficient_table(DyckExcursion(), 10)
    for n in range(21):
        if n % 2:
            assert wm.row(n) == {}
        else:
            assert wm.row(n) == {k: v * 6 ** (n // 2) for k, v in dyck.row(n // 2).items()}


def test_critical_values():
    expected = {
        "dyck-excursion": 2,
        "dyck-bridge": 1,
        "motzkin-excursion": Fraction(3, 2),
        "motzkin-bridge": 1,
        "weighted-motzkin:1,2,1": Fraction(4, 3),
        "perm-fp-132": 3,
        "perm-fp-213": 3,
        "perm-fp-321": 3,
        "two-watermelon": Fraction(4, 3),
        "wall-watermelon:1": 2,
        "wall-watermelon:3": 2,
        "coloured-walk:2": 1,
    }
    for spec, q_c in expected.items():
        assert scheme_constants(parse_model(spec)).q_c == q_c


def test_weighted_motzkin_critical_value_formula():
    # q_c = 1 + 1/(1 + p0/sqrt(p-1 p1)) whenever the product is a square
    for p_down, p_flat, p_up in [(1, 2, 1), (1, 1, 4), (Fraction(1, 4), 3, 1), (2, 5, 8)]:
        s = math.isqrt(int(p_down * p_up * 16)) / 4
        expected = 1 + 1 / (1 + Fraction(p_flat) / Fraction(s))
        assert scheme_constants(WeightedMotzkinExcursion(p_down, p_flat, p_up)).q_c == expected


def test_irrational_critical_value_is_exact_surd():
    c = scheme_constants(WeightedMotzkinExcursion(1, 1, 2))
    assert isinstance(c.q_c, Surd)
    value = 1 + 1 / (1 + 1 / math.sqrt(2))
    assert float(c.q_c) == pytest.approx(value, rel=1e-15)
    assert compare_to_critical(Fraction(value).limit_denominator(10**6) + Fraction(1, 10**5), c.q_c) == 1
    assert compare_to_critical(Fraction(value).limit_denominator(10**6) - Fraction(1, 10**5), c.q_c) == -1


@pytest.mark.parametrize("model", CATALOG, ids=lambda m: m.spec)
def test_constant_invariants(model):
    c = scheme_constants(model)
    assert float(c.q_c) == pytest.approx(c.rho_G / c.tau_H, rel=1e-14)
    assert 0 < c.lambda_H < 1 and c.lambda_G < 0 and c.c_H < 0
    spec = model_spec(model)
    h = spec.h
    # the square root sits at its branch point here, so rounding error is amplified to about sqrt(eps)
    assert h(c.rho_H, 0) == pytest.approx(c.tau_H, rel=1e-7)


def test_c_h_from_singular_expansion():
    # H(rho (1 - e)) ~ tau + c_H sqrt(e) as e -> 0
    for model in CATALOG:
        c = scheme_constants(model)
        e = 1e-10
        estimate = (h_eval(model, c.rho_H * (1 - e)) - c.tau_H) / math.sqrt(e)
        assert estimate == pytest.approx(c.c_H, rel=1e-4), model.spec


def test_h_eval_examples():
    assert h_eval(DyckExcursion(), 0.25) == 0.5
    assert h_eval(TwoWatermelon(), 0.25) == 0.75
    assert h_eval(DyckExcursion(), 3 / 16, 1) == pytest.approx(2.0, rel=1e-14)
    with pytest.raises(DomainError):
        h_eval(DyckExcursion(), 0.3)
    with pytest.raises(DomainError):
        h_eval(DyckExcursion(), -0.1)


@pytest.mark.parametrize("model", CATALOG, ids=lambda m: m.spec)
def test_h_derivatives_match_finite_differences(model):
    c = scheme_constants(model)
    x = 0.6 * c.rho_H
    step = 1e-5 * c.rho_H
    d1 = (h_eval(model, x + step) - h_eval(model, x - step)) / (2 * step)
    d2 = (h_eval(model, x + step, 1) - h_eval(model, x - step, 1)) / (2 * step)
    assert h_eval(model, x, 1) == pytest.approx(d1, rel=1e-7)
    assert h_eval(model, x, 2) == pytest.approx(d2, rel=1e-6)


@pytest.mark.parametrize("model", CATALOG, ids=lambda m: m.spec)
def test_h_increases_to_tau(model):
    c = scheme_constants(model)
    values = [h_eval(model, c.rho_H * (1 - 2.0**-j)) for j in range(1, 30)]
    assert all(a < b for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(c.tau_H, abs=1e-4)


def test_h_matches_series_coefficients():
    # the closed form agrees with the coefficients of the table's generating function
    rows = coefficient_table(DyckExcursion(), 60)
    x = 0.1
    direct = sum(v * x**n for n in range(61) for k, v in rows.row(n).items() if k == 1)
    assert h_eval(DyckExcursion(), x) == pytest.approx(direct, rel=1e-12)


def test_watermelon_formula_examples():
    assert watermelon_partition_formula(1, 1) == [0, 0, 1]
    assert watermelon_partition_formula(1, 2) == [0, 0, 1, 1]
    row = coefficient_table(WallWatermelon(2), 1).row(1)
    assert watermelon_partition_formula(2, 1) == [row.get(k, 0) for k in range(3)]


def test_watermelon_formula_against_series_small():
    for m in (1, 2, 3):
        for n in range(1, 15):
            assert watermelon_partition_formula(m, n) == watermelon_series_partition(m, n)


@pytest.mark.parametrize("model", [QuarterPlane(k, a) for k in ("diagonal", "diabolo", "king") for a in "xy"], ids=str)
def test_quarter_plane_law_equals_directed_law(model):
    spec = model_spec(model)
    comp = spec.component
    qp = coefficient_table(model, 12)
    directed = coefficient_table(comp, 12 * spec.size_factor)
    for q in (Fraction(1, 2), 1, 3):
        for n in range(1, 13):
            a = gibbs_pmf(qp, n, q).as_dict()
            b = gibbs_pmf(directed, spec.size_factor * n, q).as_dict()
            assert a == b


def test_wall_watermelon_one_is_shifted_dyck():
    ww = coefficient_table(WallWatermelon(1), 40)
    dyck = coefficient_table(DyckExcursion(), 40)
    for n in range(41):
        assert ww.row(n) == {k + 1: v for k, v in dyck.row(n).items()}


def test_two_watermelon_is_weighted_motzkin():
    assert coefficient_table(TwoWatermelon(), 30).rows == coefficient_table(WeightedMotzkinExcursion(1, 2, 1), 30).rows


def test_parse_model_round_trip():
    for model in CATALOG:
        assert parse_model(model.spec) == model
    assert parse_model("weighted-motzkin:1/2,3/2,2") == WeightedMotzkinExcursion(Fraction(1, 2), Fraction(3, 2), 2)
    assert parse_model("quarter-plane:king") == QuarterPlane("king", "x")


def test_invalid_models():
    with pytest.raises(DomainError):
        parse_model("nonsense")
    with pytest.raises(DomainError):
        WallWatermelon(0)
    with pytest.raises(DomainError):
        WeightedMotzkinExcursion(0, 1, 1)
    with pytest.raises(DomainError):
        PermFixedPoints(123)
    with pytest.raises(DomainError):
        QuarterPlane("tandem", "x")


def test_resource_limits():
    with pytest.raises(ResourceLimitError):
        coefficient_table(DyckExcursion(), 10**6)
    with pytest.raises(ResourceLimitError):
        coefficient_table(DyckExcursion(), 500, method="series")
    with pytest.raises(ResourceLimitError):
        model_row(DyckExcursion(), 10**7)


def test_large_row_is_exact():
    row = model_row(DyckExcursion(), 3000)
    assert sum(row.values()) == catalan(3000)
    assert row[1] == catalan(2999)
    assert total_count(PermFixedPoints(321), 500) == catalan(500)
