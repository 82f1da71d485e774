"""The twelve acceptance criteria, one test each.

Every test prints a single ``acceptance N: PASS|FAIL | details`` line (also
collected into a summary section at the end of the pytest run) and then
asserts the criterion with the tolerance it states.
"""

import math
import random
from fractions import Fraction
from math import comb

from qgibbs.brute import brute_table, oracle_limit
from qgibbs.gibbs import gibbs_pmf, partition_function, tilted_pgf
from qgibbs.laws import Chi, MittagLeffler, NegBin, Rayleigh, law_cdf, law_moment, law_pdf
from qgibbs.models import (
    CATALOG,
    ColouredWalk,
    DyckBridge,
    DyckExcursion,
    MotzkinBridge,
    MotzkinExcursion,
    PermFixedPoints,
    QuarterPlane,
    TwoWatermelon,
    WallWatermelon,
    WeightedMotzkinExcursion,
    coefficient_table,
    model_spec,
    scheme_constants,
    single_row_table,
    watermelon_partition_formula,
    watermelon_series_partition,
)
from qgibbs.phase import (
    distance_to_limit,
    limit_law_for,
    partition_ratio,
    regime_report,
    richardson,
    supercritical_constants,
    tv_to_law,
)
from qgibbs.series import Series, catalan_series, series_pow_int, series_recip, series_sqrt


def catalan(n):
    return comb(2 * n, n) // (n + 1)


def motzkin(n):
    return sum(comb(n, 2 * k) * catalan(k) for k in range(n // 2 + 1))


def dist(model, n, q):
    return gibbs_pmf(single_row_table(model, n), n, q)


# ---------------------------------------------------------------------------


def test_1_oracle_equivalence(report):
    models = list(CATALOG) + [WeightedMotzkinExcursion(2, 0, 3), WeightedMotzkinExcursion(Fraction(1, 2), Fraction(3, 2), 2)]
    mismatches = []
    for model in models:
        top = oracle_limit(model)
        if brute_table(model, top) != coefficient_table(model, top):
            mismatches.append(model.spec)
    ok = report(1, not mismatches, f"{len(models)} models compared up to their oracle limits, mismatches: {mismatches or 'none'}")
    assert ok


def test_2_sequence_identities(report):
    N = 60
    expected = {
        DyckExcursion(): catalan,
        DyckBridge(): lambda n: comb(2 * n, n),
        MotzkinExcursion(): motzkin,
        MotzkinBridge(): lambda n: sum(comb(n, 2 * k) * comb(2 * k, k) for k in range(n // 2 + 1)),
        PermFixedPoints(132): catalan,
        PermFixedPoints(213): catalan,
        PermFixedPoints(321): catalan,
        TwoWatermelon(): lambda n: catalan(n + 1),
        WallWatermelon(1): catalan,
        ColouredWalk(1): lambda n: 2**n,
        QuarterPlane("diagonal", "x"): lambda n: catalan(n) ** 2,
        QuarterPlane("diagonal", "y"): lambda n: catalan(n) ** 2,
        # a walk of length 2n has a Motzkin y-projection of length 2n
        QuarterPlane("diabolo", "x"): lambda n: catalan(n) * motzkin(2 * n),
        QuarterPlane("diabolo", "y"): lambda n: catalan(n) * motzkin(2 * n),
        QuarterPlane("king", "x"): lambda n: motzkin(n) ** 2,
        QuarterPlane("king", "y"): lambda n: motzkin(n) ** 2,
    }
    bad = [m.spec for m, f in expected.items() if coefficient_table(m, N).row_sums() != [f(n) for n in range(N + 1)]]
    diagonal_head = coefficient_table(QuarterPlane("diagonal", "x"), 5).row_sums()
    ok = not bad and diagonal_head == [1, 1, 4, 25, 196, 1764]
    report(2, ok, f"{len(expected)} sequences exact for n <= {N}; diagonal starts {diagonal_head}; failures: {bad or 'none'}")
    assert ok


def test_3_critical_values(report):
    expected = {
        PermFixedPoints(132): 3,
        PermFixedPoints(213): 3,
        PermFixedPoints(321): 3,
        DyckExcursion(): 2,
        DyckBridge(): 1,
        MotzkinExcursion(): Fraction(3, 2),
        MotzkinBridge(): 1,
        TwoWatermelon(): Fraction(4, 3),
        WallWatermelon(1): 2,
        WallWatermelon(2): 2,
        WallWatermelon(3): 2,
        ColouredWalk(1): 1,
        ColouredWalk(2): 1,
        ColouredWalk(3): 1,
        WeightedMotzkinExcursion(1, 2, 1): Fraction(4, 3),
    }
    got = {m.spec: scheme_constants(m).q_c for m in expected}
    bad = [m.spec for m, v in expected.items() if not (got[m.spec] == v and isinstance(got[m.spec], (int, Fraction)))]
    ok = report(3, not bad, f"{len(expected)} exact critical values checked; mismatches: {bad or 'none'}")
    assert ok


def test_4_krattenthaler_formula(report):
    bad = [(m, n) for m in range(1, 5) for n in range(1, 41) if watermelon_partition_formula(m, n) != watermelon_series_partition(m, n)]
    ok = report(4, not bad, f"product formula equals series extraction for m <= 4, n <= 40; mismatches: {bad or 'none'}")
    assert ok


def test_5_binomial_identity(report):
    N = 100
    inv_root = series_recip(series_sqrt(Series((1, -4), N)))
    c = catalan_series(N)
    bad = []
    for ell in range(9):
        s = series_pow_int(c, ell) * inv_root
        bad += [(ell, n) for n in range(N + 1) if s[n] != comb(2 * n + ell, n)]
    ok = report(5, not bad, f"[z^n] C(z)^l / sqrt(1-4z) = binom(2n+l, n) for l <= 8, n <= {N}; mismatches: {len(bad)}")
    assert ok


def test_6_tilt_identity(report):
    rng = random.Random(20261016)
    failures = checked = 0
    for model in CATALOG:
        for n in (10, 50):
            table = single_row_table(model, n)
            for _ in range(20):
                q = Fraction(rng.randint(1, 40), rng.randint(1, 12))
                v = Fraction(rng.randint(1, 40), rng.randint(1, 12))
                lhs = tilted_pgf(table, n, q, v)
                rhs = Fraction(partition_function(table, n, q * v)) / partition_function(table, n, q)
                checked += 1
                failures += lhs != rhs
    ok = report(6, failures == 0, f"{checked} exact identities E(v^X) = p(vq)/p(q), failures: {failures}")
    assert ok


def test_7_subcritical_convergence(report):
    ns = (25, 50, 100, 200)
    results = {}
    for model, cap in ((DyckExcursion(), 0.02), (MotzkinExcursion(), 0.03)):
        law, scaling = limit_law_for(model, 1)
        values = [tv_to_law(dist(model, n, 1), scaling, law) for n in ns]
        results[model.spec] = (law, values, cap)
    ok = all(
        all(a > b for a, b in zip(v, v[1:])) and v[-1] < cap for _, v, cap in results.values()
    ) and results["dyck-excursion"][0] == NegBin(2, Fraction(1, 2)) and results["motzkin-excursion"][0] == NegBin(2, Fraction(1, 3))
    detail = "; ".join(f"{k} TV {[round(x, 5) for x in v]} (cap {cap})" for k, (_, v, cap) in results.items())
    report(7, ok, detail)
    assert ok


def test_8_critical_convergence(report):
    ns = (100, 400, 1600)
    details, ok = [], True
    for model, q, target in (
        (DyckExcursion(), 2, math.sqrt(math.pi)),
        (MotzkinExcursion(), Fraction(3, 2), 2 / math.sqrt(3) * math.sqrt(math.pi)),
    ):
        ks, means = [], []
        for n in ns:
            d = dist(model, n, q)
            metric, value, law = distance_to_limit(d, model)
            assert metric == "ks" and law == Rayleigh(2)
            ks.append(value)
            means.append(float(d.mean()) / math.sqrt(n))
        extrapolated = richardson(means, list(ns))
        rel = abs(extrapolated / target - 1)
        this = all(a > b for a, b in zip(ks, ks[1:])) and rel < 0.02
        ok &= this
        details.append(
            f"{model.spec} KS {[round(x, 4) for x in ks]}, E/sqrt(n) {[round(x, 4) for x in means]} "
            f"-> {extrapolated:.5f} vs {target:.5f} ({rel:.2%})"
        )
    report(8, ok, "; ".join(details))
    assert ok


def test_9_supercritical(report):
    # n = 2000 is the path length; Dyck excursions are indexed by semilength 1000
    semilength = 1000
    mean = float(dist(DyckExcursion(), semilength, 4).mean())
    per_step = mean / (2 * semilength)
    mean_ok = abs(per_step * 3 - 1) < 0.01

    var_bad = []
    for model in CATALOG:
        q_c = float(scheme_constants(model).q_c)
        for i in range(10):
            q = Fraction(q_c + 0.1 + i * (4.9 / 9)).limit_denominator(10**6)
            if not supercritical_constants(model, q)[1] > 0:
                var_bad.append((model.spec, q))

    skew_bad = []
    for model in CATALOG:
        q = Fraction(float(scheme_constants(model).q_c)).limit_denominator(100) + 1
        skews = []
        for n in (250, 1000, 4000):
            d = dist(model, n, q)
            skews.append(abs(float(d.central_moment(3)) / float(d.central_moment(2)) ** 1.5))
        if not all(a > b for a, b in zip(skews, skews[1:])):
            skew_bad.append((model.spec, skews))
    dyck_skew = [float(d.central_moment(3)) / float(d.central_moment(2)) ** 1.5 for d in (dist(DyckExcursion(), n, 4) for n in (250, 1000, 4000))]
    skew_ok = not skew_bad and all(abs(a) > abs(b) for a, b in zip(dyck_skew, dyck_skew[1:]))

    ok = mean_ok and not var_bad and skew_ok
    report(
        9,
        ok,
        f"Dyck q=4 E(X)/n at length 2000: {per_step:.5f} vs 1/3 ({mean / semilength:.5f} per semilength vs 2/3); "
        f"variance constants positive on 10-point grids for {len(CATALOG)} models (failures {len(var_bad)}); "
        f"Dyck q=4 skewness {[round(s, 4) for s in dyck_skew]}; |skewness| decreasing for all models at q_c+1: {not skew_bad}",
    )
    assert ok


def test_10_partition_ratios(report):
    ns = (250, 500, 1000, 2000)
    worst, bad, checked = 0.0, [], 0
    for model in CATALOG:
        q_c = Fraction(scheme_constants(model).q_c)
        for q in (q_c / 2, q_c, q_c + 1):
            ratios = [partition_ratio(model, q, n, partition_function(single_row_table(model, n), n, q)) for n in ns]
            deviations = [max(abs(r - 1), 1e-7) for r in ratios]
            checked += 1
            worst = max(worst, deviations[-1])
            if deviations[-1] > 0.05 or not all(a >= b for a, b in zip(deviations, deviations[1:])):
                bad.append((model.spec, str(q), [round(r, 5) for r in ratios]))
    ok = report(10, not bad, f"{checked} (model, q) pairs; worst |ratio - 1| at n=2000 is {worst:.4f}; failures: {bad or 'none'}")
    assert ok


def test_11_limit_law_units(report):
    ml, ray = MittagLeffler(0.5, 0.5), Rayleigh(2)
    moment_err = max(abs(law_moment(ml, r) / law_moment(ray, r) - 1) for r in range(1, 7))
    grid = [0.25 * i for i in range(1, 21)]
    density_err = max(abs(law_pdf(ml, x) - law_pdf(ray, x)) for x in grid)
    chi_err = max(abs(law_cdf(Chi(2), x) - (1 - math.exp(-x * x / 2))) for x in [0.1 * i for i in range(1, 61)])
    negbin0 = law_pdf(NegBin(2, Fraction(1, 2)), 0)
    ok = moment_err < 1e-10 and density_err < 1e-8 and chi_err < 1e-12 and negbin0 == 0.25
    report(
        11,
        ok,
        f"ML(1/2,1/2) vs Rayleigh(sqrt 2): moments rel err {moment_err:.1e}, density err {density_err:.1e}; "
        f"chi(2) cdf err {chi_err:.1e}; NegBin(2,1/2) pmf(0) = {negbin0}",
    )
    assert ok


def _chi_moment(k, scale, r):
    return law_moment(Chi(k, scale), r)


def test_12_extended_scheme_critical_laws(report):
    ns = (250, 1000, 4000)
    lines, stable_all, match_all = [], True, True
    for model in (WallWatermelon(1), WallWatermelon(2), ColouredWalk(1), ColouredWalk(2)):
        q_c = scheme_constants(model).q_c
        m1, m2 = [], []
        for n in ns:
            d = dist(model, n, q_c)
            m1.append(float(d.moment(1)) / math.sqrt(n))
            m2.append(float(d.moment(2)) / n)
        changes = [abs(b / a - 1) for seq in (m1, m2) for a, b in zip(seq, seq[1:])]
        stable = max(changes) < 0.03
        extrapolated = (richardson(m1, list(ns)), richardson(m2, list(ns)))

        if isinstance(model, WallWatermelon):
            k, ml_beta = 2 * model.m, 2 * model.m - 0.5
        else:
            k, ml_beta = model.m, (model.m - 1) / 2
        candidates = {f"chi({k})": Chi(k), f"sqrt2*chi({k})": Chi(k, math.sqrt(2))}
        if ml_beta > 0:
            candidates[f"ML(1/2,{ml_beta})/sqrt2"] = MittagLeffler(0.5, ml_beta, 1 / math.sqrt(2))
        matches = []
        for name, law in candidates.items():
            target = (law_moment(law, 1), law_moment(law, 2))
            raw = max(abs(m1[-1] / target[0] - 1), abs(m2[-1] / target[1] - 1))
            ext = max(abs(extrapolated[0] / target[0] - 1), abs(extrapolated[1] / target[1] - 1))
            if raw < 0.03 or ext < 0.03:
                matches.append(f"{name} (n=4000 off {raw:.1%}, extrapolated off {ext:.2%})")
        stable_all &= stable
        match_all &= bool(matches)
        notes = regime_report(model, q_c).notes
        lines.append(
            f"{model.spec}: E(X/sqrt n) {[round(x, 4) for x in m1]}, E(X^2/n) {[round(x, 3) for x in m2]}, "
            f"max successive change {max(changes):.1%}, matches {matches or 'none'}"
            + (f", note: {notes[0]}" if notes else "")
        )
    ok = stable_all and match_all
    report(
        12,
        ok,
        "stabilization (<3% successive change) "
        + ("holds" if stable_all else "FAILS: the error decays like n^(-1/2), too slowly for this ladder")
        + " || "
        + " || ".join(lines),
    )
    assert ok
