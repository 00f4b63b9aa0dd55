"""Deprivation evaluation, aggregation, and decomposition checks."""

from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from povkit import (DataError, DeprivationMatrix, IndicatorScheme,
                    IndicatorSpec, MissingPolicy, MissingValueError,
                    PanelDataset, SchemeError, UndefinedResultError,
                    baseline_scheme, builtin_scheme, compute_mpi,
                    deprivation_scores, dimensional_contributions,
                    evaluate_deprivations, incidence_curve,
                    subgroup_decompose, with_income_scheme)
from povkit.mpi import Orientation

from oracles import af_measures


def matrix_of(rows, ids=None):
    rows = np.asarray(rows, dtype=np.uint8)
    ids = tuple(ids) if ids else tuple(f"i{j}" for j in range(rows.shape[1]))
    keys = [(i, 1) for i in range(rows.shape[0])]
    return DeprivationMatrix(rows, ids, keys)


def equal_weight_scheme(d, k=0.5, ids=None):
    ids = list(ids) if ids else [f"i{j}" for j in range(d)]
    ind = tuple(IndicatorSpec(i, "dim", Fraction(1, d),
                              orientation=Orientation.FLAG) for i in ids)
    return IndicatorScheme(ind, poverty_cutoff_k=k)


# ---------------------------------------------------------------------------
# schemes


def test_builtin_weights_are_exact():
    base = baseline_scheme()
    by_id = {s.id: s.weight for s in base.indicators}
    assert by_id["years_schooling"] == Fraction(1, 6)
    assert by_id["hospitalized"] == Fraction(1, 12)
    assert by_id["unsafe_water"] == Fraction(1, 15)
    assert sum(s.weight for s in base.indicators) == 1

    rich = with_income_scheme()
    by_id = {s.id: s.weight for s in rich.indicators}
    assert by_id["years_schooling"] == Fraction(1, 8)
    assert by_id["poor_self_health"] == Fraction(1, 16)
    assert by_id["no_electricity"] == Fraction(1, 20)
    assert by_id["income_pc"] == Fraction(1, 4)
    assert {s.id: s.cutoff for s in rich.indicators}["income_pc"] == 2300.0
    assert sum(s.weight for s in rich.indicators) == 1


def test_dimension_weights_are_equal_within_scheme():
    for scheme, share in ((baseline_scheme(), Fraction(1, 3)),
                          (with_income_scheme(), Fraction(1, 4))):
        per_dim = {}
        for s in scheme.indicators:
            per_dim[s.dimension] = per_dim.get(s.dimension, Fraction(0)) + s.weight
        assert all(v == share for v in per_dim.values())


def test_default_cutoff_and_presets():
    assert baseline_scheme().poverty_cutoff_k == 0.33
    from povkit import POVERTY_CUTOFF_PRESETS
    assert POVERTY_CUTOFF_PRESETS == (0.2, 0.33, 0.4)
    assert builtin_scheme("baseline", 0.4).poverty_cutoff_k == 0.4


def test_scheme_validation():
    ind = (IndicatorSpec("a", "d", Fraction(1, 2), orientation=Orientation.FLAG),)
    with pytest.raises(SchemeError):
        IndicatorScheme(ind)                       # weights sum to 1/2
    with pytest.raises(SchemeError):
        IndicatorSpec("a", "d", Fraction(1, 2))    # cutoff required
    with pytest.raises(SchemeError):
        IndicatorSpec("a", "d", 0.5)               # floats are not exact
    with pytest.raises(SchemeError):
        builtin_scheme("nope")
    with pytest.raises(SchemeError):
        IndicatorScheme((IndicatorSpec("a", "d", Fraction(1, 2), cutoff=1.0),
                         IndicatorSpec("a", "d", Fraction(1, 2), cutoff=1.0)))


# ---------------------------------------------------------------------------
# deprivation evaluation


def panel_of(frame):
    return PanelDataset(frame, entity="household", time="wave")


def small_scheme():
    return IndicatorScheme((
        IndicatorSpec("school", "edu", Fraction(1, 2), cutoff=9.0),
        IndicatorSpec("flag", "other", Fraction(1, 2),
                      orientation=Orientation.FLAG),
    ), poverty_cutoff_k=0.5)


def test_cutoff_is_strict():
    frame = pd.DataFrame({"household": [1, 2, 3], "wave": [1, 1, 1],
                          "school": [7.0, 9.0, 9.5], "flag": [0, 0, 0]})
    m = evaluate_deprivations(panel_of(frame), small_scheme())
    assert m.values[:, 0].tolist() == [1, 0, 0]
    assert m.values[:, 1].tolist() == [0, 0, 0]


def test_flag_must_be_binary():
    frame = pd.DataFrame({"household": [1], "wave": [1],
                          "school": [10.0], "flag": [2]})
    with pytest.raises(DataError):
        evaluate_deprivations(panel_of(frame), small_scheme())


def test_missing_policies():
    frame = pd.DataFrame({"household": [1, 2, 3], "wave": [1, 1, 1],
                          "school": [7.0, np.nan, 11.0], "flag": [1, 1, 0]})
    p = panel_of(frame)
    dropped = evaluate_deprivations(p, small_scheme())
    assert dropped.n == 2 and dropped.n_dropped == 1
    assert dropped.rows.tolist() == [0, 2]

    kept = evaluate_deprivations(p, small_scheme(),
                                 missing=MissingPolicy.NONDEPRIVED)
    assert kept.n == 3 and kept.n_dropped == 0
    assert kept.values[1].tolist() == [0, 1]   # missing school -> not deprived

    with pytest.raises(MissingValueError):
        evaluate_deprivations(p, small_scheme(), missing="strict")


def test_unknown_column_is_reported():
    frame = pd.DataFrame({"household": [1], "wave": [1], "school": [1.0]})
    with pytest.raises(DataError):
        evaluate_deprivations(panel_of(frame), small_scheme())


# ---------------------------------------------------------------------------
# scores and aggregation


def test_score_bounds_and_census():
    scheme = equal_weight_scheme(2)
    m = matrix_of([[1, 1], [0, 0]])
    s = deprivation_scores(m, scheme)
    assert s.tolist() == [1.0, 0.0]


def test_baseline_education_only_score():
    scheme = baseline_scheme()
    row = np.zeros((1, 11), dtype=np.uint8)
    row[0, 0] = row[0, 1] = 1      # both education indicators
    m = matrix_of(row, ids=scheme.ids)
    s = deprivation_scores(m, scheme)
    assert abs(s[0] - 1.0 / 3.0) < 1e-12


def test_hand_example_aggregates():
    # rows: (1,1), (1,0), (0,0), (1,0); equal weights; k = 0.5
    scheme = equal_weight_scheme(2)
    m = matrix_of([[1, 1], [1, 0], [0, 0], [1, 0]])
    res = compute_mpi(m, scheme, k=0.5)
    assert res.h == 0.75
    assert abs(res.a - 2.0 / 3.0) < 1e-12
    assert res.m0 == 0.5
    assert res.q == 3
    assert res.censored_headcounts.tolist() == [3, 1]
    assert np.allclose(res.contributions, [0.75, 0.25], atol=1e-12)


def test_no_poor_households():
    scheme = equal_weight_scheme(2)
    m = matrix_of([[0, 0], [0, 0]])
    res = compute_mpi(m, scheme, k=0.5)
    assert res.h == 0.0 and res.a == 0.0 and res.m0 == 0.0
    assert res.contributions is None
    with pytest.raises(UndefinedResultError):
        dimensional_contributions(m, scheme, 0.5)


def test_all_deprived():
    scheme = equal_weight_scheme(3, k=1.0)
    m = matrix_of(np.ones((4, 3)))
    res = compute_mpi(m, scheme, k=1.0)
    assert res.h == 1.0 and res.a == 1.0 and res.m0 == 1.0


def test_identity_and_closure_random_panels():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = rng.integers(1, 60)
        d = rng.integers(1, 8)
        scheme = equal_weight_scheme(int(d))
        m = matrix_of(rng.integers(0, 2, size=(n, d)))
        k = float(rng.choice([0.2, 0.33, 0.5, 0.75, 1.0]))
        res = compute_mpi(m, scheme, k=k)
        assert abs(res.m0 - res.h * res.a) <= 1e-12
        assert 0.0 <= res.h <= 1.0 and 0.0 <= res.a <= 1.0 and 0.0 <= res.m0 <= 1.0
        if res.contributions is not None:
            assert abs(res.contributions.sum() - 1.0) <= 1e-10
            assert (res.contributions >= 0).all()


def test_matches_exact_enumeration():
    rng = np.random.default_rng(11)
    # dyadic weights keep float and rational arithmetic identical
    weight_sets = [
        [Fraction(1, 4)] * 4,
        [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 8)],
        [Fraction(1, 2), Fraction(1, 2)],
        [Fraction(3, 8), Fraction(3, 8), Fraction(1, 4)],
    ]
    for trial in range(150):
        weights = weight_sets[trial % len(weight_sets)]
        d = len(weights)
        n = int(rng.integers(1, 9))
        rows = [tuple(int(v) for v in rng.integers(0, 2, d)) for _ in range(n)]
        k = float(rng.choice([0.25, 0.375, 0.5, 0.75]))
        ind = tuple(IndicatorSpec(f"i{j}", "dim", w, orientation=Orientation.FLAG)
                    for j, w in enumerate(weights))
        scheme = IndicatorScheme(ind, poverty_cutoff_k=k)
        res = compute_mpi(matrix_of(rows), scheme, k=k)
        h, a, m0, censored, contributions = af_measures(rows, weights, Fraction(k))
        assert res.h == float(h)
        assert res.a == pytest.approx(float(a), abs=1e-15)
        assert res.m0 == pytest.approx(float(m0), abs=1e-15)
        assert res.censored_headcounts.tolist() == censored
        if contributions is None:
            assert res.contributions is None
        else:
            assert np.allclose(res.contributions,
                               [float(c) for c in contributions], atol=1e-12)


def test_monotone_in_k():
    rng = np.random.default_rng(3)
    scheme = equal_weight_scheme(5)
    m = matrix_of(rng.integers(0, 2, size=(80, 5)))
    grid = [0.1, 0.2, 0.4, 0.6, 0.8, 1.0]
    points = incidence_curve(m, scheme, grid)
    hs = [h for _, h, _ in points]
    m0s = [v for _, _, v in points]
    assert all(a >= b for a, b in zip(hs, hs[1:]))
    assert all(a >= b for a, b in zip(m0s, m0s[1:]))
    for k, h, m0 in points:
        res = compute_mpi(m, scheme, k=k)
        assert (h, m0) == (res.h, res.m0)


def test_duplication_invariance():
    rng = np.random.default_rng(5)
    scheme = equal_weight_scheme(4)
    rows = rng.integers(0, 2, size=(30, 4))
    m1 = matrix_of(rows)
    m2 = matrix_of(np.vstack([rows, rows]))
    for k in (0.25, 0.5, 0.75):
        r1 = compute_mpi(m1, scheme, k=k)
        r2 = compute_mpi(m2, scheme, k=k)
        assert r1.h == r2.h and r1.m0 == pytest.approx(r2.m0, abs=1e-15)
        assert r1.a == pytest.approx(r2.a, abs=1e-15)
        if r1.contributions is not None:
            assert np.allclose(r1.contributions, r2.contributions, atol=1e-12)


def test_deprivation_flip_moves_m0_by_weight_over_n():
    # flipping one indicator to deprived for an already-poor household
    # raises M0 by exactly that indicator's weight over n
    scheme = equal_weight_scheme(4, k=0.5)
    rows = np.array([[1, 1, 0, 0], [0, 0, 0, 0], [1, 0, 1, 0]], dtype=np.uint8)
    base = compute_mpi(matrix_of(rows), scheme, k=0.5)
    flipped = rows.copy()
    flipped[0, 3] = 1
    res = compute_mpi(matrix_of(flipped), scheme, k=0.5)
    assert res.m0 - base.m0 == pytest.approx(0.25 / 3.0, abs=1e-12)


def test_subgroup_decomposition_identity():
    rng = np.random.default_rng(9)
    for _ in range(60):
        n = int(rng.integers(2, 50))
        d = int(rng.integers(1, 6))
        scheme = equal_weight_scheme(d)
        rows = rng.integers(0, 2, size=(n, d))
        labels = rng.choice(list("abc"), size=n)
        m = DeprivationMatrix(rows, scheme.ids, [(i, 1) for i in range(n)],
                              group_labels=labels)
        dec = subgroup_decompose(m, scheme, k=0.5)
        assert abs(sum(dec.shares.values()) - 1.0) <= 1e-12
        assert abs(dec.reconstructed_m0() - dec.total.m0) <= 1e-12


def test_subgroup_requires_labels():
    scheme = equal_weight_scheme(2)
    m = matrix_of([[1, 0]])
    with pytest.raises(DataError):
        subgroup_decompose(m, scheme, k=0.5)


def test_curve_grid_validation():
    scheme = equal_weight_scheme(2)
    m = matrix_of([[1, 0]])
    with pytest.raises(ValueError):
        incidence_curve(m, scheme, [])
    with pytest.raises(ValueError):
        incidence_curve(m, scheme, [0.5, 0.5])
    with pytest.raises(ValueError):
        incidence_curve(m, scheme, [0.0, 0.5])


def test_published_triple_consistency():
    # the reported incidence/intensity pair reproduces the adjusted
    # headcount at rounding precision, and reported dimension shares
    # close to one
    assert abs(0.494 * 0.437 - 0.216) <= 1e-3
    assert abs((0.385 + 0.401 + 0.214) - 1.0) <= 1e-3
