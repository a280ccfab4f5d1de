import random

import pytest

from iwaquad.invariants import (
    GoldVerdict,
    InvalidLayers,
    NotSplit,
    OutOfRange,
    chevalley_fixed_points,
    delta_p,
    delta_p_via_log,
    delta_tilde,
    filtration_prediction,
    fundamental_p_unit,
    generated_by_prime,
    gold_criterion,
    gold_plus,
    gold_sands,
    invariant_report,
    is_log_trivial,
    lambda_stability,
    log_class_order,
    noncyclic_prediction,
    norm_valuation_of_power_minus_one,
    smooth_capitulation_check,
    symbol_order,
)
from iwaquad.quad_arith import is_squarefree, kronecker, make_field, split_type
from golden_data import table_rows
from oracles import naive_delta

@pytest.mark.parametrize("row", table_rows(limit=10 ** 5), ids=lambda r: f"m{r[0]}")
def test_small_table_rows(row):
    m, hk, h, hp, d, dt, clog = row
    rec = fundamental_p_unit(m, 3)
    assert (rec.h_k, rec.h) == (hk, h)
    assert sorted(rec.p_part) == hp
    assert delta_p(rec) == d
    assert delta_tilde(rec) == dt
    assert log_class_order(rec) == clog
    assert delta_p_via_log(rec) == d


def test_record_identity():
    rec = fundamental_p_unit(107, 3)
    assert rec.x.norm() == 27
    assert rec.X == rec.x
    rec = fundamental_p_unit(1238, 3)
    assert rec.h_k == 42 and rec.h == 14
    assert rec.X.norm() == 3 ** 42
    assert rec.X == rec.x ** 3


def test_delta_against_exact_rational_oracle():
    rng = random.Random(7)
    done = 0
    while done < 60:
        m = rng.randrange(1, 3000)
        p = rng.choice([3, 5, 7, 11, 13])
        if not is_squarefree(m) or kronecker(make_field(m).D, p) != 1:
            continue
        rec = fundamental_p_unit(m, p)
        assert delta_p(rec) == naive_delta(rec.x, p), (m, p)
        done += 1


def test_norm_valuation_helper():
    F = make_field(107)
    x = F(1, -1, 2)
    assert norm_valuation_of_power_minus_one(x, 3, 2) == 3
    with pytest.raises(ValueError):
        norm_valuation_of_power_minus_one(F(1, 1, 3), 3, 2)


def test_not_split_and_bad_p():
    with pytest.raises(NotSplit):
        fundamental_p_unit(5, 11)
    with pytest.raises(NotSplit):
        fundamental_p_unit(3, 3)
    with pytest.raises(ValueError):
        fundamental_p_unit(5, 2)
    # 7 splits in Q(sqrt(-5)): 49 = N(2 + 3 sqrt(-5))
    assert kronecker(-20, 7) == 1
    rec = fundamental_p_unit(5, 7)
    assert rec.x.norm() == 7 ** rec.h


def test_conjugate_prime_gives_same_invariants():
    for m, p in [(107, 3), (1238, 3), (47, 17), (239, 3), (51, 5)]:
        F = make_field(m)
        P, Pb = split_type(F, p).primes
        a = fundamental_p_unit(F, p, prime=P)
        b = fundamental_p_unit(F, p, prime=Pb)
        assert a.h == b.h
        assert delta_tilde(a) == delta_tilde(b)


def test_gold_verdicts():
    rec = fundamental_p_unit(107, 3)
    assert gold_criterion(rec) == GoldVerdict.NOT_APPLICABLE
    assert generated_by_prime(rec)
    assert gold_plus(rec) == GoldVerdict.FAILS
    assert not is_log_trivial(rec)
    # m=14: h_k = 4, delta = 0 at p=3
    rec = fundamental_p_unit(14, 3)
    assert rec.vp_hk == 0
    d = delta_p(rec)
    assert gold_criterion(rec) == (GoldVerdict.HOLDS if d == 0 else GoldVerdict.FAILS)
    rec = fundamental_p_unit(239, 3)
    assert gold_sands(rec) == GoldVerdict.FAILS
    rec = fundamental_p_unit(2, 3)
    assert delta_p(rec) == 0 and gold_sands(rec) == GoldVerdict.HOLDS
    assert is_log_trivial(rec)
    rec = fundamental_p_unit(1238, 3)
    assert not generated_by_prime(rec)
    assert gold_plus(rec) == GoldVerdict.NOT_APPLICABLE


def test_closed_forms():
    assert symbol_order(5, 1, 2, 3) == 9
    assert symbol_order(2, 1, 3, 3) == 1
    with pytest.raises(ValueError):
        symbol_order(-1, 0, 0, 3)
    assert chevalley_fixed_points(3, 1, 0, 3) == 3 * 27 * 9 // 27
    assert chevalley_fixed_points(2, 2, 0, 1, p=5) == 1
    assert chevalley_fixed_points(2, 1, 1, 25, p=5) == 25
    with pytest.raises(InvalidLayers):
        chevalley_fixed_points(1, 2, 0, 3)
    assert lambda_stability(3, 27, 2)
    assert not lambda_stability(3, 27, 1)
    assert lambda_stability(1, 5, 1, p=5)
    assert smooth_capitulation_check(1, 1, 3, 3)
    assert smooth_capitulation_check(2, 3, 3, 3)
    assert not smooth_capitulation_check(3, 3, 3, 3)
    with pytest.raises(OutOfRange):
        smooth_capitulation_check(1, 27, 3, 3)
    assert noncyclic_prediction(True, 3, 4)
    assert not noncyclic_prediction(True, 3, 3)
    assert not noncyclic_prediction(False, 3, 9)


def test_filtration_prediction_m107():
    rec = fundamental_p_unit(107, 3)
    fp = filtration_prediction(rec, 4, 0, 0)
    assert fp.n0 == 3 and fp.valid
    assert fp.ratio_H2_H1 == 9
    assert fp.order_H1 == 3 ** 5
    assert fp.total_order_if_trivial is None
    assert not filtration_prediction(rec, 2, 0, 0).valid
    with pytest.raises(InvalidLayers):
        filtration_prediction(rec, 2, 0, 2)
    with pytest.raises(InvalidLayers):
        filtration_prediction(rec, 1, 2, 0)


def test_report():
    rep = invariant_report(107, 3)
    assert (rep.h_k, rep.h, rep.delta, rep.delta_tilde, rep.log_class_order) == (3, 3, 2, 2, 9)
    assert rep.gold_plus == GoldVerdict.FAILS
    rep = invariant_report(413, 3)
    assert "trivial p-class group" in rep.notes
