import json

import pytest

from ksprofile import ModelParams, OutcomeKind, ProfileControls, classify_lambda
from ksprofile.errors import InvalidBracket, MaxIterExceeded, NoCriticalValue
from ksprofile.shooting import (expand_bracket, find_critical_lambda, low_side_kind,
                                trace_is_monotone)


def test_classify_lambda_examples(params_a2, params_a15):
    flat = ModelParams.create(2, 1.0, 1.0, 1.0, 0.5)
    assert classify_lambda(flat, 0.0).kind is OutcomeKind.GLOBAL
    assert classify_lambda(params_a2, 1e3).kind is OutcomeKind.BLOW_UP
    assert classify_lambda(params_a15, 1e-4).kind is OutcomeKind.TOUCH_ZERO


def test_regular_band_blows_up_for_large_lambda():
    p = ModelParams.create(3, 1.0, 1.0, 1.0, 2.0)  # kappa = 1/2
    assert classify_lambda(p, 1e3).kind is OutcomeKind.BLOW_UP


def test_low_side_kind(params_a2, params_a15):
    assert low_side_kind(params_a2) is OutcomeKind.GLOBAL
    assert low_side_kind(params_a15) is OutcomeKind.TOUCH_ZERO


def test_no_critical_value_at_q_one():
    p = ModelParams.create(1, 1.0, 1.0, 1.0, 0.0)
    with pytest.raises(NoCriticalValue):
        find_critical_lambda(p)


def test_bracket_without_threshold(params_a2):
    with pytest.raises(InvalidBracket):
        find_critical_lambda(params_a2, (0.01, 0.02))


def test_bracket_reversed(params_a2):
    with pytest.raises(InvalidBracket):
        find_critical_lambda(params_a2, (5.0, 1.0))


def test_expansion_finds_bracket(params_a2):
    (lo, s_lo), (hi, s_hi) = expand_bracket(params_a2, 0.01, 0.02)
    assert s_lo.outcome.kind is OutcomeKind.GLOBAL
    assert s_hi.outcome.kind is OutcomeKind.BLOW_UP
    assert lo < 1.0144 < hi


def test_max_iter(params_a2):
    with pytest.raises(MaxIterExceeded):
        find_critical_lambda(params_a2, (0.01, 100.0), max_iter=3)


def test_critical_reference_case(crit_a2):
    assert crit_a2.outcome_lo.kind is OutcomeKind.GLOBAL
    assert crit_a2.outcome_hi.kind is OutcomeKind.BLOW_UP
    lo, hi = crit_a2.bracket
    assert hi - lo <= 1e-10 * crit_a2.lambda_star
    assert trace_is_monotone(crit_a2.trace, OutcomeKind.GLOBAL)


def test_critical_matches_oracle(crit_a2, crit_a15, goldens):
    for result, key in ((crit_a2, "critical_N1_alpha2"), (crit_a15, "critical_N1_alpha1.5")):
        gold = goldens[key]
        assert gold["lo"] <= result.lambda_star <= gold["hi"]
        assert result.lambda_star == pytest.approx(gold["lambda_star"], rel=1e-4)


def test_very_singular_endpoints(crit_a15):
    assert crit_a15.outcome_lo.kind is OutcomeKind.TOUCH_ZERO
    assert crit_a15.outcome_hi.kind is not OutcomeKind.TOUCH_ZERO
    assert trace_is_monotone(crit_a15.trace, OutcomeKind.TOUCH_ZERO)


def test_stable_under_tightened_controls(params_a2, crit_a2):
    tight = find_critical_lambda(params_a2, (1.0, 1.03),
                                 controls=ProfileControls().tightened(10.0))
    assert abs(tight.lambda_star - crit_a2.lambda_star) < 10 * 1e-10 * crit_a2.lambda_star


def test_report_round_trip(crit_a2):
    data = json.loads(crit_a2.to_json())
    assert data["lambda_star"] == crit_a2.lambda_star
    assert data["endpoint_outcomes"]["lo"]["kind"] == "global"
    assert data["endpoint_outcomes"]["hi"]["kind"] == "blow_up"
    assert data["controls"]["tol_rel"] == 1e-10


def test_trace_monotone_helper():
    from ksprofile import Outcome
    g, b = Outcome(OutcomeKind.GLOBAL, 40.0), Outcome(OutcomeKind.BLOW_UP, 3.0)
    assert trace_is_monotone([(1.0, g), (2.0, b), (1.5, g)], OutcomeKind.GLOBAL)
    assert not trace_is_monotone([(1.0, g), (2.0, b), (2.5, g)], OutcomeKind.GLOBAL)
