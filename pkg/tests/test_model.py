import logging
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from votewelfare import (
    FamilySpec,
    ObservedDataset,
    ObservedRecord,
    Population,
    UtilityProfile,
    check_concordance,
    generate,
    make_population,
    observe,
    summarize,
    true_welfare,
    weighted_median,
)
from votewelfare._random import derive_seed, open_uniform
from votewelfare.errors import (
    EmptyPopulation,
    InconsistentSummary,
    InvalidFamilyParameter,
    TieInStrictMode,
    UtilityOutOfRange,
)
from votewelfare.model import SummaryStatistics

from .conftest import observed_datasets, populations


def frac_mean(values, weights):
    """Exact weighted mean with rational arithmetic."""
    vs = [Fraction(v) for v in values]
    ws = [Fraction(w) for w in weights]
    return sum(v * w for v, w in zip(vs, ws)) / sum(ws)


# make_population

def test_equal_weights_normalize_to_half():
    pop = make_population([UtilityProfile(0.3, 0.8, 1), UtilityProfile(0.8, 0.3, 1)])
    assert pop.weight.tolist() == [0.5, 0.5]


def test_strict_mode_rejects_tie_with_index():
    with pytest.raises(TieInStrictMode) as info:
        make_population([UtilityProfile(0.1, 0.2), UtilityProfile(0.5, 0.5)])
    assert info.value.index == 1


def test_tiebreak_mode_flags_and_observes_a_vote(caplog):
    with caplog.at_level(logging.WARNING):
        pop = make_population([UtilityProfile(0.5, 0.5, 1)], tie_policy="status-quo-tiebreak")
    assert pop.has_ties
    assert "A votes" in caplog.text
    obs = observe(pop)
    assert obs.votes_b.tolist() == [False]


@pytest.mark.parametrize(
    "u_a,u_b,tie_policy,votes_b",
    [
        (0.3, 0.8, "strict", True),
        (0.8, 0.3, "strict", False),
        (0.3, 0.8, "status-quo-tiebreak", True),
        (0.8, 0.3, "status-quo-tiebreak", False),
        (0.5, 0.5, "status-quo-tiebreak", False),
    ],
)
def test_observe_decision_table(u_a, u_b, tie_policy, votes_b):
    pop = make_population([UtilityProfile(u_a, u_b)], tie_policy=tie_policy)
    assert observe(pop).votes_b.tolist() == [votes_b]


def test_empty_population():
    with pytest.raises(EmptyPopulation):
        make_population([])


@pytest.mark.parametrize("u_a,u_b", [(-0.1, 0.5), (0.5, 1.2), (float("nan"), 0.5)])
def test_out_of_range_utilities(u_a, u_b):
    with pytest.raises(UtilityOutOfRange):
        UtilityProfile(u_a, u_b)
    with pytest.raises(UtilityOutOfRange):
        Population([u_a], [u_b])


def test_nonpositive_weight_rejected():
    with pytest.raises(ValueError):
        UtilityProfile(0.1, 0.2, 0.0)


def test_population_is_immutable():
    pop = Population([0.1], [0.2])
    with pytest.raises(AttributeError):
        pop.tie_policy = "strict"
    with pytest.raises(ValueError):
        pop.u_a[0] = 0.5


# summarize

def test_summarize_two_records():
    obs = ObservedDataset.from_records([ObservedRecord(0.4, True, 0.5), ObservedRecord(0.8, False, 0.5)])
    s = summarize(obs)
    # oracle: exact rational means
    assert s.mean_u_a == float(frac_mean([0.4, 0.8], [0.5, 0.5])) == pytest.approx(0.6)
    assert s.vote_share_b == 0.5
    assert s.cond_mean_a_given_b == 0.4
    assert s.cond_mean_a_given_a == 0.8


def test_summarize_all_b_uses_sentinel():
    obs = ObservedDataset([0.2, 0.6], [True, True])
    s = summarize(obs)
    assert s.vote_share_b == 1.0
    assert s.cond_mean_a_given_b == s.mean_u_a == pytest.approx(0.4)
    assert s.cond_mean_a_given_a == 0.0


def test_summarize_single_a_record():
    s = summarize(ObservedDataset.from_records([ObservedRecord(0.7, False, 1)]))
    assert (s.mean_u_a, s.vote_share_b, s.cond_mean_a_given_a, s.cond_mean_a_given_b) == (0.7, 0.0, 0.7, 0.0)


def test_external_summary_must_satisfy_total_expectation():
    with pytest.raises(InconsistentSummary):
        SummaryStatistics(0.9, 0.5, 0.4, 0.8)
    SummaryStatistics(0.6 + 5e-7, 0.5, 0.4, 0.8)


@settings(max_examples=200, deadline=None)
@given(populations())
def test_summary_matches_rational_oracle(pop):
    obs = observe(pop)
    s = summarize(obs)
    w, a, v = obs.weight.tolist(), obs.u_a.tolist(), obs.votes_b.tolist()
    assert s.mean_u_a == pytest.approx(float(frac_mean(a, w)), abs=1e-15)
    share = sum(Fraction(wi) for wi, vi in zip(w, v) if vi) / sum(Fraction(wi) for wi in w)
    assert s.vote_share_b == pytest.approx(float(share), abs=1e-15)
    # exact count of u_b > u_a, straight from the latent utilities
    direct = sum(wi for wi, x, y in zip(pop.weight.tolist(), pop.u_a.tolist(), pop.u_b.tolist()) if y > x)
    assert s.vote_share_b == pytest.approx(direct, abs=1e-15)
    if any(v):
        sub = [(ai, wi) for ai, wi, vi in zip(a, w, v) if vi]
        assert s.cond_mean_a_given_b == pytest.approx(float(frac_mean(*zip(*sub))), abs=1e-15)
    if not all(v):
        sub = [(ai, wi) for ai, wi, vi in zip(a, w, v) if not vi]
        assert s.cond_mean_a_given_a == pytest.approx(float(frac_mean(*zip(*sub))), abs=1e-15)


@settings(max_examples=300, deadline=None)
@given(observed_datasets())
def test_law_of_total_expectation(obs):
    s = summarize(obs)
    p = s.vote_share_b
    assert abs(s.mean_u_a - (s.cond_mean_a_given_b * p + s.cond_mean_a_given_a * (1 - p))) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(populations(max_size=10), st.floats(min_value=1e-3, max_value=1e3))
def test_rescaling_raw_weights_is_harmless(pop, scale):
    raw = np.asarray(pop.weight) * 7.0
    one = summarize(observe(Population(pop.u_a, pop.u_b, raw)))
    two = summarize(observe(Population(pop.u_a, pop.u_b, raw * scale)))
    for k, v in one.to_dict().items():
        assert two.to_dict()[k] == pytest.approx(v, abs=1e-14)
    assert true_welfare(Population(pop.u_a, pop.u_b, raw * scale)) == pytest.approx(true_welfare(pop), abs=1e-14)


def test_weights_sum_to_one():
    pop = Population(np.linspace(0.01, 0.5, 7), np.linspace(0.6, 0.9, 7), [1, 2, 3, 4, 5, 6, 7])
    assert abs(sum(Fraction(w) for w in pop.weight.tolist()) - 1) <= Fraction(1, 10**12)


# true_welfare

def test_true_welfare_two_point():
    pop = Population([0.5, 0.9], [0.6, 0.0], [0.6, 0.4])
    mean_a, mean_b = true_welfare(pop)
    assert mean_a == pytest.approx(0.66, abs=1e-15)
    assert mean_b == pytest.approx(0.36, abs=1e-15)


def test_true_welfare_point_mass():
    assert true_welfare(Population([0.25], [0.75])) == (0.25, 0.75)


# concordance and the weighted median

def brute_lower_median(values, weights):
    total = sum(Fraction(w) for w in weights)
    for v in sorted(set(values)):
        mass = sum(Fraction(w) for x, w in zip(values, weights) if x <= v)
        if mass >= total / 2:
            return v


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(st.floats(-1, 1), st.integers(1, 20)), min_size=1, max_size=15))
def test_weighted_median_matches_scan(rows):
    values, ws = zip(*rows)
    assert weighted_median(values, ws) == brute_lower_median(values, ws)


def test_concordance_counterexample():
    rep = check_concordance(Population([0.5, 0.9], [0.6, 0.0], [0.6, 0.4]))
    assert rep.median_diff == pytest.approx(0.1)
    assert rep.welfare_diff == pytest.approx(-0.30)
    assert not rep.concordant and not rep.tie


def test_concordance_uniform_shift():
    a = np.linspace(0.0, 0.8, 9)
    rep = check_concordance(Population(a, a + 0.1))
    assert rep.concordant and not rep.tie


def test_concordance_even_split_flags_tie():
    rep = check_concordance(Population([0.2, 0.3], [0.3, 0.2]))
    assert rep.median_diff == pytest.approx(-0.1)
    assert rep.welfare_diff == 0.0
    assert rep.tie and not rep.concordant


@settings(max_examples=200, deadline=None)
@given(populations(max_size=15))
def test_concordance_agrees_with_majority_form(pop):
    # Majority for B (share > 1/2) iff the lower median difference is positive.
    rep = check_concordance(pop)
    share = summarize(observe(pop)).vote_share_b
    if abs(share - 0.5) > 1e-9:
        assert (share > 0.5) == (rep.median_diff > 0)


# generate

def test_generate_is_deterministic():
    spec = FamilySpec("independent-uniform", {}, 500)
    assert generate(spec, 3).identical_to(generate(spec, 3))
    assert not generate(spec, 3).identical_to(generate(spec, 4))


def test_generate_is_prefix_stable():
    small = generate(FamilySpec("binary-proposal", {"success": 0.3}, 10), 11)
    large = generate(FamilySpec("binary-proposal", {"success": 0.3}, 1000), 11)
    assert small.u_a.tolist() == large.u_a[:10].tolist()
    assert small.u_b.tolist() == large.u_b[:10].tolist()


def test_binary_proposal_example():
    pop = generate(FamilySpec("binary-proposal", {"success": 0.4}, 100_000), 7)
    s = summarize(observe(pop))
    assert s.vote_share_b == true_welfare(pop)[1]
    assert s.vote_share_b == pytest.approx(np.count_nonzero(pop.u_b == 1.0) / 100_000, abs=1e-12)
    assert np.all((pop.u_a > 0) & (pop.u_a < 1))
    assert set(pop.u_b.tolist()) <= {0.0, 1.0}


def test_constant_status_quo_family():
    pop = generate(FamilySpec("constant-status-quo", {"level": 0.5}, 321), 0)
    assert np.all(pop.u_a == 0.5)


def test_independent_uniform_share_near_half():
    pop = generate(FamilySpec("independent-uniform", {}, 10_000), 1)
    direct = np.count_nonzero(pop.u_b > pop.u_a) / 10_000
    assert summarize(observe(pop)).vote_share_b == pytest.approx(direct, abs=1e-12)
    assert abs(direct - 0.5) <= 0.02


def test_degenerate_family_has_no_ties():
    pop = generate(FamilySpec("degenerate-binary-status-quo", {"prob_one": 0.3}, 2000), 5)
    assert set(pop.u_a.tolist()) <= {0.0, 1.0}
    assert np.all((pop.u_b > 0) & (pop.u_b < 1))


def test_two_block_family():
    pop = generate(FamilySpec("two-block", {}, 10), 0)
    assert pop.u_a.tolist() == [0.5] * 6 + [0.9] * 4
    assert pop.u_b.tolist() == [0.6] * 6 + [0.0] * 4


@pytest.mark.parametrize(
    "kind,params,size",
    [
        ("binary-proposal", {"success": 1.5}, 10),
        ("constant-status-quo", {"level": -0.1}, 10),
        ("independent-uniform", {}, 0),
        ("two-block", {"a1": 0.6}, 10),
        ("no-such-family", {}, 10),
        ("binary-proposal", {"level": 0.2}, 10),
    ],
)
def test_invalid_family(kind, params, size):
    with pytest.raises(InvalidFamilyParameter):
        FamilySpec(kind, params, size)


def test_family_parse_round_trip():
    spec = FamilySpec.parse("two-block:0.6,0.5,0.6,0.9,0.0:10")
    assert spec.params == {"share": 0.6, "a1": 0.5, "b1": 0.6, "a2": 0.9, "b2": 0.0}
    assert FamilySpec.parse(spec.describe()) == spec
    assert FamilySpec.parse("independent-uniform::25").population_size == 25
    with pytest.raises(InvalidFamilyParameter):
        FamilySpec.parse("binary-proposal:0.1,0.2:5")


def test_open_uniform_endpoints():
    raws = np.array([0, 2**64 - 1], dtype=np.uint64)
    lo, hi = open_uniform(raws).tolist()
    assert 0.0 < lo and hi < 1.0


def test_derived_seeds_are_distinct_and_stable():
    a, b = derive_seed(5, 0), derive_seed(5, 1)
    assert a.generate_state(2).tolist() != b.generate_state(2).tolist()
    assert derive_seed(5, 1).generate_state(2).tolist() == b.generate_state(2).tolist()
