"""Empirical power measures against hand-computed fixtures."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liquidpower.empirical import (
    BallotSet,
    ResolvedVoting,
    Vote,
    agreement_rate,
    approval_rate,
    exercised_power,
    outcome,
    potential_power,
    power_correlation,
    power_curves,
    resolve_dataset,
    reversal_analysis,
    user_approval_rates,
)
from liquidpower.errors import InvalidInputError
from liquidpower.synth import SynthConfig, generate_synthetic

HALF = Fraction(1, 2)


def ballots(quorum, *votes, initiative="i1", issue="s1"):
    return BallotSet(initiative, issue, quorum, tuple(Vote(*v) for v in votes))


def simple(yes_weight, no_weight, quorum):
    """Two-voter ballot set with the given aggregate weights."""
    return ballots(quorum, ("Y", 1, yes_weight), ("N", 0, no_weight))


class TestOutcome:
    def test_clear_majority_accepted(self):
        assert outcome(simple(6, 4, HALF))

    def test_exact_tie_rejected(self):
        assert not outcome(simple(5, 5, HALF))

    def test_two_thirds_quorum(self):
        assert outcome(simple(7, 3, Fraction(2, 3)))  # 0.7 > 2/3

    def test_exact_quorum_rejected(self):
        assert not outcome(simple(2, 1, Fraction(2, 3)))  # 2/3 > 2/3 is false

    def test_empty_rejected_with_error(self):
        empty = BallotSet("i1", "s1", HALF, ())
        with pytest.raises(InvalidInputError):
            outcome(empty)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(1, 9)),
                    min_size=1, max_size=8),
           st.permutations(range(8)))
    def test_invariant_under_vote_order(self, votes, perm):
        vs = [Vote(f"u{k}", d, w) for k, (d, w) in enumerate(votes)]
        b1 = BallotSet("i1", "s1", HALF, tuple(vs))
        shuffled = [vs[i] for i in perm if i < len(vs)]
        shuffled += [v for v in vs if v not in shuffled]
        b2 = BallotSet("i1", "s1", HALF, tuple(shuffled))
        assert outcome(b1) == outcome(b2)


class TestPotentialPower:
    def test_sole_yes_voter(self):
        b = ballots(HALF, ("A", 1, 1))
        assert potential_power(b, "A") == 1

    def test_weight_three_yes_voter_decides(self):
        # Wp=6, Wn=4: missing without the voter = 5 - 6 + 3 = 2; 3 > 2 > 0
        b = ballots(HALF, ("A", 1, 3), ("B", 1, 3), ("C", 0, 4))
        assert potential_power(b, "A") == 1

    def test_quorum_already_met_without_voter(self):
        # Wp=9, Wn=1: missing = 5 - 9 + 1 = -3
        b = ballots(HALF, ("A", 1, 1), ("B", 1, 8), ("C", 0, 1))
        assert potential_power(b, "A") == 0

    def test_absent_voter_rejected(self):
        with pytest.raises(InvalidInputError):
            potential_power(simple(1, 1, HALF), "Z")


class TestExercisedPower:
    def test_yes_voter_reverses(self):
        # Wp=5, Wn=4, w=2 yes: 3/7 fails vs 5/9 passes
        b = ballots(HALF, ("A", 1, 2), ("B", 1, 3), ("C", 0, 4))
        assert exercised_power(b, "A") == 1

    def test_unanimous_vote_never_reversed(self):
        b = ballots(HALF, ("A", 1, 1), ("B", 1, 9))
        assert exercised_power(b, "A") == 0

    def test_no_voter_without_influence(self):
        # Wp=5, Wn=4, w=2 no: 5/7 passes vs 5/9 passes
        b = ballots(HALF, ("A", 0, 2), ("B", 1, 5), ("C", 0, 2))
        assert exercised_power(b, "A") == 0

    def test_sole_voter_empty_rest_is_rejected(self):
        b = ballots(HALF, ("A", 1, 3))
        # without A the vote is empty = rejected; with A accepted
        assert exercised_power(b, "A") == 1

    @settings(max_examples=300, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(1, 12)),
                    min_size=1, max_size=10),
           st.fractions(min_value=Fraction(1, 10), max_value=Fraction(9, 10)))
    def test_no_potential_implies_no_exercise_for_yes_voters(self, votes, q):
        b = BallotSet("i1", "s1", q,
                      tuple(Vote(f"u{k}", d, w) for k, (d, w) in enumerate(votes)))
        for v in b.votes:
            if v.decision == 1 and potential_power(b, v.voter) == 0:
                assert exercised_power(b, v.voter) == 0


class TestApprovalRates:
    def test_all_yes(self):
        assert approval_rate([1, 1, 1]) == 1.0

    def test_three_of_four(self):
        assert approval_rate([1, 1, 1, 0]) == 0.75

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            approval_rate([])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 1), min_size=1),
           st.lists(st.integers(0, 1), min_size=1))
    def test_concatenation_is_weighted_mean(self, a, b):
        combined = approval_rate(a + b)
        expected = (approval_rate(a) * len(a) + approval_rate(b) * len(b)) / (len(a) + len(b))
        assert combined == pytest.approx(expected)

    def test_min_vote_threshold_excludes_user(self):
        cfg = SynthConfig(users=30, initiatives=40, seed=5)
        resolved = resolve_dataset(generate_synthetic(cfg))
        rates, excluded = user_approval_rates(resolved, min_votes=10)
        assert excluded  # someone is always below 10 votes at this size
        for u in excluded:
            assert len(resolved.direct_histories[u]) < 10
        for u in rates:
            assert len(resolved.direct_histories[u]) >= 10


def resolved_fixture(*ballot_sets):
    return ResolvedVoting(tuple(ballot_sets), {}, {}, {}, {})


class TestAgreement:
    def test_agrees_with_clear_majority(self):
        votes = [("v", 1, 1)] + [(f"y{k}", 1, 1) for k in range(6)] \
            + [(f"n{k}", 0, 1) for k in range(3)]
        r = resolved_fixture(ballots(HALF, *votes))
        assert agreement_rate(r, "v") == 1.0

    def test_disagrees_with_majority(self):
        votes = [("v", 1, 1), ("y", 1, 1)] + [(f"n{k}", 0, 1) for k in range(8)]
        r = resolved_fixture(ballots(HALF, *votes))
        assert agreement_rate(r, "v") == 0.0

    def test_tie_counts_as_non_agreement(self):
        votes = [("v", 1, 1)] + [(f"y{k}", 1, 1) for k in range(4)] \
            + [(f"n{k}", 0, 1) for k in range(5)]
        r = resolved_fixture(ballots(HALF, *votes))
        assert agreement_rate(r, "v") == 0.0

    def test_lone_voter_undefined(self):
        r = resolved_fixture(ballots(HALF, ("v", 1, 1)))
        assert agreement_rate(r, "v") is None


class TestReversal:
    def test_no_delegations_nothing_changes(self):
        cfg = SynthConfig(users=50, initiatives=60, seed=2, delegations_per_user=0.0)
        resolved = resolve_dataset(generate_synthetic(cfg))
        assert reversal_analysis(resolved) == 1.0

    def test_constructed_flip(self):
        # weighted: 5 yes / 2 no accepted; flat: 1 yes / 2 no rejected
        b = ballots(HALF, ("A", 1, 5), ("B", 0, 1), ("C", 0, 1))
        assert reversal_analysis(resolved_fixture(b)) == 0.0


class TestPowerCurves:
    def test_uniform_weights_single_bucket(self):
        cfg = SynthConfig(users=40, initiatives=50, seed=7, delegations_per_user=0.0)
        resolved = resolve_dataset(generate_synthetic(cfg))
        curves = power_curves(resolved)
        assert set(curves.potential.values) == {1}
        assert set(curves.exercised.values) == {1}

    def test_hand_computed_bucket_means(self):
        b1 = ballots(HALF, ("A", 1, 3), ("B", 0, 2), ("C", 1, 1), initiative="i1")
        b2 = ballots(Fraction(2, 3), ("A", 1, 2), ("B", 1, 2), ("C", 0, 1),
                     initiative="i2")
        b3 = ballots(HALF, ("A", 1, 1), ("D", 0, 4), initiative="i3")
        curves = power_curves(resolved_fixture(b1, b2, b3))
        assert curves.potential.values == {1: 0.0, 2: pytest.approx(2 / 3),
                                           3: 1.0, 4: 1.0}
        assert curves.potential.counts == {1: 3, 2: 3, 3: 1, 4: 1}
        assert curves.exercised.values == {1: 0.0, 2: pytest.approx(2 / 3),
                                           3: 1.0, 4: 1.0}

    def test_exercised_below_potential_on_synthetic_defaults(self):
        cfg = SynthConfig(users=150, initiatives=200, seed=3)
        resolved = resolve_dataset(generate_synthetic(cfg))
        pot, exe = [], []
        for bs in resolved.ballots:
            for v in bs.votes:
                pot.append(potential_power(bs, v.voter))
                exe.append(exercised_power(bs, v.voter))
        assert np.mean(exe) < np.mean(pot)

    def test_over_cap_weights_excluded_by_default(self):
        b = ballots(HALF, ("A", 1, 150), ("B", 0, 3))
        curves = power_curves(resolved_fixture(b))
        assert 150 not in curves.potential.values
        kept = power_curves(resolved_fixture(b), include_over_cap=True)
        assert 150 in kept.potential.values

    def test_author_delegations_flag_rebuckets_author(self):
        b = ballots(HALF, ("A", 1, 9), ("B", 0, 3), initiative="i1")
        r = ResolvedVoting((b,), {"i1": "A"}, {}, {}, {})
        plain = power_curves(r)
        assert 9 in {x.weight for x in plain.approval_by_weight}
        filtered = power_curves(r, ignore_author_delegations=True)
        weights = {x.weight for x in filtered.approval_by_weight}
        assert 9 not in weights and 1 in weights


class TestPowerCorrelation:
    def _resolved_with_means(self, pairs):
        """One initiative per pair; voter k has potential/exercised as given."""
        sets = []
        for k, (p, e) in enumerate(pairs):
            sets.append(ballots(HALF, (f"v{k}", 1, 1), initiative=f"i{k}"))
        return resolved_fixture(*sets)

    def test_identical_series(self):
        cfg = SynthConfig(users=100, initiatives=150, seed=11)
        resolved = resolve_dataset(generate_synthetic(cfg))
        out = power_correlation(resolved, permutations=200, seed=0)
        assert out is not None
        rho, p = out
        assert -1 <= rho <= 1 and 0 < p <= 1

    def test_perfect_antimonotone(self):
        x = np.arange(10, dtype=float)
        y = x[::-1]
        from liquidpower.empirical import _spearman
        assert _spearman(x, y) == pytest.approx(-1.0)

    def test_perfect_monotone(self):
        x = np.arange(10, dtype=float)
        from liquidpower.empirical import _spearman
        assert _spearman(x, x * 2 + 1) == pytest.approx(1.0)

    def test_independent_series_small_rho(self):
        rng = np.random.default_rng(0)
        from liquidpower.empirical import _spearman
        rho = _spearman(rng.random(3000), rng.random(3000))
        assert abs(rho) < 0.1

    def test_too_few_voters_undefined(self):
        r = self._resolved_with_means([(1, 1), (0, 0)])
        assert power_correlation(r, permutations=10) is None
