"""Empirical power measurement on voting histories.

Two per-vote binary measures drive everything here.  Potential power asks
whether a voter's weight alone covers the distance to the quorum in a
ballot (evaluated literally, keeping the full yes+no total in the quorum
term when the voter's own yes is hypothetically removed).  Exercised
power asks whether removing the voter's weighted vote flips the actual
outcome.  Both are computed in exact integer arithmetic; outcome
comparisons are strict as in the underlying accept/reject rule.

On top of these the module aggregates approval, agreement and learning
curves, the delegation-removal reversal rate, and weight-bucketed power
curves ready for index evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction
from typing import Iterable

import numpy as np
from scipy.stats import rankdata

from .dataset import Dataset
from .delegation import delegation_graph_at, resolve_weights
from .errors import InvalidInputError

#: Buckets with fewer observations are flagged as low support in curve output.
LOW_SUPPORT = 30
#: Votes above this weight are excluded from curves (too few super-voters
#: for significant statistics); controlled per call.
MAX_CURVE_WEIGHT = 100
#: Minimum vote count for a user to enter per-user approval aggregates.
MIN_USER_VOTES = 10


@dataclass(frozen=True)
class Vote:
    """One direct vote with its resolved effective weight.

    weight is 1 (the voter's own unit) plus the number of voters whose
    delegation chains ended at this voter, so units beyond 1 are the
    delegated ones.
    """

    voter: str
    decision: int
    weight: int = 1

    def __post_init__(self):
        if self.decision not in (0, 1):
            raise InvalidInputError(f"decision must be 0 or 1 (got {self.decision!r})")
        if not isinstance(self.weight, int) or self.weight < 1:
            raise InvalidInputError(f"weight must be an integer >= 1 (got {self.weight!r})")


@dataclass(frozen=True)
class BallotSet:
    """All direct votes on one initiative, with cached yes/no weight sums."""

    initiative_id: str
    issue_id: str
    quorum: Fraction
    votes: tuple[Vote, ...]
    yes_weight: int = field(init=False, compare=False)
    no_weight: int = field(init=False, compare=False)
    _by_voter: dict[str, Vote] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_voter = {}
        wp = wn = 0
        for v in self.votes:
            if v.voter in by_voter:
                raise InvalidInputError(
                    f"duplicate vote by {v.voter!r} on {self.initiative_id!r}")
            by_voter[v.voter] = v
            if v.decision:
                wp += v.weight
            else:
                wn += v.weight
        object.__setattr__(self, "yes_weight", wp)
        object.__setattr__(self, "no_weight", wn)
        object.__setattr__(self, "_by_voter", by_voter)

    def vote_of(self, voter: str) -> Vote:
        try:
            return self._by_voter[voter]
        except KeyError:
            raise InvalidInputError(
                f"{voter!r} did not vote on {self.initiative_id!r}") from None


def outcome(ballots: BallotSet) -> bool:
    """True iff accepted: yes-share strictly above the quorum.

    Unlike coalition winning (>=), the accept rule is strict, so an exact
    tie at the quorum is rejected.
    """
    total = ballots.yes_weight + ballots.no_weight
    if total == 0:
        raise InvalidInputError("empty ballot set has no outcome")
    q = ballots.quorum
    return ballots.yes_weight * q.denominator > q.numerator * total


def potential_power(ballots: BallotSet, voter: str) -> int:
    """1 iff the voter's weight could single-handedly decide this vote.

    Literal evaluation of: weight > q*(Wp+Wn) - Wp + weight*decision > 0,
    i.e. the votes missing to reach the quorum without the voter are
    positive but within the voter's own weight.  Exact integer arithmetic
    (both inequalities strict).
    """
    v = ballots.vote_of(voter)
    q = ballots.quorum
    total = ballots.yes_weight + ballots.no_weight
    # missing * q.denominator, to stay in integers
    missing = (q.numerator * total - q.denominator * ballots.yes_weight
               + q.denominator * v.weight * v.decision)
    return int(q.denominator * v.weight > missing > 0)


def exercised_power(ballots: BallotSet, voter: str) -> int:
    """1 iff removing the voter's weighted vote flips the actual outcome.

    A ballot left empty by the removal is treated as rejected (a proposal
    nobody supports cannot pass).
    """
    v = ballots.vote_of(voter)
    q = ballots.quorum
    total = ballots.yes_weight + ballots.no_weight
    actual = ballots.yes_weight * q.denominator > q.numerator * total
    rest = total - v.weight
    if rest == 0:
        without = False
    else:
        yes_rest = ballots.yes_weight - v.weight * v.decision
        without = yes_rest * q.denominator > q.numerator * rest
    return int(without != actual)


def approval_rate(decisions: Iterable[int]) -> float:
    """Fraction of yes decisions."""
    ds = list(decisions)
    if not ds:
        raise InvalidInputError("approval rate of an empty history is undefined")
    return sum(1 for d in ds if d) / len(ds)


# ---------------------------------------------------------------------------
# dataset resolution

@dataclass(frozen=True)
class HistoryEntry:
    issue_id: str
    initiative_id: str
    decision: int
    weight: int
    ts: datetime
    direct: bool


@dataclass(frozen=True)
class ResolvedVoting:
    """A dataset with delegations resolved per initiative.

    ballots holds one BallotSet per voted initiative, in dataset order.
    direct_histories lists each user's own votes chronologically;
    effective_histories additionally contains votes cast on the user's
    behalf by the direct voter its delegation chain reached.
    """

    ballots: tuple[BallotSet, ...]
    authors: dict[str, str | None]
    direct_histories: dict[str, tuple[HistoryEntry, ...]]
    effective_histories: dict[str, tuple[HistoryEntry, ...]]
    unresolved: dict[str, frozenset[str]]


def resolve_dataset(dataset: Dataset) -> ResolvedVoting:
    """Resolve delegations at each initiative's ballot time.

    The snapshot instant is the latest ballot timestamp of the
    initiative; every dataset user is eligible.
    """
    issues = dataset.issues_by_id()
    by_init: dict[str, list] = {}
    for b in dataset.ballots:
        by_init.setdefault(b.initiative_id, []).append(b)

    ballot_sets = []
    authors = {}
    direct_hist: dict[str, list[HistoryEntry]] = {}
    effective_hist: dict[str, list[HistoryEntry]] = {}
    unresolved = {}
    eligible = frozenset(dataset.users)
    for init in dataset.initiatives:
        rows = by_init.get(init.initiative_id)
        if not rows:
            continue
        t = max(b.ts for b in rows)
        issue = issues[init.issue_id]
        snapshot = delegation_graph_at(dataset.delegations, t)
        direct = {b.voter_id for b in rows}
        ew = resolve_weights(snapshot, issue.issue_id, issue.area_id, direct, eligible)
        votes = tuple(Vote(b.voter_id, b.decision, ew.weights[b.voter_id])
                      for b in sorted(rows, key=lambda b: b.voter_id))
        bs = BallotSet(init.initiative_id, issue.issue_id, issue.quorum, votes)
        ballot_sets.append(bs)
        authors[init.initiative_id] = init.author_id
        unresolved[init.initiative_id] = ew.unresolved
        decision_of = {b.voter_id: b.decision for b in rows}
        for b in rows:
            entry = HistoryEntry(issue.issue_id, init.initiative_id, b.decision,
                                 ew.weights[b.voter_id], b.ts, True)
            direct_hist.setdefault(b.voter_id, []).append(entry)
            effective_hist.setdefault(b.voter_id, []).append(entry)
        for voter, terminal in ew.terminal.items():
            if voter in direct:
                continue
            entry = HistoryEntry(issue.issue_id, init.initiative_id,
                                 decision_of[terminal], 1, t, False)
            effective_hist.setdefault(voter, []).append(entry)

    def freeze(histories: dict[str, list[HistoryEntry]]) -> dict[str, tuple[HistoryEntry, ...]]:
        return {u: tuple(sorted(h, key=lambda e: (e.ts, e.initiative_id)))
                for u, h in sorted(histories.items())}

    return ResolvedVoting(tuple(ballot_sets), authors, freeze(direct_hist),
                          freeze(effective_hist), unresolved)


# ---------------------------------------------------------------------------
# rates

def user_approval_rates(resolved: ResolvedVoting,
                        min_votes: int = MIN_USER_VOTES) -> tuple[dict[str, float], list[str]]:
    """Per-user approval rate over direct votes.

    Users below the minimum vote count are excluded from the mapping and
    returned separately, so aggregates (distribution fits in particular)
    only see significant users.
    """
    rates = {}
    excluded = []
    for user, history in resolved.direct_histories.items():
        if len(history) < min_votes:
            excluded.append(user)
        else:
            rates[user] = approval_rate(e.decision for e in history)
    return rates, excluded


def initiative_approval_rates(resolved: ResolvedVoting,
                              min_votes: int = 1) -> dict[str, float]:
    """Per-initiative approval rate over direct votes (unweighted)."""
    out = {}
    for bs in resolved.ballots:
        if len(bs.votes) >= min_votes:
            out[bs.initiative_id] = approval_rate(v.decision for v in bs.votes)
    return out


def agreement_rate(resolved: ResolvedVoting, voter: str) -> float | None:
    """Share of the voter's votes that match the unweighted direct majority.

    The majority is over all direct votes on the initiative (delegations
    stripped); exact ties count as non-agreement.  None when the voter has
    no vote alongside at least one other direct voter.
    """
    agree = total = 0
    for bs in resolved.ballots:
        try:
            v = bs.vote_of(voter)
        except InvalidInputError:
            continue
        if len(bs.votes) < 2:
            continue
        yes = sum(1 for x in bs.votes if x.decision)
        no = len(bs.votes) - yes
        total += 1
        if (v.decision == 1 and yes > no) or (v.decision == 0 and no > yes):
            agree += 1
    if total == 0:
        return None
    return agree / total


def _agreement_of_vote(bs: BallotSet, v: Vote) -> bool | None:
    if len(bs.votes) < 2:
        return None
    yes = sum(1 for x in bs.votes if x.decision)
    no = len(bs.votes) - yes
    return (v.decision == 1 and yes > no) or (v.decision == 0 and no > yes)


def reversal_analysis(resolved: ResolvedVoting) -> float:
    """Fraction of initiatives whose outcome survives delegation removal.

    Every direct vote is re-weighted to 1 and the strict outcome rule is
    re-applied.
    """
    if not resolved.ballots:
        return 1.0
    unchanged = 0
    for bs in resolved.ballots:
        flat = BallotSet(bs.initiative_id, bs.issue_id, bs.quorum,
                         tuple(Vote(v.voter, v.decision, 1) for v in bs.votes))
        unchanged += outcome(bs) == outcome(flat)
    return unchanged / len(resolved.ballots)


# ---------------------------------------------------------------------------
# curves

@dataclass(frozen=True)
class PowerCurve:
    """Mean value per integer voting weight, with observation counts."""

    values: dict[int, float]
    counts: dict[int, int]

    def low_support(self, threshold: int = LOW_SUPPORT) -> set[int]:
        return {w for w, c in self.counts.items() if c < threshold}


@dataclass(frozen=True)
class LearningPoint:
    k: int
    direct_rate: float | None
    direct_n: int
    effective_rate: float | None
    effective_n: int


@dataclass(frozen=True)
class WeightBucket:
    weight: int
    approval_per_vote: float
    approval_per_voter: float
    agreement: float | None
    votes: int
    voters: int


@dataclass(frozen=True)
class EmpiricalCurves:
    potential: PowerCurve
    exercised: PowerCurve
    learning: tuple[LearningPoint, ...]
    approval_by_weight: tuple[WeightBucket, ...]


def _mean_by_weight(pairs: Iterable[tuple[int, float]]) -> PowerCurve:
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for w, x in pairs:
        sums[w] = sums.get(w, 0.0) + x
        counts[w] = counts.get(w, 0) + 1
    return PowerCurve({w: sums[w] / counts[w] for w in sorted(sums)},
                      {w: counts[w] for w in sorted(counts)})


def power_curves(resolved: ResolvedVoting, max_weight: int = MAX_CURVE_WEIGHT,
                 include_over_cap: bool = False,
                 ignore_author_delegations: bool = False) -> EmpiricalCurves:
    """Weight-bucketed power means plus learning and approval tables.

    Votes above max_weight are dropped unless include_over_cap is set.
    With ignore_author_delegations, a vote by the initiative's author is
    bucketed at weight 1 in the approval table (its delegations are
    ignored to rule out implicit approval).
    """
    potential_pairs = []
    exercised_pairs = []
    per_vote: dict[int, list[int]] = {}
    per_voter: dict[int, dict[str, list[int]]] = {}
    agree_by_w: dict[int, list[bool]] = {}
    for bs in resolved.ballots:
        author = resolved.authors.get(bs.initiative_id)
        for v in bs.votes:
            if v.weight <= max_weight or include_over_cap:
                potential_pairs.append((v.weight, potential_power(bs, v.voter)))
                exercised_pairs.append((v.weight, exercised_power(bs, v.voter)))
            w = v.weight
            if ignore_author_delegations and author == v.voter:
                w = 1
            if w > max_weight and not include_over_cap:
                continue
            per_vote.setdefault(w, []).append(v.decision)
            per_voter.setdefault(w, {}).setdefault(v.voter, []).append(v.decision)
            a = _agreement_of_vote(bs, v)
            if a is not None:
                agree_by_w.setdefault(w, []).append(a)

    buckets = []
    for w in sorted(per_vote):
        votes = per_vote[w]
        voter_means = [sum(d) / len(d) for d in per_voter[w].values()]
        agrees = agree_by_w.get(w, [])
        buckets.append(WeightBucket(
            weight=w,
            approval_per_vote=sum(votes) / len(votes),
            approval_per_voter=sum(voter_means) / len(voter_means),
            agreement=sum(agrees) / len(agrees) if agrees else None,
            votes=len(votes),
            voters=len(per_voter[w]),
        ))

    learning = _learning_curve(resolved)
    return EmpiricalCurves(
        potential=_mean_by_weight(potential_pairs),
        exercised=_mean_by_weight(exercised_pairs),
        learning=learning,
        approval_by_weight=tuple(buckets),
    )


def _learning_curve(resolved: ResolvedVoting) -> tuple[LearningPoint, ...]:
    """Approval rate of each user's k-th vote, direct and effective."""
    def bucketise(histories: dict[str, tuple[HistoryEntry, ...]]):
        sums: dict[int, int] = {}
        counts: dict[int, int] = {}
        for entries in histories.values():
            for k, e in enumerate(entries, start=1):
                sums[k] = sums.get(k, 0) + e.decision
                counts[k] = counts.get(k, 0) + 1
        return sums, counts

    d_sums, d_counts = bucketise(resolved.direct_histories)
    e_sums, e_counts = bucketise(resolved.effective_histories)
    points = []
    for k in sorted(set(d_counts) | set(e_counts)):
        dn, en = d_counts.get(k, 0), e_counts.get(k, 0)
        points.append(LearningPoint(
            k=k,
            direct_rate=d_sums[k] / dn if dn else None,
            direct_n=dn,
            effective_rate=e_sums[k] / en if en else None,
            effective_n=en,
        ))
    return tuple(points)


def power_correlation(resolved: ResolvedVoting, permutations: int = 10_000,
                      seed: int = 0) -> tuple[float, float] | None:
    """Spearman correlation between per-voter mean potential and exercised power.

    The p-value is two-sided, from seeded label permutations.  None when
    fewer than 3 voters have defined means or a series is constant.
    """
    potential: dict[str, list[int]] = {}
    exercised: dict[str, list[int]] = {}
    for bs in resolved.ballots:
        for v in bs.votes:
            potential.setdefault(v.voter, []).append(potential_power(bs, v.voter))
            exercised.setdefault(v.voter, []).append(exercised_power(bs, v.voter))
    voters = sorted(potential)
    if len(voters) < 3:
        return None
    x = np.array([np.mean(potential[v]) for v in voters])
    y = np.array([np.mean(exercised[v]) for v in voters])
    if np.all(x == x[0]) or np.all(y == y[0]):
        return None
    rho = _spearman(x, y)
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(permutations):
        if abs(_spearman(x, rng.permutation(y))) >= abs(rho) - 1e-12:
            hits += 1
    pvalue = (hits + 1) / (permutations + 1)
    return float(rho), float(pvalue)


def _spearman(x: np.ndarray, y: np.ndarray) -> float:
    rx, ry = rankdata(x), rankdata(y)
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    return float((rx * ry).sum() / np.sqrt((rx * rx).sum() * (ry * ry).sum()))
