"""Synthetic dataset generation.

Generates a full dataset (users, areas, issues, initiatives, ballots,
delegation log) whose shape follows the distributions observed on real
delegative-democracy platforms: power-law incoming delegation counts,
power-law participation, and a configurable approval model (homogeneous
variants draw one approval probability per initiative, independent
variants one per user, logistic derives it from the voter's effective
weight).  Deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta
from fractions import Fraction

import numpy as np

from .dataset import Area, Ballot, Dataset, Initiative, Issue
from .delegation import DelegationEdge, DelegationSnapshot, resolve_weights
from .errors import InvalidInputError
from .game import as_quorum
from .indices import ApprovalModel, logistic_probability

#: Initiatives per issue on the platforms this mimics (~1.8 competing
#: initiatives per issue).
_INITIATIVES_PER_ISSUE = 1.8


def sample_power_law(rng: np.random.Generator, exponent: float, size: int,
                     xmin: int = 1, cap: int | None = None) -> np.ndarray:
    """Integer power-law draws: continuous Pareto rounded to the nearest integer."""
    if exponent <= 1:
        raise InvalidInputError("power-law exponent must exceed 1")
    u = rng.random(size)
    x = np.floor((xmin - 0.5) * (1.0 - u) ** (-1.0 / (exponent - 1.0)) + 0.5)
    x = x.astype(np.int64)
    if cap is not None:
        x = np.minimum(x, cap)
    return x


@dataclass(frozen=True)
class SynthConfig:
    users: int = 400
    initiatives: int = 600
    quorum: Fraction = Fraction(2, 3)
    model: ApprovalModel = field(
        default_factory=lambda: ApprovalModel.beta_homogeneous(3.00, 1.17))
    indegree_exponent: float = 1.38
    participation_exponent: float = 1.87
    seed: int = 0
    areas: int = 4
    delegations_per_user: float = 1.08
    start: datetime = datetime(2011, 1, 1)
    days: int = 730

    def __post_init__(self):
        if self.users < 1 or self.initiatives < 1 or self.areas < 1 or self.days < 1:
            raise InvalidInputError("counts must be >= 1")
        if self.indegree_exponent <= 1 or self.participation_exponent <= 1:
            raise InvalidInputError("power-law exponents must exceed 1")
        if self.delegations_per_user < 0:
            raise InvalidInputError("delegations_per_user must be >= 0")
        object.__setattr__(self, "quorum", as_quorum(self.quorum))


def _would_cycle(adjacency: dict[str, str], truster: str, trustee: str) -> bool:
    """True if adding truster->trustee closes a chain back to truster."""
    cur = trustee
    seen = set()
    while cur in adjacency and cur not in seen:
        seen.add(cur)
        cur = adjacency[cur]
        if cur == truster:
            return True
    return cur == truster


def _generate_delegations(rng, config, users, area_ids, issue_ids) -> list[DelegationEdge]:
    n_edges = round(config.users * config.delegations_per_user)
    if n_edges == 0:
        return []
    popularity = sample_power_law(rng, config.indegree_exponent, config.users,
                                  cap=config.users).astype(float)
    cdf = np.cumsum(popularity / popularity.sum())
    window = config.days * 86400
    edges: list[DelegationEdge] = []
    taken: set[tuple[str, str, str | None]] = set()
    adjacency: dict[tuple[str, str | None], dict[str, str]] = {}
    attempts = 0
    while len(edges) < n_edges and attempts < 50 * n_edges:
        attempts += 1
        truster = users[int(rng.integers(config.users))]
        trustee = users[int(np.searchsorted(cdf, rng.random()))]
        r = rng.random()
        if r < 0.6:
            scope, scope_id = "global", None
        elif r < 0.9:
            scope, scope_id = "area", area_ids[int(rng.integers(len(area_ids)))]
        else:
            scope, scope_id = "issue", issue_ids[int(rng.integers(len(issue_ids)))]
        t0 = int(rng.integers(window))
        removed = rng.random() < 0.15
        t1 = int(rng.integers(t0 + 1, window + 86400)) if removed else None
        if truster == trustee or (truster, scope, scope_id) in taken:
            continue
        graph = adjacency.setdefault((scope, scope_id), {})
        if _would_cycle(graph, truster, trustee):
            continue
        taken.add((truster, scope, scope_id))
        graph[truster] = trustee
        edges.append(DelegationEdge(
            truster, trustee, scope, scope_id,
            config.start + timedelta(seconds=t0),
            config.start + timedelta(seconds=t1) if t1 is not None else None))
    edges.sort(key=lambda e: (e.valid_from, e.truster, e.trustee, e.scope, e.scope_id or ""))
    return edges


def generate_synthetic(config: SynthConfig) -> Dataset:
    """Build a synthetic dataset; byte-identical for identical configs."""
    rng = np.random.default_rng(config.seed)
    width = max(4, len(str(config.users - 1)))
    users = tuple(f"u{i:0{width}d}" for i in range(config.users))
    areas = tuple(Area(f"a{i}", f"area-{i}") for i in range(config.areas))
    n_issues = max(1, round(config.initiatives / _INITIATIVES_PER_ISSUE))
    issue_areas = rng.integers(len(areas), size=n_issues)
    issues = tuple(Issue(f"s{i:05d}", areas[issue_areas[i]].area_id, config.quorum)
                   for i in range(n_issues))
    init_issue = [i % n_issues for i in range(config.initiatives)]
    authors = rng.integers(config.users, size=config.initiatives)
    initiatives = tuple(
        Initiative(f"i{i:05d}", issues[init_issue[i]].issue_id, users[authors[i]])
        for i in range(config.initiatives))
    # chronological initiative times over the observation window
    offsets = np.sort(rng.integers(0, config.days * 86400, size=config.initiatives))
    times = [config.start + timedelta(seconds=int(o)) for o in offsets]

    delegations = _generate_delegations(
        rng, config, users, [a.area_id for a in areas], [i.issue_id for i in issues])

    # participation: every user votes on all initiatives of its issues
    activity = sample_power_law(rng, config.participation_exponent, config.users,
                                cap=n_issues)
    voters_of_issue: dict[int, list[int]] = {i: [] for i in range(n_issues)}
    for u in range(config.users):
        chosen = rng.permutation(n_issues)[:activity[u]]
        for s in chosen:
            voters_of_issue[int(s)].append(u)

    # approval probabilities, then one Bernoulli draw per ballot
    model = config.model
    if model.kind == "beta-independent":
        user_p = rng.beta(model.alpha, model.beta, size=config.users)
    elif model.kind == "uniform-independent":
        user_p = rng.random(config.users)
    elif model.kind == "beta-homogeneous":
        init_p = rng.beta(model.alpha, model.beta, size=config.initiatives)
    elif model.kind == "uniform-homogeneous":
        init_p = rng.random(config.initiatives)

    issues_by_id = {i.issue_id: i for i in issues}
    ballots: list[Ballot] = []
    for m, init in enumerate(initiatives):
        participants = sorted(voters_of_issue[init_issue[m]])
        if not participants:
            continue
        if model.kind == "logistic":
            issue = issues_by_id[init.issue_id]
            snapshot = DelegationSnapshot(
                tuple(e for e in delegations if e.active_at(times[m])))
            direct = {users[u] for u in participants}
            ew = resolve_weights(snapshot, issue.issue_id, issue.area_id,
                                 direct, frozenset(users))
            p = np.array([logistic_probability(ew.weights[users[u]],
                                               model.beta0, model.beta1)
                          for u in participants])
        elif model.homogeneous:
            p = np.full(len(participants), init_p[m])
        else:
            p = user_p[participants]
        draws = rng.random(len(participants))
        for u, d in zip(participants, draws < p):
            ballots.append(Ballot(init.initiative_id, users[u], int(d), times[m]))

    return Dataset(users, areas, issues, initiatives, tuple(ballots),
                   tuple(delegations))
