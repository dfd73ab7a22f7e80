"""Delegation edges, snapshots, and effective-weight resolution.

Delegations are scoped (global, per area, or per issue); the most specific
applicable scope wins.  For a concrete issue, every eligible voter who did
not vote follows its chain of active delegations until the chain reaches a
direct voter, who absorbs one weight unit.  Chains that run into a cycle
or end at a non-voting user with no outgoing delegation are reported as
unresolved; their weight simply does not vote.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Sequence

from .errors import InvalidInputError

SCOPES = ("global", "area", "issue")


@dataclass(frozen=True)
class DelegationEdge:
    """One delegation with its validity interval [valid_from, valid_to).

    scope_id is the area id or issue id for scoped delegations and None
    for global ones.
    """

    truster: str
    trustee: str
    scope: str
    scope_id: str | None = None
    valid_from: datetime | None = None
    valid_to: datetime | None = None

    def __post_init__(self):
        if self.truster == self.trustee:
            raise InvalidInputError(f"self-delegation by {self.truster!r}")
        if self.scope not in SCOPES:
            raise InvalidInputError(f"unknown delegation scope {self.scope!r}")
        if self.scope == "global":
            if self.scope_id is not None:
                raise InvalidInputError("global delegations carry no scope id")
        elif self.scope_id is None:
            raise InvalidInputError(f"{self.scope} delegation needs a scope id")
        if self.valid_from is not None and self.valid_to is not None \
                and not self.valid_from < self.valid_to:
            raise InvalidInputError("valid_from must precede valid_to")

    def active_at(self, t: datetime) -> bool:
        if self.valid_from is not None and t < self.valid_from:
            return False
        return self.valid_to is None or t < self.valid_to


@dataclass(frozen=True)
class DelegationSnapshot:
    """The delegations active at one instant, one trustee per (truster, scope)."""

    edges: tuple[DelegationEdge, ...]
    _global: dict[str, str] = field(init=False, repr=False, compare=False)
    _area: dict[tuple[str, str], str] = field(init=False, repr=False, compare=False)
    _issue: dict[tuple[str, str], str] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        g: dict[str, str] = {}
        a: dict[tuple[str, str], str] = {}
        i: dict[tuple[str, str], str] = {}
        for e in self.edges:
            if e.scope == "global":
                if e.truster in g:
                    raise InvalidInputError(f"duplicate global delegation by {e.truster!r}")
                g[e.truster] = e.trustee
            elif e.scope == "area":
                key = (e.truster, e.scope_id)
                if key in a:
                    raise InvalidInputError(
                        f"duplicate area delegation by {e.truster!r} in {e.scope_id!r}")
                a[key] = e.trustee
            else:
                key = (e.truster, e.scope_id)
                if key in i:
                    raise InvalidInputError(
                        f"duplicate issue delegation by {e.truster!r} in {e.scope_id!r}")
                i[key] = e.trustee
        object.__setattr__(self, "_global", g)
        object.__setattr__(self, "_area", a)
        object.__setattr__(self, "_issue", i)


def active_edge(snapshot: DelegationSnapshot, voter: str,
                issue_id: str, area_id: str) -> str | None:
    """Trustee for this voter on this issue, most specific scope first.

    Precedence is issue over area over global, applied independently at
    every hop of a chain.
    """
    t = snapshot._issue.get((voter, issue_id))
    if t is not None:
        return t
    t = snapshot._area.get((voter, area_id))
    if t is not None:
        return t
    return snapshot._global.get(voter)


@dataclass(frozen=True)
class EffectiveWeights:
    """Resolution result for one issue.

    weights maps each direct voter to 1 plus the number of voters whose
    chains end at it; unresolved holds voters whose chains hit a cycle or
    a non-voting dead end; terminal maps every resolved voter to the
    direct voter its weight reached (direct voters map to themselves).
    """

    weights: dict[str, int]
    unresolved: frozenset[str]
    terminal: dict[str, str]


def resolve_weights(snapshot: DelegationSnapshot, issue_id: str, area_id: str,
                    direct_voters: Iterable[str], eligible: Iterable[str]) -> EffectiveWeights:
    """Follow delegation chains and accumulate weight on direct voters.

    A direct voter keeps its own vote: its outgoing delegations are inert
    for this issue.  Chains pass transitively through non-voting
    intermediates.  Every eligible voter contributes exactly one unit, to
    a direct voter or to the unresolved set.
    """
    direct = frozenset(direct_voters)
    elig = frozenset(eligible)
    if not direct <= elig:
        raise InvalidInputError("direct voters must be a subset of eligible voters")
    # terminal: direct voter id, or None for cycle / dead end
    terminal: dict[str, str | None] = {v: v for v in direct}
    for voter in elig:
        if voter in terminal:
            continue
        path = []
        on_path = set()
        cur = voter
        while True:
            if cur in terminal:
                result = terminal[cur]
                break
            if cur in on_path:
                result = None  # cycle
                break
            path.append(cur)
            on_path.add(cur)
            nxt = active_edge(snapshot, cur, issue_id, area_id)
            if nxt is None:
                result = None  # dead end: no vote, no outgoing delegation
                break
            cur = nxt
        for v in path:
            terminal[v] = result
    weights = {v: 1 for v in sorted(direct)}
    unresolved = []
    for voter in elig:
        t = terminal.get(voter)
        if voter in direct:
            continue
        if t is None:
            unresolved.append(voter)
        else:
            weights[t] += 1
    resolved_terminal = {v: t for v, t in sorted(terminal.items())
                         if t is not None and v in elig}
    return EffectiveWeights(weights, frozenset(unresolved), resolved_terminal)


def delegation_graph_at(edge_log: Sequence[DelegationEdge], t: datetime) -> DelegationSnapshot:
    """Snapshot of the edges whose half-open validity interval contains t."""
    return DelegationSnapshot(tuple(e for e in edge_log if e.active_at(t)))
