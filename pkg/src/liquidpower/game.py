"""Weighted voting games: winning coalitions, swing voters, exhaustive enumeration.

A game is a set of voters with positive integer weights and a quorum
fraction q in (0,1).  A coalition wins when its weight reaches q times the
total weight; the comparison is done in exact rational arithmetic so that
boundary cases (e.g. a 2/3 quorum hit exactly) never depend on float
rounding.  Enumeration over all 2^n coalitions is the ground truth the
rest of the package is checked against and is limited to small games by a
configurable cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError, ResourceLimitError

#: Largest game the exhaustive enumeration accepts by default.  2^25
#: subset evaluations keep the exact path in the tens of seconds; beyond
#: it callers must use the Monte Carlo estimators.
DEFAULT_ENUMERATION_CAP = 25

Coalition = frozenset[str]


def as_quorum(value: Fraction | str | int | tuple[int, int]) -> Fraction:
    """Coerce a quorum given as Fraction, "2/3" string or (num, den) pair.

    Floats are rejected: quorums are ratios and must stay exact.
    """
    if isinstance(value, float):
        raise InvalidInputError(f"quorum must be exact, not float (got {value!r})")
    if isinstance(value, tuple):
        value = Fraction(value[0], value[1])
    q = Fraction(value)
    if not 0 < q < 1:
        raise InvalidInputError(f"quorum must lie strictly between 0 and 1 (got {q})")
    return q


@dataclass(frozen=True)
class VotingGame:
    """Immutable weighted voting game.

    voters:  ordered unique voter ids
    weights: positive integer weight per voter, aligned with ``voters``
    quorum:  exact fraction q in (0,1); a coalition wins when its weight
             is at least q times the total weight
    """

    voters: tuple[str, ...]
    weights: tuple[int, ...]
    quorum: Fraction
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.voters) != len(self.weights) or not self.voters:
            raise InvalidInputError("voters and weights must be equal-length and non-empty")
        if len(set(self.voters)) != len(self.voters):
            raise InvalidInputError("voter ids must be unique")
        for w in self.weights:
            if not isinstance(w, int) or isinstance(w, bool) or w < 1:
                raise InvalidInputError(f"weights must be integers >= 1 (got {w!r})")
        object.__setattr__(self, "quorum", as_quorum(self.quorum))
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.voters)})

    @classmethod
    def from_weights(cls, weights: Sequence[int],
                     quorum: Fraction | str | tuple[int, int]) -> "VotingGame":
        """Build a game with synthetic voter ids v0, v1, ..."""
        ids = tuple(f"v{i}" for i in range(len(weights)))
        return cls(ids, tuple(int(w) for w in weights), as_quorum(quorum))

    @property
    def n(self) -> int:
        return len(self.voters)

    @property
    def total_weight(self) -> int:
        return sum(self.weights)

    @property
    def threshold(self) -> Fraction:
        """Exact weight a coalition needs to win: quorum * total weight."""
        return self.quorum * self.total_weight

    def weight_of(self, voter: str) -> int:
        return self.weights[self.index_of(voter)]

    def index_of(self, voter: str) -> int:
        try:
            return self._index[voter]
        except KeyError:
            raise InvalidInputError(f"unknown voter id {voter!r}") from None


def _coalition_weight(game: VotingGame, coalition: Iterable[str]) -> int:
    total = 0
    seen = set()
    for v in coalition:
        if v in seen:
            continue
        seen.add(v)
        total += game.weight_of(v)
    return total


def is_winning(game: VotingGame, coalition: Iterable[str]) -> bool:
    """True iff the coalition weight is at least quorum * total weight.

    The comparison uses >= (a coalition holding exactly the quorum weight
    wins); this single convention is used everywhere in the package except
    the strict empirical-outcome comparisons in :mod:`liquidpower.empirical`.
    """
    return _coalition_weight(game, coalition) >= game.threshold


def is_swing(game: VotingGame, coalition: Iterable[str], voter: str) -> bool:
    """True iff the coalition wins and loses when ``voter`` leaves it."""
    members = frozenset(coalition)
    if voter not in members:
        raise InvalidInputError(f"voter {voter!r} is not in the coalition")
    w = _coalition_weight(game, members)
    if w < game.threshold:
        return False
    return w - game.weight_of(voter) < game.threshold


def _check_cap(game: VotingGame, cap: int) -> None:
    if game.n > cap:
        raise ResourceLimitError(
            f"game has {game.n} voters, above the enumeration cap {cap}; "
            "use the Monte Carlo estimators instead"
        )


def others_subset_tables(game: VotingGame, voter: str,
                         cap: int = DEFAULT_ENUMERATION_CAP,
                         ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Enumerate all subsets of the voters other than ``voter``.

    Returns ``(sums, sizes, swing)`` arrays indexed by bitmask over the
    other voters in game order (bit j = j-th remaining voter): subset
    weight, subset size, and whether ``voter`` is a swing voter of
    subset + voter.  Shared by the exact index computations.
    """
    _check_cap(game, cap)
    i = game.index_of(voter)
    others = [w for j, w in enumerate(game.weights) if j != i]
    sums = np.zeros(1, dtype=np.int64)
    sizes = np.zeros(1, dtype=np.int16)
    for w in others:
        sums = np.concatenate([sums, sums + w])
        sizes = np.concatenate([sizes, sizes + 1])
    # integer form of the exact rational comparison: sum >= q*total
    qn, qd = game.quorum.numerator, game.quorum.denominator
    rhs = qn * game.total_weight
    wi = game.weights[i]
    swing = ((sums + wi) * qd >= rhs) & (sums * qd < rhs)
    return sums, sizes, swing


def swing_counts_by_size(game: VotingGame, voter: str,
                         cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Exact swing-coalition counts for one voter, grouped by coalition size.

    ``counts[s]`` is the number of winning coalitions of size ``s`` that
    contain ``voter`` and lose without it; ``counts.sum()`` is |W_i|.
    Computed by exhaustive (vectorised) iteration over all subsets of the
    remaining voters, hence the cap.
    """
    _, sizes, swing = others_subset_tables(game, voter, cap)
    return np.bincount(sizes[swing] + 1, minlength=game.n + 1)
