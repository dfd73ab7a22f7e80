"""Dataset model and CSV persistence.

A dataset is six UTF-8 CSV files with header rows:

    users.csv        user_id
    areas.csv        area_id,name
    issues.csv       issue_id,area_id,quorum_num,quorum_den
    initiatives.csv  initiative_id,issue_id,author_id (author may be empty)
    ballots.csv      initiative_id,voter_id,decision,ts   (decision 0/1, ts ISO-8601)
    delegations.csv  truster_id,trustee_id,scope,scope_id,valid_from,valid_to

Decisions are strictly binary; abstention is the absence of a ballot.
Loading validates referential integrity and reports every violation with
its file and row number before rejecting the dataset.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass
from datetime import datetime
from fractions import Fraction
from pathlib import Path

from .delegation import DelegationEdge
from .errors import DataFormatError, InvalidInputError
from .game import as_quorum

FILES = ("users", "areas", "issues", "initiatives", "ballots", "delegations")
_TS_FORMAT = "%Y-%m-%dT%H:%M:%S"


@dataclass(frozen=True)
class Area:
    area_id: str
    name: str


@dataclass(frozen=True)
class Issue:
    issue_id: str
    area_id: str
    quorum: Fraction


@dataclass(frozen=True)
class Initiative:
    initiative_id: str
    issue_id: str
    author_id: str | None = None


@dataclass(frozen=True)
class Ballot:
    initiative_id: str
    voter_id: str
    decision: int  # 1 = yes, 0 = no
    ts: datetime


@dataclass(frozen=True)
class Dataset:
    users: tuple[str, ...]
    areas: tuple[Area, ...]
    issues: tuple[Issue, ...]
    initiatives: tuple[Initiative, ...]
    ballots: tuple[Ballot, ...]
    delegations: tuple[DelegationEdge, ...]

    def issues_by_id(self) -> dict[str, Issue]:
        return {i.issue_id: i for i in self.issues}

    def initiatives_by_id(self) -> dict[str, Initiative]:
        return {i.initiative_id: i for i in self.initiatives}

    def fingerprint(self) -> str:
        """sha256 over the canonical CSV serialisation."""
        h = hashlib.sha256()
        for name, text in _serialise_tables(self).items():
            h.update(name.encode())
            h.update(text.encode())
        return h.hexdigest()


def _format_ts(t: datetime) -> str:
    return t.strftime(_TS_FORMAT)


def _parse_ts(text: str) -> datetime:
    return datetime.strptime(text, _TS_FORMAT)


def validate(dataset: Dataset) -> list[str]:
    """Referential-integrity violations, empty when the dataset is sound."""
    problems = []
    users = set(dataset.users)
    if len(users) != len(dataset.users):
        problems.append("duplicate user ids")
    areas = {a.area_id for a in dataset.areas}
    if len(areas) != len(dataset.areas):
        problems.append("duplicate area ids")
    issues = {}
    for issue in dataset.issues:
        if issue.issue_id in issues:
            problems.append(f"duplicate issue id {issue.issue_id!r}")
        issues[issue.issue_id] = issue
        if issue.area_id not in areas:
            problems.append(f"issue {issue.issue_id!r} references unknown area {issue.area_id!r}")
    inits = {}
    for init in dataset.initiatives:
        if init.initiative_id in inits:
            problems.append(f"duplicate initiative id {init.initiative_id!r}")
        inits[init.initiative_id] = init
        if init.issue_id not in issues:
            problems.append(
                f"initiative {init.initiative_id!r} references unknown issue {init.issue_id!r}")
        if init.author_id is not None and init.author_id not in users:
            problems.append(
                f"initiative {init.initiative_id!r} has unknown author {init.author_id!r}")
    seen_ballots = set()
    for b in dataset.ballots:
        if b.initiative_id not in inits:
            problems.append(
                f"ballot by {b.voter_id!r} references unknown initiative {b.initiative_id!r}")
        if b.voter_id not in users:
            problems.append(f"ballot on {b.initiative_id!r} by unknown user {b.voter_id!r}")
        key = (b.voter_id, b.initiative_id)
        if key in seen_ballots:
            problems.append(f"duplicate ballot by {b.voter_id!r} on {b.initiative_id!r}")
        seen_ballots.add(key)
    for e in dataset.delegations:
        if e.truster not in users or e.trustee not in users:
            problems.append(f"delegation {e.truster!r}->{e.trustee!r} references unknown user")
        if e.scope == "area" and e.scope_id not in areas:
            problems.append(f"delegation by {e.truster!r} references unknown area {e.scope_id!r}")
        if e.scope == "issue" and e.scope_id not in issues:
            problems.append(f"delegation by {e.truster!r} references unknown issue {e.scope_id!r}")
    return problems


def _serialise_tables(dataset: Dataset) -> dict[str, str]:
    """Canonical CSV text per table, used for saving and fingerprinting."""
    tables = {}

    def render(header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()

    tables["users"] = render(["user_id"], ([u] for u in dataset.users))
    tables["areas"] = render(["area_id", "name"], ([a.area_id, a.name] for a in dataset.areas))
    tables["issues"] = render(
        ["issue_id", "area_id", "quorum_num", "quorum_den"],
        ([i.issue_id, i.area_id, i.quorum.numerator, i.quorum.denominator]
         for i in dataset.issues))
    tables["initiatives"] = render(
        ["initiative_id", "issue_id", "author_id"],
        ([i.initiative_id, i.issue_id, i.author_id or ""] for i in dataset.initiatives))
    tables["ballots"] = render(
        ["initiative_id", "voter_id", "decision", "ts"],
        ([b.initiative_id, b.voter_id, b.decision, _format_ts(b.ts)] for b in dataset.ballots))
    tables["delegations"] = render(
        ["truster_id", "trustee_id", "scope", "scope_id", "valid_from", "valid_to"],
        ([e.truster, e.trustee, e.scope, e.scope_id or "",
          _format_ts(e.valid_from) if e.valid_from else "",
          _format_ts(e.valid_to) if e.valid_to else ""]
         for e in dataset.delegations))
    return tables


def save_dataset(dataset: Dataset, directory: str | Path) -> list[Path]:
    """Write the six CSV files; returns the paths written."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in _serialise_tables(dataset).items():
        path = directory / f"{name}.csv"
        path.write_text(text, encoding="utf-8", newline="")
        written.append(path)
    return written


def _read_rows(path: Path, expected: list[str]) -> list[tuple[int, dict[str, str]]]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataFormatError("empty file", file=path.name) from None
            if header != expected:
                raise DataFormatError(
                    f"bad header {header!r}, expected {expected!r}", file=path.name)
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(expected):
                    raise DataFormatError(
                        f"expected {len(expected)} fields, got {len(row)}",
                        file=path.name, row=lineno)
                rows.append((lineno, dict(zip(expected, row))))
            return rows
    except OSError as exc:
        raise DataFormatError(str(exc), file=path.name) from exc


def load_dataset(directory: str | Path) -> Dataset:
    """Load and validate a dataset directory.

    Raises DataFormatError naming the file and row of the first parse
    problem, or listing every referential-integrity violation at once.
    """
    directory = Path(directory)

    users = tuple(r["user_id"] for _, r in _read_rows(directory / "users.csv", ["user_id"]))
    areas = tuple(Area(r["area_id"], r["name"])
                  for _, r in _read_rows(directory / "areas.csv", ["area_id", "name"]))

    issues = []
    for lineno, r in _read_rows(directory / "issues.csv",
                                ["issue_id", "area_id", "quorum_num", "quorum_den"]):
        try:
            quorum = as_quorum((int(r["quorum_num"]), int(r["quorum_den"])))
        except (ValueError, InvalidInputError) as exc:
            raise DataFormatError(f"bad quorum: {exc}", file="issues.csv", row=lineno) from None
        issues.append(Issue(r["issue_id"], r["area_id"], quorum))

    initiatives = []
    init_rows = []
    for lineno, r in _read_rows(directory / "initiatives.csv",
                                ["initiative_id", "issue_id", "author_id"]):
        initiatives.append(Initiative(r["initiative_id"], r["issue_id"],
                                      r["author_id"] or None))
        init_rows.append(lineno)

    ballots = []
    ballot_rows = []
    for lineno, r in _read_rows(directory / "ballots.csv",
                                ["initiative_id", "voter_id", "decision", "ts"]):
        if r["decision"] not in ("0", "1"):
            raise DataFormatError(f"decision must be 0 or 1, got {r['decision']!r}",
                                  file="ballots.csv", row=lineno)
        try:
            ts = _parse_ts(r["ts"])
        except ValueError:
            raise DataFormatError(f"bad timestamp {r['ts']!r}",
                                  file="ballots.csv", row=lineno) from None
        ballots.append(Ballot(r["initiative_id"], r["voter_id"], int(r["decision"]), ts))
        ballot_rows.append(lineno)

    delegations = []
    delegation_rows = []
    for lineno, r in _read_rows(
            directory / "delegations.csv",
            ["truster_id", "trustee_id", "scope", "scope_id", "valid_from", "valid_to"]):
        try:
            edge = DelegationEdge(
                r["truster_id"], r["trustee_id"], r["scope"], r["scope_id"] or None,
                _parse_ts(r["valid_from"]) if r["valid_from"] else None,
                _parse_ts(r["valid_to"]) if r["valid_to"] else None)
        except (ValueError, InvalidInputError) as exc:
            raise DataFormatError(str(exc), file="delegations.csv", row=lineno) from None
        delegations.append(edge)
        delegation_rows.append(lineno)

    dataset = Dataset(users, areas, tuple(issues), tuple(initiatives),
                      tuple(ballots), tuple(delegations))
    problems = _integrity_problems(dataset, init_rows, ballot_rows, delegation_rows)
    if problems:
        raise DataFormatError(
            f"{len(problems)} integrity violation(s):\n  " + "\n  ".join(problems))
    return dataset


def _integrity_problems(dataset: Dataset, init_rows: list[int],
                        ballot_rows: list[int], delegation_rows: list[int]) -> list[str]:
    """Every referential-integrity violation, annotated with file:row."""
    problems = []
    users = set(dataset.users)
    areas = {a.area_id for a in dataset.areas}
    issues = {i.issue_id for i in dataset.issues}
    for issue in dataset.issues:
        if issue.area_id not in areas:
            problems.append(
                f"issues.csv: issue {issue.issue_id!r} references unknown area "
                f"{issue.area_id!r}")
    inits = set()
    for init, row in zip(dataset.initiatives, init_rows):
        if init.initiative_id in inits:
            problems.append(f"initiatives.csv:{row}: duplicate initiative "
                            f"{init.initiative_id!r}")
        inits.add(init.initiative_id)
        if init.issue_id not in issues:
            problems.append(f"initiatives.csv:{row}: unknown issue {init.issue_id!r}")
        if init.author_id is not None and init.author_id not in users:
            problems.append(f"initiatives.csv:{row}: unknown author {init.author_id!r}")
    seen_ballots = set()
    for b, row in zip(dataset.ballots, ballot_rows):
        if b.initiative_id not in inits:
            problems.append(f"ballots.csv:{row}: unknown initiative {b.initiative_id!r}")
        if b.voter_id not in users:
            problems.append(f"ballots.csv:{row}: unknown voter {b.voter_id!r}")
        key = (b.voter_id, b.initiative_id)
        if key in seen_ballots:
            problems.append(f"ballots.csv:{row}: duplicate ballot by {b.voter_id!r} "
                            f"on {b.initiative_id!r}")
        seen_ballots.add(key)
    for e, row in zip(dataset.delegations, delegation_rows):
        if e.truster not in users:
            problems.append(f"delegations.csv:{row}: unknown truster {e.truster!r}")
        if e.trustee not in users:
            problems.append(f"delegations.csv:{row}: unknown trustee {e.trustee!r}")
        if e.scope == "area" and e.scope_id not in areas:
            problems.append(f"delegations.csv:{row}: unknown area {e.scope_id!r}")
        if e.scope == "issue" and e.scope_id not in issues:
            problems.append(f"delegations.csv:{row}: unknown issue {e.scope_id!r}")
    return problems
