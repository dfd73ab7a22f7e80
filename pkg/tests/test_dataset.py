"""Dataset persistence, validation, and the synthetic generator."""

from fractions import Fraction
from pathlib import Path

import pytest

from liquidpower.dataset import load_dataset, save_dataset
from liquidpower.errors import DataFormatError
from liquidpower.fitting import fit_beta_mle
from liquidpower.indices import ApprovalModel
from liquidpower.synth import SynthConfig, generate_synthetic


def small_dataset(seed=0, **kwargs):
    return generate_synthetic(SynthConfig(users=40, initiatives=30, seed=seed, **kwargs))


class TestRoundTrip:
    def test_save_load_identity(self, tmp_path):
        ds = small_dataset()
        save_dataset(ds, tmp_path)
        loaded = load_dataset(tmp_path)
        assert loaded == ds

    def test_same_seed_same_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        save_dataset(small_dataset(seed=3), a)
        save_dataset(small_dataset(seed=3), b)
        for f in sorted(a.iterdir()):
            assert f.read_bytes() == (b / f.name).read_bytes()

    def test_different_seed_differs(self):
        assert small_dataset(seed=1).fingerprint() != small_dataset(seed=2).fingerprint()

    def test_fingerprint_stable_across_loads(self, tmp_path):
        ds = small_dataset()
        save_dataset(ds, tmp_path)
        assert load_dataset(tmp_path).fingerprint() == ds.fingerprint()


def _corrupt(tmp_path: Path, filename: str, transform) -> Path:
    ds = small_dataset()
    save_dataset(ds, tmp_path)
    path = tmp_path / filename
    lines = path.read_text().splitlines()
    path.write_text("\n".join(transform(lines)) + "\n")
    return tmp_path


class TestValidation:
    def test_unknown_initiative_reported_with_row(self, tmp_path):
        def transform(lines):
            parts = lines[1].split(",")
            parts[0] = "i99999"
            return lines[:1] + [",".join(parts)] + lines[2:]

        directory = _corrupt(tmp_path, "ballots.csv", transform)
        with pytest.raises(DataFormatError, match=r"ballots\.csv:2.*i99999"):
            load_dataset(directory)

    def test_duplicate_ballot_reported(self, tmp_path):
        directory = _corrupt(tmp_path, "ballots.csv",
                             lambda lines: lines + [lines[1]])
        with pytest.raises(DataFormatError, match="duplicate ballot"):
            load_dataset(directory)

    def test_unknown_voter_reported(self, tmp_path):
        def transform(lines):
            parts = lines[1].split(",")
            parts[1] = "ghost"
            return lines[:1] + [",".join(parts)] + lines[2:]

        directory = _corrupt(tmp_path, "ballots.csv", transform)
        with pytest.raises(DataFormatError, match="ghost"):
            load_dataset(directory)

    def test_bad_decision_rejected(self, tmp_path):
        def transform(lines):
            parts = lines[1].split(",")
            parts[2] = "2"
            return lines[:1] + [",".join(parts)] + lines[2:]

        directory = _corrupt(tmp_path, "ballots.csv", transform)
        with pytest.raises(DataFormatError, match="decision"):
            load_dataset(directory)

    def test_bad_quorum_rejected(self, tmp_path):
        def transform(lines):
            parts = lines[1].split(",")
            parts[2], parts[3] = "3", "2"  # quorum 3/2 > 1
            return lines[:1] + [",".join(parts)] + lines[2:]

        directory = _corrupt(tmp_path, "issues.csv", transform)
        with pytest.raises(DataFormatError, match="quorum"):
            load_dataset(directory)

    def test_bad_header_rejected(self, tmp_path):
        def transform(lines):
            return ["oops,header"] + lines[1:]

        directory = _corrupt(tmp_path, "users.csv", transform)
        with pytest.raises(DataFormatError, match="header"):
            load_dataset(directory)

    def test_missing_file_rejected(self, tmp_path):
        ds = small_dataset()
        save_dataset(ds, tmp_path)
        (tmp_path / "ballots.csv").unlink()
        with pytest.raises(DataFormatError):
            load_dataset(tmp_path)

    def test_all_violations_reported_together(self, tmp_path):
        def transform(lines):
            bad1 = lines[1].split(",")
            bad1[0] = "i99999"
            bad2 = lines[2].split(",")
            bad2[1] = "ghost"
            return lines[:1] + [",".join(bad1), ",".join(bad2)] + lines[3:]

        directory = _corrupt(tmp_path, "ballots.csv", transform)
        with pytest.raises(DataFormatError) as err:
            load_dataset(directory)
        message = str(err.value)
        assert "i99999" in message and "ghost" in message


class TestSynth:
    def test_zero_delegations(self):
        ds = small_dataset(delegations_per_user=0.0)
        assert ds.delegations == ()

    def test_referential_integrity_of_generated_data(self, tmp_path):
        ds = generate_synthetic(SynthConfig(users=120, initiatives=80, seed=4))
        save_dataset(ds, tmp_path)
        load_dataset(tmp_path)  # raises on any violation

    def test_per_scope_acyclicity(self):
        ds = generate_synthetic(SynthConfig(users=150, initiatives=60, seed=8,
                                            delegations_per_user=2.0))
        by_scope: dict[tuple, dict[str, str]] = {}
        for e in ds.delegations:
            by_scope.setdefault((e.scope, e.scope_id), {})[e.truster] = e.trustee
        for graph in by_scope.values():
            for start in graph:
                seen = set()
                cur = start
                while cur in graph:
                    assert cur not in seen, "delegation cycle within one scope"
                    seen.add(cur)
                    cur = graph[cur]

    def test_quorum_applied_to_all_issues(self):
        ds = small_dataset(quorum=Fraction(3, 5))
        assert {i.quorum for i in ds.issues} == {Fraction(3, 5)}

    def test_default_config_recovers_beta_parameters(self):
        # homogeneous generation: per-initiative approval rates follow the
        # configured beta distribution
        ds = generate_synthetic(SynthConfig(users=10_000, initiatives=600, seed=0))
        by_init: dict[str, list[int]] = {}
        for b in ds.ballots:
            by_init.setdefault(b.initiative_id, []).append(b.decision)
        rates = [sum(v) / len(v) for v in by_init.values() if len(v) >= 10]
        fit = fit_beta_mle(rates)
        assert fit.alpha == pytest.approx(3.00, rel=0.10)
        assert fit.beta == pytest.approx(1.17, rel=0.10)

    def test_independent_model_gives_per_user_rates(self):
        ds = generate_synthetic(SynthConfig(
            users=4000, initiatives=400, seed=1,
            model=ApprovalModel.beta_independent(3.00, 1.17)))
        by_user: dict[str, list[int]] = {}
        for b in ds.ballots:
            by_user.setdefault(b.voter_id, []).append(b.decision)
        rates = [sum(v) / len(v) for v in by_user.values() if len(v) >= 20]
        fit = fit_beta_mle(rates)
        assert fit.alpha == pytest.approx(3.00, rel=0.2)
        assert fit.beta == pytest.approx(1.17, rel=0.2)

    def test_logistic_model_generates(self):
        ds = generate_synthetic(SynthConfig(
            users=60, initiatives=40, seed=2,
            model=ApprovalModel.logistic(0.7933, 0.0036)))
        assert ds.ballots

    def test_ballot_times_match_initiative(self):
        ds = small_dataset()
        times = {}
        for b in ds.ballots:
            times.setdefault(b.initiative_id, set()).add(b.ts)
        assert all(len(ts) == 1 for ts in times.values())
