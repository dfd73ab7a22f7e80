"""Acceptance suite: one test per release criterion, each printing a
pass/fail line.  Run with `pytest tests/test_acceptance.py -v -s`.
"""

import functools
import time
from fractions import Fraction

import numpy as np

from liquidpower.cli import main as cli_main
from liquidpower.delegation import DelegationEdge, DelegationSnapshot, resolve_weights
from liquidpower.empirical import (
    BallotSet,
    Vote,
    exercised_power,
    potential_power,
    resolve_dataset,
)
from liquidpower.evaluation import benchmark
from liquidpower.fitting import fit_beta_mle, fit_logistic, fit_power_law, gini
from liquidpower.game import VotingGame
from liquidpower.indices import (
    ApprovalModel,
    banzhaf_exact,
    beta2_index_exact,
    beta_index_exact,
    index_monte_carlo,
    logistic_probability,
    regression_index_exact,
    shapley_exact,
)
from liquidpower.netstats import DelegationGraph, clustering_coefficient, reciprocity
from liquidpower.synth import SynthConfig, generate_synthetic, sample_power_law

from oracles import (
    banzhaf_raw,
    beta2_index_by_quadrature,
    beta_index_by_quadrature,
    shapley_by_permutations,
)

HALF = Fraction(1, 2)


def criterion(number, text, budget=None):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"\nFAIL  criterion {number}: {text}")
                raise
            elapsed = time.perf_counter() - start
            print(f"\nPASS  criterion {number}: {text} ({elapsed:.1f}s)")
            if budget is not None:
                assert elapsed < budget, f"runtime {elapsed:.1f}s over budget {budget}s"
        return wrapper
    return decorate


def random_game(rng, max_n, max_w=12):
    n = int(rng.integers(2, max_n + 1))
    weights = [int(w) for w in rng.integers(1, max_w + 1, n)]
    num = int(rng.integers(1, 8))
    den = int(rng.integers(num + 1, 12))
    return VotingGame.from_weights(weights, Fraction(num, den))


@criterion(1, "worked-example game [5,4,1] at q=1/2", budget=1.0)
def test_criterion_1_worked_example():
    game = VotingGame(("A", "B", "C"), (5, 4, 1), HALF)
    banzhaf = banzhaf_exact(game)
    shapley = shapley_exact(game)
    for voter, expected in (("A", 0.6), ("B", 0.2), ("C", 0.2)):
        assert abs(banzhaf.normalised[voter] - expected) < 1e-12
    for voter, expected in (("A", 2 / 3), ("B", 1 / 6), ("C", 1 / 6)):
        assert abs(shapley.values[voter] - expected) < 1e-12
    # voters with weights 4 and 1 score equally
    assert banzhaf.values["B"] == banzhaf.values["C"]
    assert shapley.values["B"] == shapley.values["C"]
    # independent brute-force oracles: all coalitions, all permutations
    raw = banzhaf_raw([5, 4, 1], HALF)
    total = sum(raw)
    for voter, expected in zip(game.voters, raw):
        assert abs(banzhaf.values[voter] - float(expected)) < 1e-12
        assert abs(banzhaf.normalised[voter] - float(expected / total)) < 1e-12
    for voter, expected in zip(game.voters, shapley_by_permutations([5, 4, 1], HALF)):
        assert abs(shapley.values[voter] - float(expected)) < 1e-12


@criterion(2, "reduction identities on 200 random games (n <= 6)", budget=30.0)
def test_criterion_2_reduction_identities():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        game = random_game(rng, max_n=6)
        raw = banzhaf_exact(game).values
        uniform_beta = beta_index_exact(game, 1.0, 1.0).values
        beta0 = float(rng.uniform(-1.0, 1.5))
        flat_regression = regression_index_exact(game, beta0, 0.0).values
        p = logistic_probability(0, beta0, 1.0)
        matched_beta = beta_index_exact(game, p, 1.0 - p).values
        scale = float(rng.uniform(0.2, 8.0))
        alpha, beta = float(rng.uniform(0.3, 5.0)), float(rng.uniform(0.3, 5.0))
        a1 = beta_index_exact(game, alpha, beta).values
        a2 = beta_index_exact(game, alpha * scale, beta * scale).values
        for v in game.voters:
            assert abs(uniform_beta[v] - raw[v] / 2) < 1e-10
            assert abs(flat_regression[v] - matched_beta[v]) < 1e-10
            assert abs(a1[v] - a2[v]) < 1e-10


@criterion(3, "Monte Carlo within 3 standard errors on 50 games x 5 models", budget=120.0)
def test_criterion_3_monte_carlo_convergence():
    rng = np.random.default_rng(77)
    runs = 100_000
    pairs = 0
    within = 0
    cases = [
        (ApprovalModel.uniform_independent(), lambda g: beta_index_exact(g, 1, 1)),
        (ApprovalModel.uniform_homogeneous(), lambda g: beta2_index_exact(g, 1, 1)),
        (ApprovalModel.beta_independent(3.0, 1.17),
         lambda g: beta_index_exact(g, 3.0, 1.17)),
        (ApprovalModel.beta_homogeneous(3.0, 1.17),
         lambda g: beta2_index_exact(g, 3.0, 1.17)),
        (ApprovalModel.logistic(0.7933, 0.0036),
         lambda g: regression_index_exact(g, 0.7933, 0.0036)),
    ]
    for k in range(50):
        game = random_game(rng, max_n=15)
        for model, exact_fn in cases:
            exact = exact_fn(game).values
            mc = index_monte_carlo(game, model, runs=runs, seed=1000 + k)
            for v in game.voters:
                pairs += 1
                if abs(mc.values[v] - exact[v]) <= 3 * mc.stderr[v]:
                    within += 1
    assert within / pairs >= 0.99, f"only {within}/{pairs} pairs within 3 SE"


@criterion(4, "closed forms match direct numeric quadrature", budget=60.0)
def test_criterion_4_closed_form_vs_quadrature():
    weights3, q3 = [5, 4, 1], HALF
    game3 = VotingGame.from_weights(weights3, q3)
    exact3 = beta2_index_exact(game3, 3.00, 1.17).values
    for i, v in enumerate(game3.voters):
        numeric = beta2_index_by_quadrature(weights3, q3, i, 3.00, 1.17)
        assert abs(exact3[v] - numeric) < 1e-6
    weights2, q2 = [3, 2], Fraction(3, 5)
    game2 = VotingGame.from_weights(weights2, q2)
    exact2 = beta_index_exact(game2, 3.00, 1.17).values
    for i, v in enumerate(game2.voters):
        numeric = beta_index_by_quadrature(weights2, q2, i, 3.00, 1.17)
        assert abs(exact2[v] - numeric) < 1e-6


@criterion(5, "logistic reference predictions at weights 1 and 100")
def test_criterion_5_regression_predictions():
    assert abs(logistic_probability(1, 0.7933, 0.0036) - 0.69) < 0.005
    assert abs(logistic_probability(100, 0.7933, 0.0036) - 0.76) < 0.005


@criterion(6, "parameter recovery: beta, logistic, power law", budget=60.0)
def test_criterion_6_parameter_recovery():
    rng = np.random.default_rng(42)
    beta_fit = fit_beta_mle(rng.beta(3.00, 1.17, 10_000))
    assert abs(beta_fit.alpha - 3.00) / 3.00 < 0.05
    assert abs(beta_fit.beta - 1.17) / 1.17 < 0.05

    rng = np.random.default_rng(43)
    weights = rng.integers(1, 101, size=100_000)
    p = logistic_probability(weights, 0.7933, 0.0036)
    decisions = (rng.random(100_000) < p).astype(int)
    logistic_fit = fit_logistic(list(zip(weights.tolist(), decisions.tolist())))
    assert abs(logistic_fit.beta0 - 0.7933) < 0.05
    assert abs(logistic_fit.beta1 - 0.0036) < 0.001

    rng = np.random.default_rng(44)
    samples = sample_power_law(rng, 2.5, 100_000, xmin=5)
    power_fit = fit_power_law(samples, xmin=5)
    assert abs(power_fit.exponent - 2.5) < 0.05


@criterion(7, "empirical power fixtures and gamma_p=0 => gamma_e=0", budget=60.0)
def test_criterion_7_empirical_power():
    b = BallotSet("i1", "s1", HALF,
                  (Vote("A", 1, 3), Vote("B", 1, 3), Vote("C", 0, 4)))
    assert potential_power(b, "A") == 1  # Wp=6, Wn=4, w=3 yes
    b2 = BallotSet("i2", "s1", HALF,
                   (Vote("A", 1, 1), Vote("B", 1, 8), Vote("C", 0, 1)))
    assert potential_power(b2, "A") == 0  # quorum met without the voter
    sole = BallotSet("i3", "s1", HALF, (Vote("A", 1, 1),))
    assert potential_power(sole, "A") == 1
    b3 = BallotSet("i4", "s1", HALF,
                   (Vote("A", 1, 2), Vote("B", 1, 3), Vote("C", 0, 4)))
    assert exercised_power(b3, "A") == 1  # 3/7 fails vs 5/9 passes
    b4 = BallotSet("i5", "s1", HALF,
                   (Vote("A", 0, 2), Vote("B", 1, 5), Vote("C", 0, 2)))
    assert exercised_power(b4, "A") == 0

    rng = np.random.default_rng(99)
    checked = 0
    for _ in range(10_000):
        n = int(rng.integers(1, 10))
        votes = tuple(Vote(f"u{j}", int(rng.integers(0, 2)),
                           int(rng.integers(1, 12))) for j in range(n))
        num = int(rng.integers(1, 8))
        den = int(rng.integers(num + 1, 12))
        ballot = BallotSet("ix", "s1", Fraction(num, den), votes)
        for v in votes:
            if v.decision == 1 and potential_power(ballot, v.voter) == 0:
                assert exercised_power(ballot, v.voter) == 0
                checked += 1
    assert checked > 1000


@criterion(8, "delegation fixtures and conservation on 1000 random snapshots",
           budget=60.0)
def test_criterion_8_delegation_resolution():
    # chain: weight accumulates on the first direct voter
    chain = DelegationSnapshot((
        DelegationEdge("A", "B", "global"),
        DelegationEdge("B", "C", "area", "x"),
    ))
    ew = resolve_weights(chain, "i1", "x", {"C"}, {"A", "B", "C"})
    assert ew.weights == {"C": 3} and not ew.unresolved
    # precedence: issue > area > global
    prec = DelegationSnapshot((
        DelegationEdge("A", "B", "global"),
        DelegationEdge("A", "C", "area", "x"),
        DelegationEdge("A", "D", "issue", "i1"),
    ))
    ew = resolve_weights(prec, "i1", "x", {"B", "C", "D"}, {"A", "B", "C", "D"})
    assert ew.weights == {"B": 1, "C": 1, "D": 2}
    # cycle with no direct voter: both unresolved
    cycle = DelegationSnapshot((
        DelegationEdge("A", "B", "issue", "i1"),
        DelegationEdge("B", "A", "global"),
    ))
    ew = resolve_weights(cycle, "i1", "x", set(), {"A", "B"})
    assert ew.unresolved == {"A", "B"}
    # direct vote overrides the voter's own outgoing edge
    ew = resolve_weights(cycle, "i1", "x", {"B"}, {"A", "B"})
    assert ew.weights == {"B": 2} and not ew.unresolved

    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(2, 12))
        voters = [f"u{j}" for j in range(n)]
        edges = []
        used = set()
        for _ in range(int(rng.integers(0, 2 * n))):
            t = voters[int(rng.integers(n))]
            d = voters[int(rng.integers(n))]
            scope = ("global", "area", "issue")[int(rng.integers(3))]
            scope_id = {"global": None, "area": "x", "issue": "i1"}[scope]
            if t == d or (t, scope) in used:
                continue
            used.add((t, scope))
            edges.append(DelegationEdge(t, d, scope, scope_id))
        direct = {v for v in voters if rng.random() < 0.4}
        ew = resolve_weights(DelegationSnapshot(tuple(edges)), "i1", "x",
                             direct, voters)
        assert sum(ew.weights.values()) + len(ew.unresolved) == n


@criterion(9, "beta2 beats banzhaf and uniform-independent in perplexity "
              "on homogeneous synthetic data", budget=600.0)
def test_criterion_9_evaluation_pipeline():
    config = SynthConfig(users=400, initiatives=600, seed=0)  # >= 500 initiatives,
    # approval drawn per initiative from Beta(3.00, 1.17)
    assert config.model.kind == "beta-homogeneous"
    resolved = resolve_dataset(generate_synthetic(config))
    assert len(resolved.ballots) >= 500
    report = benchmark(resolved, ["banzhaf", "uniform-independent", "beta2"],
                       mc_runs=1_000_000, seed=0)
    perplexity = {r.model: r.perplexity for r in report.rows}
    assert perplexity["beta2"] < perplexity["banzhaf"]
    assert perplexity["beta2"] < perplexity["uniform-independent"]


@criterion(10, "network statistics fixtures")
def test_criterion_10_network_fixtures():
    assert gini([0, 0, 0, 3]) == 0.75
    graph = DelegationGraph.from_edges([("A", "B"), ("B", "A"), ("A", "C")])
    assert reciprocity(graph) == 2 / 3
    triangle = DelegationGraph.from_edges([("A", "B"), ("B", "C"), ("C", "A")])
    assert clustering_coefficient(triangle) == 1.0


@criterion(11, "every CLI command is byte-deterministic", budget=300.0)
def test_criterion_11_cli_determinism(tmp_path):
    data = tmp_path / "data"
    assert cli_main(["synth", "--users", "60", "--initiatives", "40",
                     "--seed", "5", "--out", str(data)]) == 0
    commands = [
        ["synth", "--users", "60", "--initiatives", "40"],
        ["validate", str(data)],
        ["resolve", str(data)],
        ["indices", str(data), "--models", "banzhaf,shapley,beta2",
         "--mc-runs", "1000"],
        ["empirical", str(data)],
        ["fit", "beta", str(data), "--min-votes", "5"],
        ["fit", "logistic", str(data)],
        ["fit", "powerlaw", str(data)],
        ["netstats", str(data)],
        ["evaluate", str(data), "--models",
         "banzhaf,shapley,uniform-independent,uniform-homogeneous,"
         "beta,regression,beta2", "--mc-runs", "1000"],
    ]
    for idx, command in enumerate(commands):
        runs = []
        for attempt in range(2):
            out = tmp_path / f"c{idx}_{attempt}"
            assert cli_main(command + ["--seed", "5", "--out", str(out)]) == 0
            runs.append(out)
        names = sorted(p.name for p in runs[0].iterdir())
        assert names == sorted(p.name for p in runs[1].iterdir()) and names
        for name in names:
            a = (runs[0] / name).read_bytes()
            b = (runs[1] / name).read_bytes()
            assert a == b, f"{command[0]}: {name} differs between runs"
