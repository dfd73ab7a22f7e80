"""Matplotlib rendering of the report data the CLI writes.

Every figure function takes the already-computed report objects and a
target path, renders with the Agg backend and returns the path.  Output
is deterministic: no timestamps or environment-dependent metadata end up
in the files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .empirical import EmpiricalCurves
from .evaluation import EvaluationReport
from .fitting import BetaFit, LogisticFit, PowerLawFit

_DPI = 130


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def power_curves_figure(curves: EmpiricalCurves, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for curve, label, marker in ((curves.potential, "potential power", "o"),
                                 (curves.exercised, "exercised power", "s")):
        ws = sorted(curve.values)
        ax.plot(ws, [curve.values[w] for w in ws], marker=marker, ms=3,
                lw=1, label=label)
    ax.set_xlabel("voting weight")
    ax.set_ylabel("mean power")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def learning_curve_figure(curves: EmpiricalCurves, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ks = [p.k for p in curves.learning]
    direct = [p.direct_rate for p in curves.learning]
    effective = [p.effective_rate for p in curves.learning]
    ax.plot(ks, direct, lw=1, label="direct votes")
    ax.plot(ks, effective, lw=1, label="incl. delegated votes")
    low = [p.k for p in curves.learning if p.direct_n < 30]
    if low:
        ax.axvline(min(low), color="grey", ls=":", lw=1,
                   label="< 30 direct voters")
    ax.set_xlabel("k-th vote of a user")
    ax.set_ylabel("approval rate")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def approval_by_weight_figure(curves: EmpiricalCurves, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ws = [b.weight for b in curves.approval_by_weight]
    ax.plot(ws, [b.approval_per_vote for b in curves.approval_by_weight],
            marker="o", ms=3, lw=1, label="approval rate (per vote)")
    agree = [(b.weight, b.agreement) for b in curves.approval_by_weight
             if b.agreement is not None]
    if agree:
        ax.plot([w for w, _ in agree], [a for _, a in agree], marker="s",
                ms=3, lw=1, label="agreement rate")
    ax.set_xlabel("voting weight")
    ax.set_ylabel("rate")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def netstats_figure(rows, path: Path) -> Path:
    fig, axes = plt.subplots(4, 1, figsize=(7, 9), sharex=True)
    dates = [r.date for r in rows]
    axes[0].plot(dates, [r.edges_added for r in rows], lw=1, label="added")
    axes[0].plot(dates, [r.edges_removed for r in rows], lw=1, label="removed")
    axes[0].set_ylabel("delegations / day")
    axes[0].legend()
    axes[1].plot(dates, [r.indegree_gini for r in rows], lw=1)
    axes[1].set_ylabel("indegree Gini")
    axes[2].plot(dates, [r.reciprocity for r in rows], lw=1)
    axes[2].set_ylabel("reciprocity")
    axes[3].plot(dates, [r.largest_component for r in rows], lw=1,
                 label="largest component")
    axes[3].plot(dates, [r.clustering for r in rows], lw=1, label="clustering")
    axes[3].set_ylabel("LCC / clustering")
    axes[3].legend()
    fig.autofmt_xdate()
    fig.tight_layout()
    return _save(fig, path)


def evaluation_figure(report: EvaluationReport, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    ws = sorted(report.measured.values)
    ax.plot(ws, [report.measured.values[w] for w in ws], "k.", ms=5,
            label="measured potential power")
    for name, curve in report.predicted.items():
        cw = sorted(curve.values)
        ax.plot(cw, [curve.values[w] for w in cw], lw=1, label=name)
    ax.set_xlabel("voting weight")
    ax.set_ylabel("mean power / index")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def beta_fit_figure(fit: BetaFit, rates: list[float], path: Path) -> Path:
    import numpy as np
    from scipy.stats import beta as beta_dist

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(rates, bins=20, range=(0, 1), density=True, alpha=0.6,
            label="per-user approval rates")
    x = np.linspace(0.001, 0.999, 400)
    ax.plot(x, beta_dist.pdf(x, fit.alpha, fit.beta), "--", lw=1.5,
            label=f"Beta({fit.alpha:.2f}, {fit.beta:.2f})")
    ax.set_xlabel("approval rate")
    ax.set_ylabel("density")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def logistic_fit_figure(fit: LogisticFit, by_weight: dict[int, float],
                        path: Path) -> Path:
    import numpy as np

    fig, ax = plt.subplots(figsize=(6, 4))
    ws = sorted(by_weight)
    ax.plot(ws, [by_weight[w] for w in ws], "o", ms=3,
            label="approval rate per weight")
    x = np.arange(1, max(ws) + 1)
    ax.plot(x, fit.predict(x), "--", lw=1.5,
            label=f"logistic({fit.beta0:.4f}, {fit.beta1:.4f})")
    ax.set_xlabel("voting weight")
    ax.set_ylabel("approval probability")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def power_law_figure(fit: PowerLawFit, samples: list[int], path: Path) -> Path:
    import numpy as np

    fig, ax = plt.subplots(figsize=(6, 4))
    xs = np.sort(np.asarray(samples))
    ccdf = 1.0 - np.arange(len(xs)) / len(xs)
    ax.loglog(xs, ccdf, ".", ms=3, label="empirical CCDF")
    grid = np.logspace(np.log10(fit.xmin), np.log10(max(xs.max(), fit.xmin + 1)), 50)
    scale = float(np.mean(xs >= fit.xmin))
    ax.loglog(grid, scale * (grid / (fit.xmin - 0.5)) ** (1 - fit.exponent), "--",
              lw=1.5, label=f"exponent {fit.exponent:.2f}")
    ax.set_xlabel("value")
    ax.set_ylabel("P(X >= x)")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def indices_figure(rows: list[dict], path: Path) -> Path:
    """Mean index value per weight, per model, from the indices table."""
    by_model: dict[str, dict[int, list[float]]] = {}
    for r in rows:
        by_model.setdefault(r["model"], {}).setdefault(int(r["weight"]), []).append(
            float(r["value"]))
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for model in sorted(by_model):
        buckets = by_model[model]
        ws = sorted(buckets)
        ax.plot(ws, [sum(buckets[w]) / len(buckets[w]) for w in ws],
                marker="o", ms=3, lw=1, label=model)
    ax.set_xlabel("voting weight")
    ax.set_ylabel("mean index value")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)
