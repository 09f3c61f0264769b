"""Figure rendering for the CLI report paths.

Every plotting command writes a PNG next to its CSV; the CSV stays the
data contract, figures are the quick-look companion. Rendering is
headless (Agg) so these work in batch jobs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .theory import degree_pmf_uc, size_pmf  # noqa: E402


def save_series_plot(rows, path, expected_size=None, expected_degree=None):
    """Population size, invader count, and mean degree against time."""
    ts = [r[0] for r in rows]
    fig, (ax_n, ax_k) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
    ax_n.plot(ts, [r[1] for r in rows], lw=0.8, label="N(t)")
    ax_n.plot(ts, [r[2] for r in rows], lw=0.8, label="invader count")
    if expected_size is not None:
        ax_n.axhline(expected_size, ls="--", c="k", lw=0.8,
                     label=f"expected size {expected_size:g}")
    ax_n.set_ylabel("individuals")
    ax_n.legend(loc="best", fontsize=8)
    ax_k.plot(ts, [r[3] for r in rows], lw=0.8, c="tab:green")
    if expected_degree is not None:
        ax_k.axhline(expected_degree, ls="--", c="k", lw=0.8)
    ax_k.set_xlabel("t")
    ax_k.set_ylabel("mean degree")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_stationary_plot(stats, lam, mu, m, mechanism, path):
    """Sampled size/degree histograms with their stationary laws overlaid."""
    fig, (ax_n, ax_k) = plt.subplots(1, 2, figsize=(10, 4))

    total = sum(stats.size_histogram.values())
    if total:
        xs = sorted(stats.size_histogram)
        ax_n.bar(xs, [stats.size_histogram[x] / total for x in xs],
                 width=1.0, alpha=0.6, label="sampled")
        ax_n.plot(xs, [size_pmf(lam, mu, x) for x in xs], "k-", lw=1.2,
                  label="stationary law")
    ax_n.set_xlabel("N")
    ax_n.set_ylabel("frequency")
    ax_n.legend(fontsize=8)

    total_k = sum(stats.degree_histogram.values())
    if total_k:
        xs = sorted(stats.degree_histogram)
        ax_k.bar(xs, [stats.degree_histogram[x] / total_k for x in xs],
                 width=1.0, alpha=0.6, color="tab:green", label="sampled")
        if mechanism == "uniform":
            ax_k.plot(xs, [degree_pmf_uc(m, x) for x in xs], "k-", lw=1.2,
                      label="stationary law")
    ax_k.set_xlabel("degree")
    ax_k.set_ylabel("frequency")
    ax_k.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sweep_plot(rows, axes, path, threshold=None, baseline=None):
    """Fixation probability with binomial error bars against the last swept
    axis, one line per combination of the remaining axes."""
    names = list(axes)
    x_name = names[-1]
    group_names = names[:-1]
    groups: dict[tuple, list] = {}
    for row in rows:
        key = tuple(row.cell[g] for g in group_names)
        groups.setdefault(key, []).append(row)

    fig, ax = plt.subplots(figsize=(7, 5))
    for key, group in sorted(groups.items(), key=lambda kv: str(kv[0])):
        xs = [row.cell[x_name] for row in group]
        ys = [row.estimate.p_hat for row in group]
        es = [row.estimate.se for row in group]
        label = ", ".join(f"{g}={v}" for g, v in zip(group_names, key)) or None
        ax.errorbar(xs, ys, yerr=es, marker="^", ms=4, lw=1.0,
                    capsize=2, label=label)
    if threshold is not None:
        ax.axvline(threshold, ls=":", c="k", lw=1.0,
                   label=f"critical {x_name}={threshold:.3g}")
    if baseline is not None:
        ax.axhline(baseline, ls="--", c="gray", lw=0.8)
    ax.set_xlabel(x_name)
    ax.set_ylabel("fixation probability")
    if group_names or threshold is not None:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_fixation_plot(estimate, path):
    """Outcome composition of one replicate batch."""
    labels = ("pure_first", "pure_second", "extinct", "timeout")
    counts = [getattr(estimate, name) for name in labels]
    fig, ax = plt.subplots(figsize=(5, 4))
    bars = ax.bar(labels, counts, color=["tab:orange", "tab:blue", "gray", "tab:red"])
    ax.bar_label(bars, fontsize=8)
    ax.set_ylabel(f"replicates (of {estimate.replicates})")
    ax.set_title(f"p_hat = {estimate.p_hat:.4f} +- {estimate.se:.4f}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
