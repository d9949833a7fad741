"""Figures regenerated from harness CSV tables."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .harness import AuditRow, SweepRow, TraceRow, final_iterations, read_csv, summarize  # noqa: E402

plt.rcParams.update({
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
})


def plot_sweep(rows, path, value="rotation_error_rad"):
    """Median and interquartile band of ``value`` against force noise, per method."""
    stats = summarize(rows, value)
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    for method in dict.fromkeys(r.method for r in rows):
        keys = sorted(k for k in stats if k[0] == method)
        x = np.array([k[1] for k in keys])
        med = np.array([stats[k].median for k in keys])
        lo = np.array([stats[k].q25 for k in keys])
        hi = np.array([stats[k].q75 for k in keys])
        line, = ax.loglog(x, med, marker="o", ms=3, label=method)
        ax.fill_between(x, lo, hi, color=line.get_color(), alpha=0.2, lw=0)
    ax.set_xlabel("force noise std [N]")
    ax.set_ylabel(value.replace("_", " "))
    ax.legend()
    fig.savefig(path)
    plt.close(fig)


def plot_trace(rows, path):
    """Error metrics against iteration index, one thin line per repetition."""
    metrics = ("rotation_error_rad", "gravity_rel_error", "gravity_direction_error_rad")
    ok = [r for r in rows if r.status == "ok"]
    runs = {}
    for r in ok:
        runs.setdefault((r.noise_std, r.repetition), []).append(r)
    fig, axes = plt.subplots(1, 3, figsize=(9, 2.8), sharex=True)
    for ax, metric in zip(axes, metrics):
        for run in runs.values():
            it = [r.iteration for r in run]
            val = [max(getattr(r, metric), 1e-17) for r in run]
            ax.semilogy(it, val, color="C0", alpha=0.15, lw=0.8)
        final = [max(getattr(r, metric), 1e-17) for r in final_iterations(ok)]
        if final:
            ax.axhline(np.median(final), color="C3", lw=1, label="final median")
        ax.set_title(metric.replace("_", " "))
        ax.set_xlabel("iteration")
    axes[0].legend()
    fig.savefig(path)
    plt.close(fig)


def plot_audit(rows, path):
    """Distribution of pairwise rotation disagreement for each method pair."""
    pairs = {}
    for r in rows:
        if r.status == "ok":
            pairs.setdefault(f"{r.method_a}/{r.method_b}", []).append(
                max(r.rotation_disagreement_rad, 1e-17))
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    labels = list(pairs)
    ax.boxplot([np.log10(pairs[k]) for k in labels])
    ax.set_xticks(range(1, len(labels) + 1), labels)
    ax.set_ylabel("log10 rotation disagreement [rad]")
    fig.savefig(path)
    plt.close(fig)


def plot_rows(rows, path):
    kind = type(rows[0])
    if kind is SweepRow:
        plot_sweep(rows, path)
    elif kind is TraceRow:
        plot_trace(rows, path)
    elif kind is AuditRow:
        plot_audit(rows, path)
    else:
        raise TypeError(f"cannot plot rows of type {kind.__name__}")


def plot_csv(csv_path, path):
    plot_rows(read_csv(csv_path), path)
