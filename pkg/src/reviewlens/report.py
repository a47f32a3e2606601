"""Run-directory reporting: summary CSV tables plus static figures
(F1 ranges per category, learning curves, prevalence histograms)."""

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _read_results(run_dir):
    path = Path(run_dir) / "results.csv"
    if not path.exists():
        raise FileNotFoundError(path)
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _read_manifest(run_dir):
    path = Path(run_dir) / "manifest.json"
    if not path.exists():
        raise FileNotFoundError(path)
    return json.loads(path.read_text(encoding="utf-8"))


def plot_f1_ranges(rows, out_path, title="Macro F1 per category"):
    """One marker per category at the mean, whiskers to min/max."""
    categories = [r[0] for r in rows]
    means = [float(r[1]) for r in rows]
    mins = [float(r[2]) for r in rows]
    maxs = [float(r[3]) for r in rows]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    xs = range(len(categories))
    ax.vlines(xs, mins, maxs, color="grey", linewidth=1)
    ax.scatter(xs, mins, color="grey", s=12, zorder=3)
    ax.scatter(xs, maxs, color="grey", s=12, zorder=3)
    ax.scatter(xs, means, color="tab:blue", s=30, zorder=4)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(categories, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("macro F1")
    ax.set_ylim(0, 1.05)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_learning_curves(rows, out_path, title="F1 by training-set size"):
    """rows: (train_size, category, macro F1)."""
    by_category = {}
    for size, category, score in rows:
        by_category.setdefault(category, []).append(
            (int(size), float(score))
        )
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for category, points in sorted(by_category.items()):
        points.sort()
        ax.plot([p[0] for p in points], [p[1] for p in points],
                marker="o", markersize=3, linewidth=1, label=category)
    ax.set_xlabel("training sentences")
    ax.set_ylabel("macro F1")
    ax.set_ylim(0, 1.05)
    ax.set_title(title)
    if len(by_category) <= 12:
        ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_prevalence_histogram(shares, out_path, category_name,
                              bin_width=0.05):
    """Histogram of per-review shares in fixed-width bins."""
    n_bins = int(round(1 / bin_width))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(shares, bins=[i * bin_width for i in range(n_bins + 1)],
            color="tab:blue", edgecolor="white")
    ax.set_xlabel("share of review sentences")
    ax.set_ylabel("reviews")
    ax.set_title(f"Per-review prevalence: {category_name}")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_report(run_dir, out_dir=None):
    """Figures and a summary table for a finished run directory; the
    run's manifest selects the layout."""
    run = Path(run_dir)
    out = Path(out_dir) if out_dir else run
    out.mkdir(parents=True, exist_ok=True)
    manifest = _read_manifest(run)
    header, rows = _read_results(run)
    command = manifest.get("command", "")
    written = []
    if command in ("cv", "compare-encoders"):
        written.append(plot_f1_ranges(rows, out / "f1_ranges.png"))
    elif command == "ablate":
        written.append(plot_learning_curves(rows, out / "learning_curve.png"))
    elif command == "prevalence":
        by_category = {}
        for row in rows:
            if row[1] != "":
                by_category.setdefault(row[0], []).append(float(row[1]))
        for category, shares in sorted(by_category.items()):
            written.append(plot_prevalence_histogram(
                shares, out / f"prevalence_{category}.png", category
            ))
    summary = out / "summary.csv"
    with open(summary, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    written.append(summary)
    return written
