"""Report rendering: JSON + CSV metric tables and matplotlib figures."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metrics import MetricReport  # noqa: E402


def write_metric_report(report: MetricReport, out_dir: str | Path) -> Path:
    """Write report.json, report.csv, and a metric bar figure."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = report.to_json()
    (out_dir / "report.json").write_text(json.dumps(data, indent=2) + "\n")

    with (out_dir / "report.csv").open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["metric", "value"])
        for k, v in data.items():
            if v is not None:
                writer.writerow([k, v])

    present = {k: v for k, v in data.items()
               if v is not None and k != "n_samples"}
    if present:
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.bar(list(present.keys()), list(present.values()), color="#4878cf")
        ax.set_ylabel("value")
        ax.set_title(f"evaluation metrics (n={report.n_samples})")
        fig.tight_layout()
        fig.savefig(out_dir / "metrics.png", dpi=150)
        plt.close(fig)
    return out_dir / "report.json"


def write_sample_grid(samples, out_path: str | Path, max_rows: int = 8) -> None:
    """Side-by-side generated vs target strips."""
    samples = samples[:max_rows]
    if not samples:
        return
    fig, axes = plt.subplots(len(samples), 2, figsize=(8, 1.2 * len(samples)),
                             squeeze=False)
    for row, (gen, ref) in enumerate(samples):
        axes[row][0].imshow(gen)
        axes[row][1].imshow(ref)
        for ax in axes[row]:
            ax.axis("off")
    axes[0][0].set_title("generated")
    axes[0][1].set_title("target")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def write_training_curves(log_path: str | Path, out_path: str | Path) -> None:
    """Loss curves from the JSON-lines training log."""
    steps, series = [], {}
    with Path(log_path).open() as f:
        for line in f:
            d = json.loads(line)
            steps.append(d["step"])
            for k, v in d.items():
                if k != "step":
                    series.setdefault(k, []).append(v)
    if not steps:
        return
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for k in ("combined", "l_rec", "l_R", "l_D_g", "l_D_d", "l_cyc"):
        if k in series:
            ax.plot(steps, series[k], label=k, linewidth=1)
    ax.set_xlabel("step")
    ax.set_ylabel("loss")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
