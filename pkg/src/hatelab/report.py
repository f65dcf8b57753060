"""Experiment report artifacts.

One cross-validation run produces a small bundle of files in an output
directory:

- ``report.json``   canonical record (config, per-fold matrices, metrics)
- ``report.txt``    aligned benchmark-style table plus class rates
- ``fold_metrics.csv``  one delimited row per fold
- ``confusions.txt``    per-fold and pooled matrices, human readable
- ``loss_curves.png``, ``confusion_matrix.png``  rendered figures

The JSON file is the machine interface: the comparison command reads the
per-fold matrices back out of it.  Everything is written without
timestamps so a fixed seed reproduces every artifact byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .evaluate import CvResult, class_rates
from .models import ModelConfig
from .significance import SystemFolds

REPORT_FILES = (
    "report.json",
    "report.txt",
    "fold_metrics.csv",
    "confusions.txt",
    "loss_curves.png",
    "confusion_matrix.png",
)


def report_from_cv(name: str, config: ModelConfig, cv: CvResult, seed: int) -> dict:
    """Flatten a CV result into the JSON-ready report structure."""
    rates = class_rates(np.asarray(cv.pooled_confusion))
    return {
        "system": name,
        "config": config.to_dict(),
        "seed": seed,
        "k_folds": len(cv.folds),
        "label_names": list(cv.label_names),
        "folds": [
            {
                "fold": f.fold,
                "confusion": [list(row) for row in f.confusion.tolist()],
                "accuracy": float(f.accuracy),
                "weighted_f1": float(f.weighted_f1),
                "loss_history": [float(x) for x in f.loss_history],
            }
            for f in cv.folds
        ],
        "mean_accuracy": float(cv.mean_accuracy),
        "mean_weighted_f1": float(cv.mean_weighted_f1),
        "pooled_confusion": [list(row) for row in np.asarray(cv.pooled_confusion).tolist()],
        "pooled_accuracy": float(cv.pooled_accuracy),
        "pooled_weighted_f1": float(cv.pooled_weighted_f1),
        "class_rates": [
            {"label": label, **rate}
            for label, rate in zip(cv.label_names, rates)
        ],
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


_REQUIRED_KEYS = (
    "system", "config", "seed", "k_folds", "label_names", "folds",
    "mean_accuracy", "mean_weighted_f1", "pooled_confusion",
    "pooled_accuracy", "pooled_weighted_f1",
)


def validate_report(report: dict) -> None:
    """Structural check for a report dict (loaded or freshly built)."""
    missing = [key for key in _REQUIRED_KEYS if key not in report]
    if missing:
        raise ValueError(f"report missing keys: {missing}")
    k = len(report["label_names"])
    if k < 2:
        raise ValueError("report needs at least two labels")
    if len(report["folds"]) != report["k_folds"]:
        raise ValueError("fold list length disagrees with k_folds")
    for entry in report["folds"]:
        cm = entry.get("confusion")
        if cm is None or len(cm) != k or any(len(row) != k for row in cm):
            raise ValueError(f"fold {entry.get('fold')} confusion is not {k}x{k}")


def load_report(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        report = json.load(fh)
    validate_report(report)
    return report


def system_folds_from_report(report: dict) -> SystemFolds:
    return SystemFolds.from_lists(
        report["system"], [entry["confusion"] for entry in report["folds"]]
    )


def render_table(report: dict) -> str:
    """Benchmark-style text table: one system row, metrics as percentages.

    F1 is shown both as the mean of fold scores and as the score of the
    summed matrix; published tables do not say which convention they use.
    """
    headers = ("Model", "Accuracy", "F1 (fold mean)", "F1 (pooled)")
    row = (
        report["system"],
        f"{100 * report['mean_accuracy']:.2f}",
        f"{100 * report['mean_weighted_f1']:.2f}",
        f"{100 * report['pooled_weighted_f1']:.2f}",
    )
    widths = [max(len(h), len(v)) for h, v in zip(headers, row)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
        "  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip(),
        "",
        f"Folds: {report['k_folds']}   Seed: {report['seed']}",
        "",
        "Per-class rates on the pooled matrix (percent):",
    ]
    label_w = max(len("Class"), max(len(r["label"]) for r in report["class_rates"]))
    lines.append(f"{'Class'.ljust(label_w)}  {'TP':>7}  {'FP':>7}  {'FN':>7}")
    for r in report["class_rates"]:
        lines.append(
            f"{r['label'].ljust(label_w)}  {r['tp']:>7.2f}  {r['fp']:>7.2f}  {r['fn']:>7.2f}"
        )
    return "\n".join(lines) + "\n"


def render_fold_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["fold", "n", "accuracy", "weighted_f1"])
    for entry in report["folds"]:
        n = int(np.asarray(entry["confusion"]).sum())
        writer.writerow([entry["fold"], n, repr(entry["accuracy"]),
                         repr(entry["weighted_f1"])])
    pooled_n = int(np.asarray(report["pooled_confusion"]).sum())
    writer.writerow(["pooled", pooled_n, repr(report["pooled_accuracy"]),
                     repr(report["pooled_weighted_f1"])])
    return buf.getvalue()


def _render_matrix(title: str, matrix: list[list[int]], labels: list[str]) -> list[str]:
    width = max(
        max(len(lab) for lab in labels),
        max(len(str(v)) for row in matrix for v in row),
    )
    lines = [title, "  gold rows / predicted columns"]
    header = " " * (width + 2) + "  ".join(lab.rjust(width) for lab in labels)
    lines.append(header)
    for lab, row in zip(labels, matrix):
        cells = "  ".join(str(v).rjust(width) for v in row)
        lines.append(f"{lab.rjust(width)}  {cells}")
    return lines


def render_confusions(report: dict) -> str:
    labels = report["label_names"]
    blocks: list[str] = []
    for entry in report["folds"]:
        blocks.extend(_render_matrix(f"fold {entry['fold']}", entry["confusion"], labels))
        blocks.append("")
    blocks.extend(_render_matrix("pooled", report["pooled_confusion"], labels))
    return "\n".join(blocks) + "\n"


# savefig would stamp a library-version PNG comment; suppress it so reruns
# of the same seed produce identical bytes
_PNG_METADATA = {"Software": None}


def save_loss_figure(report: dict, path: str | Path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=100)
    for entry in report["folds"]:
        epochs = range(1, len(entry["loss_history"]) + 1)
        ax.plot(epochs, entry["loss_history"], marker="o", label=f"fold {entry['fold']}")
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean training loss")
    ax.set_title(report["system"])
    ax.legend(loc="upper right", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="png", metadata=_PNG_METADATA)
    plt.close(fig)


def save_confusion_figure(report: dict, path: str | Path) -> None:
    matrix = np.asarray(report["pooled_confusion"])
    labels = report["label_names"]
    fig, ax = plt.subplots(figsize=(5.0, 4.5), dpi=100)
    image = ax.imshow(matrix, cmap="Blues")
    fig.colorbar(image, ax=ax, shrink=0.8)
    ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right")
    ax.set_yticks(range(len(labels)), labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("gold")
    ax.set_title(f"{report['system']} pooled confusion")
    threshold = matrix.max() / 2 if matrix.max() > 0 else 0
    for i in range(len(labels)):
        for j in range(len(labels)):
            color = "white" if matrix[i, j] > threshold else "black"
            ax.text(j, i, str(int(matrix[i, j])), ha="center", va="center",
                    color=color, fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="png", metadata=_PNG_METADATA)
    plt.close(fig)


def write_report(outdir: str | Path, report: dict, force: bool = False) -> list[Path]:
    """Write the full artifact bundle; refuses to overwrite without force."""
    validate_report(report)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    targets = [outdir / name for name in REPORT_FILES]
    if not force:
        existing = [str(p) for p in targets if p.exists()]
        if existing:
            raise FileExistsError(
                f"refusing to overwrite {existing}; pass force to allow"
            )
    (outdir / "report.json").write_text(dumps_report(report), encoding="utf-8")
    (outdir / "report.txt").write_text(render_table(report), encoding="utf-8")
    (outdir / "fold_metrics.csv").write_text(render_fold_csv(report), encoding="utf-8")
    (outdir / "confusions.txt").write_text(render_confusions(report), encoding="utf-8")
    save_loss_figure(report, outdir / "loss_curves.png")
    save_confusion_figure(report, outdir / "confusion_matrix.png")
    return targets
