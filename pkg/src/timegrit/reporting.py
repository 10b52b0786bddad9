"""CSV readers/writers and figure rendering for benchmark outputs.

Solve subcommands emit only delimited text; figures are rendered afterwards
by the report path from those files, one PNG per CSV kind.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SEQUENTIAL_CSV = "sequential_steps.csv"
RESIDUAL_CSV = "residual_history.csv"
WORK_CSV = "work_model.csv"
CONFIG_JSON = "effective_config.json"
COMPARE_JSON = "compare_summary.json"


def write_sequential_csv(path, times, values) -> None:
    """Per-step trace: time, Euclidean norm and max magnitude of the state."""
    values = np.asarray(values)
    with open(path, "w") as fh:
        fh.write("step,t,state_norm2,state_max_abs\n")
        for i, t in enumerate(times):
            v = values[i]
            fh.write(f"{i},{t:.16e},{np.linalg.norm(v):.16e},{np.max(np.abs(v)):.16e}\n")


def read_csv_columns(path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        return {}
    return {key: np.array([float(row[key]) for row in rows]) for key in rows[0]}


def _new_axes(xlabel, ylabel):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def render_convergence_figure(csv_paths, out_path, labels=None) -> Path:
    fig, ax = _new_axes("iteration", "residual 2-norm")
    for idx, path in enumerate(csv_paths):
        cols = read_csv_columns(path)
        label = labels[idx] if labels else Path(path).stem
        ax.semilogy(cols["iteration"], cols["residual_norm"], marker="o", label=label)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def render_speedup_figure(csv_path, out_path) -> Path:
    cols = read_csv_columns(csv_path)
    fig, ax = _new_axes("workers", "estimated speedup")
    ax.semilogx(cols["num_workers"], cols["estimated_speedup"], marker="s", base=2)
    ax.axhline(1.0, color="grey", linestyle="--", linewidth=1)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def render_sequential_figure(csv_path, out_path) -> Path:
    cols = read_csv_columns(csv_path)
    fig, ax = _new_axes("t [s]", "state norm")
    ax.plot(cols["t"], cols["state_norm2"], linewidth=0.8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def render_report(out_dir) -> list[Path]:
    """Render every known CSV in `out_dir` to a PNG next to it."""
    out_dir = Path(out_dir)
    produced = []
    residual_csvs = sorted(out_dir.glob("residual_history*.csv"))
    if residual_csvs:
        produced.append(render_convergence_figure(
            residual_csvs, out_dir / "convergence.png",
            labels=[p.stem.replace("residual_history", "run") for p in residual_csvs]))
    work_csv = out_dir / WORK_CSV
    if work_csv.exists():
        produced.append(render_speedup_figure(work_csv, out_dir / "speedup.png"))
    seq_csv = out_dir / SEQUENTIAL_CSV
    if seq_csv.exists():
        produced.append(render_sequential_figure(seq_csv, out_dir / "sequential.png"))
    return produced
