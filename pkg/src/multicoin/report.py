"""Figure and CSV rendering for the evaluation commands.

Evaluation runs emit three artifacts side by side: the report JSON, a CSV
with one row per scored item, and a PNG figure. Figures render through the
Agg backend so headless runs work, and PNG metadata is pinned so repeated
runs produce identical bytes.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .media_io import FlowField
from .metrics import MotionReport
from .trajectory import TrajectorySet, track_points

_SAVE_KW = {"dpi": 100, "metadata": {"Software": "multicoin"}}


def write_motion_csv(report: MotionReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "frechet"])
        for tid, score in report.per_trajectory:
            writer.writerow([tid, repr(score)])
        writer.writerow(["mean", repr(report.mean)])


def write_motion_figure(
    traj_set: TrajectorySet, generated_flows: list[FlowField], path
) -> None:
    """Overlay of input paths (solid) and re-tracked paths (dashed)."""
    seeds = [(float(tr.xy[0, 0]), float(tr.xy[0, 1])) for tr in traj_set.trajectories]
    retracked = track_points(generated_flows, seeds)
    fig, ax = plt.subplots(figsize=(6, 6 * traj_set.height / max(traj_set.width, 1)))
    for tr, rt in zip(traj_set.trajectories, retracked.trajectories):
        ax.plot(tr.xy[:, 0], tr.xy[:, 1], "-", linewidth=1.5, label=f"input {tr.id}")
        ax.plot(rt.xy[:, 0], rt.xy[:, 1], "--", linewidth=1.2)
    ax.set_xlim(0, traj_set.width - 1)
    ax.set_ylim(traj_set.height - 1, 0)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("input vs re-tracked trajectories")
    if traj_set.trajectories:
        ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def write_ssim_csv(values: list[float], mean: float, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "ssim"])
        for i, v in enumerate(values):
            writer.writerow([i, repr(v)])
        writer.writerow(["mean", repr(mean)])


def write_ssim_figure(values: list[float], path) -> None:
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot(range(len(values)), values, "o-", linewidth=1.2)
    ax.set_xlabel("frame")
    ax.set_ylabel("ssim")
    ax.set_ylim(min(0.0, min(values)) - 0.05, 1.05)
    ax.set_title("per-frame structural similarity")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
