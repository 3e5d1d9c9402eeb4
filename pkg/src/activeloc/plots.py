"""Static vector-graphics renderings of a trace file.

Everything here is a pure function of the trace (plus the map file it names),
so re-rendering the same trace produces byte-identical SVGs; matplotlib's
hash salt and date metadata are pinned for that reason.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.patches import Polygon as MplPolygon

from .sim import TraceLog
from .world import Environment

matplotlib.rcParams["svg.hashsalt"] = "activeloc"

_SAVE_KW = {"format": "svg", "metadata": {"Date": None}}


def _draw_map(ax, env: Environment) -> None:
    xmin, ymin, xmax, ymax = env.bounds
    ax.add_patch(MplPolygon([(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)],
                            fill=False, edgecolor="k", linewidth=1.2))
    for poly in env.obstacles:
        ax.add_patch(MplPolygon(poly.vertices, closed=True, facecolor="0.55",
                                edgecolor="0.3", linewidth=0.5))
    if len(env.landmarks):
        ax.scatter(env.landmark_xy[:, 0], env.landmark_xy[:, 1], marker="D",
                   s=18, c="k", zorder=3)
        for lm in env.landmarks:
            ax.annotate(str(lm.id), (lm.x, lm.y), fontsize=5,
                        textcoords="offset points", xytext=(2, 2))
    ax.set_aspect("equal")
    ax.set_xlim(xmin - 0.5, xmax + 0.5)
    ax.set_ylim(ymin - 0.5, ymax + 0.5)


def plot_trajectories(trace: TraceLog, env: Environment, out_path) -> None:
    """Map with the ground-truth path and every mode's mean trajectory."""
    fig, ax = plt.subplots(figsize=(9, 6))
    _draw_map(ax, env)
    steps = trace.steps()
    if steps:
        gt = [(s["truth"][0], s["truth"][1]) for s in steps]
        ax.plot(*zip(*gt), "-", color="tab:blue", linewidth=1.5, label="ground truth")
        ax.plot(gt[0][0], gt[0][1], "o", color="tab:green", label="start")
        ax.plot(gt[-1][0], gt[-1][1], "s", color="tab:red", label="end")
        segments: dict[int, list] = {}
        for s in steps:
            for i, m in enumerate(s["modes"]):
                segments.setdefault(i, []).append((m["mu"][0], m["mu"][1]))
        for i, pts in segments.items():
            ax.plot(*zip(*pts), ":", linewidth=0.8, alpha=0.7)
        ax.legend(loc="upper right", fontsize=7)
    ax.set_title("trajectories")
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)


def plot_weights(trace: TraceLog, out_path) -> None:
    """Mode weights against time (one polyline per surviving slot index)."""
    fig, ax = plt.subplots(figsize=(8, 4))
    steps = trace.steps()
    if steps:
        max_modes = max(len(s["modes"]) for s in steps)
        for i in range(max_modes):
            ts = [s["t"] for s in steps if i < len(s["modes"])]
            ws = [s["modes"][i]["w"] for s in steps if i < len(s["modes"])]
            ax.plot(ts, ws, linewidth=0.9)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("mode weight")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title("mixture weights")
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)


def plot_mode_count(trace: TraceLog, out_path) -> None:
    fig, ax = plt.subplots(figsize=(8, 3))
    steps = trace.steps()
    if steps:
        ax.step([s["t"] for s in steps], [len(s["modes"]) for s in steps],
                where="post", color="tab:purple")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("modes")
    ax.set_title("hypothesis count")
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)


def render_all(trace: TraceLog, env: Environment, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = [
        (out_dir / "trajectories.svg", lambda p: plot_trajectories(trace, env, p)),
        (out_dir / "weights.svg", lambda p: plot_weights(trace, p)),
        (out_dir / "mode_count.svg", lambda p: plot_mode_count(trace, p)),
    ]
    for path, fn in outputs:
        fn(path)
    return [p for p, _ in outputs]
