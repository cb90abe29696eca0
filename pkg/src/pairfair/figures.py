"""Render solve reports and sweep curves to image files for the report command."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .solver import SolveReport, SweepPoint


def render_trajectory(report: SolveReport, out_path: str) -> str:
    """Running-average error and max disparity against iteration count."""
    iters = [t for t, _, _ in report.trajectory]
    errors = [e for _, e, _ in report.trajectory]
    disps = [d for _, _, d in report.trajectory]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(iters, errors, label="training error", color="tab:blue")
    ax.plot(iters, disps, label="max pair disparity", color="tab:red")
    ax.axhline(report.params.gamma, color="gray", linestyle="--",
               linewidth=1, label=f"allowed disparity {report.params.gamma:g}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("running-average value")
    ax.set_title("Dynamics of the averaged classifier")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_curve(points: list[SweepPoint], out_path: str) -> str:
    """Error against gamma, one line per eta value."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    etas = sorted({p.eta for p in points})
    for eta in etas:
        rows = [p for p in points if p.eta == eta and p.ok]
        rows.sort(key=lambda p: p.gamma)
        label = f"eta={eta:g}" if len(etas) > 1 else "error"
        ax.plot([p.gamma for p in rows], [p.error for p in rows],
                marker="o", label=label)
    ax.set_xlabel("allowed disparity (gamma)")
    ax.set_ylabel("training error")
    ax.set_title("Accuracy against fairness budget")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_violations(points: list[SweepPoint], out_path: str) -> str:
    """Max violation and weighted slack across the gamma grid."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    etas = sorted({p.eta for p in points})
    for eta in etas:
        rows = [p for p in points if p.eta == eta and p.ok]
        rows.sort(key=lambda p: p.gamma)
        suffix = f" (eta={eta:g})" if len(etas) > 1 else ""
        ax.plot([p.gamma for p in rows], [p.max_violation for p in rows],
                marker="o", label="max violation" + suffix)
        ax.plot([p.gamma for p in rows], [p.fairness_loss for p in rows],
                marker="s", linestyle="--", label="fairness loss" + suffix)
    ax.set_xlabel("allowed disparity (gamma)")
    ax.set_ylabel("value")
    ax.set_title("Constraint violation across the sweep")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_report_figures(report: SolveReport | None,
                          points: list[SweepPoint] | None,
                          out_dir: str) -> list[str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if report is not None:
        written.append(render_trajectory(report, str(out / "trajectory.png")))
    if points:
        written.append(render_curve(points, str(out / "pareto.png")))
        written.append(render_violations(points, str(out / "violations.png")))
    return written
